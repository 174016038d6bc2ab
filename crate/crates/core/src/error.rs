use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("{0} is not a prime below 2^62")]
    NotPrime(u64),
    #[error("binomial table overflow: n = {n} exceeds n_max = {n_max}")]
    TableOverflow { n: usize, n_max: usize },
    #[error("inconsistent residues: {0}")]
    Inconsistent(String),
    #[error("table dependency missing: T_{{d-1}}({p},{q}) not available")]
    MissingEntry { p: usize, q: usize },
    #[error("bad prime {0}: non-invertible denominator")]
    BadPrime(u64),
    #[error("series too short: need {needed} terms, have {have}")]
    SeriesTooShort { needed: usize, have: usize },
    #[error("ODE formula fit failed: {0}")]
    FitFailure(String),
    #[error("no feasible (Q,D) pair in range")]
    EmptyRange,
    #[error("recurrence leading polynomial vanishes at n = {0}")]
    SingularIndex(usize),
    #[error("extension disagrees with known coefficient at n = {0}")]
    ExtensionMismatch(usize),
    #[error("formula inconsistency: expected f = 1 at minimal point, found f = {0}")]
    FormulaInconsistent(usize),
    #[error("reconstruction needs more primes ({0} used)")]
    NeedMorePrimes(usize),
    #[error("verification failed: {0}")]
    VerificationFailed(String),
    #[error("arithmetic mode mismatch")]
    ModeMismatch,
    #[error("zero operator")]
    ZeroOperator,
    #[error("size guard: {0}")]
    SizeGuard(String),
    #[error("degree assumption violated at n = {0}")]
    DegreeViolated(usize),
    #[error("truncation: achievable order is {0}")]
    Truncation(usize),
    #[error("non-integer coefficient at index {0}")]
    NotIntegral(usize),
    #[error("arity mismatch: expected {expected} operators, got {got}")]
    Arity { expected: usize, got: usize },
    #[error("parse error: {0}")]
    Parse(String),
    #[error("io error: {0}")]
    Io(String),
    #[error("invalid argument: {0}")]
    Invalid(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
