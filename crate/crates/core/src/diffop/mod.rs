//! Linear differential operators with polynomial coefficients.

pub mod algebra;
pub mod local;
pub mod operator;
pub mod probe;
pub mod recurrence;
pub mod ring;
pub mod symsq;

pub use algebra::{decomposition_verify, is_self_adjoint, DecompositionReport, RatOperator};
pub use local::{
    indicial_data, indicial_polynomial, local_operator, shift_gauge, ExponentEntry, LocalData, LocalReport, Point,
};
pub use operator::{read_operator, Basis, DiffOperator, OdeFile};
pub use probe::{analytic_solutions, irreducibility_probe, ProbeOptions, ProbeReport, Verdict};
pub use recurrence::Recurrence;
pub use ring::{PolyRing, RatFunc, RatFuncField};
pub use symsq::{symmetric_square, symmetric_square_order, taylor_solutions, SymSquareOptions};
