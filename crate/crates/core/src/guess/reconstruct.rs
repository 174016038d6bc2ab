//! Exact operators from per-prime minimal candidates by CRT and rational
//! reconstruction.

use std::collections::BTreeMap;

use num_bigint::BigUint;
use num_rational::BigRational;

use crate::diffop::{Basis, DiffOperator};
use crate::error::{Error, Result};
use crate::field::Rationals;
use crate::modular::{rational_reconstruct_balanced, CrtAccumulator};

use super::OdeCandidate;

/// Collects single-vector candidates sharing `(Q, D)`.
#[derive(Clone, Debug, Default)]
pub struct ExactReconstructor {
    shape: Option<(usize, usize)>,
    candidates: Vec<OdeCandidate>,
}

#[derive(Clone, Debug)]
pub struct ReconstructOutcome {
    /// θ basis, primitive.
    pub operator: DiffOperator<Rationals>,
    pub primes_used: Vec<u64>,
    /// Primes whose pivot differs from the majority.
    pub discarded: Vec<u64>,
}

impl ExactReconstructor {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.candidates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.candidates.is_empty()
    }

    pub fn add(&mut self, cand: OdeCandidate) -> Result<()> {
        if cand.f() != 1 {
            return Err(Error::FormulaInconsistent(cand.f()));
        }
        let shape = (cand.q, cand.d);
        if *self.shape.get_or_insert(shape) != shape {
            return Err(Error::Inconsistent(format!(
                "candidate shape {:?} differs from {:?}",
                shape, self.shape
            )));
        }
        if self.candidates.iter().any(|c| c.p == cand.p) {
            return Err(Error::Inconsistent(format!("prime {} supplied twice", cand.p)));
        }
        self.candidates.push(cand);
        Ok(())
    }

    /// Most common pivot; ties go to the smaller column.
    fn majority_pivot(&self) -> Option<usize> {
        let mut counts: BTreeMap<usize, usize> = BTreeMap::new();
        for c in &self.candidates {
            *counts.entry(c.pivots[0]).or_default() += 1;
        }
        counts
            .into_iter()
            .max_by(|a, b| a.1.cmp(&b.1).then(b.0.cmp(&a.0)))
            .map(|(p, _)| p)
    }

    /// Attempts reconstruction from all collected primes.
    pub fn reconstruct(&self) -> Result<ReconstructOutcome> {
        let (q, d) = self.shape.ok_or(Error::NeedMorePrimes(0))?;
        let pivot = self.majority_pivot().unwrap();
        let mut used: Vec<&OdeCandidate> = self.candidates.iter().filter(|c| c.pivots[0] == pivot).collect();
        used.sort_by_key(|c| c.p);
        let discarded = self
            .candidates
            .iter()
            .filter(|c| c.pivots[0] != pivot)
            .map(|c| c.p)
            .collect();
        let len = (q + 1) * (d + 1);
        let mut acc = CrtAccumulator::new(len);
        for c in &used {
            acc.add_prime(c.p, &c.basis[0]);
        }
        let coeffs: Vec<BigRational> = acc
            .values
            .iter()
            .map(|v| rational_reconstruct_balanced(v, &acc.modulus))
            .collect::<Option<_>>()
            .ok_or(Error::NeedMorePrimes(used.len()))?;
        let grid = coeffs.chunks(d + 1).map(|c| c.to_vec()).collect();
        let operator = DiffOperator::from_grid(Rationals, Basis::Theta, grid).primitive();
        Ok(ReconstructOutcome {
            operator,
            primes_used: used.iter().map(|c| c.p).collect(),
            discarded,
        })
    }
}

/// Whether `op` reduces to the candidate's (normalized) vector.
pub fn matches_candidate(op: &DiffOperator<Rationals>, cand: &OdeCandidate) -> bool {
    let Ok(red) = op.reduce(cand.field()) else {
        return false;
    };
    if red.order() > cand.q || red.degree() > cand.d || red.is_zero() {
        return false;
    }
    let mut v = vec![0u64; cand.unknowns()];
    for (i, c) in red.coeffs.iter().enumerate() {
        for (j, &a) in c.iter().enumerate() {
            v[i * (cand.d + 1) + j] = a;
        }
    }
    let norm = OdeCandidate::from_vector(cand.q, cand.d, cand.p, v);
    norm.basis == cand.basis
}

/// Reconstructs from `candidates` and checks the result against `extra`,
/// a candidate at a prime not among them.
pub fn reconstruct_exact(candidates: &[OdeCandidate], extra: &OdeCandidate) -> Result<ReconstructOutcome> {
    let mut r = ExactReconstructor::new();
    for c in candidates {
        r.add(c.clone())?;
    }
    let out = r.reconstruct()?;
    if !matches_candidate(&out.operator, extra) {
        return Err(Error::VerificationFailed(format!(
            "reconstruction disagrees with prime {}",
            extra.p
        )));
    }
    Ok(out)
}

/// Product of the primes used, for reporting.
pub fn modulus_bits(primes: &[u64]) -> u64 {
    primes
        .iter()
        .fold(BigUint::from(1u32), |acc, &p| acc * BigUint::from(p))
        .bits()
}
