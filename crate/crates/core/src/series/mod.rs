//! Lattice Green function series.

mod generic;
pub mod io;
mod td;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;

pub use generic::{
    generic_d_fit, generic_d_samples, inverse_d_expansion, rescaled_infinite_d_series,
    GenericDSeries, InverseDSeries,
};
pub use td::{
    read_table, step_profile, t1_table, t2_table, td_step, write_table, ExactArith, ModArith,
    StepProfile, TdArith, TdChain, TdTable, Weights,
};

use crate::error::{Error, Result};
use crate::exec::Policy;
use crate::field::{Field, Rationals};
use crate::modular::PrimeField;

/// Truncated power series: coefficients of `x^0 … x^{N−1}`.
#[derive(Clone, Debug, PartialEq)]
pub struct PowerSeries<F: Field> {
    pub field: F,
    pub coeffs: Vec<F::Elem>,
}

impl<F: Field> PowerSeries<F> {
    pub fn new(field: F, coeffs: Vec<F::Elem>) -> Self {
        PowerSeries { field, coeffs }
    }

    /// Number of known coefficients.
    pub fn truncation(&self) -> usize {
        self.coeffs.len()
    }

    pub fn modulus(&self) -> Option<u64> {
        self.field.modulus()
    }

    pub fn truncate(&self, n: usize) -> Self {
        PowerSeries::new(self.field.clone(), self.coeffs[..n.min(self.coeffs.len())].to_vec())
    }

    /// Product truncated to the shorter length.
    pub fn mul(&self, other: &Self) -> Self {
        let f = &self.field;
        let n = self.coeffs.len().min(other.coeffs.len());
        let mut out = vec![f.zero(); n];
        for (i, a) in self.coeffs.iter().enumerate().take(n) {
            if f.is_zero(a) {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate().take(n - i) {
                out[i + j] = f.add(&out[i + j], &f.mul(a, b));
            }
        }
        PowerSeries::new(f.clone(), out)
    }
}

impl PowerSeries<Rationals> {
    /// Reduction modulo `p`.
    pub fn reduce(&self, field: PrimeField) -> Result<PowerSeries<PrimeField>> {
        let coeffs = self
            .coeffs
            .iter()
            .map(|c| field.from_rational(c).ok_or(Error::BadPrime(field.modulus())))
            .collect::<Result<_>>()?;
        Ok(PowerSeries::new(field, coeffs))
    }
}

/// Arithmetic mode for series generation.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Arithmetic {
    Exact,
    Mod(u64),
}

/// `4·C(d,2) = 2d(d−1)`, the scale with `z = x / (4·C(d,2))`.
pub fn lgf_scale(d: usize) -> u64 {
    2 * d as u64 * (d as u64 - 1)
}

/// Exact `LGF_d` coefficients of `x^0 … x^{n_terms−1}`.
pub fn lgf_series_exact(d: usize, n_terms: usize) -> PowerSeries<Rationals> {
    lgf_series_exact_range(d, d, n_terms).pop().unwrap()
}

/// Exact integer sequence `T_d(n,0) = (4·C(d,2))^n·[x^n] LGF_d`.
pub fn lgf_integers(d: usize, n_terms: usize) -> Vec<BigInt> {
    assert!(d >= 2 && n_terms >= 1);
    let n_max = n_terms - 1;
    let arith = ExactArith::new(n_max);
    let mut chain = TdChain::new(&arith, n_max, Policy::default());
    chain.advance_to(d).diagonal()
}

/// Exact series for every `d` in `d_lo..=d_hi`, sharing one recursion chain.
pub fn lgf_series_exact_range(d_lo: usize, d_hi: usize, n_terms: usize) -> Vec<PowerSeries<Rationals>> {
    assert!(d_lo >= 2 && d_hi >= d_lo && n_terms >= 1);
    let n_max = n_terms - 1;
    let arith = ExactArith::new(n_max);
    let mut chain = TdChain::new(&arith, n_max, Policy::default());
    let mut out = Vec::new();
    for d in d_lo..=d_hi {
        let t = chain.advance_to(d);
        out.push(assemble_exact(d, &t.diagonal()));
    }
    out
}

fn assemble_exact(d: usize, diag: &[BigInt]) -> PowerSeries<Rationals> {
    let s = BigInt::from(lgf_scale(d));
    let mut pw = BigInt::one();
    let mut coeffs = Vec::with_capacity(diag.len());
    for t in diag {
        coeffs.push(BigRational::new(t.clone(), pw.clone()));
        pw *= &s;
    }
    PowerSeries::new(Rationals, coeffs)
}

/// `LGF_d` modulo `p`.
pub fn lgf_series_mod(d: usize, n_terms: usize, p: u64) -> Result<PowerSeries<PrimeField>> {
    lgf_series_mod_with(d, n_terms, p, Policy::default())
}

pub fn lgf_series_mod_with(
    d: usize,
    n_terms: usize,
    p: u64,
    policy: Policy,
) -> Result<PowerSeries<PrimeField>> {
    assert!(d >= 2 && n_terms >= 1);
    let arith = ModArith::new(p, n_terms)?;
    let field = *arith.field();
    let inv = field.inv(lgf_scale(d) % p).ok_or(Error::BadPrime(p))?;
    let mut chain = TdChain::new(&arith, n_terms - 1, policy);
    let diag = chain.advance_to(d).diagonal();
    let mut pw = 1u64;
    let coeffs = diag
        .iter()
        .map(|&t| {
            let c = field.mul(t, pw);
            pw = field.mul(pw, inv);
            c
        })
        .collect();
    Ok(PowerSeries::new(field, coeffs))
}

/// Either arithmetic; see [`lgf_series_exact`] and [`lgf_series_mod`].
pub enum AnySeries {
    Exact(PowerSeries<Rationals>),
    Mod(PowerSeries<PrimeField>),
}

pub fn lgf_series(d: usize, n_terms: usize, arith: Arithmetic) -> Result<AnySeries> {
    Ok(match arith {
        Arithmetic::Exact => AnySeries::Exact(lgf_series_exact(d, n_terms)),
        Arithmetic::Mod(p) => AnySeries::Mod(lgf_series_mod(d, n_terms, p)?),
    })
}

/// First index `n` with `coeff(x^n)·scale^n` not an integer, or `None` (pass).
pub fn integrality_check(series: &PowerSeries<Rationals>, scale: &BigRational) -> Option<usize> {
    let mut pw = BigRational::one();
    for (n, c) in series.coeffs.iter().enumerate() {
        if !(c * &pw).is_integer() {
            return Some(n);
        }
        pw *= scale;
    }
    None
}

/// Reduces each coefficient of a sequence of integers mod `p`.
pub fn integers_mod(vals: &[BigInt], field: PrimeField) -> Vec<u64> {
    vals.iter().map(|v| field.from_bigint(v)).collect()
}

impl AnySeries {
    pub fn len(&self) -> usize {
        match self {
            AnySeries::Exact(s) => s.truncation(),
            AnySeries::Mod(s) => s.truncation(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::Zero;
    use crate::field::rat;
    use crate::modular::nth_prime;

    #[test]
    fn lgf7_leading_terms() {
        let s = lgf_series_exact(7, 6);
        let expect = [rat(1, 1), rat(0, 1), rat(1, 84), rat(5, 1764), rat(263, 197568), rat(1355, 2074464)];
        assert_eq!(s.coeffs, expect);
    }

    #[test]
    fn lgf2_is_elliptic_k() {
        // 2F1(1/2,1/2;1;x^2) = Σ C(2m,m)^2 x^{2m} / 16^m
        let s = lgf_series_exact(2, 21);
        for (n, c) in s.coeffs.iter().enumerate() {
            if n % 2 == 1 {
                assert!(c.is_zero());
            } else {
                let m = n / 2;
                let cb = ExactArith::new(2 * m + 2).central(m);
                let expect = BigRational::new(&cb * &cb, BigInt::from(16).pow(m as u32));
                assert_eq!(c, &expect, "n = {n}");
            }
        }
        assert_eq!(lgf_series_exact(3, 3).coeffs[2], rat(1, 12));
    }

    #[test]
    fn modular_agrees_with_exact() {
        let p = nth_prime(4);
        let f = PrimeField::new(p).unwrap();
        let ex = lgf_series_exact_range(2, 6, 61);
        for (i, e) in ex.iter().enumerate() {
            let d = i + 2;
            let m = lgf_series_mod(d, 61, p).unwrap();
            assert_eq!(e.reduce(f).unwrap(), m, "d = {d}");
        }
    }

    #[test]
    fn positivity_and_parity() {
        for (i, s) in lgf_series_exact_range(3, 6, 30).iter().enumerate() {
            let d = i + 3;
            assert_eq!(s.coeffs[0], rat(1, 1));
            assert!(s.coeffs[1].is_zero());
            for (n, c) in s.coeffs.iter().enumerate().skip(2) {
                assert!(c > &BigRational::zero(), "d = {d}, n = {n}");
            }
        }
    }

    #[test]
    fn integrality_of_lgf7() {
        let s = lgf_series_exact(7, 40);
        assert_eq!(integrality_check(&s, &rat(84, 1)), None);
        assert_eq!(integrality_check(&s, &rat(1, 1)), Some(2));
    }
}
