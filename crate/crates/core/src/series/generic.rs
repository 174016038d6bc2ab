//! `LGF_d` for symbolic dimension `d`.
//!
//! The coefficient of `x^n` is `N_n(d) / (d(d−1))^{n−1}` with `N_n` a polynomial
//! of degree at most `n − 2` (for `n ≥ 2`); `N_0 = 1`, `N_1 = 0`.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::field::Rationals;
use crate::poly::{self, Poly};

use super::{lgf_series_exact_range, PowerSeries};

#[derive(Clone, Debug, PartialEq)]
pub struct GenericDSeries {
    /// `numer[n] = N_n(d)`, low degree first.
    pub numer: Vec<Poly<BigRational>>,
}

impl GenericDSeries {
    pub fn len(&self) -> usize {
        self.numer.len()
    }

    pub fn is_empty(&self) -> bool {
        self.numer.is_empty()
    }

    pub fn denominator_exponent(n: usize) -> usize {
        n.saturating_sub(1)
    }

    /// Coefficient of `x^n` at a concrete dimension.
    pub fn coeff_at(&self, n: usize, d: i64) -> BigRational {
        let dd = BigRational::from_integer(BigInt::from(d));
        let num = poly::eval(&Rationals, &self.numer[n], &dd);
        let den = BigRational::from_integer(BigInt::from(d * (d - 1)));
        num / num_traits::pow(den, Self::denominator_exponent(n))
    }

    pub fn eval_at(&self, d: i64) -> PowerSeries<Rationals> {
        PowerSeries::new(Rationals, (0..self.len()).map(|n| self.coeff_at(n, d)).collect())
    }
}

/// Exact series for `d = 2 ..= n_terms + 1`: enough points to interpolate every
/// coefficient below `x^{n_terms}` with one spare dimension as a check.
pub fn generic_d_samples(n_terms: usize) -> Vec<(i64, PowerSeries<Rationals>)> {
    let d_hi = (n_terms + 1).max(3);
    lgf_series_exact_range(2, d_hi, n_terms)
        .into_iter()
        .enumerate()
        .map(|(i, s)| (i as i64 + 2, s))
        .collect()
}

/// Newton interpolation through `(x_i, y_i)`, returned in the monomial basis.
fn interpolate(points: &[(BigRational, BigRational)]) -> Poly<BigRational> {
    let q = Rationals;
    let n = points.len();
    let mut dd: Vec<BigRational> = points.iter().map(|p| p.1.clone()).collect();
    for k in 1..n {
        for i in (k..n).rev() {
            dd[i] = (&dd[i] - &dd[i - 1]) / (&points[i].0 - &points[i - k].0);
        }
    }
    let mut out: Poly<BigRational> = Vec::new();
    for i in (0..n).rev() {
        out = poly::mul(&q, &out, &[-points[i].0.clone(), BigRational::one()]);
        out = poly::add(&q, &out, &[dd[i].clone()]);
    }
    out
}

/// Interpolates each numerator `N_n(d)` for `n < n_terms` from the samples,
/// checking each against one further sample dimension.
pub fn generic_d_fit(samples: &[(i64, PowerSeries<Rationals>)], n_terms: usize) -> Result<GenericDSeries> {
    let mut numer = Vec::with_capacity(n_terms);
    for n in 0..n_terms {
        let deg = n.saturating_sub(2);
        let need = deg + 2;
        let pts: Vec<(BigRational, BigRational)> = samples
            .iter()
            .filter(|(d, s)| *d >= 2 && s.truncation() > n)
            .take(need)
            .map(|(d, s)| {
                let den = BigRational::from_integer(BigInt::from(d * (d - 1)));
                let v = &s.coeffs[n] * num_traits::pow(den, GenericDSeries::denominator_exponent(n));
                (BigRational::from_integer(BigInt::from(*d)), v)
            })
            .collect();
        if pts.len() < need {
            return Err(Error::Truncation(n));
        }
        let p = interpolate(&pts[..need - 1]);
        let (x, y) = &pts[need - 1];
        if poly::eval(&Rationals, &p, x) != *y || poly::degree(&p).unwrap_or(0) > deg {
            return Err(Error::DegreeViolated(n));
        }
        numer.push(p);
    }
    Ok(GenericDSeries { numer })
}

/// Expansion in `u = 1/d`: `coeffs[k]` is the polynomial in `x` multiplying `u^k`.
#[derive(Clone, Debug, PartialEq)]
pub struct InverseDSeries {
    pub coeffs: Vec<Poly<BigRational>>,
}

impl InverseDSeries {
    /// Value at `x = 1` of each coefficient.
    pub fn at_x_one(&self) -> Vec<BigRational> {
        self.coeffs
            .iter()
            .map(|c| c.iter().fold(BigRational::zero(), |a, b| a + b))
            .collect()
    }
}

/// Re-expands the generic series at `d = ∞` through `u^order`. The term `x^n`
/// first contributes at `u^n`, so `g` must reach `x^order`.
pub fn inverse_d_expansion(g: &GenericDSeries, order: usize) -> Result<InverseDSeries> {
    if g.len() <= order {
        return Err(Error::Truncation(g.len().saturating_sub(1)));
    }
    let mut coeffs: Vec<Poly<BigRational>> = vec![Vec::new(); order + 1];
    for (n, num) in g.numer.iter().enumerate().take(order + 1) {
        if n == 0 {
            coeffs[0] = vec![BigRational::one()];
            continue;
        }
        let e = GenericDSeries::denominator_exponent(n);
        // a_k d^k / (d(d-1))^e = a_k u^{2e-k} (1-u)^{-e}
        for (k, a) in num.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            let base = 2 * e - k;
            for m in 0..=order.saturating_sub(base) {
                let pw = base + m;
                if pw > order {
                    break;
                }
                let binom = if e == 0 {
                    if m == 0 {
                        BigInt::one()
                    } else {
                        BigInt::zero()
                    }
                } else {
                    binomial(e - 1 + m, m)
                };
                let c = a * BigRational::from_integer(binom);
                let mut xp = vec![BigRational::zero(); n + 1];
                xp[n] = c;
                coeffs[pw] = poly::add(&Rationals, &coeffs[pw], &xp);
            }
        }
    }
    Ok(InverseDSeries { coeffs })
}

fn binomial(n: usize, k: usize) -> BigInt {
    let mut r = BigInt::one();
    for i in 0..k {
        r = r * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    r
}

/// The `d → ∞` limit under `x = 2d·y`: `y_n = 2^n·[d^{n−2}] N_n(d)`. Every
/// coefficient must be an integer.
pub fn rescaled_infinite_d_series(g: &GenericDSeries, n_terms: usize) -> Result<Vec<BigInt>> {
    if g.len() < n_terms {
        return Err(Error::Truncation(g.len()));
    }
    let mut out = Vec::with_capacity(n_terms);
    for n in 0..n_terms {
        let lead = match n {
            0 => BigRational::one(),
            1 => BigRational::zero(),
            _ => g.numer[n].get(n - 2).cloned().unwrap_or_else(BigRational::zero),
        };
        let v = lead * BigRational::from_integer(BigInt::from(2).pow(n as u32));
        if !v.is_integer() {
            return Err(Error::NotIntegral(n));
        }
        out.push(v.to_integer());
    }
    Ok(out)
}
