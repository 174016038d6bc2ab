//! Probabilistic right-factor detection mod p.
//!
//! Series solutions at a point are guessed at a fixed `(Q₀, D₀)`; a seed whose
//! nullity exceeds the generic one `f₀` lies in the solution space of a proper
//! right factor.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exec::Policy;
use crate::guess::guess_ode_with;
use crate::modular::{nullspace_mod, PrimeField};
use crate::poly;
use crate::series::PowerSeries;

use super::local::{local_operator, shift_gauge, Point};
use super::operator::DiffOperator;

#[derive(Clone, Debug)]
pub struct ProbeOptions {
    pub samples: usize,
    pub seed: u64,
    /// Ansatz `(Q₀, D₀)`; defaults to the order and degree of the local operator.
    pub pair: Option<(usize, usize)>,
    /// Generic nullity; defaults to 1 at the default pair and otherwise to the
    /// minimum over all seeds tried.
    pub f0: Option<usize>,
    /// Exponent `ρ` removed by `y = t^ρ·u` before expanding.
    pub gauge: Option<u64>,
    pub guard: usize,
    pub policy: Policy,
}

impl Default for ProbeOptions {
    fn default() -> Self {
        ProbeOptions {
            samples: 20,
            seed: 0x9e37,
            pair: None,
            f0: None,
            gauge: None,
            guard: 20,
            policy: Policy::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "verdict", rename_all = "kebab-case")]
pub enum Verdict {
    NoRightFactorDetected,
    RightFactorFound { order: usize },
}

#[derive(Clone, Debug, Serialize)]
pub struct ProbeReport {
    #[serde(flatten)]
    pub verdict: Verdict,
    pub prime: u64,
    pub samples: usize,
    /// Dimension of the analytic seed space.
    pub seed_dimension: usize,
    pub pair: (usize, usize),
    pub f0: usize,
    /// Nullity per seed: pure basis seeds first, then random combinations.
    pub nullities: Vec<usize>,
}

/// Local θ operator with the common power of `t` removed.
fn local_theta(l: &DiffOperator<PrimeField>, point: &Point<u64>, gauge: Option<u64>) -> DiffOperator<PrimeField> {
    let f = l.field;
    let loc = match gauge {
        Some(r) => shift_gauge(l, point, &r),
        None => local_operator(l, point),
    };
    let v = loc
        .coeffs
        .iter()
        .filter_map(|c| c.iter().position(|&x| x != 0))
        .min()
        .unwrap_or(0);
    let coeffs = loc
        .coeffs
        .iter()
        .map(|c| poly::trim(&f, c.iter().skip(v).copied().collect()))
        .collect();
    DiffOperator::theta(f, coeffs)
}

/// Basis of the power-series solutions `Σ c_n t^n` truncated to `n` terms.
/// Each free coefficient sits at a root of the indicial polynomial; roots whose
/// compatibility condition fails are dropped.
pub fn analytic_solutions(local: &DiffOperator<PrimeField>, n: usize) -> Result<Vec<PowerSeries<PrimeField>>> {
    let f = local.field;
    let rec = local.to_recurrence();
    // c[m] as a vector over the free parameters, grown as roots appear
    let mut c: Vec<Vec<u64>> = Vec::with_capacity(n);
    let mut constraints: Vec<Vec<u64>> = Vec::new();
    let mut k = 0usize;
    for m in 0..n {
        let nn = f.from_u64(m as u64);
        let mut acc = vec![0u64; k];
        for (j, r) in rec.polys.iter().enumerate().skip(1) {
            if j > m || r.is_empty() {
                continue;
            }
            let w = poly::eval(&f, r, &nn);
            if w == 0 {
                continue;
            }
            for (a, &b) in acc.iter_mut().zip(&c[m - j]) {
                *a = f.add(*a, f.mul(w, b));
            }
        }
        let lead = poly::eval(&f, &rec.polys[0], &nn);
        if lead == 0 {
            if acc.iter().any(|&x| x != 0) {
                constraints.push(acc);
            }
            k += 1;
            for v in c.iter_mut() {
                v.push(0);
            }
            for v in constraints.iter_mut() {
                v.resize(k, 0);
            }
            let mut e = vec![0u64; k];
            e[k - 1] = 1;
            c.push(e);
        } else {
            let inv = f.inv(lead).ok_or(Error::SingularIndex(m))?;
            let mut v: Vec<u64> = acc.iter().map(|&a| f.neg(f.mul(a, inv))).collect();
            v.resize(k, 0);
            c.push(v);
        }
    }
    for v in constraints.iter_mut() {
        v.resize(k, 0);
    }
    let basis = if constraints.is_empty() {
        (0..k)
            .map(|i| {
                let mut e = vec![0u64; k];
                e[i] = 1;
                e
            })
            .collect()
    } else {
        nullspace_mod(&f, constraints, k)
    };
    Ok(basis
        .iter()
        .map(|a| PowerSeries::new(f, c.iter().map(|v| f.dot(v, a)).collect()))
        .collect())
}

fn combine(f: &PrimeField, sols: &[PowerSeries<PrimeField>], a: &[u64]) -> PowerSeries<PrimeField> {
    let n = sols[0].truncation();
    let mut out = vec![0u64; n];
    for (s, &w) in sols.iter().zip(a) {
        for (o, &x) in out.iter_mut().zip(&s.coeffs) {
            *o = f.add(*o, f.mul(w, x));
        }
    }
    PowerSeries::new(*f, out)
}

/// Smallest order annihilating `s` at degree `d`, up to `q_max`.
fn minimal_order(s: &PowerSeries<PrimeField>, d: usize, q_max: usize, policy: Policy) -> Result<usize> {
    for q in 0..=q_max {
        if (q + 1) * (d + 1) > s.truncation() {
            break;
        }
        if guess_ode_with(s, q, d, policy)?.f() > 0 {
            return Ok(q);
        }
    }
    Ok(q_max)
}

pub fn irreducibility_probe(l: &DiffOperator<PrimeField>, point: &Point<u64>, opts: &ProbeOptions) -> Result<ProbeReport> {
    let f = l.field;
    let local = local_theta(l, point, opts.gauge);
    let order = local.order();
    let pair = opts.pair.unwrap_or((order, local.degree()));
    let mut report = ProbeReport {
        verdict: Verdict::NoRightFactorDetected,
        prime: f.modulus(),
        samples: opts.samples,
        seed_dimension: 0,
        pair,
        f0: opts.f0.unwrap_or(0),
        nullities: Vec::new(),
    };
    if order <= 1 {
        report.f0 = opts.f0.unwrap_or(1);
        return Ok(report);
    }
    let n = (pair.0 + 1) * (pair.1 + 1) + opts.guard;
    let sols = analytic_solutions(&local, n)?;
    report.seed_dimension = sols.len();
    if sols.is_empty() {
        return Err(Error::Invalid("no power-series solutions at this point".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut seeds: Vec<PowerSeries<PrimeField>> = sols.clone();
    for _ in 0..opts.samples {
        let a: Vec<u64> = (0..sols.len()).map(|_| rng.gen_range(1..f.modulus())).collect();
        seeds.push(combine(&f, &sols, &a));
    }
    for s in &seeds {
        report.nullities.push(guess_ode_with(s, pair.0, pair.1, opts.policy)?.f());
    }
    let f0 = match (opts.f0, opts.pair) {
        (Some(f0), _) => f0,
        (None, None) => 1,
        (None, Some(_)) => *report.nullities.iter().min().unwrap(),
    };
    report.f0 = f0;
    if let Some(i) = report.nullities.iter().position(|&x| x > f0) {
        let q = minimal_order(&seeds[i], pair.1, order, opts.policy)?;
        report.verdict = Verdict::RightFactorFound { order: q };
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::modular::nth_prime;

    fn field() -> PrimeField {
        PrimeField::new(nth_prime(2)).unwrap()
    }

    fn op(f: PrimeField, rows: &[&[i64]]) -> DiffOperator<PrimeField> {
        DiffOperator::theta(f, rows.iter().map(|r| r.iter().map(|&c| f.from_i64(c)).collect()).collect())
    }

    #[test]
    fn analytic_space_of_product() {
        let f = field();
        // (θ−1)(θ−2) = θ² − 3θ + 2 has solutions x and x²
        let l = op(f, &[&[2], &[-3], &[1]]);
        let sols = analytic_solutions(&l, 6).unwrap();
        assert_eq!(sols.len(), 2);
        assert_eq!(sols[0].coeffs, vec![0, 1, 0, 0, 0, 0]);
        assert_eq!(sols[1].coeffs, vec![0, 0, 1, 0, 0, 0]);
    }

    #[test]
    fn constant_coefficient_product_is_reducible() {
        let f = field();
        let l = op(f, &[&[2], &[-3], &[1]]);
        let r = irreducibility_probe(&l, &Point::Finite(0), &ProbeOptions::default()).unwrap();
        assert_eq!(r.verdict, Verdict::RightFactorFound { order: 1 });
    }

    #[test]
    fn order_three_product_is_reducible() {
        let f = field();
        // A = θ(θ−1) − x(θ+3), B = θ − 2 − x
        let a = op(f, &[&[0, -3], &[-1, -1], &[1]]);
        let b = op(f, &[&[-2, -1], &[1]]);
        let l = a.mul(&b);
        assert_eq!(l.order(), 3);
        let r = irreducibility_probe(&l, &Point::Finite(0), &ProbeOptions::default()).unwrap();
        // only x²eˣ is analytic at 0, and it is killed by B
        assert_eq!(r.seed_dimension, 1);
        assert_eq!(r.verdict, Verdict::RightFactorFound { order: 1 });
    }

    #[test]
    fn irreducible_examples() {
        let f = field();
        // Gauss operator with a = b = 1/2, c = 1
        let inv4 = f.inv(4).unwrap();
        let gauss = DiffOperator::theta(f, vec![vec![0, f.neg(inv4)], vec![0, f.from_i64(-1)], vec![1, f.from_i64(-1)]]);
        let r = irreducibility_probe(&gauss, &Point::Finite(0), &ProbeOptions::default()).unwrap();
        assert_eq!(r.verdict, Verdict::NoRightFactorDetected);
        let first = op(f, &[&[-2, -1], &[1]]);
        let r = irreducibility_probe(&first, &Point::Finite(0), &ProbeOptions::default()).unwrap();
        assert_eq!(r.verdict, Verdict::NoRightFactorDetected);
    }
}
