//! The ODE formula `mQ + qD − C = (Q+1)(D+1) − f`.

use std::ops::RangeInclusive;

use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Policy;
use crate::field::{rat, Rationals};
use crate::linalg;
use crate::modular::PrimeField;
use crate::series::PowerSeries;

use super::nullity;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Triple {
    pub q: usize,
    pub d: usize,
    pub f: usize,
}

impl Triple {
    pub fn new(q: usize, d: usize, f: usize) -> Self {
        Triple { q, d, f }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OdeFormula {
    pub m: i64,
    pub q: i64,
    pub c: i64,
}

impl OdeFormula {
    pub fn new(m: i64, q: i64, c: i64) -> Self {
        OdeFormula { m, q, c }
    }

    /// Degree of the apparent polynomial, `(m−1)(q−1) − C − 1`.
    pub fn d_app(&self) -> i64 {
        (self.m - 1) * (self.q - 1) - self.c - 1
    }

    pub fn predicted_f(&self, q: usize, d: usize) -> i64 {
        let (qq, dd) = (q as i64, d as i64);
        (qq + 1) * (dd + 1) - (self.m * qq + self.q * dd - self.c)
    }

    pub fn satisfies(&self, t: &Triple) -> bool {
        self.predicted_f(t.q, t.d) == t.f as i64
    }

    /// `(q, m + D_app)`: the minimal-order operator's ansatz.
    pub fn minimal_point(&self) -> (usize, usize) {
        (self.q as usize, (self.m + self.d_app()) as usize)
    }
}

/// Solves the formula from three triples and checks it on all of them.
pub fn fit_ode_formula(triples: &[Triple]) -> Result<OdeFormula> {
    if triples.len() < 4 {
        return Err(Error::FitFailure(format!(
            "need at least 4 triples (3 to solve, 1 to check), got {}",
            triples.len()
        )));
    }
    let n = triples.len();
    for a in 0..n {
        for b in a + 1..n {
            for c in b + 1..n {
                let sel = [triples[a], triples[b], triples[c]];
                let rows: Vec<_> = sel
                    .iter()
                    .map(|t| vec![rat(t.q as i64, 1), rat(t.d as i64, 1), rat(-1, 1)])
                    .collect();
                let rhs: Vec<_> = sel
                    .iter()
                    .map(|t| rat(((t.q + 1) * (t.d + 1)) as i64 - t.f as i64, 1))
                    .collect();
                let Some(sol) = linalg::solve(&Rationals, &rows, &rhs) else {
                    continue;
                };
                if !sol.iter().all(|x| x.is_integer()) {
                    return Err(Error::FitFailure(format!(
                        "non-integral solution from {:?}",
                        sel
                    )));
                }
                let v: Vec<i64> = sol.iter().map(|x| x.to_integer().to_i64().unwrap()).collect();
                let formula = OdeFormula::new(v[0], v[1], v[2]);
                if let Some(bad) = triples.iter().find(|t| !formula.satisfies(t)) {
                    return Err(Error::FitFailure(format!(
                        "triple {:?} contradicts m={} q={} C={}",
                        bad, formula.m, formula.q, formula.c
                    )));
                }
                if formula.d_app() < 0 || formula.q <= 0 || formula.m <= 0 {
                    return Err(Error::FitFailure(format!("implausible fit {formula:?}")));
                }
                return Ok(formula);
            }
        }
    }
    Err(Error::FitFailure("triples are affinely dependent".into()))
}

#[derive(Clone, Copy, Debug)]
pub struct ScanOptions {
    /// Equations beyond the unknown count.
    pub guard: usize,
    pub q_min: usize,
    pub q_max: usize,
    pub policy: Policy,
}

impl Default for ScanOptions {
    fn default() -> Self {
        ScanOptions {
            guard: 20,
            q_min: 1,
            q_max: 40,
            policy: Policy::default(),
        }
    }
}

/// For each `Q`, the largest `D` affordable with `guard` extra equations;
/// when `f > 0` there, binary search for the smallest `D` with `f > 0`.
/// Returns every evaluated triple with `f > 0`.
pub fn scan_triples(series: &PowerSeries<PrimeField>, opts: &ScanOptions) -> Result<Vec<Triple>> {
    let avail = series.truncation().saturating_sub(opts.guard);
    let mut out = Vec::new();
    for q in opts.q_min..=opts.q_max {
        let Some(d_max) = (avail / (q + 1)).checked_sub(1) else {
            break;
        };
        let f = nullity(series, q, d_max, opts.policy)?;
        if f == 0 {
            continue;
        }
        out.push(Triple::new(q, d_max, f));
        let (mut lo, mut hi) = (0usize, d_max);
        while lo < hi {
            let mid = (lo + hi) / 2;
            let f = nullity(series, q, mid, opts.policy)?;
            if f > 0 {
                out.push(Triple::new(q, mid, f));
                hi = mid;
            } else {
                lo = mid + 1;
            }
        }
    }
    out.sort();
    out.dedup();
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OptimalPair {
    pub q: usize,
    pub d: usize,
    pub f: usize,
    /// `(Q+1)(D+1)`.
    pub terms_required: usize,
}

impl OptimalPair {
    /// Count when the `f` free unknowns are not charged, `(Q+1)(D+1) − f`.
    pub fn terms_required_net(&self) -> usize {
        self.terms_required - self.f
    }
}

/// Smallest `(Q+1)(D+1)` over `Q > q`, `D > m` with predicted `f ≥ 1`;
/// ties go to smaller `Q`, then smaller `D`.
pub fn optimal_pair(formula: &OdeFormula) -> Result<OptimalPair> {
    let span = formula.d_app().max(0) as usize + 1;
    let (q, m) = (formula.q as usize, formula.m as usize);
    optimal_pair_in(formula, q + 1..=q + span, m + 1..=m + span)
}

pub fn optimal_pair_in(
    formula: &OdeFormula,
    q_range: RangeInclusive<usize>,
    d_range: RangeInclusive<usize>,
) -> Result<OptimalPair> {
    let mut best: Option<OptimalPair> = None;
    for q in q_range {
        for d in d_range.clone() {
            let f = formula.predicted_f(q, d);
            if f < 1 {
                continue;
            }
            let terms = (q + 1) * (d + 1);
            if best.map_or(true, |b| terms < b.terms_required) {
                best = Some(OptimalPair {
                    q,
                    d,
                    f: f as usize,
                    terms_required: terms,
                });
            }
        }
    }
    best.ok_or(Error::EmptyRange)
}

/// Minimal-order point with its predicted `f` (expected 1).
pub fn minimal_pair(formula: &OdeFormula) -> OptimalPair {
    let (q, d) = formula.minimal_point();
    OptimalPair {
        q,
        d,
        f: formula.predicted_f(q, d).abs() as usize,
        terms_required: (q + 1) * (d + 1),
    }
}
