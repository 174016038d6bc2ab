//! Minimal-order operator from an optimal one: extend the series with the
//! optimal recurrence, then guess at `(q, m + D_app)`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::exec::Policy;
use crate::modular::PrimeField;
use crate::series::PowerSeries;

use super::formula::{minimal_pair, optimal_pair, OdeFormula, OptimalPair};
use super::{guess_ode_with, OdeCandidate};

#[derive(Clone, Copy, Debug)]
pub struct MinimalOptions {
    pub guard: usize,
    /// Random nullspace combinations tried after the basis vectors.
    pub attempts: usize,
    pub seed: u64,
    pub policy: Policy,
}

impl Default for MinimalOptions {
    fn default() -> Self {
        MinimalOptions {
            guard: 20,
            attempts: 8,
            seed: 0x5eed,
            policy: Policy::default(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct MinimalOde {
    pub optimal_pair: OptimalPair,
    pub optimal: OdeCandidate,
    /// Optimal-ODE vector whose recurrence produced the extension.
    pub extender: Vec<u64>,
    pub extended: PowerSeries<PrimeField>,
    pub minimal: OdeCandidate,
}

/// Series length needed at the minimal point including guard rows.
pub fn minimal_terms(formula: &OdeFormula, guard: usize) -> usize {
    minimal_pair(formula).terms_required + guard
}

pub fn minimal_ode(series: &PowerSeries<PrimeField>, formula: &OdeFormula, opts: &MinimalOptions) -> Result<MinimalOde> {
    let pair = optimal_pair(formula)?;
    let needed = pair.terms_required + opts.guard;
    if series.truncation() < needed {
        return Err(Error::SeriesTooShort {
            needed,
            have: series.truncation(),
        });
    }
    let optimal = guess_ode_with(series, pair.q, pair.d, opts.policy)?;
    if optimal.f() == 0 {
        return Err(Error::FormulaInconsistent(0));
    }
    let target = minimal_terms(formula, opts.guard);
    let field = series.field;
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut tries: Vec<Vec<u64>> = optimal.basis.clone();
    if optimal.f() > 1 {
        for _ in 0..opts.attempts {
            let mut v = vec![0u64; optimal.unknowns()];
            for b in &optimal.basis {
                let c = rng.gen_range(1..field.modulus());
                for (x, &y) in v.iter_mut().zip(b) {
                    *x = field.add(*x, field.mul(c, y));
                }
            }
            tries.push(v);
        }
    }
    let mut last_err = Error::FormulaInconsistent(0);
    for v in tries {
        let rec = optimal.vector_operator(&v).to_recurrence();
        let extended = match rec.extend_series(series, target) {
            Ok(s) => s,
            Err(e @ Error::SingularIndex(_)) => {
                last_err = e;
                continue;
            }
            Err(e) => return Err(e),
        };
        let (q, d) = formula.minimal_point();
        let minimal = guess_ode_with(&extended, q, d, opts.policy)?;
        if minimal.f() != 1 {
            return Err(Error::FormulaInconsistent(minimal.f()));
        }
        return Ok(MinimalOde {
            optimal_pair: pair,
            optimal,
            extender: v,
            extended,
            minimal,
        });
    }
    Err(last_err)
}
