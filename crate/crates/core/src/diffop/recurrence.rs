use crate::error::{Error, Result};
use crate::field::Field;
use crate::poly::{self, Poly};
use crate::series::PowerSeries;

use super::operator::{Basis, DiffOperator};

/// `Σ_{j=0}^{D} R_j(n)·c_{n−j} = 0` with `c_m = 0` for `m < 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct Recurrence<F: Field> {
    pub field: F,
    /// `polys[j] = R_j(n)`, low degree first.
    pub polys: Vec<Poly<F::Elem>>,
}

impl<F: Field> Recurrence<F> {
    /// `R_j(n) = Σ_i a_{ij} (n−j)^i` for a θ-basis operator.
    pub fn from_theta(op: &DiffOperator<F>) -> Self {
        assert_eq!(op.basis, Basis::Theta);
        let f = &op.field;
        let grid = op.grid();
        let dmax = op.degree();
        let polys = (0..=dmax)
            .map(|j| {
                let in_y: Poly<F::Elem> =
                    poly::trim(f, grid.iter().map(|row| row[j].clone()).collect());
                poly::taylor_shift(f, &in_y, &f.from_i64(-(j as i64)))
            })
            .collect();
        Recurrence {
            field: f.clone(),
            polys,
        }
    }

    pub fn max_shift(&self) -> usize {
        self.polys.len().saturating_sub(1)
    }

    fn residual(&self, c: &[F::Elem], n: usize, skip_lead: bool) -> F::Elem {
        let f = &self.field;
        let nn = f.from_i64(n as i64);
        let mut acc = f.zero();
        for (j, r) in self.polys.iter().enumerate().skip(skip_lead as usize) {
            if j > n || r.is_empty() {
                continue;
            }
            let cv = &c[n - j];
            if f.is_zero(cv) {
                continue;
            }
            acc = f.add(&acc, &f.mul(&poly::eval(f, r, &nn), cv));
        }
        acc
    }

    /// Checks the known range, then solves for `c_n` up to `n_target − 1`.
    pub fn extend_series(&self, seed: &PowerSeries<F>, n_target: usize) -> Result<PowerSeries<F>> {
        let f = &self.field;
        let mut c = seed.coeffs.clone();
        for n in 0..c.len() {
            if !f.is_zero(&self.residual(&c, n, false)) {
                return Err(Error::ExtensionMismatch(n));
            }
        }
        for n in c.len()..n_target {
            let lead = poly::eval(f, &self.polys[0], &f.from_i64(n as i64));
            let inv = f.inv(&lead).ok_or(Error::SingularIndex(n))?;
            let r = self.residual(&c, n, true);
            c.push(f.neg(&f.mul(&r, &inv)));
        }
        Ok(PowerSeries::new(f.clone(), c))
    }

    /// Indices `0 ≤ n < limit` where `R_0(n)` vanishes.
    pub fn singular_indices(&self, limit: usize) -> Vec<usize> {
        let f = &self.field;
        (0..limit)
            .filter(|&n| f.is_zero(&poly::eval(f, &self.polys[0], &f.from_i64(n as i64))))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{rat, Rationals};
    use crate::modular::{nth_prime, PrimeField};

    #[test]
    fn geometric_recurrence() {
        let q = Rationals;
        // (1 - x)θ - x
        let op = DiffOperator::theta(q, vec![vec![rat(0, 1), rat(-1, 1)], vec![rat(1, 1), rat(-1, 1)]]);
        let rec = op.to_recurrence();
        assert_eq!(rec.polys[0], vec![rat(0, 1), rat(1, 1)]);
        assert_eq!(rec.polys[1], vec![rat(0, 1), rat(-1, 1)]);
        let seed = PowerSeries::new(q, vec![rat(1, 1), rat(1, 1)]);
        let ext = rec.extend_series(&seed, 10).unwrap();
        assert!(ext.coeffs.iter().all(|c| *c == rat(1, 1)));
        let bad = PowerSeries::new(q, vec![rat(1, 1), rat(2, 1)]);
        assert_eq!(rec.extend_series(&bad, 5), Err(Error::ExtensionMismatch(1)));
    }

    #[test]
    fn central_binomial_recurrence() {
        let f = PrimeField::new(nth_prime(0)).unwrap();
        // (1 - 4x)θ - 2x annihilates (1-4x)^{-1/2}
        let op = DiffOperator::theta(f, vec![vec![0, f.from_i64(-2)], vec![1, f.from_i64(-4)]]);
        let rec = op.to_recurrence();
        let seed = PowerSeries::new(f, vec![1, 2]);
        let ext = rec.extend_series(&seed, 6).unwrap();
        assert_eq!(ext.coeffs, vec![1, 2, 6, 20, 70, 252]);
    }

    #[test]
    fn singular_index_reported() {
        let q = Rationals;
        // (θ - 3) - x: R_0(n) = n - 3
        let op = DiffOperator::theta(q, vec![vec![rat(-3, 1), rat(-1, 1)], vec![rat(1, 1)]]);
        let rec = op.to_recurrence();
        assert_eq!(rec.singular_indices(10), vec![3]);
        let seed = PowerSeries::new(q, vec![rat(0, 1)]);
        assert_eq!(rec.extend_series(&seed, 6), Err(Error::SingularIndex(3)));
    }
}
