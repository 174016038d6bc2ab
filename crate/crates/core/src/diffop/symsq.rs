//! Symmetric square: order via products of local solutions, full operator via
//! a Krylov sequence over `F(x)`.

use rand::RngCore;

use crate::error::{Error, Result};
use crate::field::Field;
use crate::linalg;
use crate::poly;
use crate::series::PowerSeries;

use super::algebra::RatOperator;
use super::local::{local_operator, Point};
use super::operator::DiffOperator;
use super::ring::{DiffRing, RatFunc, RatFuncField};

#[derive(Clone, Copy, Debug)]
pub struct SymSquareOptions {
    /// Largest base order accepted without `allow_large`.
    pub cap: usize,
    pub allow_large: bool,
}

impl Default for SymSquareOptions {
    fn default() -> Self {
        SymSquareOptions {
            cap: 11,
            allow_large: false,
        }
    }
}

impl SymSquareOptions {
    fn check(&self, r: usize) -> Result<()> {
        if r > self.cap && !self.allow_large {
            return Err(Error::SizeGuard(format!(
                "base order {r} exceeds cap {} (dimension {})",
                self.cap,
                r * (r + 1) / 2
            )));
        }
        Ok(())
    }
}

/// `r` Taylor solutions at a regular point `x0` with `y^{(k)}(x0)/k! = δ_{ik}`,
/// as series in `t = x − x0` with `n` terms.
pub fn taylor_solutions<F: Field>(l: &DiffOperator<F>, x0: &F::Elem, n: usize) -> Result<Vec<PowerSeries<F>>> {
    let f = &l.field;
    let r = l.order();
    let dx = l.to_dx();
    if f.is_zero(&poly::eval(f, dx.leading(), x0)) {
        return Err(Error::Invalid("expansion point is singular".into()));
    }
    let rec = local_operator(l, &Point::Finite(x0.clone())).to_recurrence();
    (0..r)
        .map(|i| {
            let mut seed = vec![f.zero(); r];
            seed[i] = f.one();
            rec.extend_series(&PowerSeries::new(f.clone(), seed), n.max(r))
        })
        .collect()
}

/// Random point where the leading `D_x` coefficient does not vanish.
pub fn random_regular_point<F: Field>(l: &DiffOperator<F>, rng: &mut dyn RngCore) -> F::Elem {
    let f = &l.field;
    let lead = l.to_dx().leading().clone();
    loop {
        let x0 = f.random(rng);
        if !f.is_zero(&x0) && !f.is_zero(&poly::eval(f, &lead, &x0)) {
            return x0;
        }
    }
}

/// Order of the symmetric square: dimension of the span of `y_i·y_j` over
/// constants, measured on Taylor expansions at a random regular point.
pub fn symmetric_square_order<F: Field>(
    l: &DiffOperator<F>,
    opts: &SymSquareOptions,
    rng: &mut dyn RngCore,
) -> Result<usize> {
    let r = l.order();
    opts.check(r)?;
    let f = &l.field;
    let dim = r * (r + 1) / 2;
    let n = dim + 8;
    let x0 = random_regular_point(l, rng);
    let sols = taylor_solutions(l, &x0, n)?;
    let mut rows = Vec::with_capacity(dim);
    for i in 0..r {
        for j in i..r {
            let mut p = sols[i].mul(&sols[j]).coeffs;
            p.resize(n, f.zero());
            rows.push(p);
        }
    }
    Ok(linalg::rank(f, &rows, n))
}

fn pair_index(r: usize, a: usize, b: usize) -> usize {
    let (a, b) = if a <= b { (a, b) } else { (b, a) };
    // rows a' < a contribute r − a' entries each
    a * r + b - a * (a + 1) / 2
}

/// Minimal operator annihilating all products of two solutions.
pub fn symmetric_square<F: Field>(l: &DiffOperator<F>, opts: &SymSquareOptions) -> Result<DiffOperator<F>> {
    let r = l.order();
    opts.check(r)?;
    if r == 0 {
        return Err(Error::Invalid("order-zero operator".into()));
    }
    let f = l.field.clone();
    let k = RatFuncField(f.clone());
    let base = RatOperator::from_operator(l).monic();
    // y^{(r)} = Σ red[c] y^{(c)}
    let red: Vec<RatFunc<F::Elem>> = base.coeffs[..r].iter().map(|c| DiffRing::neg(&k, c)).collect();
    let dim = r * (r + 1) / 2;
    let idx = |a: usize, b: usize| pair_index(r, a, b);
    let add_at = |v: &mut Vec<RatFunc<F::Elem>>, a: usize, b: usize, c: &RatFunc<F::Elem>| {
        // e_{a,b} with a possibly equal to r
        let (a, b) = if a <= b { (a, b) } else { (b, a) };
        if b < r {
            let i = idx(a, b);
            v[i] = DiffRing::add(&k, &v[i], c);
        } else {
            for (m, rm) in red.iter().enumerate() {
                if DiffRing::is_zero(&k, rm) {
                    continue;
                }
                let i = idx(a, m);
                v[i] = DiffRing::add(&k, &v[i], &DiffRing::mul(&k, c, rm));
            }
        }
    };
    let derive = |v: &[RatFunc<F::Elem>]| {
        let mut out: Vec<RatFunc<F::Elem>> = v.iter().map(|c| DiffRing::deriv(&k, c)).collect();
        for a in 0..r {
            for b in a..r {
                let c = &v[idx(a, b)];
                if DiffRing::is_zero(&k, c) {
                    continue;
                }
                add_at(&mut out, a + 1, b, c);
                add_at(&mut out, a, b + 1, c);
            }
        }
        out
    };
    let mut seq: Vec<Vec<RatFunc<F::Elem>>> = Vec::new();
    let mut v = vec![DiffRing::zero(&k); dim];
    v[idx(0, 0)] = Field::one(&k);
    loop {
        seq.push(v.clone());
        let m = seq.len();
        // columns are the sequence vectors
        let rows: Vec<Vec<RatFunc<F::Elem>>> = (0..dim).map(|i| seq.iter().map(|s| s[i].clone()).collect()).collect();
        let ns = linalg::nullspace(&k, &rows, m);
        if let Some(c) = ns.into_iter().next() {
            let op = RatOperator::new(f.clone(), c).monic();
            return Ok(op.clear_denominators().remove_poly_content());
        }
        if m > dim {
            unreachable!("Krylov sequence exceeded the ambient dimension");
        }
        v = derive(&v);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diffop::algebra::tests::random_op;
    use crate::field::{rat, Rationals};
    use crate::modular::{nth_prime, PrimeField};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn pair_indices_are_dense() {
        for r in 1..6 {
            let mut seen = Vec::new();
            for a in 0..r {
                for b in a..r {
                    seen.push(pair_index(r, a, b));
                }
            }
            assert_eq!(seen, (0..r * (r + 1) / 2).collect::<Vec<_>>());
        }
    }

    #[test]
    fn airy_symmetric_square() {
        // D^2 − x: products satisfy D^3 − 4x D − 2
        let l = DiffOperator::dx(Rationals, vec![vec![rat(0, 1), rat(-1, 1)], vec![], vec![rat(1, 1)]]);
        let s = symmetric_square(&l, &SymSquareOptions::default()).unwrap();
        let want = DiffOperator::dx(
            Rationals,
            vec![vec![rat(-2, 1)], vec![rat(0, 1), rat(-4, 1)], vec![], vec![rat(1, 1)]],
        );
        assert!(s.eq_up_to_unit(&want));
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert_eq!(symmetric_square_order(&l, &SymSquareOptions::default(), &mut rng).unwrap(), 3);
    }

    #[test]
    fn skew_adjoint_order_three_drops() {
        let f = PrimeField::new(nth_prime(1)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let a = random_op(f, 3, 1, &mut rng);
        let l = a.sub(&a.adjoint());
        assert_eq!(l.order(), 3);
        let s = symmetric_square(&l, &SymSquareOptions::default()).unwrap();
        assert_eq!(s.order(), 5);
    }

    #[test]
    fn size_guard() {
        let f = PrimeField::new(nth_prime(0)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let l = random_op(f, 4, 1, &mut rng);
        let opts = SymSquareOptions { cap: 3, allow_large: false };
        assert!(matches!(symmetric_square_order(&l, &opts, &mut rng), Err(Error::SizeGuard(_))));
        let opts = SymSquareOptions { cap: 3, allow_large: true };
        assert_eq!(symmetric_square_order(&l, &opts, &mut rng).unwrap(), 10);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]

        #[test]
        fn order_two_gives_three(seed in any::<u64>()) {
            let f = PrimeField::new(nth_prime(0)).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let deg = rng.gen_range(0..4);
            let l = random_op(f, 2, deg, &mut rng);
            prop_assert_eq!(symmetric_square_order(&l, &SymSquareOptions::default(), &mut rng).unwrap(), 3);
        }

        #[test]
        fn skew_adjoint_order_three_gives_five(seed in any::<u64>()) {
            let f = PrimeField::new(nth_prime(0)).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let deg = rng.gen_range(1..4);
            let a = random_op(f, 3, deg, &mut rng);
            let l = a.sub(&a.adjoint());
            prop_assert_eq!(symmetric_square_order(&l, &SymSquareOptions::default(), &mut rng).unwrap(), 5);
        }
    }
}
