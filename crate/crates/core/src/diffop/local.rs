//! Local analysis: operators at a point, indicial polynomials, exponents, gauges.

use num_rational::BigRational;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::{rational_display, Field, Rationals};
use crate::poly::{self, Poly};

use super::operator::{Basis, DiffOperator};

#[derive(Clone, Debug, PartialEq)]
pub enum Point<E> {
    Finite(E),
    Infinity,
}

impl<E> Point<E> {
    pub fn is_infinity(&self) -> bool {
        matches!(self, Point::Infinity)
    }
}

/// θ_t-basis form of `L` in the local variable `t` (`x = x0 + t`, or `x = 1/t`
/// at infinity), multiplied by the least power of `t` making it polynomial.
pub fn local_operator<F: Field>(l: &DiffOperator<F>, point: &Point<F::Elem>) -> DiffOperator<F> {
    let f = &l.field;
    match point {
        Point::Finite(x0) => {
            let dx = l.to_dx();
            let shifted: Vec<Poly<F::Elem>> =
                dx.coeffs.iter().map(|c| poly::taylor_shift(f, c, x0)).collect();
            DiffOperator::dx(f.clone(), shifted).to_theta_shifted().0
        }
        Point::Infinity => {
            // θ_x = −θ_t and a_i(x) t^D = reverse of a_i
            let th = l.to_theta_shifted().0;
            let dmax = th.degree();
            let mut out: Vec<Poly<F::Elem>> = Vec::with_capacity(th.coeffs.len());
            for (i, c) in th.coeffs.iter().enumerate() {
                let mut padded = c.clone();
                padded.resize(dmax + 1, f.zero());
                padded.reverse();
                let sign = if i % 2 == 0 { f.one() } else { f.from_i64(-1) };
                out.push(poly::scale(f, &padded, &sign));
            }
            DiffOperator::theta(f.clone(), out)
        }
    }
}

/// Indicial polynomial in `ρ` of a θ-basis operator at `t = 0`: the
/// lowest-valuation part.
pub fn indicial_of_theta<F: Field>(op: &DiffOperator<F>) -> Poly<F::Elem> {
    let f = &op.field;
    assert_eq!(op.basis, Basis::Theta);
    let v = op
        .coeffs
        .iter()
        .filter_map(|c| c.iter().position(|x| !f.is_zero(x)))
        .min()
        .expect("nonzero operator");
    poly::trim(
        f,
        op.coeffs
            .iter()
            .map(|c| c.get(v).cloned().unwrap_or_else(|| f.zero()))
            .collect(),
    )
}

pub fn indicial_polynomial<F: Field>(l: &DiffOperator<F>, point: &Point<F::Elem>) -> Result<Poly<F::Elem>> {
    if l.is_zero() {
        return Err(Error::ZeroOperator);
    }
    Ok(indicial_of_theta(&local_operator(l, point)))
}

/// Local exponents at a point.
#[derive(Clone, Debug, PartialEq)]
pub struct LocalData {
    pub point: Point<BigRational>,
    /// Indicial polynomial, primitive over Z, low degree first.
    pub indicial: Poly<BigRational>,
    pub exponents: Vec<(BigRational, usize)>,
    /// Monic factor without rational roots.
    pub residual: Poly<BigRational>,
}

impl LocalData {
    /// Exponents listed with repetition, ascending.
    pub fn exponent_multiset(&self) -> Vec<BigRational> {
        self.exponents
            .iter()
            .flat_map(|(e, m)| std::iter::repeat(e.clone()).take(*m))
            .collect()
    }

    pub fn report(&self) -> LocalReport {
        LocalReport {
            point: match &self.point {
                Point::Finite(x) => rational_display(x),
                Point::Infinity => "infinity".into(),
            },
            indicial: self.indicial.iter().map(rational_display).collect(),
            exponents: self
                .exponents
                .iter()
                .map(|(e, m)| ExponentEntry {
                    rho: rational_display(e),
                    multiplicity: *m,
                })
                .collect(),
            residual_degree: self.residual.len().saturating_sub(1),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ExponentEntry {
    pub rho: String,
    pub multiplicity: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct LocalReport {
    pub point: String,
    pub indicial: Vec<String>,
    pub exponents: Vec<ExponentEntry>,
    pub residual_degree: usize,
}

/// Indicial polynomial and rational exponents of an exact operator.
pub fn indicial_data(l: &DiffOperator<Rationals>, point: &Point<BigRational>) -> Result<LocalData> {
    let ind = indicial_polynomial(l, point)?;
    let prim = poly::to_rational_poly(&poly::primitive_integer(&ind));
    let rd = poly::rational_roots(&prim);
    Ok(LocalData {
        point: point.clone(),
        indicial: prim,
        exponents: rd.roots,
        residual: rd.residual,
    })
}

/// Operator for `u` where `y = t^ρ·u` and `t` is the local variable at `point`:
/// the local θ_t form with `θ → θ + ρ`.
pub fn shift_gauge<F: Field>(l: &DiffOperator<F>, point: &Point<F::Elem>, rho: &F::Elem) -> DiffOperator<F> {
    let f = &l.field;
    let loc = local_operator(l, point);
    let r = loc.order();
    // (θ+ρ)^i = Σ_k C(i,k) ρ^{i−k} θ^k
    let mut out: Vec<Poly<F::Elem>> = vec![Vec::new(); r + 1];
    for (i, c) in loc.coeffs.iter().enumerate() {
        let mut binom = f.one();
        for k in 0..=i {
            if k > 0 {
                binom = f.mul(&binom, &f.from_i64((i - k + 1) as i64));
                binom = f.mul(&binom, &f.inv(&f.from_i64(k as i64)).unwrap());
            }
            let w = f.mul(&binom, &f.pow(rho, (i - k) as u64));
            out[k] = poly::add(f, &out[k], &poly::scale(f, c, &w));
        }
    }
    DiffOperator::theta(f.clone(), out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::rat;

    fn q(v: &[i64]) -> Poly<BigRational> {
        poly::trim(&Rationals, v.iter().map(|&c| rat(c, 1)).collect())
    }

    #[test]
    fn gauge_removes_exponent() {
        // θ − 5/2 gauged by 5/2 at 0 is θ
        let l = DiffOperator::theta(Rationals, vec![vec![rat(-5, 2)], vec![rat(1, 1)]]);
        let g = shift_gauge(&l, &Point::Finite(rat(0, 1)), &rat(5, 2));
        assert_eq!(g.coeffs, vec![vec![], q(&[1])]);
    }

    #[test]
    fn hypergeometric_exponents() {
        // Gauss operator x(1-x)D^2 + (c - (a+b+1)x)D - ab with a=1/2,b=1/2,c=1
        let l = DiffOperator::dx(
            Rationals,
            vec![vec![rat(-1, 4)], vec![rat(1, 1), rat(-2, 1)], vec![rat(0, 1), rat(1, 1), rat(-1, 1)]],
        );
        let at0 = indicial_data(&l, &Point::Finite(rat(0, 1))).unwrap();
        assert_eq!(at0.exponents, vec![(rat(0, 1), 2)]);
        let at1 = indicial_data(&l, &Point::Finite(rat(1, 1))).unwrap();
        assert_eq!(at1.exponents, vec![(rat(0, 1), 2)]);
        let inf = indicial_data(&l, &Point::Infinity).unwrap();
        assert_eq!(inf.exponents, vec![(rat(1, 2), 2)]);
        let reg = indicial_data(&l, &Point::Finite(rat(3, 1))).unwrap();
        assert_eq!(reg.exponents, vec![(rat(0, 1), 1), (rat(1, 1), 1)]);
    }

    /// `θ(θ+b1−1)(θ+b2−1) − x(θ+a1)(θ+a2)(θ+a3)`.
    fn hyp32(a: [BigRational; 3], b: [BigRational; 2]) -> DiffOperator<Rationals> {
        let f = Rationals;
        let lin = |c: &BigRational| vec![c.clone(), rat(1, 1)];
        let top = [lin(&rat(0, 1)), lin(&(&b[0] - rat(1, 1))), lin(&(&b[1] - rat(1, 1)))]
            .iter()
            .fold(vec![rat(1, 1)], |acc, p| poly::mul(&f, &acc, p));
        let bot = a.iter().fold(vec![rat(1, 1)], |acc, c| poly::mul(&f, &acc, &lin(c)));
        let coeffs = (0..4)
            .map(|i| vec![top.get(i).cloned().unwrap_or(rat(0, 1)), -bot.get(i).cloned().unwrap_or(rat(0, 1))])
            .collect();
        DiffOperator::theta(f, coeffs)
    }

    fn exponent_sum(d: &LocalData) -> BigRational {
        d.exponent_multiset().iter().fold(rat(0, 1), |acc, e| acc + e)
    }

    use proptest::prelude::*;

    fn small_rat() -> impl Strategy<Value = BigRational> {
        (-7i64..=7, 1i64..=3).prop_map(|(n, d)| rat(n, d))
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn fuchs_relation_and_gauge_shift(
            a in proptest::array::uniform3(small_rat()),
            b in proptest::array::uniform2(small_rat()),
        ) {
            let l = hyp32(a, b);
            let pts = [Point::Finite(rat(0, 1)), Point::Finite(rat(1, 1)), Point::Infinity];
            let data: Vec<LocalData> = pts.iter().map(|p| indicial_data(&l, p).unwrap()).collect();
            for d in &data {
                let total: usize = d.exponents.iter().map(|(_, m)| m).sum();
                prop_assert_eq!(total + d.residual.len().saturating_sub(1), 3);
            }
            // three singular points, order three: sum of exponents is 3
            let sum = data.iter().fold(rat(0, 1), |acc, d| acc + exponent_sum(d));
            prop_assert_eq!(sum, rat(3, 1));
            // gauging by an exponent at 1 shifts every exponent there
            let rho = data[1].exponent_multiset()[0].clone();
            let g = shift_gauge(&l, &Point::Finite(rat(1, 1)), &rho);
            let shifted = indicial_data(&g, &Point::Finite(rat(0, 1))).unwrap();
            let want: Vec<BigRational> = data[1].exponent_multiset().iter().map(|e| e - &rho).collect();
            prop_assert_eq!(shifted.exponent_multiset(), want);
        }
    }
}
