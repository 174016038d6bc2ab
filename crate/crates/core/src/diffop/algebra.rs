//! Operators with rational-function coefficients: right division and
//! decomposition checks.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::Field;
use crate::poly::{self, Poly};

use super::operator::{Basis, DiffOperator};
use super::ring::{add_ops, leibniz_adjoint, leibniz_mul, trim_ops, DiffRing, RatFunc, RatFuncField};

/// `Σ a_i(x) D_x^i` with `a_i ∈ F(x)`.
#[derive(Clone, Debug)]
pub struct RatOperator<F: Field> {
    pub ring: RatFuncField<F>,
    pub coeffs: Vec<RatFunc<F::Elem>>,
}

impl<F: Field> PartialEq for RatOperator<F> {
    fn eq(&self, other: &Self) -> bool {
        self.coeffs == other.coeffs
    }
}

impl<F: Field> RatOperator<F> {
    pub fn new(field: F, coeffs: Vec<RatFunc<F::Elem>>) -> Self {
        let ring = RatFuncField(field);
        let coeffs = trim_ops(&ring, coeffs);
        RatOperator { ring, coeffs }
    }

    pub fn from_operator(l: &DiffOperator<F>) -> Self {
        let dx = l.to_dx();
        let ring = RatFuncField(l.field.clone());
        let coeffs = dx.coeffs.iter().map(|c| ring.from_poly(c.clone())).collect();
        Self::new(l.field.clone(), coeffs)
    }

    /// Multiplication operator by `r(x)`.
    pub fn from_ratfunc(field: F, r: RatFunc<F::Elem>) -> Self {
        Self::new(field, vec![r])
    }

    pub fn one(field: F) -> Self {
        let ring = RatFuncField(field.clone());
        Self::new(field, vec![DiffRing::from_i64(&ring, 1)])
    }

    pub fn field(&self) -> &F {
        &self.ring.0
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Order; `None` for the zero operator.
    pub fn order(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn add(&self, other: &Self) -> Self {
        Self::new(self.field().clone(), add_ops(&self.ring, &self.coeffs, &other.coeffs))
    }

    pub fn neg(&self) -> Self {
        let c = self.coeffs.iter().map(|a| DiffRing::neg(&self.ring, a)).collect();
        Self::new(self.field().clone(), c)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Self) -> Self {
        Self::new(self.field().clone(), leibniz_mul(&self.ring, &self.coeffs, &other.coeffs))
    }

    pub fn adjoint(&self) -> Self {
        Self::new(self.field().clone(), leibniz_adjoint(&self.ring, &self.coeffs))
    }

    pub fn scale(&self, c: &RatFunc<F::Elem>) -> Self {
        let k = &self.ring;
        Self::new(self.field().clone(), self.coeffs.iter().map(|a| DiffRing::mul(k, c, a)).collect())
    }

    /// Divides by the leading coefficient.
    pub fn monic(&self) -> Self {
        match self.coeffs.last() {
            None => self.clone(),
            Some(lc) => self.scale(&Field::inv(&self.ring, lc).unwrap()),
        }
    }

    /// Euclidean right division: `self = q·b + r` with `order(r) < order(b)`.
    pub fn right_divide(&self, b: &Self) -> Result<(Self, Self)> {
        let k = &self.ring;
        let f = self.field().clone();
        let rb = b.order().ok_or(Error::ZeroOperator)?;
        let lb_inv = Field::inv(k, b.coeffs.last().unwrap()).ok_or(Error::ZeroOperator)?;
        let mut q: Vec<RatFunc<F::Elem>> = Vec::new();
        let mut r = self.clone();
        while let Some(ra) = r.order() {
            if ra < rb {
                break;
            }
            let shift = ra - rb;
            let c = DiffRing::mul(k, r.coeffs.last().unwrap(), &lb_inv);
            let mut mono = vec![DiffRing::zero(k); shift + 1];
            mono[shift] = c.clone();
            let sub = leibniz_mul(k, &mono, &b.coeffs);
            let mut next = r.coeffs.clone();
            for (i, s) in sub.iter().enumerate() {
                next[i] = DiffRing::sub(k, &next[i], s);
            }
            // the leading term cancels exactly
            next.truncate(ra);
            r = Self::new(f.clone(), next);
            if q.len() <= shift {
                q.resize(shift + 1, DiffRing::zero(k));
            }
            q[shift] = DiffRing::add(k, &q[shift], &c);
        }
        Ok((Self::new(f, q), r))
    }

    /// Polynomial operator obtained by clearing denominators on the left.
    pub fn clear_denominators(&self) -> DiffOperator<F> {
        let f = self.field();
        let den = self.coeffs.iter().fold(poly::constant(f, f.one()), |acc, c| {
            let g = poly::gcd(f, &acc, &c.den);
            poly::mul(f, &acc, &poly::divrem(f, &c.den, &g).0)
        });
        let coeffs: Vec<Poly<F::Elem>> = self
            .coeffs
            .iter()
            .map(|c| {
                let (m, rem) = poly::divrem(f, &den, &c.den);
                debug_assert!(rem.is_empty());
                poly::mul(f, &c.num, &m)
            })
            .collect();
        DiffOperator::new(f.clone(), Basis::Dx, coeffs)
    }

    /// Equality up to a nonzero constant factor.
    pub fn eq_up_to_unit(&self, other: &Self) -> bool {
        let (Some(a), Some(b)) = (self.coeffs.last(), other.coeffs.last()) else {
            return self.is_zero() && other.is_zero();
        };
        let ratio = DiffRing::mul(&self.ring, a, &Field::inv(&self.ring, b).unwrap());
        if ratio.num.len() != 1 || ratio.den.len() != 1 {
            return false;
        }
        other.scale(&ratio) == *self
    }
}

/// Self-adjointness up to the sign `(−1)^order`.
pub fn is_self_adjoint<F: Field>(u: &RatOperator<F>) -> bool {
    let adj = u.adjoint();
    if adj == *u {
        return true;
    }
    u.order().is_some_and(|r| r % 2 == 1) && adj == u.neg()
}

#[derive(Clone, Debug, Serialize)]
pub struct DecompositionReport {
    pub matches: bool,
    pub self_adjoint: Vec<bool>,
}

impl DecompositionReport {
    pub fn verified(&self) -> bool {
        self.matches && self.self_adjoint.iter().all(|&b| b)
    }
}

/// Expands the product pattern for 2 or 5 factors, right-multiplies by `r(x)`
/// and compares with `target` up to a constant.
///
/// Two factors: `(U₂U₁ + 1)·r`. Five factors:
/// `(U₅U₄U₃U₂U₁ + U₅U₄U₁ + U₅U₂U₁ + U₅U₄U₃ + U₃U₂U₁ + U₁ + U₃ + U₅)·r`.
pub fn decomposition_verify<F: Field>(
    us: &[DiffOperator<F>],
    r: &RatFunc<F::Elem>,
    target: &DiffOperator<F>,
) -> Result<DecompositionReport> {
    let f = target.field.clone();
    let u: Vec<RatOperator<F>> = us.iter().map(RatOperator::from_operator).collect();
    let chain = |idx: &[usize]| {
        idx.iter()
            .fold(RatOperator::one(f.clone()), |acc, &i| acc.mul(&u[i - 1]))
    };
    let bracket = match u.len() {
        2 => chain(&[2, 1]).add(&RatOperator::one(f.clone())),
        5 => {
            let terms: [&[usize]; 8] = [
                &[5, 4, 3, 2, 1],
                &[5, 4, 1],
                &[5, 2, 1],
                &[5, 4, 3],
                &[3, 2, 1],
                &[1],
                &[3],
                &[5],
            ];
            terms
                .iter()
                .fold(RatOperator::new(f.clone(), Vec::new()), |acc, t| acc.add(&chain(t)))
        }
        n => return Err(Error::Arity { expected: 5, got: n }),
    };
    let lhs = bracket.mul(&RatOperator::from_ratfunc(f.clone(), r.clone()));
    let rhs = RatOperator::from_operator(target);
    Ok(DecompositionReport {
        matches: lhs.eq_up_to_unit(&rhs),
        self_adjoint: u.iter().map(is_self_adjoint).collect(),
    })
}
