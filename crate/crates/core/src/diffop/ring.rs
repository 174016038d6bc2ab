//! Differential coefficient rings: polynomials and rational functions in `x`.

use num_bigint::BigInt;
use num_rational::BigRational;
use rand::RngCore;

use crate::error::{Error, Result};
use crate::field::Field;
use crate::poly::{self, Poly};

/// A commutative ring with a derivation `d/dx`.
pub trait DiffRing: Clone {
    type Elem: Clone + PartialEq + std::fmt::Debug;
    fn zero(&self) -> Self::Elem;
    fn from_i64(&self, v: i64) -> Self::Elem;
    fn is_zero(&self, a: &Self::Elem) -> bool;
    fn add(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn sub(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn mul(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn neg(&self, a: &Self::Elem) -> Self::Elem;
    fn deriv(&self, a: &Self::Elem) -> Self::Elem;
}

/// `F[x]`.
#[derive(Clone, Debug)]
pub struct PolyRing<F: Field>(pub F);

impl<F: Field> DiffRing for PolyRing<F> {
    type Elem = Poly<F::Elem>;
    fn zero(&self) -> Self::Elem {
        Vec::new()
    }
    fn from_i64(&self, v: i64) -> Self::Elem {
        poly::constant(&self.0, self.0.from_i64(v))
    }
    fn is_zero(&self, a: &Self::Elem) -> bool {
        a.is_empty()
    }
    fn add(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem {
        poly::add(&self.0, a, b)
    }
    fn sub(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem {
        poly::sub(&self.0, a, b)
    }
    fn mul(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem {
        poly::mul(&self.0, a, b)
    }
    fn neg(&self, a: &Self::Elem) -> Self::Elem {
        poly::neg(&self.0, a)
    }
    fn deriv(&self, a: &Self::Elem) -> Self::Elem {
        poly::deriv(&self.0, a)
    }
}

/// Reduced fraction `num/den` with monic `den`.
#[derive(Clone, Debug, PartialEq)]
pub struct RatFunc<E> {
    pub num: Poly<E>,
    pub den: Poly<E>,
}

/// `F(x)` as a field.
#[derive(Clone, Debug)]
pub struct RatFuncField<F: Field>(pub F);

impl<F: Field> RatFuncField<F> {
    pub fn make(&self, num: Poly<F::Elem>, den: Poly<F::Elem>) -> RatFunc<F::Elem> {
        let f = &self.0;
        let num = poly::trim(f, num);
        let den = poly::trim(f, den);
        assert!(!den.is_empty(), "zero denominator");
        if num.is_empty() {
            return RatFunc {
                num,
                den: poly::constant(f, f.one()),
            };
        }
        let g = poly::gcd(f, &num, &den);
        let (n, _) = poly::divrem(f, &num, &g);
        let (d, _) = poly::divrem(f, &den, &g);
        let lc = f.inv(d.last().unwrap()).unwrap();
        RatFunc {
            num: poly::scale(f, &n, &lc),
            den: poly::scale(f, &d, &lc),
        }
    }

    pub fn from_poly(&self, p: Poly<F::Elem>) -> RatFunc<F::Elem> {
        RatFunc {
            num: poly::trim(&self.0, p),
            den: poly::constant(&self.0, self.0.one()),
        }
    }

    pub fn is_poly(&self, a: &RatFunc<F::Elem>) -> bool {
        a.den.len() == 1
    }
}

impl<F: Field> DiffRing for RatFuncField<F> {
    type Elem = RatFunc<F::Elem>;
    fn zero(&self) -> Self::Elem {
        self.from_poly(Vec::new())
    }
    fn from_i64(&self, v: i64) -> Self::Elem {
        self.from_poly(vec![self.0.from_i64(v)])
    }
    fn is_zero(&self, a: &Self::Elem) -> bool {
        a.num.is_empty()
    }
    fn add(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem {
        let f = &self.0;
        if a.den == b.den {
            return self.make(poly::add(f, &a.num, &b.num), a.den.clone());
        }
        let num = poly::add(f, &poly::mul(f, &a.num, &b.den), &poly::mul(f, &b.num, &a.den));
        self.make(num, poly::mul(f, &a.den, &b.den))
    }
    fn sub(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem {
        DiffRing::add(self, a, &DiffRing::neg(self, b))
    }
    fn mul(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem {
        let f = &self.0;
        self.make(poly::mul(f, &a.num, &b.num), poly::mul(f, &a.den, &b.den))
    }
    fn neg(&self, a: &Self::Elem) -> Self::Elem {
        RatFunc {
            num: poly::neg(&self.0, &a.num),
            den: a.den.clone(),
        }
    }
    fn deriv(&self, a: &Self::Elem) -> Self::Elem {
        let f = &self.0;
        let num = poly::sub(
            f,
            &poly::mul(f, &poly::deriv(f, &a.num), &a.den),
            &poly::mul(f, &a.num, &poly::deriv(f, &a.den)),
        );
        self.make(num, poly::mul(f, &a.den, &a.den))
    }
}

impl<F: Field> Field for RatFuncField<F> {
    type Elem = RatFunc<F::Elem>;
    fn zero(&self) -> Self::Elem {
        DiffRing::zero(self)
    }
    fn one(&self) -> Self::Elem {
        DiffRing::from_i64(self, 1)
    }
    fn from_i64(&self, v: i64) -> Self::Elem {
        DiffRing::from_i64(self, v)
    }
    fn from_bigint(&self, v: &BigInt) -> Self::Elem {
        self.from_poly(vec![self.0.from_bigint(v)])
    }
    fn from_rational(&self, v: &BigRational) -> Option<Self::Elem> {
        Some(self.from_poly(vec![self.0.from_rational(v)?]))
    }
    fn add(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem {
        DiffRing::add(self, a, b)
    }
    fn sub(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem {
        DiffRing::sub(self, a, b)
    }
    fn mul(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem {
        DiffRing::mul(self, a, b)
    }
    fn neg(&self, a: &Self::Elem) -> Self::Elem {
        DiffRing::neg(self, a)
    }
    fn inv(&self, a: &Self::Elem) -> Option<Self::Elem> {
        if a.num.is_empty() {
            None
        } else {
            Some(self.make(a.den.clone(), a.num.clone()))
        }
    }
    fn is_zero(&self, a: &Self::Elem) -> bool {
        a.num.is_empty()
    }
    fn modulus(&self) -> Option<u64> {
        self.0.modulus()
    }
    fn random(&self, rng: &mut dyn RngCore) -> Self::Elem {
        self.from_poly(vec![self.0.random(rng)])
    }
    fn format(&self, a: &Self::Elem) -> String {
        format!(
            "({})/({})",
            poly_to_string(&self.0, &a.num),
            poly_to_string(&self.0, &a.den)
        )
    }
    fn parse(&self, _s: &str) -> Result<Self::Elem> {
        Err(Error::Parse("rational functions are not parsed".into()))
    }
}

/// `c0 + c1*x + …` with field-formatted coefficients.
pub fn poly_to_string<F: Field>(f: &F, p: &[F::Elem]) -> String {
    if p.is_empty() {
        return "0".into();
    }
    let terms: Vec<String> = p
        .iter()
        .enumerate()
        .filter(|(_, c)| !f.is_zero(c))
        .map(|(i, c)| match i {
            0 => f.format(c),
            1 => format!("{}*x", f.format(c)),
            _ => format!("{}*x^{}", f.format(c), i),
        })
        .collect();
    terms.join(" + ")
}

/// Product of two operators `Σ a_i D^i` and `Σ b_j D^j` in the `D_x` basis via
/// `D^i b = Σ_k C(i,k) b^{(k)} D^{i−k}`.
pub fn leibniz_mul<R: DiffRing>(r: &R, a: &[R::Elem], b: &[R::Elem]) -> Vec<R::Elem> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![r.zero(); a.len() + b.len() - 1];
    // derivative tower of each b_j
    let max_i = a.len() - 1;
    let towers: Vec<Vec<R::Elem>> = b
        .iter()
        .map(|bj| {
            let mut t = vec![bj.clone()];
            for k in 0..max_i {
                let next = r.deriv(&t[k]);
                t.push(next);
            }
            t
        })
        .collect();
    for (i, ai) in a.iter().enumerate() {
        if r.is_zero(ai) {
            continue;
        }
        let mut binom: i64 = 1;
        for k in 0..=i {
            for (j, tower) in towers.iter().enumerate() {
                let bk = &tower[k];
                if r.is_zero(bk) {
                    continue;
                }
                let term = r.mul(&r.mul(ai, bk), &r.from_i64(binom));
                let idx = i - k + j;
                out[idx] = r.add(&out[idx], &term);
            }
            binom = binom * (i - k) as i64 / (k + 1) as i64;
        }
    }
    trim_ops(r, out)
}

/// Formal adjoint `Σ (−D)^i ∘ a_i`.
pub fn leibniz_adjoint<R: DiffRing>(r: &R, a: &[R::Elem]) -> Vec<R::Elem> {
    let mut out: Vec<R::Elem> = Vec::new();
    for (i, ai) in a.iter().enumerate() {
        let mut mdi = vec![r.zero(); i + 1];
        mdi[i] = r.from_i64(if i % 2 == 0 { 1 } else { -1 });
        let term = leibniz_mul(r, &mdi, &[ai.clone()]);
        out = add_ops(r, &out, &term);
    }
    trim_ops(r, out)
}

pub fn add_ops<R: DiffRing>(r: &R, a: &[R::Elem], b: &[R::Elem]) -> Vec<R::Elem> {
    let n = a.len().max(b.len());
    let out = (0..n)
        .map(|i| match (a.get(i), b.get(i)) {
            (Some(x), Some(y)) => r.add(x, y),
            (Some(x), None) => x.clone(),
            (None, Some(y)) => y.clone(),
            _ => unreachable!(),
        })
        .collect();
    trim_ops(r, out)
}

pub fn trim_ops<R: DiffRing>(r: &R, mut a: Vec<R::Elem>) -> Vec<R::Elem> {
    while a.last().is_some_and(|c| r.is_zero(c)) {
        a.pop();
    }
    a
}
