//! Dense univariate polynomials over a [`Field`], stored low degree first and
//! trimmed (the zero polynomial is the empty vector).

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::field::{common_denominator, content, Field, Rationals};
use crate::modular::{nth_prime, rational_reconstruct_balanced, PrimeField};

pub type Poly<E> = Vec<E>;

pub fn trim<F: Field>(f: &F, mut p: Poly<F::Elem>) -> Poly<F::Elem> {
    while p.last().is_some_and(|c| f.is_zero(c)) {
        p.pop();
    }
    p
}

pub fn degree<E>(p: &[E]) -> Option<usize> {
    p.len().checked_sub(1)
}

pub fn constant<F: Field>(f: &F, c: F::Elem) -> Poly<F::Elem> {
    trim(f, vec![c])
}

/// `x^k`.
pub fn monomial<F: Field>(f: &F, k: usize) -> Poly<F::Elem> {
    let mut p = vec![f.zero(); k + 1];
    p[k] = f.one();
    p
}

pub fn add<F: Field>(f: &F, a: &[F::Elem], b: &[F::Elem]) -> Poly<F::Elem> {
    let n = a.len().max(b.len());
    let out = (0..n)
        .map(|i| match (a.get(i), b.get(i)) {
            (Some(x), Some(y)) => f.add(x, y),
            (Some(x), None) => x.clone(),
            (None, Some(y)) => y.clone(),
            (None, None) => unreachable!(),
        })
        .collect();
    trim(f, out)
}

pub fn neg<F: Field>(f: &F, a: &[F::Elem]) -> Poly<F::Elem> {
    a.iter().map(|x| f.neg(x)).collect()
}

pub fn sub<F: Field>(f: &F, a: &[F::Elem], b: &[F::Elem]) -> Poly<F::Elem> {
    add(f, a, &neg(f, b))
}

pub fn scale<F: Field>(f: &F, a: &[F::Elem], c: &F::Elem) -> Poly<F::Elem> {
    if f.is_zero(c) {
        return Vec::new();
    }
    trim(f, a.iter().map(|x| f.mul(x, c)).collect())
}

pub fn mul<F: Field>(f: &F, a: &[F::Elem], b: &[F::Elem]) -> Poly<F::Elem> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![f.zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        if f.is_zero(x) {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            out[i + j] = f.add(&out[i + j], &f.mul(x, y));
        }
    }
    trim(f, out)
}

/// Multiplies by `x^k`.
pub fn shift_up<F: Field>(f: &F, a: &[F::Elem], k: usize) -> Poly<F::Elem> {
    if a.is_empty() {
        return Vec::new();
    }
    let mut out = vec![f.zero(); k];
    out.extend_from_slice(a);
    out
}

pub fn deriv<F: Field>(f: &F, a: &[F::Elem]) -> Poly<F::Elem> {
    trim(
        f,
        a.iter()
            .enumerate()
            .skip(1)
            .map(|(i, c)| f.mul(c, &f.from_i64(i as i64)))
            .collect(),
    )
}

pub fn eval<F: Field>(f: &F, a: &[F::Elem], x: &F::Elem) -> F::Elem {
    a.iter()
        .rev()
        .fold(f.zero(), |acc, c| f.add(&f.mul(&acc, x), c))
}

/// `a(x + s)`.
pub fn taylor_shift<F: Field>(f: &F, a: &[F::Elem], s: &F::Elem) -> Poly<F::Elem> {
    let mut c = a.to_vec();
    let n = c.len();
    for i in 0..n {
        for j in (i..n.saturating_sub(1)).rev() {
            let t = f.mul(&c[j + 1], s);
            c[j] = f.add(&c[j], &t);
        }
    }
    trim(f, c)
}

/// Powers `p^0, …, p^k`.
pub fn powers<F: Field>(f: &F, p: &[F::Elem], k: usize) -> Vec<Poly<F::Elem>> {
    let mut out = vec![constant(f, f.one())];
    for i in 0..k {
        let next = mul(f, &out[i], p);
        out.push(next);
    }
    out
}

/// `a(c·x)`.
pub fn scale_var<F: Field>(f: &F, a: &[F::Elem], c: &F::Elem) -> Poly<F::Elem> {
    let mut pw = f.one();
    let mut out = Vec::with_capacity(a.len());
    for x in a {
        out.push(f.mul(x, &pw));
        pw = f.mul(&pw, c);
    }
    trim(f, out)
}

/// Euclidean division; panics on a zero divisor.
pub fn divrem<F: Field>(f: &F, a: &[F::Elem], b: &[F::Elem]) -> (Poly<F::Elem>, Poly<F::Elem>) {
    let b = trim(f, b.to_vec());
    let db = degree(&b).expect("division by zero polynomial");
    let lc_inv = f.inv(&b[db]).expect("invertible leading coefficient");
    let mut r = trim(f, a.to_vec());
    if r.len() < b.len() {
        return (Vec::new(), r);
    }
    let mut q = vec![f.zero(); r.len() - db];
    while r.len() > db {
        let k = r.len() - 1 - db;
        let c = f.mul(r.last().unwrap(), &lc_inv);
        for (i, bi) in b.iter().enumerate() {
            r[k + i] = f.sub(&r[k + i], &f.mul(&c, bi));
        }
        q[k] = c;
        r.pop();
        r = trim(f, r);
    }
    (trim(f, q), r)
}

pub fn rem<F: Field>(f: &F, a: &[F::Elem], b: &[F::Elem]) -> Poly<F::Elem> {
    divrem(f, a, b).1
}

pub fn monic<F: Field>(f: &F, a: &[F::Elem]) -> Poly<F::Elem> {
    match a.last() {
        None => Vec::new(),
        Some(lc) => scale(f, a, &f.inv(lc).unwrap()),
    }
}

/// Monic gcd.
pub fn gcd<F: Field>(f: &F, a: &[F::Elem], b: &[F::Elem]) -> Poly<F::Elem> {
    let mut a = trim(f, a.to_vec());
    let mut b = trim(f, b.to_vec());
    while !b.is_empty() {
        let r = rem(f, &a, &b);
        a = b;
        b = r;
    }
    monic(f, &a)
}

fn trim_int(mut a: Vec<BigInt>) -> Vec<BigInt> {
    while a.last().is_some_and(|c| c.is_zero()) {
        a.pop();
    }
    a
}

/// Pseudo-remainder of `a` by `b`: `lc(b)^k·a mod b`.
fn pseudo_rem(a: &[BigInt], b: &[BigInt]) -> Vec<BigInt> {
    let lc = b.last().expect("nonzero divisor");
    let mut r = trim_int(a.to_vec());
    while r.len() >= b.len() {
        let top = r.last().unwrap().clone();
        let k = r.len() - b.len();
        for c in r.iter_mut() {
            *c *= lc;
        }
        for (i, bi) in b.iter().enumerate() {
            r[k + i] -= &top * bi;
        }
        r = trim_int(r);
    }
    r
}

/// Monic gcd over Q. Coprimality is settled modulo a prime not dividing the
/// leading coefficients; otherwise a primitive remainder sequence is run.
pub fn gcd_rational(a: &[BigRational], b: &[BigRational]) -> Poly<BigRational> {
    let q = Rationals;
    let (a, b) = (trim(&q, a.to_vec()), trim(&q, b.to_vec()));
    if a.is_empty() || b.is_empty() {
        return monic(&q, if a.is_empty() { &b } else { &a });
    }
    let (ai, bi) = (primitive_integer(&a), primitive_integer(&b));
    for k in 0..4 {
        let fp = PrimeField::new(nth_prime(k)).expect("prime");
        let red = |v: &[BigInt]| -> Vec<u64> { v.iter().map(|c| fp.from_bigint(c)).collect() };
        let (ap, bp) = (red(&ai), red(&bi));
        if ap.last() == Some(&0) || bp.last() == Some(&0) {
            continue;
        }
        if gcd(&fp, &ap, &bp).len() <= 1 {
            return vec![BigRational::one()];
        }
        break;
    }
    let (mut x, mut y) = if ai.len() >= bi.len() { (ai, bi) } else { (bi, ai) };
    while !y.is_empty() {
        let r = make_primitive(&pseudo_rem(&x, &y));
        x = y;
        y = r;
    }
    monic(&q, &to_rational_poly(&x))
}

pub fn from_roots<F: Field>(f: &F, roots: &[F::Elem]) -> Poly<F::Elem> {
    roots.iter().fold(constant(f, f.one()), |acc, r| {
        mul(f, &acc, &[f.neg(r), f.one()])
    })
}

pub fn is_zero<E>(a: &[E]) -> bool {
    a.is_empty()
}

/// `base^e mod m`.
pub fn powmod<F: Field>(f: &F, base: &[F::Elem], mut e: BigUint, m: &[F::Elem]) -> Poly<F::Elem> {
    let mut r = rem(f, &constant(f, f.one()), m);
    let mut b = rem(f, base, m);
    while !e.is_zero() {
        if e.bit(0) {
            r = rem(f, &mul(f, &r, &b), m);
        }
        b = rem(f, &mul(f, &b, &b), m);
        e >>= 1u32;
    }
    r
}

/// Distinct roots in F_p of `a` (nonzero), by `gcd(a, x^p − x)` and
/// equal-degree splitting with a seeded generator.
pub fn roots_mod_p(fld: &PrimeField, a: &[u64]) -> Vec<u64> {
    let a = trim(fld, a.to_vec());
    if a.len() <= 1 {
        return Vec::new();
    }
    let p = fld.modulus();
    let x = vec![0, 1];
    let xp = powmod(fld, &x, BigUint::from(p), &a);
    let g = gcd(fld, &a, &sub(fld, &xp, &x));
    let mut rng = ChaCha8Rng::seed_from_u64(p ^ 0x5eed);
    let mut out = Vec::new();
    split_linear(fld, g, &mut rng, &mut out);
    out.sort_unstable();
    out
}

fn split_linear(fld: &PrimeField, g: Poly<u64>, rng: &mut ChaCha8Rng, out: &mut Vec<u64>) {
    match degree(&g) {
        None | Some(0) => {}
        Some(1) => out.push(fld.neg(fld.mul(g[0], PrimeField::inv(fld, g[1]).unwrap()))),
        Some(_) => {
            let p = fld.modulus();
            loop {
                let s = Field::random(fld, rng);
                let h = powmod(fld, &[s, 1], BigUint::from((p - 1) / 2), &g);
                let h = sub(fld, &h, &[1]);
                let d = gcd(fld, &g, &h);
                let dd = degree(&d).unwrap_or(0);
                if dd > 0 && dd < g.len() - 1 {
                    let other = divrem(fld, &g, &d).0;
                    split_linear(fld, d, rng, out);
                    split_linear(fld, monic(fld, &other), rng, out);
                    return;
                }
            }
        }
    }
}

/// Integer polynomial with content 1 and positive leading coefficient
/// proportional to `a`.
pub fn primitive_integer(a: &[BigRational]) -> Vec<BigInt> {
    let den = common_denominator(a.iter());
    let ints: Vec<BigInt> = a.iter().map(|c| (c * &den).to_integer()).collect();
    let g = content(&ints);
    if g.is_zero() {
        return ints;
    }
    let sign = if ints.iter().rev().find(|c| !c.is_zero()).unwrap().is_negative() {
        -BigInt::one()
    } else {
        BigInt::one()
    };
    ints.iter().map(|c| c / &g * &sign).collect()
}

pub fn to_rational_poly(a: &[BigInt]) -> Poly<BigRational> {
    trim(&Rationals, a.iter().map(|c| BigRational::from_integer(c.clone())).collect())
}

/// Rational roots with multiplicities together with the residual factor
/// (monic over Q) that has no rational roots found.
#[derive(Clone, Debug, PartialEq)]
pub struct RootData {
    pub roots: Vec<(BigRational, usize)>,
    pub residual: Poly<BigRational>,
}

/// Rational roots of a nonzero polynomial over Q. Candidates come from roots
/// modulo 62-bit primes followed by rational reconstruction; each is verified
/// exactly and divided out to obtain its multiplicity.
pub fn rational_roots(a: &[BigRational]) -> RootData {
    let q = Rationals;
    let mut rest = monic(&q, &trim(&q, a.to_vec()));
    assert!(!rest.is_empty(), "zero polynomial");
    let mut roots: Vec<(BigRational, usize)> = Vec::new();
    // zero root first
    let mut zero_mult = 0;
    while rest.len() > 1 && rest[0].is_zero() {
        rest.remove(0);
        zero_mult += 1;
    }
    if zero_mult > 0 {
        roots.push((BigRational::zero(), zero_mult));
    }
    let mut prime_index = 0;
    let mut attempts = 0;
    while rest.len() > 1 && attempts < 3 {
        attempts += 1;
        let ints = primitive_integer(&rest);
        let (p, red) = loop {
            let p = nth_prime(prime_index);
            prime_index += 1;
            let fld = PrimeField::new(p).unwrap();
            let red: Vec<u64> = ints.iter().map(|c| Field::from_bigint(&fld, c)).collect();
            if red.last() != Some(&0) {
                break (fld, red);
            }
        };
        let mut found = false;
        for r in roots_mod_p(&p, &red) {
            let Some(cand) =
                rational_reconstruct_balanced(&BigUint::from(r), &BigUint::from(p.modulus()))
            else {
                continue;
            };
            let mut mult = 0;
            loop {
                let (qt, rm) = divrem(&q, &rest, &[-cand.clone(), BigRational::one()]);
                if !rm.is_empty() {
                    break;
                }
                rest = qt;
                mult += 1;
            }
            if mult > 0 {
                found = true;
                roots.push((cand, mult));
            }
        }
        if !found {
            break;
        }
    }
    roots.sort_by(|x, y| x.0.cmp(&y.0));
    RootData {
        roots,
        residual: rest,
    }
}

/// Value of an integer polynomial at a rational point, exactly.
pub fn eval_int_at_rational(a: &[BigInt], x: &BigRational) -> BigRational {
    let mut acc = BigRational::zero();
    for c in a.iter().rev() {
        acc = acc * x + BigRational::from_integer(c.clone());
    }
    acc
}

/// Converts a small rational to f64 for display purposes.
pub fn rational_to_f64(x: &BigRational) -> f64 {
    let n = x.numer().to_f64().unwrap_or(f64::NAN);
    let d = x.denom().to_f64().unwrap_or(f64::NAN);
    n / d
}

/// Exact integer gcd of polynomials' contents helper: divides by the content.
pub fn make_primitive(a: &[BigInt]) -> Vec<BigInt> {
    let g = content(a);
    if g.is_zero() || g.is_one() {
        return a.to_vec();
    }
    a.iter().map(|c| c.div_floor(&g)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::rat;

    fn qp(v: &[i64]) -> Poly<BigRational> {
        trim(&Rationals, v.iter().map(|&c| rat(c, 1)).collect())
    }

    #[test]
    fn rational_gcd_matches_euclid() {
        let q = Rationals;
        let common = qp(&[3, -1, 2]);
        let a = mul(&q, &common, &qp(&[1, 5, 0, -7]));
        let b = mul(&q, &common, &qp(&[-4, 0, 9]));
        assert_eq!(gcd_rational(&a, &b), gcd(&q, &a, &b));
        assert_eq!(gcd_rational(&qp(&[1, 1]), &qp(&[2, 1])), vec![rat(1, 1)]);
        assert_eq!(gcd_rational(&[], &qp(&[2, 4])), qp(&[1, 2]).iter().map(|c| c / rat(2, 1)).collect::<Vec<_>>());
    }

    #[test]
    fn arithmetic_basics() {
        let q = Rationals;
        let a = qp(&[1, 2, 1]);
        let b = qp(&[1, 1]);
        let (qt, r) = divrem(&q, &a, &b);
        assert_eq!(qt, b);
        assert!(r.is_empty());
        assert_eq!(gcd(&q, &a, &qp(&[-1, 0, 1])), b);
        assert_eq!(taylor_shift(&q, &qp(&[0, 0, 1]), &rat(1, 1)), a);
        assert_eq!(deriv(&q, &a), qp(&[2, 2]));
        assert_eq!(eval(&q, &a, &rat(2, 1)), rat(9, 1));
    }

    #[test]
    fn roots_modulo_prime() {
        let f = PrimeField::new(nth_prime(0)).unwrap();
        let p = from_roots(&f, &[3, 5, 5, 11]);
        assert_eq!(roots_mod_p(&f, &p), vec![3, 5, 11]);
    }

    #[test]
    fn rational_roots_with_multiplicity() {
        let q = Rationals;
        // (2x - 5)^3 (x + 7)^2 x (x^2 + 1)
        let mut p = qp(&[0, 1]);
        for _ in 0..3 {
            p = mul(&q, &p, &qp(&[-5, 2]));
        }
        for _ in 0..2 {
            p = mul(&q, &p, &qp(&[7, 1]));
        }
        p = mul(&q, &p, &qp(&[1, 0, 1]));
        let rd = rational_roots(&p);
        assert_eq!(
            rd.roots,
            vec![(rat(-7, 1), 2), (rat(0, 1), 1), (rat(5, 2), 3)]
        );
        assert_eq!(rd.residual, qp(&[1, 0, 1]));
    }

    #[test]
    fn primitive_form() {
        let a = vec![rat(1, 2), rat(-3, 4)];
        assert_eq!(primitive_integer(&a), vec![BigInt::from(-2), BigInt::from(3)]);
    }
}
