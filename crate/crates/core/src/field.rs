//! Coefficient fields: the rationals and prime fields behind one interface.

use std::fmt::Debug;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::{Rng, RngCore};

use crate::error::{Error, Result};
use crate::modular::PrimeField;

pub trait Field: Clone + Debug + Send + Sync {
    type Elem: Clone + PartialEq + Debug + Send + Sync;

    fn zero(&self) -> Self::Elem;
    fn one(&self) -> Self::Elem;
    fn from_i64(&self, v: i64) -> Self::Elem;
    fn from_bigint(&self, v: &BigInt) -> Self::Elem;
    /// `None` when the denominator is not invertible.
    fn from_rational(&self, v: &BigRational) -> Option<Self::Elem>;
    fn add(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn sub(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn mul(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn neg(&self, a: &Self::Elem) -> Self::Elem;
    fn inv(&self, a: &Self::Elem) -> Option<Self::Elem>;
    fn is_zero(&self, a: &Self::Elem) -> bool;
    /// Prime modulus, or `None` for the rationals.
    fn modulus(&self) -> Option<u64>;
    /// A random element; for the rationals small integers and halves.
    fn random(&self, rng: &mut dyn RngCore) -> Self::Elem;
    fn format(&self, a: &Self::Elem) -> String;
    fn parse(&self, s: &str) -> Result<Self::Elem>;

    fn div(&self, a: &Self::Elem, b: &Self::Elem) -> Option<Self::Elem> {
        self.inv(b).map(|i| self.mul(a, &i))
    }

    fn is_one(&self, a: &Self::Elem) -> bool {
        *a == self.one()
    }

    fn pow(&self, a: &Self::Elem, mut e: u64) -> Self::Elem {
        let mut base = a.clone();
        let mut r = self.one();
        while e > 0 {
            if e & 1 == 1 {
                r = self.mul(&r, &base);
            }
            base = self.mul(&base, &base);
            e >>= 1;
        }
        r
    }

    fn mode(&self) -> &'static str {
        if self.modulus().is_some() {
            "mod"
        } else {
            "exact"
        }
    }
}

/// The field of rational numbers.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Rationals;

impl Field for Rationals {
    type Elem = BigRational;

    fn zero(&self) -> BigRational {
        BigRational::zero()
    }
    fn one(&self) -> BigRational {
        BigRational::one()
    }
    fn from_i64(&self, v: i64) -> BigRational {
        BigRational::from_integer(v.into())
    }
    fn from_bigint(&self, v: &BigInt) -> BigRational {
        BigRational::from_integer(v.clone())
    }
    fn from_rational(&self, v: &BigRational) -> Option<BigRational> {
        Some(v.clone())
    }
    fn add(&self, a: &BigRational, b: &BigRational) -> BigRational {
        a + b
    }
    fn sub(&self, a: &BigRational, b: &BigRational) -> BigRational {
        a - b
    }
    fn mul(&self, a: &BigRational, b: &BigRational) -> BigRational {
        a * b
    }
    fn neg(&self, a: &BigRational) -> BigRational {
        -a
    }
    fn inv(&self, a: &BigRational) -> Option<BigRational> {
        if a.is_zero() {
            None
        } else {
            Some(a.recip())
        }
    }
    fn is_zero(&self, a: &BigRational) -> bool {
        a.is_zero()
    }
    fn modulus(&self) -> Option<u64> {
        None
    }
    fn random(&self, rng: &mut dyn RngCore) -> BigRational {
        let n: i64 = rng.gen_range(-9..=9);
        let d: i64 = rng.gen_range(1..=2);
        BigRational::new(n.into(), d.into())
    }
    fn format(&self, a: &BigRational) -> String {
        format_rational(a)
    }
    fn parse(&self, s: &str) -> Result<BigRational> {
        parse_rational(s)
    }
}

impl Field for PrimeField {
    type Elem = u64;

    fn zero(&self) -> u64 {
        0
    }
    fn one(&self) -> u64 {
        1
    }
    fn from_i64(&self, v: i64) -> u64 {
        PrimeField::from_i64(self, v)
    }
    fn from_bigint(&self, v: &BigInt) -> u64 {
        let p = BigInt::from(self.modulus());
        let r = ((v % &p) + &p) % &p;
        r.to_u64().unwrap()
    }
    fn from_rational(&self, v: &BigRational) -> Option<u64> {
        let n = self.from_bigint(v.numer());
        let d = self.from_bigint(v.denom());
        PrimeField::inv(self, d).map(|di| PrimeField::mul(self, n, di))
    }
    fn add(&self, a: &u64, b: &u64) -> u64 {
        PrimeField::add(self, *a, *b)
    }
    fn sub(&self, a: &u64, b: &u64) -> u64 {
        PrimeField::sub(self, *a, *b)
    }
    fn mul(&self, a: &u64, b: &u64) -> u64 {
        PrimeField::mul(self, *a, *b)
    }
    fn neg(&self, a: &u64) -> u64 {
        PrimeField::neg(self, *a)
    }
    fn inv(&self, a: &u64) -> Option<u64> {
        PrimeField::inv(self, *a)
    }
    fn is_zero(&self, a: &u64) -> bool {
        *a == 0
    }
    fn modulus(&self) -> Option<u64> {
        Some(PrimeField::modulus(self))
    }
    fn random(&self, rng: &mut dyn RngCore) -> u64 {
        rng.gen_range(0..PrimeField::modulus(self))
    }
    fn format(&self, a: &u64) -> String {
        a.to_string()
    }
    fn parse(&self, s: &str) -> Result<u64> {
        let v: BigInt = s
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("bad residue '{s}'")))?;
        Ok(self.from_bigint(&v))
    }
}

/// `num/den` with `den > 0`; integers keep the `/1`.
pub fn format_rational(a: &BigRational) -> String {
    format!("{}/{}", a.numer(), a.denom())
}

/// Accepts `n`, `n/d` and signed forms.
pub fn parse_rational(s: &str) -> Result<BigRational> {
    let s = s.trim();
    let bad = || Error::Parse(format!("bad rational '{s}'"));
    match s.split_once('/') {
        Some((n, d)) => {
            let n: BigInt = n.trim().parse().map_err(|_| bad())?;
            let d: BigInt = d.trim().parse().map_err(|_| bad())?;
            if d.is_zero() {
                return Err(bad());
            }
            Ok(BigRational::new(n, d))
        }
        None => Ok(BigRational::from_integer(s.parse().map_err(|_| bad())?)),
    }
}

/// Short human form: integers without denominator.
pub fn rational_display(a: &BigRational) -> String {
    if a.is_integer() {
        a.numer().to_string()
    } else {
        format_rational(a)
    }
}

pub fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(n.into(), d.into())
}

/// Reduces a rational modulo `p`; `None` when the denominator vanishes.
pub fn rational_mod(v: &BigRational, p: u64) -> Option<u64> {
    PrimeField::new(p).ok()?.from_rational(v)
}

/// Least common multiple of the denominators of `vals`.
pub fn common_denominator<'a, I: IntoIterator<Item = &'a BigRational>>(vals: I) -> BigInt {
    use num_integer::Integer;
    vals.into_iter()
        .fold(BigInt::one(), |acc, v| acc.lcm(v.denom()))
}

/// Gcd of the absolute values (0 for an all-zero slice).
pub fn content(vals: &[BigInt]) -> BigInt {
    use num_integer::Integer;
    vals.iter().fold(BigInt::zero(), |acc, v| acc.gcd(v))
}

pub fn biguint_abs(v: &BigInt) -> BigUint {
    v.abs().to_biguint().unwrap()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rational_text_roundtrip() {
        for s in ["3/4", "-7/2", "0/1", "12/1"] {
            assert_eq!(format_rational(&parse_rational(s).unwrap()), s);
        }
        assert_eq!(parse_rational("6/-4").unwrap(), rat(-3, 2));
        assert_eq!(parse_rational("5").unwrap(), rat(5, 1));
        assert!(parse_rational("1/0").is_err());
        assert_eq!(rational_display(&rat(10, 5)), "2");
    }

    #[test]
    fn prime_field_rationals() {
        let f = PrimeField::new(101).unwrap();
        assert_eq!(f.from_rational(&rat(1, 3)), Some(34));
        assert_eq!(f.from_rational(&rat(1, 101)), None);
        assert_eq!(Field::from_bigint(&f, &BigInt::from(-1)), 100);
        assert_eq!(Field::parse(&f, "-1").unwrap(), 100);
    }
}
