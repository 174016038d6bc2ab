//! Chinese remaindering and rational reconstruction.

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

/// Combines `(residue, modulus)` pairs into the unique value below the lcm of
/// the moduli. Non-coprime moduli are accepted when their residues agree.
pub fn crt_combine(residues: &[(BigUint, BigUint)]) -> Result<(BigUint, BigUint)> {
    let mut value = BigInt::zero();
    let mut modulus = BigInt::one();
    for (r, m) in residues {
        if m.is_zero() {
            return Err(Error::Invalid("zero modulus".into()));
        }
        let r = BigInt::from(r % m);
        let m = BigInt::from(m.clone());
        let e = modulus.extended_gcd(&m);
        let g = e.gcd.clone();
        let diff = &r - &value;
        if !(&diff % &g).is_zero() {
            return Err(Error::Inconsistent(format!(
                "residue {r} mod {m} conflicts with {value} mod {modulus}"
            )));
        }
        let m_over_g = &m / &g;
        let t = ((&diff / &g) * &e.x).mod_floor(&m_over_g);
        value += &modulus * t;
        modulus *= &m_over_g;
        value = value.mod_floor(&modulus);
    }
    Ok((
        value.to_biguint().expect("nonnegative"),
        modulus.to_biguint().expect("positive"),
    ))
}

/// Incremental CRT for a vector of residues against a growing product of
/// pairwise coprime primes.
#[derive(Clone, Debug)]
pub struct CrtAccumulator {
    pub values: Vec<BigUint>,
    pub modulus: BigUint,
}

impl CrtAccumulator {
    pub fn new(len: usize) -> Self {
        CrtAccumulator {
            values: vec![BigUint::zero(); len],
            modulus: BigUint::one(),
        }
    }

    pub fn add_prime(&mut self, p: u64, residues: &[u64]) {
        assert_eq!(residues.len(), self.values.len());
        let pb = BigUint::from(p);
        let m_mod_p = (&self.modulus % &pb).iter_u64_digits().next().unwrap_or(0);
        let f = super::PrimeField::new(p).expect("prime");
        let inv = f.inv(m_mod_p).expect("coprime moduli");
        for (v, &r) in self.values.iter_mut().zip(residues) {
            let v_mod_p = (&*v % &pb).iter_u64_digits().next().unwrap_or(0);
            let t = f.mul(f.sub(r, v_mod_p), inv);
            *v += &self.modulus * BigUint::from(t);
        }
        self.modulus *= pb;
    }
}

/// Wang's rational reconstruction: finds `n/d` with `|n| ≤ num_bound`,
/// `0 < d ≤ den_bound` and `n ≡ d·value (mod modulus)`.
pub fn rational_reconstruct(
    value: &BigUint,
    modulus: &BigUint,
    num_bound: &BigUint,
    den_bound: &BigUint,
) -> Option<BigRational> {
    let m = BigInt::from(modulus.clone());
    let u = BigInt::from(value % modulus);
    let nb = BigInt::from(num_bound.clone());
    let db = BigInt::from(den_bound.clone());
    if u.is_zero() {
        return Some(BigRational::zero());
    }
    let (mut r0, mut r1) = (m.clone(), u);
    let (mut t0, mut t1) = (BigInt::zero(), BigInt::one());
    while r1 > nb {
        let q = &r0 / &r1;
        let r2 = &r0 - &q * &r1;
        let t2 = &t0 - &q * &t1;
        r0 = std::mem::replace(&mut r1, r2);
        t0 = std::mem::replace(&mut t1, t2);
    }
    if t1.is_zero() || t1.abs() > db || !r1.gcd(&t1).is_one() || !t1.gcd(&m).is_one() {
        return None;
    }
    Some(BigRational::new(r1, t1))
}

/// Reconstruction with balanced bounds `floor(sqrt(modulus / 2))`.
pub fn rational_reconstruct_balanced(value: &BigUint, modulus: &BigUint) -> Option<BigRational> {
    let b = (modulus >> 1u32).sqrt();
    rational_reconstruct(value, modulus, &b, &b)
}
