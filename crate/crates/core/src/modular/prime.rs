//! Prime fields with moduli below 2^62 and factorial tables.

use std::sync::{Mutex, OnceLock};

use crate::error::{Error, Result};

/// Upper bound (exclusive) for supported moduli.
pub const MODULUS_LIMIT: u64 = 1 << 62;

fn mul_mod_raw(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn pow_mod_raw(mut a: u64, mut e: u64, m: u64) -> u64 {
    let mut r = 1 % m;
    a %= m;
    while e > 0 {
        if e & 1 == 1 {
            r = mul_mod_raw(r, a, m);
        }
        a = mul_mod_raw(a, a, m);
        e >>= 1;
    }
    r
}

/// Miller-Rabin with the first twelve prime bases, deterministic for all u64.
pub fn is_prime_u64(n: u64) -> bool {
    const BASES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    if n < 2 {
        return false;
    }
    for &b in &BASES {
        if n % b == 0 {
            return n == b;
        }
    }
    let s = (n - 1).trailing_zeros();
    let d = (n - 1) >> s;
    'outer: for &a in &BASES {
        let mut x = pow_mod_raw(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod_raw(x, x, n);
            if x == n - 1 {
                continue 'outer;
            }
        }
        return false;
    }
    true
}

fn prime_cache() -> &'static Mutex<Vec<u64>> {
    static CACHE: OnceLock<Mutex<Vec<u64>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(Vec::new()))
}

/// The `i`-th prime of the fixed working sequence: primes below 2^62 taken in
/// descending order, so index 0 is 2^62 - 57.
pub fn nth_prime(i: usize) -> u64 {
    let mut cache = prime_cache().lock().unwrap();
    let mut next = cache.last().copied().unwrap_or(MODULUS_LIMIT);
    while cache.len() <= i {
        next -= 1;
        while !is_prime_u64(next) {
            next -= 1;
        }
        cache.push(next);
    }
    cache[i]
}

/// Arithmetic in Z/pZ for a prime p < 2^62; elements are canonical residues.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct PrimeField {
    p: u64,
}

impl PrimeField {
    pub fn new(p: u64) -> Result<Self> {
        if p >= MODULUS_LIMIT || !is_prime_u64(p) {
            return Err(Error::NotPrime(p));
        }
        Ok(PrimeField { p })
    }

    /// Field for `nth_prime(i)`.
    pub fn nth(i: usize) -> Self {
        PrimeField { p: nth_prime(i) }
    }

    #[inline]
    pub fn modulus(&self) -> u64 {
        self.p
    }

    #[inline]
    pub fn add(&self, a: u64, b: u64) -> u64 {
        let s = a + b;
        if s >= self.p {
            s - self.p
        } else {
            s
        }
    }

    #[inline]
    pub fn sub(&self, a: u64, b: u64) -> u64 {
        if a >= b {
            a - b
        } else {
            a + self.p - b
        }
    }

    #[inline]
    pub fn neg(&self, a: u64) -> u64 {
        if a == 0 {
            0
        } else {
            self.p - a
        }
    }

    #[inline]
    pub fn mul(&self, a: u64, b: u64) -> u64 {
        mul_mod_raw(a, b, self.p)
    }

    #[inline]
    pub fn reduce_u128(&self, v: u128) -> u64 {
        (v % self.p as u128) as u64
    }

    pub fn from_i64(&self, v: i64) -> u64 {
        let r = v.rem_euclid(self.p as i64);
        r as u64
    }

    pub fn from_u64(&self, v: u64) -> u64 {
        v % self.p
    }

    pub fn pow(&self, a: u64, e: u64) -> u64 {
        pow_mod_raw(a, e, self.p)
    }

    pub fn inv(&self, a: u64) -> Option<u64> {
        if a % self.p == 0 {
            None
        } else {
            Some(self.pow(a, self.p - 2))
        }
    }

    /// Shoup precomputation for repeated multiplication by `w`.
    #[inline]
    pub fn shoup(&self, w: u64) -> u64 {
        (((w as u128) << 64) / self.p as u128) as u64
    }

    /// `a * w mod p` using the precomputed `w_shoup = shoup(w)`.
    #[inline]
    pub fn mul_shoup(&self, a: u64, w: u64, w_shoup: u64) -> u64 {
        let q = ((a as u128 * w_shoup as u128) >> 64) as u64;
        let r = a.wrapping_mul(w).wrapping_sub(q.wrapping_mul(self.p));
        if r >= self.p {
            r - self.p
        } else {
            r
        }
    }

    /// Dot product with delayed reduction.
    pub fn dot(&self, a: &[u64], b: &[u64]) -> u64 {
        debug_assert_eq!(a.len(), b.len());
        let mut total: u64 = 0;
        for (ca, cb) in a.chunks(16).zip(b.chunks(16)) {
            let mut acc: u128 = 0;
            for (&x, &y) in ca.iter().zip(cb) {
                acc += x as u128 * y as u128;
            }
            total = self.add(total, self.reduce_u128(acc));
        }
        total
    }

    /// Symmetric representative in (-p/2, p/2].
    pub fn signed(&self, a: u64) -> i128 {
        if a > self.p / 2 {
            a as i128 - self.p as i128
        } else {
            a as i128
        }
    }
}

/// A prime field together with factorial and inverse-factorial tables.
#[derive(Clone, Debug)]
pub struct PrimeContext {
    pub field: PrimeField,
    fact: Vec<u64>,
    inv_fact: Vec<u64>,
}

impl PrimeContext {
    /// Builds tables for `0 ≤ n ≤ n_max`.
    pub fn new(p: u64, n_max: usize) -> Result<Self> {
        let field = PrimeField::new(p)?;
        Ok(Self::with_field(field, n_max))
    }

    /// Context sized for series of length `terms` (`n_max = 4 terms + 8`).
    pub fn for_series(p: u64, terms: usize) -> Result<Self> {
        Self::new(p, 4 * terms + 8)
    }

    pub fn with_field(field: PrimeField, n_max: usize) -> Self {
        assert!((n_max as u64) < field.modulus(), "table exceeds characteristic");
        let mut fact = Vec::with_capacity(n_max + 1);
        fact.push(1u64);
        for n in 1..=n_max {
            let prev = fact[n - 1];
            fact.push(field.mul(prev, n as u64));
        }
        let mut inv_fact = vec![0u64; n_max + 1];
        inv_fact[n_max] = field.inv(fact[n_max]).expect("factorial invertible");
        for n in (1..=n_max).rev() {
            inv_fact[n - 1] = field.mul(inv_fact[n], n as u64);
        }
        PrimeContext {
            field,
            fact,
            inv_fact,
        }
    }

    pub fn p(&self) -> u64 {
        self.field.modulus()
    }

    pub fn n_max(&self) -> usize {
        self.fact.len() - 1
    }

    pub fn fact(&self, n: usize) -> u64 {
        self.fact[n]
    }

    pub fn inv_fact(&self, n: usize) -> u64 {
        self.inv_fact[n]
    }

    /// C(n, k) mod p, zero outside `0 ≤ k ≤ n`.
    pub fn binomial_mod(&self, n: usize, k: i64) -> Result<u64> {
        if n > self.n_max() {
            return Err(Error::TableOverflow {
                n,
                n_max: self.n_max(),
            });
        }
        Ok(self.binom(n, k))
    }

    /// Unchecked variant of [`binomial_mod`](Self::binomial_mod); panics past `n_max`.
    #[inline]
    pub fn binom(&self, n: usize, k: i64) -> u64 {
        if k < 0 || k as usize > n {
            return 0;
        }
        let k = k as usize;
        let f = &self.field;
        f.mul(f.mul(self.fact[n], self.inv_fact[k]), self.inv_fact[n - k])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigUint;
    use num_traits::{One, ToPrimitive};

    fn exact_binomial(n: u64, k: u64) -> BigUint {
        let mut r = BigUint::one();
        for i in 0..k {
            r = r * BigUint::from(n - i) / BigUint::from(i + 1);
        }
        r
    }

    #[test]
    fn small_primes_by_trial_division() {
        for n in 0u64..5000 {
            let trial = n >= 2 && (2..n).take_while(|d| d * d <= n).all(|d| n % d != 0);
            assert_eq!(is_prime_u64(n), trial, "n = {n}");
        }
    }

    #[test]
    fn prime_sequence_descends() {
        assert_eq!(nth_prime(0), (1u64 << 62) - 57);
        for i in 0..10 {
            assert!(nth_prime(i) > nth_prime(i + 1));
            for m in nth_prime(i + 1) + 1..nth_prime(i) {
                assert!(!is_prime_u64(m));
            }
        }
    }

    #[test]
    fn rejects_composites_and_large() {
        assert!(PrimeField::new(91).is_err());
        assert!(PrimeField::new((1u64 << 62) + 135).is_err());
        assert!(PrimeField::new(101).is_ok());
    }

    #[test]
    fn binomials_match_big_integers() {
        let ctx = PrimeContext::new(nth_prime(0), 4008).unwrap();
        assert_eq!(ctx.binomial_mod(5, 2).unwrap(), 10);
        assert_eq!(ctx.binomial_mod(5, -1).unwrap(), 0);
        assert_eq!(ctx.binomial_mod(5, 6).unwrap(), 0);
        let big = exact_binomial(2000, 1000) % BigUint::from(ctx.p());
        assert_eq!(ctx.binomial_mod(2000, 1000).unwrap(), big.to_u64().unwrap());
        assert_eq!(
            ctx.binomial_mod(4009, 3),
            Err(Error::TableOverflow { n: 4009, n_max: 4008 })
        );
    }

    #[test]
    fn factorial_tables_are_inverse() {
        let ctx = PrimeContext::for_series(nth_prime(1), 50).unwrap();
        assert_eq!(ctx.n_max(), 208);
        for n in 0..=ctx.n_max() {
            assert_eq!(ctx.field.mul(ctx.fact(n), ctx.inv_fact(n)), 1);
        }
    }

    #[test]
    fn shoup_matches_plain() {
        let f = PrimeField::nth(0);
        let w = 0x1234_5678_9abc_def1 % f.modulus();
        let ws = f.shoup(w);
        let mut a = 7u64;
        for _ in 0..1000 {
            a = f.mul(a, 0x2545_f491_4f6c_dd1d % f.modulus()).wrapping_add(3) % f.modulus();
            assert_eq!(f.mul_shoup(a, w, ws), f.mul(a, w));
        }
    }

    #[test]
    fn dot_matches_naive() {
        let f = PrimeField::nth(2);
        let p = f.modulus();
        let a: Vec<u64> = (0..70).map(|i| p - 1 - i).collect();
        let b: Vec<u64> = (0..70).map(|i| p - 2 - 3 * i).collect();
        let naive = a.iter().zip(&b).fold(0, |s, (&x, &y)| f.add(s, f.mul(x, y)));
        assert_eq!(f.dot(&a, &b), naive);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(10_000))]
            #[test]
            fn binomial_random(n in 0usize..=600, k in -3i64..=603) {
                let ctx = ctx600();
                let expect = if k < 0 || k as usize > n {
                    0
                } else {
                    (exact_binomial(n as u64, k as u64) % BigUint::from(ctx.p())).to_u64().unwrap()
                };
                prop_assert_eq!(ctx.binomial_mod(n, k).unwrap(), expect);
            }
        }

        fn ctx600() -> &'static PrimeContext {
            static C: OnceLock<PrimeContext> = OnceLock::new();
            C.get_or_init(|| PrimeContext::new(nth_prime(3), 600).unwrap())
        }
    }
}
