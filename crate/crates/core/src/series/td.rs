//! The T_d(n,j) recursion.
//!
//! `T_d(n,j) = 4^{n+j} <ζ_d^n σ_d^{2j}>` with `ζ_d = Σ_{i<k≤d} cos k_i cos k_k`
//! and `σ_d = Σ_{i≤d} cos k_i`. Only entries with `n + 2j ≤ N` are kept, which
//! is the triangle read by the recursion when the target is `T_d(n,0)`, `n ≤ N`.

use std::fmt::Write as _;
use std::io::{BufRead, Write};

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::exec::{self, Policy};
use crate::modular::{PrimeContext, PrimeField};

/// Arithmetic for table entries.
pub trait TdArith: Sync {
    type E: Clone + Send + Sync + PartialEq + std::fmt::Debug;
    fn zero(&self) -> Self::E;
    fn one(&self) -> Self::E;
    /// C(n,k) for `n ≤ N`, zero outside range.
    fn binom(&self, n: usize, k: i64) -> Self::E;
    /// C(2l, l).
    fn central(&self, l: usize) -> Self::E;
    fn mul(&self, a: &Self::E, b: &Self::E) -> Self::E;
    fn add(&self, a: &Self::E, b: &Self::E) -> Self::E;
    fn dot(&self, w: &[Self::E], t: &[Self::E]) -> Self::E;
    fn modulus(&self) -> Option<u64>;
    fn format(&self, a: &Self::E) -> String;
    fn parse(&self, s: &str) -> Result<Self::E>;
}

/// Residues modulo a prime.
pub struct ModArith {
    pub ctx: PrimeContext,
}

impl ModArith {
    pub fn new(p: u64, terms: usize) -> Result<Self> {
        Ok(ModArith {
            ctx: PrimeContext::for_series(p, terms)?,
        })
    }

    pub fn field(&self) -> &PrimeField {
        &self.ctx.field
    }
}

impl TdArith for ModArith {
    type E = u64;
    fn zero(&self) -> u64 {
        0
    }
    fn one(&self) -> u64 {
        1
    }
    fn binom(&self, n: usize, k: i64) -> u64 {
        self.ctx.binom(n, k)
    }
    fn central(&self, l: usize) -> u64 {
        self.ctx.binom(2 * l, l as i64)
    }
    fn mul(&self, a: &u64, b: &u64) -> u64 {
        self.ctx.field.mul(*a, *b)
    }
    fn add(&self, a: &u64, b: &u64) -> u64 {
        self.ctx.field.add(*a, *b)
    }
    fn dot(&self, w: &[u64], t: &[u64]) -> u64 {
        self.ctx.field.dot(w, t)
    }
    fn modulus(&self) -> Option<u64> {
        Some(self.ctx.p())
    }
    fn format(&self, a: &u64) -> String {
        a.to_string()
    }
    fn parse(&self, s: &str) -> Result<u64> {
        s.trim()
            .parse()
            .map_err(|_| Error::Parse(format!("bad residue '{s}'")))
    }
}

/// Exact big integers with precomputed Pascal rows up to `N`.
pub struct ExactArith {
    pascal: Vec<Vec<BigInt>>,
    central: Vec<BigInt>,
}

impl ExactArith {
    pub fn new(terms: usize) -> Self {
        let n = terms + 1;
        let mut pascal: Vec<Vec<BigInt>> = Vec::with_capacity(n + 1);
        pascal.push(vec![BigInt::one()]);
        for i in 1..=n {
            let prev = &pascal[i - 1];
            let mut row = Vec::with_capacity(i + 1);
            row.push(BigInt::one());
            for k in 1..i {
                row.push(&prev[k - 1] + &prev[k]);
            }
            row.push(BigInt::one());
            pascal.push(row);
        }
        let mut central = vec![BigInt::one()];
        for l in 1..=n {
            // C(2l,l) = C(2l-2,l-1)·(2l)(2l-1)/l²
            let c = &central[l - 1] * BigInt::from(2 * (2 * l - 1)) / BigInt::from(l);
            central.push(c);
        }
        ExactArith { pascal, central }
    }
}

impl TdArith for ExactArith {
    type E = BigInt;
    fn zero(&self) -> BigInt {
        BigInt::zero()
    }
    fn one(&self) -> BigInt {
        BigInt::one()
    }
    fn binom(&self, n: usize, k: i64) -> BigInt {
        if k < 0 || k as usize > n {
            return BigInt::zero();
        }
        self.pascal[n][k as usize].clone()
    }
    fn central(&self, l: usize) -> BigInt {
        self.central[l].clone()
    }
    fn mul(&self, a: &BigInt, b: &BigInt) -> BigInt {
        a * b
    }
    fn add(&self, a: &BigInt, b: &BigInt) -> BigInt {
        a + b
    }
    fn dot(&self, w: &[BigInt], t: &[BigInt]) -> BigInt {
        let mut acc = BigInt::zero();
        for (x, y) in w.iter().zip(t) {
            if !y.is_zero() {
                acc += x * y;
            }
        }
        acc
    }
    fn modulus(&self) -> Option<u64> {
        None
    }
    fn format(&self, a: &BigInt) -> String {
        a.to_string()
    }
    fn parse(&self, s: &str) -> Result<BigInt> {
        s.trim()
            .parse()
            .map_err(|_| Error::Parse(format!("bad integer '{s}'")))
    }
}

/// Triangular table `T_d(n,j)` for `n + 2j ≤ n_max`.
#[derive(Clone, Debug, PartialEq)]
pub struct TdTable<E> {
    pub d: usize,
    pub n_max: usize,
    /// `rows[n][j]`, `0 ≤ j ≤ (n_max − n)/2`.
    pub rows: Vec<Vec<E>>,
}

impl<E: Clone> TdTable<E> {
    pub fn j_max(&self, n: usize) -> usize {
        (self.n_max - n) / 2
    }

    pub fn get(&self, n: usize, j: usize) -> Option<&E> {
        self.rows.get(n)?.get(j)
    }

    /// `T_d(n,0)` for `n ≤ n_max`.
    pub fn diagonal(&self) -> Vec<E> {
        self.rows.iter().map(|r| r[0].clone()).collect()
    }
}

/// Work counters for one recursion step.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct StepProfile {
    /// Iterations of the outer sum over `p`.
    pub outer_terms: u64,
    /// Iterations of the inner sum over `q`.
    pub inner_terms: u64,
    /// Nesting depth of the summation loops per entry.
    pub depth: u32,
}

/// `T_1(n,j) = δ_{n0} C(2j,j)`.
pub fn t1_table<A: TdArith>(arith: &A, n_max: usize) -> TdTable<A::E> {
    let rows = (0..=n_max)
        .map(|n| {
            (0..=(n_max - n) / 2)
                .map(|j| if n == 0 { arith.central(j) } else { arith.zero() })
                .collect()
        })
        .collect();
    TdTable { d: 1, n_max, rows }
}

/// Starting table from the closed double-binomial sum.
pub fn t2_table<A: TdArith>(arith: &A, n_max: usize) -> TdTable<A::E> {
    let rows = (0..=n_max)
        .map(|n| {
            (0..=(n_max - n) / 2)
                .map(|j| {
                    let mut acc = arith.zero();
                    for p in (n + 1) / 2..=(n + 2 * j) / 2 {
                        let t = arith.mul(
                            &arith.mul(&arith.central(p), &arith.binom(2 * j, 2 * p as i64 - n as i64)),
                            &arith.central(n + j - p),
                        );
                        acc = arith.add(&acc, &t);
                    }
                    acc
                })
                .collect()
        })
        .collect();
    TdTable { d: 2, n_max, rows }
}

/// Weight vectors `w_{m,j}[q − q1] = C(2j, 2q − m)·C(2(m+j−q), m+j−q)` for
/// `q1 = ⌈m/2⌉ ≤ q ≤ ⌊m/2⌋ + j`; they do not depend on `p` or `d`.
pub struct Weights<E> {
    n_max: usize,
    w: Vec<Vec<Vec<E>>>,
}

impl<E: Clone + Send + Sync> Weights<E> {
    pub fn new<A: TdArith<E = E>>(arith: &A, n_max: usize, policy: Policy) -> Self {
        let w = exec::map_range(policy, n_max + 1, |m| {
            (0..=(n_max - m) / 2)
                .map(|j| {
                    let q1 = (m + 1) / 2;
                    let q2 = m / 2 + j;
                    (q1..=q2)
                        .map(|q| {
                            arith.mul(
                                &arith.binom(2 * j, 2 * q as i64 - m as i64),
                                &arith.central(m + j - q),
                            )
                        })
                        .collect()
                })
                .collect()
        });
        Weights { n_max, w }
    }

    fn get(&self, m: usize, j: usize) -> &[E] {
        &self.w[m][j]
    }
}

/// One step `T_{d−1} → T_d` of the recursion.
pub fn td_step<A: TdArith>(
    arith: &A,
    prev: &TdTable<A::E>,
    weights: &Weights<A::E>,
    policy: Policy,
) -> Result<TdTable<A::E>> {
    let n_max = weights.n_max;
    if prev.n_max < n_max {
        return Err(Error::MissingEntry {
            p: prev.n_max + 1,
            q: 0,
        });
    }
    let rows = exec::map_range(policy, n_max + 1, |n| {
        (0..=(n_max - n) / 2)
            .map(|j| {
                let mut acc = arith.zero();
                for p in 0..=n {
                    let m = n - p;
                    let w = weights.get(m, j);
                    if w.is_empty() {
                        continue;
                    }
                    let q1 = (m + 1) / 2;
                    let row = &prev.rows[p];
                    let s = arith.dot(w, &row[q1..q1 + w.len()]);
                    acc = arith.add(&acc, &arith.mul(&arith.binom(n, p as i64), &s));
                }
                acc
            })
            .collect()
    });
    Ok(TdTable {
        d: prev.d + 1,
        n_max,
        rows,
    })
}

/// Loop counts [`td_step`] performs for a table of size `n_max`.
pub fn step_profile(n_max: usize) -> StepProfile {
    let mut prof = StepProfile {
        depth: 2,
        ..Default::default()
    };
    for n in 0..=n_max {
        for j in 0..=(n_max - n) / 2 {
            for p in 0..=n {
                let m = n - p;
                prof.outer_terms += 1;
                let q1 = (m + 1) / 2;
                let q2 = m / 2 + j;
                prof.inner_terms += (q2 + 1).saturating_sub(q1) as u64;
            }
        }
    }
    prof
}

/// Successive tables `T_2, T_3, …` for a fixed truncation.
pub struct TdChain<'a, A: TdArith> {
    arith: &'a A,
    weights: Weights<A::E>,
    current: TdTable<A::E>,
    policy: Policy,
}

impl<'a, A: TdArith> TdChain<'a, A> {
    pub fn new(arith: &'a A, n_max: usize, policy: Policy) -> Self {
        TdChain {
            arith,
            weights: Weights::new(arith, n_max, policy),
            current: t2_table(arith, n_max),
            policy,
        }
    }

    /// Resumes from a cached table.
    pub fn from_table(arith: &'a A, table: TdTable<A::E>, policy: Policy) -> Self {
        TdChain {
            arith,
            weights: Weights::new(arith, table.n_max, policy),
            current: table,
            policy,
        }
    }

    pub fn current(&self) -> &TdTable<A::E> {
        &self.current
    }

    pub fn into_current(self) -> TdTable<A::E> {
        self.current
    }

    pub fn advance(&mut self) {
        self.current = td_step(self.arith, &self.current, &self.weights, self.policy)
            .expect("chain tables share n_max");
    }

    /// Advances until the table is for dimension `d`.
    pub fn advance_to(&mut self, d: usize) -> &TdTable<A::E> {
        assert!(d >= self.current.d, "cannot go back from d = {}", self.current.d);
        while self.current.d < d {
            self.advance();
        }
        &self.current
    }
}

/// Textual table dump: header `TD d=<d> mode=<exact|mod> p=<prime|-> N=<n_max>`,
/// then one line per row with space-separated entries.
pub fn write_table<A: TdArith, W: Write>(arith: &A, t: &TdTable<A::E>, mut out: W) -> Result<()> {
    let (mode, p) = match arith.modulus() {
        Some(p) => ("mod", p.to_string()),
        None => ("exact", "-".to_string()),
    };
    writeln!(out, "TD d={} mode={} p={} N={}", t.d, mode, p, t.n_max)?;
    for row in &t.rows {
        let mut line = String::new();
        for (i, e) in row.iter().enumerate() {
            if i > 0 {
                line.push(' ');
            }
            let _ = write!(line, "{}", arith.format(e));
        }
        writeln!(out, "{line}")?;
    }
    Ok(())
}

pub fn read_table<A: TdArith, R: BufRead>(arith: &A, input: R) -> Result<TdTable<A::E>> {
    let mut lines = input.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::Parse("empty table".into()))??;
    let fields = super::io::header_fields(&header, "TD")?;
    let d: usize = super::io::field(&fields, "d")?;
    let n_max: usize = super::io::field(&fields, "N")?;
    let p = fields.get("p").cloned().unwrap_or_default();
    let expect_p = arith.modulus().map(|p| p.to_string()).unwrap_or("-".into());
    if p != expect_p {
        return Err(Error::ModeMismatch);
    }
    let mut rows = Vec::with_capacity(n_max + 1);
    for n in 0..=n_max {
        let line = lines
            .next()
            .ok_or_else(|| Error::Parse(format!("missing row {n}")))??;
        let row: Vec<A::E> = line
            .split_whitespace()
            .map(|s| arith.parse(s))
            .collect::<Result<_>>()?;
        if row.len() != (n_max - n) / 2 + 1 {
            return Err(Error::Parse(format!("row {n} has wrong length")));
        }
        rows.push(row);
    }
    Ok(TdTable { d, n_max, rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::modular::nth_prime;

    #[test]
    fn t2_small_values() {
        let a = ExactArith::new(10);
        let t = t2_table(&a, 10);
        assert_eq!(t.rows[0][0], BigInt::from(1));
        assert_eq!(t.rows[1][0], BigInt::from(0));
        assert_eq!(t.rows[0][1], BigInt::from(4));
        assert_eq!(t.rows[2][0], BigInt::from(4));
        for n in (1..=10).step_by(2) {
            assert_eq!(t.rows[n][0], BigInt::from(0));
        }
    }

    #[test]
    fn t2_from_t1_step() {
        let n = 24;
        let a = ExactArith::new(n);
        let w = Weights::new(&a, n, Policy::Sequential);
        let t1 = t1_table(&a, n);
        let via_step = td_step(&a, &t1, &w, Policy::Sequential).unwrap();
        assert_eq!(via_step, t2_table(&a, n));
    }

    #[test]
    fn t2_column_zero_is_squared_central() {
        // 4^j <(cos a + cos b)^{2j}> = C(2j,j)^2
        let a = ExactArith::new(20);
        let t = t2_table(&a, 20);
        for j in 0..=10usize {
            assert_eq!(t.rows[0][j], a.central(j) * a.central(j), "j = {j}");
        }
    }

    #[test]
    fn chain_values() {
        let a = ExactArith::new(6);
        let mut c = TdChain::new(&a, 6, Policy::Sequential);
        assert_eq!(c.advance_to(3).rows[2][0], BigInt::from(12));
        assert_eq!(c.advance_to(7).rows[2][0], BigInt::from(84));
        assert_eq!(c.current().rows[1][0], BigInt::from(0));
        assert_eq!(c.current().rows[0][0], BigInt::from(1));
    }

    #[test]
    fn modular_matches_exact_reduced() {
        let n = 40;
        let p = nth_prime(0);
        let ea = ExactArith::new(n);
        let ma = ModArith::new(p, n).unwrap();
        let mut ec = TdChain::new(&ea, n, Policy::Sequential);
        let mut mc = TdChain::new(&ma, n, Policy::Parallel);
        for d in 2..=6 {
            let et = ec.advance_to(d);
            let mt = mc.advance_to(d);
            for (er, mr) in et.rows.iter().zip(&mt.rows) {
                for (e, m) in er.iter().zip(mr) {
                    let r = e % BigInt::from(p);
                    assert_eq!(r, BigInt::from(*m));
                }
            }
        }
    }

    #[test]
    fn profile_counts_two_nested_sums() {
        let prof = step_profile(8);
        assert_eq!(prof.depth, 2);
        let mut inner = 0u64;
        for n in 0..=8usize {
            for j in 0..=(8 - n) / 2 {
                for p in 0..=n {
                    let lo = (n - p + 1) / 2;
                    let hi = (n - p + 2 * j) / 2;
                    if hi >= lo {
                        inner += (hi - lo + 1) as u64;
                    }
                }
            }
        }
        assert_eq!(prof.inner_terms, inner);
    }

    #[test]
    fn table_text_roundtrip() {
        let a = ModArith::new(nth_prime(1), 12).unwrap();
        let mut c = TdChain::new(&a, 12, Policy::Sequential);
        let t = c.advance_to(4).clone();
        let mut buf = Vec::new();
        write_table(&a, &t, &mut buf).unwrap();
        let back = read_table(&a, &buf[..]).unwrap();
        assert_eq!(back, t);
        let e = ExactArith::new(12);
        assert_eq!(read_table(&e, &buf[..]), Err(Error::ModeMismatch));
    }
}
