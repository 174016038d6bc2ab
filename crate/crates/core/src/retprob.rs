//! Return probabilities `R_d = 1 − 1/P_d(1)` from ODE-extended series.

use astro_float::{BigFloat, Consts, Radix, RoundingMode, Sign};
use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::diffop::{indicial_data, DiffOperator, Point};
use crate::error::{Error, Result};
use crate::field::{common_denominator, rat, rational_display, Rationals};
use crate::poly::{self, Poly};
use crate::series::{inverse_d_expansion, lgf_integers, lgf_scale, GenericDSeries};

const RM: RoundingMode = RoundingMode::ToEven;
const BITS_PER_DIGIT: f64 = std::f64::consts::LOG2_10;

fn consts() -> Consts {
    Consts::new().expect("constant cache")
}

pub fn bigint_to_float(x: &BigInt, p: usize) -> BigFloat {
    if x.is_zero() {
        return BigFloat::new(p);
    }
    let (sign, words) = x.to_u64_digits();
    let s = if sign == num_bigint::Sign::Minus { Sign::Neg } else { Sign::Pos };
    let mut v = BigFloat::from_words(&words, s, (64 * words.len()) as i32);
    v.set_precision(p, RM).expect("precision");
    v
}

pub fn rational_to_float(x: &BigRational, p: usize) -> BigFloat {
    bigint_to_float(x.numer(), p).div(&bigint_to_float(x.denom(), p), p, RM)
}

/// `x` rounded to `places` decimals, e.g. `0.2563182365`.
pub fn to_decimal(x: &BigFloat, places: usize) -> String {
    let mut cc = consts();
    if x.is_zero() {
        return format!("0.{}", "0".repeat(places));
    }
    let s = x.format(Radix::Dec, RM, &mut cc).expect("format");
    let (neg, body) = match s.strip_prefix('-') {
        Some(b) => (true, b),
        None => (false, s.as_str()),
    };
    let (mant, exp) = body.split_once('e').expect("scientific format");
    let exp: i64 = exp.parse().expect("exponent");
    let (int_part, frac_part) = mant.split_once('.').unwrap_or((mant, ""));
    let digits = format!("{int_part}{frac_part}");
    let m: BigInt = digits.parse().expect("digits");
    // value = m · 10^(exp − len(frac)) ; want round(value · 10^places)
    let shift = exp - frac_part.len() as i64 + places as i64;
    let scaled = if shift >= 0 {
        m * num_traits::pow(BigInt::from(10), shift as usize)
    } else {
        let den = num_traits::pow(BigInt::from(10), (-shift) as usize);
        let (q, r) = m.div_rem(&den);
        if r * 2 >= den {
            q + 1
        } else {
            q
        }
    };
    let mut t = scaled.to_string();
    if t.len() <= places {
        t = format!("{}{}", "0".repeat(places + 1 - t.len()), t);
    }
    let (a, b) = t.split_at(t.len() - places);
    let sign = if neg && scaled_nonzero(&t) { "-" } else { "" };
    if places == 0 {
        format!("{sign}{a}")
    } else {
        format!("{sign}{a}.{b}")
    }
}

fn scaled_nonzero(t: &str) -> bool {
    t.bytes().any(|c| c != b'0')
}

/// Approximate `log10 |x|` from the binary exponent.
pub fn log10_magnitude(x: &BigFloat) -> f64 {
    if x.is_zero() {
        return f64::NEG_INFINITY;
    }
    x.exponent().map_or(f64::INFINITY, |e| e as f64 / BITS_PER_DIGIT)
}

/// Accelerated value with a heuristic error bound.
#[derive(Clone, Debug)]
pub struct Estimate {
    pub value: BigFloat,
    /// Working precision in bits.
    pub precision: usize,
    pub error: BigFloat,
    /// Decimal places justified by `error`, capped at the request.
    pub digits: usize,
    /// Set when the target was not reached within the budget.
    pub partial: bool,
}

impl Estimate {
    fn exact(value: BigFloat, precision: usize, digits: usize) -> Self {
        Estimate {
            value,
            precision,
            error: BigFloat::new(precision),
            digits,
            partial: false,
        }
    }

    pub fn decimal(&self) -> String {
        to_decimal(&self.value, self.digits)
    }

    pub fn error_log10(&self) -> f64 {
        log10_magnitude(&self.error)
    }

    pub fn report(&self) -> EstimateReport {
        EstimateReport {
            value: self.decimal(),
            digits: self.digits,
            error_log10: self.error_log10(),
            precision_bits: self.precision,
            partial: self.partial,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct EstimateReport {
    pub value: String,
    pub digits: usize,
    pub error_log10: f64,
    pub precision_bits: usize,
    pub partial: bool,
}

fn justified_places(error: &BigFloat, target: usize) -> usize {
    if error.is_zero() {
        return target;
    }
    let e = -log10_magnitude(error);
    if e <= 0.0 {
        0
    } else {
        (e.floor() as usize).min(target)
    }
}

fn arithmetic_geometric_mean(a: &BigFloat, b: &BigFloat, p: usize) -> BigFloat {
    let two = BigFloat::from_u64(2, p);
    let (mut a, mut b) = (a.clone(), b.clone());
    for _ in 0..p {
        let an = a.add(&b, p, RM).div(&two, p, RM);
        let bn = a.mul(&b, p, RM).sqrt(p, RM);
        let diff = an.sub(&bn, p, RM);
        a = an;
        b = bn;
        if diff.is_zero() || diff.exponent().unwrap_or(0) < a.exponent().unwrap_or(0) - p as i32 + 4 {
            break;
        }
    }
    a
}

/// `Γ(1/3)³ = 2^{4/3} π² / (3^{1/4} AGM(1, (√6+√2)/4))`.
pub fn gamma_one_third_cubed(p: usize) -> BigFloat {
    let mut cc = consts();
    let pi = cc.pi(p, RM);
    let two = BigFloat::from_u64(2, p);
    let three = BigFloat::from_u64(3, p);
    let k = BigFloat::from_u64(6, p)
        .sqrt(p, RM)
        .add(&two.sqrt(p, RM), p, RM)
        .div(&BigFloat::from_u64(4, p), p, RM);
    let agm = arithmetic_geometric_mean(&BigFloat::from_u64(1, p), &k, p);
    let num = two.mul(&two.cbrt(p, RM), p, RM).mul(&pi.mul(&pi, p, RM), p, RM);
    let den = three.sqrt(p, RM).sqrt(p, RM).mul(&agm, p, RM);
    num.div(&den, p, RM)
}

/// `R_3 = 1 − 16·4^{1/3}·π⁴ / (9·Γ(1/3)⁶)`.
pub fn watson_r3(digits: usize) -> Estimate {
    let p = working_bits(digits);
    let mut cc = consts();
    let pi = cc.pi(p, RM);
    let g3 = gamma_one_third_cubed(p);
    let g6 = g3.mul(&g3, p, RM);
    let num = BigFloat::from_u64(16, p)
        .mul(&BigFloat::from_u64(4, p).cbrt(p, RM), p, RM)
        .mul(&pi.powi(4, p, RM), p, RM);
    let frac = num.div(&BigFloat::from_u64(9, p).mul(&g6, p, RM), p, RM);
    Estimate::exact(BigFloat::from_u64(1, p).sub(&frac, p, RM), p, digits)
}

/// Twice the requested precision plus a margin.
pub fn working_bits(digits: usize) -> usize {
    (2.0 * digits as f64 * BITS_PER_DIGIT) as usize + 128
}

/// `Σ_j R̃_j(n)·u_{n−j} = 0` for the integers `u_n = s^n·c_n`.
#[derive(Clone, Debug, PartialEq)]
pub struct IntegerRecurrence {
    pub polys: Vec<Poly<BigInt>>,
}

impl IntegerRecurrence {
    /// From an operator annihilating `Σ c_n x^n`, with `u_n = scale^n·c_n`.
    pub fn new(l: &DiffOperator<Rationals>, scale: &BigInt) -> Self {
        let theta = l.to_theta_shifted().0;
        let rec = theta.to_recurrence();
        let scaled: Vec<Poly<BigRational>> = rec
            .polys
            .iter()
            .enumerate()
            .map(|(j, r)| {
                let s = BigRational::from_integer(num_traits::pow(scale.clone(), j));
                poly::scale(&Rationals, r, &s)
            })
            .collect();
        let den = common_denominator(scaled.iter().flatten());
        let dq = BigRational::from_integer(den);
        let polys = scaled
            .iter()
            .map(|r| r.iter().map(|c| (c * &dq).to_integer()).collect())
            .collect();
        IntegerRecurrence { polys }
    }

    pub fn max_shift(&self) -> usize {
        self.polys.len().saturating_sub(1)
    }

    fn eval(p: &[BigInt], n: usize) -> BigInt {
        let nn = BigInt::from(n);
        p.iter().rev().fold(BigInt::zero(), |acc, c| acc * &nn + c)
    }

    /// Indices below `limit` where the leading polynomial vanishes.
    pub fn singular_indices(&self, limit: usize) -> Vec<usize> {
        (0..limit).filter(|&n| Self::eval(&self.polys[0], n).is_zero()).collect()
    }

    fn residual(&self, u: &[BigInt], n: usize, skip_lead: bool) -> BigInt {
        let mut acc = BigInt::zero();
        for (j, r) in self.polys.iter().enumerate().skip(skip_lead as usize) {
            if j > n || r.is_empty() || u[n - j].is_zero() {
                continue;
            }
            acc += Self::eval(r, n) * &u[n - j];
        }
        acc
    }

    /// Checks the seed against the recurrence, then extends to `n_target` terms.
    pub fn extend(&self, seed: &[BigInt], n_target: usize) -> Result<Vec<BigInt>> {
        let mut u = seed.to_vec();
        for n in 0..u.len() {
            if !self.residual(&u, n, false).is_zero() {
                return Err(Error::ExtensionMismatch(n));
            }
        }
        u.reserve(n_target.saturating_sub(u.len()));
        for n in u.len()..n_target {
            let lead = Self::eval(&self.polys[0], n);
            if lead.is_zero() {
                return Err(Error::SingularIndex(n));
            }
            let (q, r) = (-self.residual(&u, n, true)).div_rem(&lead);
            if !r.is_zero() {
                return Err(Error::NotIntegral(n));
            }
            u.push(q);
        }
        Ok(u)
    }
}

/// Exponent governing the algebraic tail at `x = 1`: the least non-integer
/// exponent, else the least repeated integer one.
pub fn tail_exponent(l: &DiffOperator<Rationals>) -> Result<BigRational> {
    let data = indicial_data(l, &Point::Finite(BigRational::one()))?;
    let non_int = data.exponents.iter().filter(|(e, _)| !e.is_integer()).map(|(e, _)| e.clone()).min();
    if let Some(e) = non_int {
        return Ok(e);
    }
    data.exponents
        .iter()
        .filter(|(_, m)| *m > 1)
        .map(|(e, _)| e.clone())
        .min()
        .ok_or_else(|| Error::Invalid("no singular exponent at x = 1".into()))
}

/// Partial sums `S_N = A_N / s^N` of `Σ u_n/s^n`, kept exactly.
#[derive(Clone, Debug)]
pub struct PartialSums {
    pub scale: BigInt,
    pub terms: Vec<BigInt>,
}

impl PartialSums {
    /// `S_N` for `N = 0..terms.len()`, sampled at the given indices.
    pub fn sample(&self, indices: &[usize], p: usize) -> Vec<BigFloat> {
        let mut out = Vec::with_capacity(indices.len());
        let mut acc = BigInt::zero();
        let mut pw = BigInt::one();
        let mut it = indices.iter().peekable();
        for (n, u) in self.terms.iter().enumerate() {
            if n > 0 {
                acc *= &self.scale;
                pw *= &self.scale;
            }
            acc += u;
            while it.peek() == Some(&&n) {
                out.push(bigint_to_float(&acc, p).div(&bigint_to_float(&pw, p), p, RM));
                it.next();
            }
        }
        out
    }

    /// Terms `c_n = u_n / s^n` at the given indices.
    pub fn term(&self, n: usize, p: usize) -> BigFloat {
        let pw = num_traits::pow(self.scale.clone(), n);
        bigint_to_float(&self.terms[n], p).div(&bigint_to_float(&pw, p), p, RM)
    }
}

fn power(n: usize, e: &BigRational, p: usize, cc: &mut Consts) -> BigFloat {
    let base = BigFloat::from_u64(n as u64, p);
    if e.is_integer() {
        let k = e.to_integer().to_i64().unwrap();
        let pw = base.powi(k.unsigned_abs() as usize, p, RM);
        return if k >= 0 { pw } else { BigFloat::from_u64(1, p).div(&pw, p, RM) };
    }
    base.pow(&rational_to_float(e, p), p, RM, cc)
}

/// Solves `A x = b` by Gaussian elimination with partial pivoting.
fn solve_dense(mut a: Vec<Vec<BigFloat>>, mut b: Vec<BigFloat>, p: usize) -> Option<Vec<BigFloat>> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| {
            a[i][col]
                .abs_cmp(&a[j][col])
                .unwrap_or(0)
                .cmp(&0)
        })?;
        if a[piv][col].is_zero() {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for r in col + 1..n {
            let f = a[r][col].div(&a[col][col], p, RM);
            if f.is_zero() {
                continue;
            }
            for c in col..n {
                let t = f.mul(&a[col][c], p, RM);
                a[r][c] = a[r][c].sub(&t, p, RM);
            }
            let t = f.mul(&b[col], p, RM);
            b[r] = b[r].sub(&t, p, RM);
        }
    }
    let mut x = vec![BigFloat::new(p); n];
    for r in (0..n).rev() {
        let mut acc = b[r].clone();
        for c in r + 1..n {
            acc = acc.sub(&a[r][c].mul(&x[c], p, RM), p, RM);
        }
        x[r] = acc.div(&a[r][r], p, RM);
    }
    Some(x)
}

/// Limit of `S_N` assuming `S_N = S + Σ_{k<K} b_k N^{−ρ−k}`, from `K+1`
/// equally spaced indices ending at `n_max`.
pub fn richardson(sums: &PartialSums, rho: &BigRational, order: usize, n_max: usize, p: usize) -> Option<BigFloat> {
    let lo = n_max / 2;
    let idx: Vec<usize> = (0..=order).map(|i| lo + (n_max - lo) * i / order.max(1)).collect();
    let s = sums.sample(&idx, p);
    let mut cc = consts();
    let rows = idx
        .iter()
        .map(|&n| {
            let base = BigFloat::from_u64(1, p).div(&power(n, rho, p, &mut cc), p, RM);
            let inv = BigFloat::from_u64(1, p).div(&BigFloat::from_u64(n as u64, p), p, RM);
            let mut row = vec![BigFloat::from_u64(1, p)];
            let mut t = base;
            for _ in 0..order {
                row.push(t.clone());
                t = t.mul(&inv, p, RM);
            }
            row
        })
        .collect();
    solve_dense(rows, s, p).map(|x| x[0].clone())
}

/// Levin u-transform `L_k^{(n)}` with `β = 1` on the partial sums.
pub fn levin_u(sums: &PartialSums, n: usize, k: usize, p: usize) -> BigFloat {
    let idx: Vec<usize> = (n..=n + k).collect();
    let s = sums.sample(&idx, p);
    let beta = 1u64;
    let last = BigFloat::from_u64(beta + (n + k) as u64, p);
    let mut num = BigFloat::new(p);
    let mut den = BigFloat::new(p);
    let mut binom = BigInt::one();
    for j in 0..=k {
        let m = n + j;
        let omega = BigFloat::from_u64(beta + m as u64, p).mul(&sums.term(m, p), p, RM);
        let ratio = BigFloat::from_u64(beta + m as u64, p).div(&last, p, RM);
        let w = bigint_to_float(&binom, p)
            .mul(&ratio.powi(k.saturating_sub(1), p, RM), p, RM)
            .div(&omega, p, RM);
        let w = if j % 2 == 1 { w.neg() } else { w };
        num = num.add(&w.mul(&s[j], p, RM), p, RM);
        den = den.add(&w, p, RM);
        binom = binom * BigInt::from(k - j) / BigInt::from(j + 1);
    }
    num.div(&den, p, RM)
}

#[derive(Clone, Copy, Debug)]
pub struct RetProbOptions {
    pub initial_terms: usize,
    /// Budget on the number of series terms.
    pub max_terms: usize,
    pub verify_terms: usize,
}

impl Default for RetProbOptions {
    fn default() -> Self {
        RetProbOptions {
            initial_terms: 400,
            max_terms: 3200,
            verify_terms: 16,
        }
    }
}

/// Accelerated `Σ c_n` for `c_n = u_n/scale^n` with tail exponent `rho`.
#[derive(Clone, Debug)]
pub struct SumEstimate {
    pub estimate: Estimate,
    pub richardson: BigFloat,
    pub levin: BigFloat,
    pub terms: usize,
}

fn diff_abs(a: &BigFloat, b: &BigFloat, p: usize) -> BigFloat {
    a.sub(b, p, RM).abs()
}

fn max_abs(a: BigFloat, b: BigFloat) -> BigFloat {
    if a.abs_cmp(&b).unwrap_or(0) >= 0 {
        a
    } else {
        b
    }
}

/// Sums the series at `x = 1` to `digits` decimals, doubling the term count
/// until Richardson and Levin-u agree or the budget runs out.
pub fn accelerate_sum(
    rec: &IntegerRecurrence,
    seed: &[BigInt],
    scale: &BigInt,
    rho: &BigRational,
    digits: usize,
    opts: &RetProbOptions,
) -> Result<SumEstimate> {
    let p = working_bits(digits);
    let tol_log10 = -(digits as f64) - 2.0;
    let mut n = opts.initial_terms.max(seed.len() + 8);
    let mut best: Option<SumEstimate> = None;
    loop {
        let terms = rec.extend(seed, n + 1)?;
        let sums = PartialSums {
            scale: scale.clone(),
            terms,
        };
        let order = (digits + 10).min(n / 8).max(4);
        let r1 = richardson(&sums, rho, order, n, p).ok_or(Error::Invalid("singular Richardson system".into()))?;
        let r0 = richardson(&sums, rho, order - 2, n - n / 16, p).ok_or(Error::Invalid("singular Richardson system".into()))?;
        let lk = order.min(40);
        let l1 = levin_u(&sums, n - lk, lk, p);
        let err = max_abs(diff_abs(&r1, &r0, p), diff_abs(&r1, &l1, p));
        let places = justified_places(&err, digits);
        let est = SumEstimate {
            estimate: Estimate {
                value: r1.clone(),
                precision: p,
                error: err.clone(),
                digits: places,
                partial: places < digits,
            },
            richardson: r1,
            levin: l1,
            terms: n + 1,
        };
        let done = log10_magnitude(&err) <= tol_log10 || places >= digits && log10_magnitude(&err) < -(digits as f64);
        let better = best.as_ref().map_or(true, |b| b.estimate.error.abs_cmp(&est.estimate.error).unwrap_or(0) > 0);
        if better {
            best = Some(est);
        }
        if done || n * 2 > opts.max_terms {
            return Ok(best.unwrap());
        }
        n *= 2;
    }
}

/// `R_d = 1 − 1/P_d(1)` with `P_d` summed from the recurrence of `l`.
pub fn return_probability(d: usize, digits: usize, l: &DiffOperator<Rationals>, opts: &RetProbOptions) -> Result<Estimate> {
    if d < 2 {
        return Err(Error::Invalid(format!("dimension {d} < 2")));
    }
    let p = working_bits(digits);
    if d == 2 {
        return Ok(Estimate::exact(BigFloat::from_u64(1, p), p, digits));
    }
    let scale = BigInt::from(lgf_scale(d));
    let rec = IntegerRecurrence::new(l, &scale);
    let sing = rec.singular_indices(opts.max_terms + 1);
    let seed_len = sing.last().map_or(0, |s| s + 1).max(rec.max_shift() + 1) + opts.verify_terms;
    let seed = lgf_integers(d, seed_len);
    let rho = tail_exponent(l)?;
    let sum = accelerate_sum(&rec, &seed, &scale, &rho, digits, opts)?;
    let pd = &sum.estimate.value;
    let one = BigFloat::from_u64(1, p);
    let r = one.sub(&one.div(pd, p, RM), p, RM);
    // |δR| ≈ |δP| / P²
    let err = sum.estimate.error.div(&pd.mul(pd, p, RM), p, RM);
    let places = justified_places(&err, digits);
    Ok(Estimate {
        value: r,
        precision: p,
        error: err,
        digits: places,
        partial: places < digits,
    })
}

/// `R_d` as a series in `1/d`; `coeffs[k]` multiplies `d^{−k}`.
#[derive(Clone, Debug, PartialEq)]
pub struct LargeDExpansion {
    pub coeffs: Vec<BigRational>,
}

impl LargeDExpansion {
    /// Coefficients after `d → d/2`, i.e. `coeffs[k]·2^k`; all integers.
    pub fn rescaled(&self) -> Vec<BigInt> {
        self.coeffs
            .iter()
            .enumerate()
            .map(|(k, c)| (c * BigRational::from_integer(num_traits::pow(BigInt::from(2), k))).to_integer())
            .collect()
    }

    pub fn display(&self) -> Vec<String> {
        self.coeffs.iter().map(rational_display).collect()
    }

    /// Partial sums at `d`, truncated before the smallest term.
    pub fn optimal_truncation(&self, d: i64) -> (BigRational, BigRational) {
        let u = rat(1, d);
        let terms: Vec<BigRational> = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(k, c)| c * num_traits::pow(u.clone(), k))
            .collect();
        let (kmin, _) = terms
            .iter()
            .enumerate()
            .skip(2)
            .min_by(|a, b| a.1.abs().cmp(&b.1.abs()))
            .unwrap_or((terms.len(), &u));
        let sum = terms[..kmin].iter().fold(BigRational::zero(), |a, b| a + b);
        (sum, terms.get(kmin).cloned().unwrap_or_else(BigRational::zero).abs())
    }
}

/// `R = 1 − 1/P(1)` expanded through `d^{−order}`.
pub fn large_d_return_expansion(g: &GenericDSeries, order: usize) -> Result<LargeDExpansion> {
    let p = inverse_d_expansion(g, order)?.at_x_one();
    // 1/P by series inversion, P_0 = 1
    let mut inv = vec![BigRational::zero(); order + 1];
    inv[0] = BigRational::one() / &p[0];
    for k in 1..=order {
        let mut acc = BigRational::zero();
        for j in 1..=k {
            acc += &p[j] * &inv[k - j];
        }
        inv[k] = -acc / &p[0];
    }
    let mut coeffs: Vec<BigRational> = inv.into_iter().map(|c| -c).collect();
    coeffs[0] += BigRational::one();
    let out = LargeDExpansion { coeffs };
    for (k, c) in out.coeffs.iter().enumerate() {
        if !(c * BigRational::from_integer(num_traits::pow(BigInt::from(2), k))).is_integer() {
            return Err(Error::NotIntegral(k));
        }
    }
    Ok(out)
}
