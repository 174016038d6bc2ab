use std::io::{BufRead, Write};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::field::{common_denominator, content, rational_display, Field, Rationals};
use crate::modular::PrimeField;
use crate::poly::{self, Poly};
use crate::series::io::{field as hfield, header_fields};
use crate::series::PowerSeries;

use super::recurrence::Recurrence;
use super::ring::{leibniz_adjoint, leibniz_mul, PolyRing};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Basis {
    /// `θ = x d/dx`.
    Theta,
    /// `D_x = d/dx`.
    Dx,
}

impl Basis {
    pub fn name(&self) -> &'static str {
        match self {
            Basis::Theta => "theta",
            Basis::Dx => "dx",
        }
    }
}

/// `Σ_i a_i(x) ∂^i` with `∂` either `θ` or `D_x`; coefficients on the left.
#[derive(Clone, Debug, PartialEq)]
pub struct DiffOperator<F: Field> {
    pub field: F,
    pub basis: Basis,
    pub coeffs: Vec<Poly<F::Elem>>,
}

/// Stirling numbers of the second kind `S(i,k)`, `0 ≤ k ≤ i ≤ n`.
fn stirling2(n: usize) -> Vec<Vec<BigInt>> {
    let mut s = vec![vec![BigInt::zero(); n + 1]; n + 1];
    s[0][0] = BigInt::one();
    for i in 1..=n {
        for k in 1..=i {
            s[i][k] = BigInt::from(k) * &s[i - 1][k] + &s[i - 1][k - 1];
        }
    }
    s
}

/// Signed Stirling numbers of the first kind: `θ(θ−1)…(θ−k+1) = Σ_i s(k,i) θ^i`.
fn stirling1(n: usize) -> Vec<Vec<BigInt>> {
    let mut s = vec![vec![BigInt::zero(); n + 1]; n + 1];
    s[0][0] = BigInt::one();
    for k in 1..=n {
        for i in 1..=k {
            s[k][i] = &s[k - 1][i - 1] - BigInt::from(k - 1) * &s[k - 1][i];
        }
    }
    s
}

fn valuation<F: Field>(f: &F, p: &[F::Elem]) -> Option<usize> {
    p.iter().position(|c| !f.is_zero(c))
}

impl<F: Field> DiffOperator<F> {
    pub fn new(field: F, basis: Basis, coeffs: Vec<Poly<F::Elem>>) -> Self {
        let mut coeffs: Vec<_> = coeffs.into_iter().map(|c| poly::trim(&field, c)).collect();
        while coeffs.last().is_some_and(|c| c.is_empty()) {
            coeffs.pop();
        }
        DiffOperator {
            field,
            basis,
            coeffs,
        }
    }

    pub fn theta(field: F, coeffs: Vec<Poly<F::Elem>>) -> Self {
        Self::new(field, Basis::Theta, coeffs)
    }

    pub fn dx(field: F, coeffs: Vec<Poly<F::Elem>>) -> Self {
        Self::new(field, Basis::Dx, coeffs)
    }

    /// Operator from a dense `(Q+1)×(D+1)` grid `a[i][j]` (coefficient of `x^j ∂^i`).
    pub fn from_grid(field: F, basis: Basis, grid: Vec<Vec<F::Elem>>) -> Self {
        Self::new(field, basis, grid)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn order(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    /// Largest coefficient degree.
    pub fn degree(&self) -> usize {
        self.coeffs.iter().map(|c| c.len().saturating_sub(1)).max().unwrap_or(0)
    }

    pub fn leading(&self) -> &Poly<F::Elem> {
        self.coeffs.last().expect("nonzero operator")
    }

    /// Dense grid padded to `(order+1) × (degree+1)`.
    pub fn grid(&self) -> Vec<Vec<F::Elem>> {
        let dd = self.degree() + 1;
        self.coeffs
            .iter()
            .map(|c| {
                let mut r = c.clone();
                r.resize(dd, self.field.zero());
                r
            })
            .collect()
    }

    fn stirling_elem(&self, v: &BigInt) -> F::Elem {
        self.field.from_bigint(v)
    }

    /// Same operator in the `D_x` basis: `θ^i = Σ_k S(i,k) x^k D^k`.
    pub fn to_dx(&self) -> Self {
        if self.basis == Basis::Dx || self.is_zero() {
            return Self::new(self.field.clone(), Basis::Dx, self.coeffs.clone());
        }
        let f = &self.field;
        let r = self.order();
        let s2 = stirling2(r);
        let mut out: Vec<Poly<F::Elem>> = vec![Vec::new(); r + 1];
        for (k, o) in out.iter_mut().enumerate() {
            let mut acc: Poly<F::Elem> = Vec::new();
            for i in k..=r {
                if s2[i][k].is_zero() {
                    continue;
                }
                acc = poly::add(f, &acc, &poly::scale(f, &self.coeffs[i], &self.stirling_elem(&s2[i][k])));
            }
            *o = poly::shift_up(f, &acc, k);
        }
        Self::new(f.clone(), Basis::Dx, out)
    }

    /// `x^s·L` in the θ basis with the least `s ≥ 0` making coefficients
    /// polynomial; returns the operator and `s`.
    pub fn to_theta_shifted(&self) -> (Self, usize) {
        if self.basis == Basis::Theta || self.is_zero() {
            return (Self::new(self.field.clone(), Basis::Theta, self.coeffs.clone()), 0);
        }
        let f = &self.field;
        let r = self.order();
        let s = self
            .coeffs
            .iter()
            .enumerate()
            .filter_map(|(k, c)| valuation(f, c).map(|v| k.saturating_sub(v)))
            .max()
            .unwrap_or(0);
        let s1 = stirling1(r);
        let mut out: Vec<Poly<F::Elem>> = vec![Vec::new(); r + 1];
        for (k, c) in self.coeffs.iter().enumerate() {
            if c.is_empty() {
                continue;
            }
            // x^{s-k} c_k
            let shifted: Poly<F::Elem> = if s >= k {
                poly::shift_up(f, c, s - k)
            } else {
                c[k - s..].to_vec()
            };
            for (i, o) in out.iter_mut().enumerate().take(k + 1) {
                if s1[k][i].is_zero() {
                    continue;
                }
                *o = poly::add(f, o, &poly::scale(f, &shifted, &self.stirling_elem(&s1[k][i])));
            }
        }
        (Self::new(f.clone(), Basis::Theta, out), s)
    }

    /// θ-basis form; panics if a left power of `x` would be needed.
    pub fn to_theta(&self) -> Self {
        let (op, s) = self.to_theta_shifted();
        assert_eq!(s, 0, "operator is not polynomial in the theta basis");
        op
    }

    pub fn in_basis(&self, basis: Basis) -> Self {
        match basis {
            Basis::Dx => self.to_dx(),
            Basis::Theta => self.to_theta_shifted().0,
        }
    }

    /// `L(S)`: all `N` coefficients in the θ basis, `N − order` in the `D_x` basis.
    pub fn apply(&self, s: &PowerSeries<F>) -> PowerSeries<F> {
        let f = &self.field;
        let n = s.truncation();
        match self.basis {
            Basis::Theta => {
                let mut out = vec![f.zero(); n];
                for (k, o) in out.iter_mut().enumerate() {
                    for (i, a) in self.coeffs.iter().enumerate() {
                        for (j, c) in a.iter().enumerate() {
                            if j > k || f.is_zero(c) {
                                continue;
                            }
                            let m = k - j;
                            let t = f.mul(&f.mul(c, &f.pow(&f.from_i64(m as i64), i as u64)), &s.coeffs[m]);
                            *o = f.add(o, &t);
                        }
                    }
                }
                PowerSeries::new(f.clone(), out)
            }
            Basis::Dx => {
                let len = n.saturating_sub(self.order());
                let mut out = vec![f.zero(); len];
                for (k, a) in self.coeffs.iter().enumerate() {
                    // D^k S
                    let dk: Vec<F::Elem> = (0..n.saturating_sub(k))
                        .map(|m| {
                            let mut c = s.coeffs[m + k].clone();
                            for t in 1..=k {
                                c = f.mul(&c, &f.from_i64((m + t) as i64));
                            }
                            c
                        })
                        .collect();
                    for (idx, o) in out.iter_mut().enumerate() {
                        for (j, c) in a.iter().enumerate() {
                            if j > idx || f.is_zero(c) {
                                continue;
                            }
                            *o = f.add(o, &f.mul(c, &dk[idx - j]));
                        }
                    }
                }
                PowerSeries::new(f.clone(), out)
            }
        }
    }

    /// Recurrence `Σ_j R_j(n) c_{n−j} = 0` of a θ-basis operator.
    pub fn to_recurrence(&self) -> Recurrence<F> {
        let op = self.to_theta_shifted().0;
        Recurrence::from_theta(&op)
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.basis, other.basis, "basis mismatch");
        let f = &self.field;
        let n = self.coeffs.len().max(other.coeffs.len());
        let coeffs = (0..n)
            .map(|i| {
                let e = Vec::new();
                poly::add(f, self.coeffs.get(i).unwrap_or(&e), other.coeffs.get(i).unwrap_or(&e))
            })
            .collect();
        Self::new(f.clone(), self.basis, coeffs)
    }

    pub fn neg(&self) -> Self {
        let f = &self.field;
        Self::new(f.clone(), self.basis, self.coeffs.iter().map(|c| poly::neg(f, c)).collect())
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn scale(&self, c: &F::Elem) -> Self {
        let f = &self.field;
        Self::new(f.clone(), self.basis, self.coeffs.iter().map(|p| poly::scale(f, p, c)).collect())
    }

    /// `p(x)·L`.
    pub fn left_mul_poly(&self, p: &[F::Elem]) -> Self {
        let f = &self.field;
        Self::new(f.clone(), self.basis, self.coeffs.iter().map(|c| poly::mul(f, c, p)).collect())
    }

    /// Composition `self ∘ other`, returned in the `D_x` basis.
    pub fn mul(&self, other: &Self) -> Self {
        let r = PolyRing(self.field.clone());
        let a = self.to_dx();
        let b = other.to_dx();
        Self::new(self.field.clone(), Basis::Dx, leibniz_mul(&r, &a.coeffs, &b.coeffs))
    }

    /// Formal adjoint `Σ (−D)^i ∘ a_i` in the `D_x` basis.
    pub fn adjoint(&self) -> Self {
        let r = PolyRing(self.field.clone());
        let a = self.to_dx();
        Self::new(self.field.clone(), Basis::Dx, leibniz_adjoint(&r, &a.coeffs))
    }

    /// Leading coefficient of the leading polynomial.
    pub fn leading_scalar(&self) -> F::Elem {
        self.leading().last().cloned().unwrap()
    }

    /// Scales so that the leading scalar is 1.
    pub fn monic(&self) -> Self {
        if self.is_zero() {
            return self.clone();
        }
        let inv = self.field.inv(&self.leading_scalar()).unwrap();
        self.scale(&inv)
    }

    /// Equality up to a nonzero constant factor, compared in the `D_x` basis.
    pub fn eq_up_to_unit(&self, other: &Self) -> bool {
        if self.is_zero() || other.is_zero() {
            return self.is_zero() && other.is_zero();
        }
        self.to_dx().monic().coeffs == other.to_dx().monic().coeffs
    }

    /// Divides all coefficients by their common polynomial gcd (made monic).
    pub fn remove_poly_content(&self) -> Self {
        let f = &self.field;
        let g = self
            .coeffs
            .iter()
            .fold(Vec::new(), |acc: Poly<F::Elem>, c| poly::gcd(f, &acc, c));
        if g.len() <= 1 {
            return self.clone();
        }
        Self::new(
            f.clone(),
            self.basis,
            self.coeffs.iter().map(|c| poly::divrem(f, c, &g).0).collect(),
        )
    }

    pub fn write<W: Write>(&self, mut out: W) -> Result<()> {
        let p = self.field.modulus().map(|p| p.to_string()).unwrap_or_else(|| "-".into());
        let grid = self.grid();
        writeln!(
            out,
            "ODE basis={} Q={} D={} mode={} p={}",
            self.basis.name(),
            self.order(),
            self.degree(),
            self.field.mode(),
            p
        )?;
        for row in grid {
            let line: Vec<String> = row.iter().map(|c| self.field.format(c)).collect();
            writeln!(out, "{}", line.join(" "))?;
        }
        Ok(())
    }

    pub fn to_text(&self) -> String {
        let mut buf = Vec::new();
        self.write(&mut buf).unwrap();
        String::from_utf8(buf).unwrap()
    }

    /// `a_i(x)` evaluated, used in probes: coefficient polynomials as strings.
    pub fn describe(&self) -> String {
        let sym = match self.basis {
            Basis::Theta => "θ",
            Basis::Dx => "D",
        };
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_empty())
            .map(|(i, c)| format!("({})·{}^{}", super::ring::poly_to_string(&self.field, c), sym, i))
            .collect::<Vec<_>>()
            .join(" + ")
    }
}

impl DiffOperator<Rationals> {
    /// Integer coefficients with content 1; the lowest nonzero coefficient of
    /// the leading polynomial is positive.
    pub fn primitive(&self) -> Self {
        if self.is_zero() {
            return self.clone();
        }
        let all: Vec<&BigRational> = self.coeffs.iter().flatten().collect();
        let den = common_denominator(all.iter().copied());
        let ints: Vec<Vec<BigInt>> = self
            .coeffs
            .iter()
            .map(|c| c.iter().map(|x| (x * &den).to_integer()).collect())
            .collect();
        let flat: Vec<BigInt> = ints.iter().flatten().cloned().collect();
        let mut g = content(&flat);
        if self.leading().iter().find(|c| !c.is_zero()).unwrap().is_negative() {
            g = -g;
        }
        let coeffs = ints
            .iter()
            .map(|c| c.iter().map(|x| BigRational::from_integer(x / &g)).collect())
            .collect();
        Self::new(Rationals, self.basis, coeffs)
    }

    /// Primitive form after removing the common polynomial factor.
    pub fn normalized(&self) -> Self {
        let g = self
            .coeffs
            .iter()
            .fold(Vec::new(), |acc: Poly<BigRational>, c| poly::gcd_rational(&acc, c));
        if g.len() <= 1 {
            return self.primitive();
        }
        let coeffs = self.coeffs.iter().map(|c| poly::divrem(&Rationals, c, &g).0).collect();
        Self::new(Rationals, self.basis, coeffs).primitive()
    }

    /// Integer coefficient grid; requires integral coefficients.
    pub fn integer_coeffs(&self) -> Vec<Vec<BigInt>> {
        self.coeffs
            .iter()
            .map(|c| {
                c.iter()
                    .map(|x| {
                        assert!(x.is_integer(), "non-integral coefficient");
                        x.to_integer()
                    })
                    .collect()
            })
            .collect()
    }

    pub fn from_integers(basis: Basis, coeffs: Vec<Vec<BigInt>>) -> Self {
        Self::new(
            Rationals,
            basis,
            coeffs
                .into_iter()
                .map(|c| c.into_iter().map(BigRational::from_integer).collect())
                .collect(),
        )
    }

    pub fn reduce(&self, field: PrimeField) -> Result<DiffOperator<PrimeField>> {
        let coeffs = self
            .coeffs
            .iter()
            .map(|c| {
                c.iter()
                    .map(|x| field.from_rational(x).ok_or(Error::BadPrime(field.modulus())))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<_>>()?;
        Ok(DiffOperator::new(field, self.basis, coeffs))
    }

    /// Text form with integers printed without denominators.
    pub fn to_text_compact(&self) -> String {
        let mut s = format!(
            "ODE basis={} Q={} D={} mode=exact p=-\n",
            self.basis.name(),
            self.order(),
            self.degree()
        );
        for row in self.grid() {
            let line: Vec<String> = row.iter().map(rational_display).collect();
            s.push_str(&line.join(" "));
            s.push('\n');
        }
        s
    }

    pub fn max_coefficient_bits(&self) -> u64 {
        self.coeffs
            .iter()
            .flatten()
            .map(|c| c.numer().bits().max(c.denom().bits()))
            .max()
            .unwrap_or(0)
    }

    pub fn is_integral(&self) -> bool {
        self.coeffs.iter().flatten().all(|c| c.is_integer())
    }

    pub fn one_op(basis: Basis) -> Self {
        Self::new(Rationals, basis, vec![vec![BigRational::one()]])
    }
}

/// Operator read from a file.
#[derive(Clone, Debug)]
pub enum OdeFile {
    Exact(DiffOperator<Rationals>),
    Mod(DiffOperator<PrimeField>),
}

pub fn read_operator<R: BufRead>(input: R) -> Result<OdeFile> {
    let mut lines = input.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::Parse("empty operator file".into()))??;
    let h = header_fields(&header, "ODE")?;
    let q: usize = hfield(&h, "Q")?;
    let d: usize = hfield(&h, "D")?;
    let basis = match hfield::<String>(&h, "basis")?.as_str() {
        "theta" => Basis::Theta,
        "dx" => Basis::Dx,
        b => return Err(Error::Parse(format!("unknown basis '{b}'"))),
    };
    let mode: String = hfield(&h, "mode")?;
    let mut rows: Vec<Vec<String>> = Vec::with_capacity(q + 1);
    for i in 0..=q {
        let line = lines
            .next()
            .ok_or_else(|| Error::Parse(format!("missing row {i}")))??;
        let row: Vec<String> = line.split_whitespace().map(String::from).collect();
        if row.len() != d + 1 {
            return Err(Error::Parse(format!("row {i}: expected {} entries", d + 1)));
        }
        rows.push(row);
    }
    match mode.as_str() {
        "exact" => {
            let grid = rows
                .iter()
                .map(|r| r.iter().map(|s| Rationals.parse(s)).collect::<Result<Vec<_>>>())
                .collect::<Result<_>>()?;
            Ok(OdeFile::Exact(DiffOperator::new(Rationals, basis, grid)))
        }
        "mod" => {
            let p: u64 = hfield(&h, "p")?;
            let f = PrimeField::new(p)?;
            let grid = rows
                .iter()
                .map(|r| r.iter().map(|s| Field::parse(&f, s)).collect::<Result<Vec<_>>>())
                .collect::<Result<_>>()?;
            Ok(OdeFile::Mod(DiffOperator::new(f, basis, grid)))
        }
        m => Err(Error::Parse(format!("unknown mode '{m}'"))),
    }
}
