//! Guessing linear ODEs `Σ_i (Σ_j a_ij x^j) θ^i` annihilating a series mod p.

pub mod formula;
pub mod minimal;
pub mod reconstruct;

use std::io::{BufRead, Write};

use crate::diffop::{read_operator, Basis, DiffOperator, OdeFile};
use crate::error::{Error, Result};
use crate::exec::{self, Policy};
use crate::modular::{nullspace_mod_with, PrimeField};
use crate::series::io::{field as hfield, header_fields};
use crate::series::PowerSeries;

pub use formula::{fit_ode_formula, optimal_pair, scan_triples, OdeFormula, OptimalPair, ScanOptions, Triple};
pub use minimal::{minimal_ode, MinimalOde, MinimalOptions};
pub use reconstruct::{reconstruct_exact, ExactReconstructor, ReconstructOutcome};

/// Nullspace of the `(Q, D)` ansatz at one prime.
#[derive(Clone, Debug, PartialEq)]
pub struct OdeCandidate {
    pub q: usize,
    pub d: usize,
    pub p: u64,
    /// Reduced basis; vector `k` has its last nonzero entry, equal to 1, at
    /// column `pivots[k]` (column index `i·(D+1) + j`).
    pub basis: Vec<Vec<u64>>,
    pub pivots: Vec<usize>,
}

impl OdeCandidate {
    pub fn f(&self) -> usize {
        self.basis.len()
    }

    pub fn unknowns(&self) -> usize {
        (self.q + 1) * (self.d + 1)
    }

    pub fn field(&self) -> PrimeField {
        PrimeField::new(self.p).expect("prime")
    }

    /// Operator from a coefficient vector in the ansatz layout.
    pub fn vector_operator(&self, v: &[u64]) -> DiffOperator<PrimeField> {
        let grid = v.chunks(self.d + 1).map(|c| c.to_vec()).collect();
        DiffOperator::from_grid(self.field(), Basis::Theta, grid)
    }

    pub fn operator(&self, k: usize) -> DiffOperator<PrimeField> {
        self.vector_operator(&self.basis[k])
    }

    /// Writes basis vector `k` in the operator file format, padded to `(Q, D)`.
    pub fn write<W: Write>(&self, k: usize, mut out: W) -> Result<()> {
        writeln!(out, "ODE basis=theta Q={} D={} mode=mod p={}", self.q, self.d, self.p)?;
        for row in self.basis[k].chunks(self.d + 1) {
            let line: Vec<String> = row.iter().map(|c| c.to_string()).collect();
            writeln!(out, "{}", line.join(" "))?;
        }
        Ok(())
    }

    pub fn to_text(&self, k: usize) -> String {
        let mut buf = Vec::new();
        self.write(k, &mut buf).unwrap();
        String::from_utf8(buf).unwrap()
    }

    /// Reads a single-vector candidate written by [`OdeCandidate::write`].
    pub fn read<R: BufRead>(mut input: R) -> Result<Self> {
        let mut text = String::new();
        input.read_to_string(&mut text)?;
        let h = header_fields(text.lines().next().unwrap_or(""), "ODE")?;
        let q: usize = hfield(&h, "Q")?;
        let d: usize = hfield(&h, "D")?;
        let OdeFile::Mod(op) = read_operator(text.as_bytes())? else {
            return Err(Error::ModeMismatch);
        };
        if op.basis != Basis::Theta {
            return Err(Error::Parse("candidate must be in the theta basis".into()));
        }
        Ok(Self::from_vector(q, d, op.field.modulus(), flatten(&op, q, d)))
    }

    /// Single-vector candidate normalized so its last nonzero entry is 1.
    pub fn from_vector(q: usize, d: usize, p: u64, mut v: Vec<u64>) -> Self {
        let f = PrimeField::new(p).expect("prime");
        let piv = v.iter().rposition(|&c| c != 0).expect("nonzero vector");
        let inv = f.inv(v[piv]).unwrap();
        for c in v.iter_mut() {
            *c = f.mul(*c, inv);
        }
        OdeCandidate {
            q,
            d,
            p,
            basis: vec![v],
            pivots: vec![piv],
        }
    }
}

fn flatten(op: &DiffOperator<PrimeField>, q: usize, d: usize) -> Vec<u64> {
    let mut v = vec![0u64; (q + 1) * (d + 1)];
    for (i, c) in op.coeffs.iter().enumerate() {
        for (j, &a) in c.iter().enumerate() {
            v[i * (d + 1) + j] = a;
        }
    }
    v
}

/// Row `n` of the ansatz matrix: entry `(n−j)^i·s_{n−j}` at column `i(D+1)+j`.
fn ansatz_row(field: &PrimeField, s: &[u64], n: usize, q: usize, d: usize) -> Vec<u64> {
    let mut row = vec![0u64; (q + 1) * (d + 1)];
    for j in 0..=d.min(n) {
        let m = n - j;
        let sv = s[m];
        if sv == 0 {
            continue;
        }
        let base = field.from_u64(m as u64);
        let mut t = sv;
        for i in 0..=q {
            row[i * (d + 1) + j] = t;
            t = field.mul(t, base);
        }
    }
    row
}

/// Nullspace of the `(Q, D)` ansatz using every available coefficient as an
/// equation. Needs at least `(Q+1)(D+1)` coefficients.
pub fn guess_ode(series: &PowerSeries<PrimeField>, q: usize, d: usize) -> Result<OdeCandidate> {
    guess_ode_with(series, q, d, Policy::default())
}

pub fn guess_ode_with(series: &PowerSeries<PrimeField>, q: usize, d: usize, policy: Policy) -> Result<OdeCandidate> {
    let field = series.field;
    let unknowns = (q + 1) * (d + 1);
    let n = series.truncation();
    if n < unknowns {
        return Err(Error::SeriesTooShort { needed: unknowns, have: n });
    }
    let s = &series.coeffs;
    let rows = exec::map_range(policy, n, |k| ansatz_row(&field, s, k, q, d));
    let basis = nullspace_mod_with(&field, rows, unknowns, policy);
    let pivots = basis
        .iter()
        .map(|v| v.iter().rposition(|&c| c != 0).unwrap())
        .collect();
    Ok(OdeCandidate {
        q,
        d,
        p: field.modulus(),
        basis,
        pivots,
    })
}

/// Nullspace dimension only.
pub fn nullity(series: &PowerSeries<PrimeField>, q: usize, d: usize, policy: Policy) -> Result<usize> {
    Ok(guess_ode_with(series, q, d, policy)?.f())
}

/// Lowest-order operator found: for each `Q` up to `q_max`, the smallest `D`
/// whose ansatz keeps `guard` spare equations and has a nonzero nullspace.
pub fn lowest_order_ode(
    series: &PowerSeries<PrimeField>,
    q_max: usize,
    guard: usize,
    policy: Policy,
) -> Result<Option<OdeCandidate>> {
    let avail = series.truncation().saturating_sub(guard);
    for q in 0..=q_max {
        for d in 0.. {
            if (q + 1) * (d + 1) > avail {
                break;
            }
            let c = guess_ode_with(series, q, d, policy)?;
            if c.f() > 0 {
                return Ok(Some(c));
            }
        }
    }
    Ok(None)
}
