//! Dense Gaussian elimination over prime fields.

use super::PrimeField;
use crate::exec::{self, Policy};

/// A vector of residues together with its modulus.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ResidueVector {
    pub entries: Vec<u64>,
    pub modulus: u64,
}

/// Row echelon data of a matrix: pivot columns and the reduced pivot rows
/// (each normalized to 1 at its pivot).
#[derive(Clone, Debug)]
pub struct Echelon {
    pub cols: usize,
    pub pivots: Vec<usize>,
    pub rows: Vec<Vec<u64>>,
}

impl Echelon {
    pub fn rank(&self) -> usize {
        self.pivots.len()
    }

    pub fn nullity(&self) -> usize {
        self.cols - self.rank()
    }

    pub fn free_columns(&self) -> Vec<usize> {
        let mut is_pivot = vec![false; self.cols];
        for &c in &self.pivots {
            is_pivot[c] = true;
        }
        (0..self.cols).filter(|&c| !is_pivot[c]).collect()
    }

    /// Null vector attached to free column `free`: 1 at `free`, 0 at the other
    /// free columns. These vectors are the rows of the reduced echelon form of
    /// the nullspace.
    pub fn null_vector(&self, field: &PrimeField, free: usize) -> Vec<u64> {
        let mut v = vec![0u64; self.cols];
        v[free] = 1;
        for (row, &pc) in self.rows.iter().zip(&self.pivots).rev() {
            if pc > free {
                continue;
            }
            let s = field.dot(&row[pc + 1..], &v[pc + 1..]);
            v[pc] = field.neg(s);
        }
        v
    }
}

/// Forward elimination. Rows are processed in a fixed order: ascending initial
/// weight (number of nonzero entries), ties by original index. The pivot for a
/// column is the first remaining row in that order with a nonzero entry.
pub fn echelon(field: &PrimeField, rows: Vec<Vec<u64>>, cols: usize, policy: Policy) -> Echelon {
    let mut order: Vec<(usize, usize)> = rows
        .iter()
        .enumerate()
        .map(|(i, r)| (r.iter().filter(|&&x| x != 0).count(), i))
        .collect();
    order.sort();
    let mut slots: Vec<Option<Vec<u64>>> = rows.into_iter().map(Some).collect();
    let mut active: Vec<Vec<u64>> = order
        .into_iter()
        .map(|(_, i)| slots[i].take().unwrap())
        .filter(|r| r.iter().any(|&x| x != 0))
        .collect();
    for r in &active {
        assert_eq!(r.len(), cols, "ragged matrix");
    }
    let mut pivots = Vec::new();
    let mut out_rows = Vec::new();
    for c in 0..cols {
        let Some(k) = active.iter().position(|r| r[c] != 0) else {
            continue;
        };
        let mut piv = active.remove(k);
        let inv = field.inv(piv[c]).unwrap();
        let invs = field.shoup(inv);
        for x in piv[c..].iter_mut() {
            *x = field.mul_shoup(*x, inv, invs);
        }
        let piv_ref = &piv;
        exec::for_each_mut(policy, &mut active, |r| {
            let f = r[c];
            if f == 0 {
                return;
            }
            let fs = field.shoup(f);
            r[c] = 0;
            for (x, &y) in r[c + 1..].iter_mut().zip(&piv_ref[c + 1..]) {
                if y != 0 {
                    *x = field.sub(*x, field.mul_shoup(y, f, fs));
                }
            }
        });
        active.retain(|r| r.iter().any(|&x| x != 0));
        pivots.push(c);
        out_rows.push(piv);
        if active.is_empty() {
            break;
        }
    }
    Echelon {
        cols,
        pivots,
        rows: out_rows,
    }
}

/// Reduced-echelon basis of the right nullspace of `rows` (each of length `cols`).
pub fn nullspace_mod(field: &PrimeField, rows: Vec<Vec<u64>>, cols: usize) -> Vec<Vec<u64>> {
    nullspace_mod_with(field, rows, cols, Policy::default())
}

pub fn nullspace_mod_with(
    field: &PrimeField,
    rows: Vec<Vec<u64>>,
    cols: usize,
    policy: Policy,
) -> Vec<Vec<u64>> {
    let e = echelon(field, rows, cols, policy);
    e.free_columns()
        .into_iter()
        .map(|c| e.null_vector(field, c))
        .collect()
}

/// Nullspace of a matrix given as [`ResidueVector`] rows.
pub fn nullspace_residues(rows: &[ResidueVector], cols: usize) -> Vec<ResidueVector> {
    let Some(first) = rows.first() else {
        return (0..cols)
            .map(|i| {
                let mut e = vec![0; cols];
                e[i] = 1;
                ResidueVector { entries: e, modulus: 0 }
            })
            .collect();
    };
    let p = first.modulus;
    assert!(rows.iter().all(|r| r.modulus == p), "mixed moduli");
    let field = PrimeField::new(p).expect("prime modulus");
    nullspace_mod(&field, rows.iter().map(|r| r.entries.clone()).collect(), cols)
        .into_iter()
        .map(|entries| ResidueVector { entries, modulus: p })
        .collect()
}

pub fn rank_mod(field: &PrimeField, rows: Vec<Vec<u64>>, cols: usize) -> usize {
    echelon(field, rows, cols, Policy::default()).rank()
}
