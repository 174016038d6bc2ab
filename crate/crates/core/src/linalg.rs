//! Gaussian elimination over an arbitrary [`Field`] (small systems, exact data).

use crate::field::Field;

/// Reduced row echelon form in place; returns the pivot columns.
pub fn rref<F: Field>(f: &F, m: &mut [Vec<F::Elem>], cols: usize) -> Vec<usize> {
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == m.len() {
            break;
        }
        let Some(k) = (r..m.len()).find(|&i| !f.is_zero(&m[i][c])) else {
            continue;
        };
        m.swap(r, k);
        let inv = f.inv(&m[r][c]).unwrap();
        for x in m[r].iter_mut() {
            *x = f.mul(x, &inv);
        }
        let piv = m[r].clone();
        for (i, row) in m.iter_mut().enumerate() {
            if i == r || f.is_zero(&row[c]) {
                continue;
            }
            let s = row[c].clone();
            for (x, y) in row.iter_mut().zip(&piv) {
                if !f.is_zero(y) {
                    *x = f.sub(x, &f.mul(&s, y));
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    pivots
}

/// Reduced-echelon basis of the right nullspace.
pub fn nullspace<F: Field>(f: &F, rows: &[Vec<F::Elem>], cols: usize) -> Vec<Vec<F::Elem>> {
    let mut m = rows.to_vec();
    let pivots = rref(f, &mut m, cols);
    let mut is_pivot = vec![None; cols];
    for (r, &c) in pivots.iter().enumerate() {
        is_pivot[c] = Some(r);
    }
    (0..cols)
        .filter(|&c| is_pivot[c].is_none())
        .map(|free| {
            let mut v = vec![f.zero(); cols];
            v[free] = f.one();
            for (r, &pc) in pivots.iter().enumerate() {
                v[pc] = f.neg(&m[r][free]);
            }
            v
        })
        .collect()
}

pub fn rank<F: Field>(f: &F, rows: &[Vec<F::Elem>], cols: usize) -> usize {
    let mut m = rows.to_vec();
    rref(f, &mut m, cols).len()
}

/// Solves `A x = b` for square nonsingular `A`.
pub fn solve<F: Field>(f: &F, a: &[Vec<F::Elem>], b: &[F::Elem]) -> Option<Vec<F::Elem>> {
    let n = a.len();
    let mut m: Vec<Vec<F::Elem>> = a
        .iter()
        .zip(b)
        .map(|(r, x)| {
            let mut r = r.clone();
            r.push(x.clone());
            r
        })
        .collect();
    let piv = rref(f, &mut m, n);
    if piv.len() < n {
        return None;
    }
    Some(m.iter().map(|r| r[n].clone()).collect())
}
