//! Landau singularities of `LGF_d`, extremal values and the order predictor.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::diffop::{indicial_data, DiffOperator, Point};
use crate::error::Result;
use crate::field::{rat, rational_display, Rationals};
use crate::poly;

/// `ξ(d,k,j)`; `None` when it vanishes.
pub fn xi(d: i64, k: i64, j: i64) -> Option<BigRational> {
    let num = d * d - (k + 4 * j + 1) * d + 4 * j * j + k + 4 * j * k;
    if num == 0 {
        return None;
    }
    Some(rat(num, 2 * (1 - k)))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SingularityEntry {
    #[serde(serialize_with = "ser_rat")]
    pub x: BigRational,
    /// Generating `(k, j)` pairs.
    pub witnesses: Vec<(usize, usize)>,
}

#[derive(Clone, Debug, Serialize)]
pub struct SingularityTable {
    pub d: usize,
    /// Ascending, distinct.
    pub entries: Vec<SingularityEntry>,
    /// Pairs with `ξ = 0` (singularity at infinity).
    pub at_infinity: Vec<(usize, usize)>,
}

fn ser_rat<S: serde::Serializer>(x: &BigRational, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&rational_display(x))
}

impl SingularityTable {
    pub fn values(&self) -> Vec<BigRational> {
        self.entries.iter().map(|e| e.x.clone()).collect()
    }

    pub fn contains(&self, x: &BigRational) -> bool {
        self.entries.binary_search_by(|e| e.x.cmp(x)).is_ok()
    }

    pub fn s_min(&self) -> &BigRational {
        &self.entries.first().unwrap().x
    }

    pub fn s_max(&self) -> &BigRational {
        &self.entries.last().unwrap().x
    }

    /// Values with multiplicity, one per generating pair.
    pub fn multiset_len(&self) -> usize {
        self.entries.iter().map(|e| e.witnesses.len()).sum()
    }
}

/// `x_s = C(d,2)/ξ(d,k,j)` for `k ∈ {0, 2, …, d−1}`, `0 ≤ j ≤ ⌊(d−k)/2⌋`.
pub fn landau_singularities(d: usize) -> SingularityTable {
    assert!(d >= 3, "d must be at least 3");
    let c2 = BigRational::from_integer(BigInt::from(d * (d - 1) / 2));
    let mut map: BTreeMap<BigRational, Vec<(usize, usize)>> = BTreeMap::new();
    let mut at_infinity = Vec::new();
    for k in std::iter::once(0).chain(2..d) {
        for j in 0..=(d - k) / 2 {
            match xi(d as i64, k as i64, j as i64) {
                Some(x) => map.entry(&c2 / x).or_default().push((k, j)),
                None => at_infinity.push((k, j)),
            }
        }
    }
    SingularityTable {
        d,
        entries: map
            .into_iter()
            .map(|(x, witnesses)| SingularityEntry { x, witnesses })
            .collect(),
        at_infinity,
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ExtremalCheck {
    pub d: usize,
    pub n: usize,
    pub p: usize,
    #[serde(serialize_with = "ser_rat")]
    pub s_min_closed: BigRational,
    #[serde(serialize_with = "ser_rat")]
    pub s_min_enumerated: BigRational,
    #[serde(serialize_with = "ser_rat")]
    pub s_max_closed: BigRational,
    #[serde(serialize_with = "ser_rat")]
    pub s_max_enumerated: BigRational,
    /// `j = d/2 − n/2 − 3/4 − (−1)^p/4` when integral.
    pub witness_j: Option<usize>,
    /// `(0, witness_j)` generates the enumerated maximum.
    pub witness_ok: bool,
}

impl ExtremalCheck {
    pub fn s_min_holds(&self) -> bool {
        self.s_min_closed == self.s_min_enumerated
    }

    pub fn s_max_holds(&self) -> bool {
        self.s_max_closed == self.s_max_enumerated
    }
}

/// `d = n² + p` with `0 ≤ p ≤ 2n`.
pub fn square_decomposition(d: usize) -> (usize, usize) {
    let mut n = (d as f64).sqrt() as usize;
    while n * n > d {
        n -= 1;
    }
    while (n + 1) * (n + 1) <= d {
        n += 1;
    }
    (n, d - n * n)
}

/// Closed forms for `S_min` and `S_max` checked against the enumeration.
pub fn extremal_singularities(d: usize) -> ExtremalCheck {
    let table = landau_singularities(d);
    let (n, p) = square_decomposition(d);
    let (di, ni, pi) = (d as i64, n as i64, p as i64);
    let sign = if p % 2 == 0 { 1 } else { -1 };
    // denominator doubled: 6n − 2p + 5 + (−1)^p (2n + 3)
    let den2 = 6 * ni - 2 * pi + 5 + sign * (2 * ni + 3);
    let s_max_closed = rat(2 * di * (di - 1), den2);
    // 4j = 2d − 2n − 3 − (−1)^p
    let j4 = 2 * di - 2 * ni - 3 - sign;
    let witness_j = (j4 >= 0 && j4 % 4 == 0).then_some((j4 / 4) as usize);
    let witness_ok = witness_j.is_some_and(|j| table.entries.last().unwrap().witnesses.contains(&(0, j)));
    ExtremalCheck {
        d,
        n,
        p,
        s_min_closed: rat(-di * (di - 2), 1),
        s_min_enumerated: table.s_min().clone(),
        s_max_closed,
        s_max_enumerated: table.s_max().clone(),
        witness_j,
        witness_ok,
    }
}

/// `q = d²/4 − d/2 + 17/8 − (−1)^d/8`.
pub fn predict_order(d: usize) -> usize {
    let d = d as i64;
    let sign = if d % 2 == 0 { 1 } else { -1 };
    let eight_q = 2 * d * d - 4 * d + 17 - sign;
    assert_eq!(eight_q % 8, 0, "predicted order is not an integer");
    (eight_q / 8) as usize
}

#[derive(Clone, Debug, Serialize)]
pub struct RootReport {
    pub root: String,
    pub multiplicity: usize,
    pub exponents: Vec<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct LandauComparison {
    pub d: usize,
    pub order: usize,
    /// Nonzero rational roots of the leading coefficient found in the table.
    pub matched: Vec<RootReport>,
    /// Rational roots outside the table with apparent exponents `0..q−2, q`.
    pub apparent_rational: Vec<RootReport>,
    /// Rational roots outside the table without the apparent pattern.
    pub discrepancies: Vec<RootReport>,
    /// Table entries that are not roots.
    pub missing: Vec<String>,
    /// Factor of the leading coefficient without rational roots (apparent
    /// polynomial), primitive, low degree first.
    pub apparent_polynomial: Vec<String>,
    pub multiplicity_at_zero: usize,
}

impl LandauComparison {
    pub fn agrees(&self) -> bool {
        self.discrepancies.is_empty() && self.missing.is_empty()
    }

    pub fn apparent_degree(&self) -> usize {
        self.apparent_polynomial.len().saturating_sub(1)
    }
}

/// Distinct non-negative integer exponents whose sum exceeds `q(q−1)/2` by the
/// multiplicity; at a simple root this is the pattern `0, 1, …, q−2, q`.
fn is_apparent_pattern(exps: &[BigRational], q: usize, mult: usize) -> bool {
    if exps.len() != q || exps.iter().any(|e| !e.is_integer() || e.is_negative()) {
        return false;
    }
    if exps.windows(2).any(|w| w[0] == w[1]) {
        return false;
    }
    let sum: BigRational = exps.iter().sum();
    sum == rat((q * (q - 1) / 2 + mult) as i64, 1)
}

/// Splits the leading-coefficient roots of `l` into Landau-matched and
/// apparent ones.
pub fn compare_with_ode(l: &DiffOperator<Rationals>, table: &SingularityTable) -> Result<LandauComparison> {
    let dx = l.to_dx().normalized();
    let q = dx.order();
    let lead = dx.leading().clone();
    let rd = poly::rational_roots(&lead);
    let mut out = LandauComparison {
        d: table.d,
        order: q,
        matched: Vec::new(),
        apparent_rational: Vec::new(),
        discrepancies: Vec::new(),
        missing: Vec::new(),
        apparent_polynomial: poly::primitive_integer(&rd.residual)
            .iter()
            .map(|c| c.to_string())
            .collect(),
        multiplicity_at_zero: 0,
    };
    for (root, mult) in &rd.roots {
        if root.is_zero() {
            out.multiplicity_at_zero = *mult;
            continue;
        }
        let loc = indicial_data(&dx, &Point::Finite(root.clone()))?;
        let exps = loc.exponent_multiset();
        let rep = RootReport {
            root: rational_display(root),
            multiplicity: *mult,
            exponents: exps.iter().map(rational_display).collect(),
        };
        if table.contains(root) {
            out.matched.push(rep);
        } else if is_apparent_pattern(&exps, q, *mult) {
            out.apparent_rational.push(rep);
        } else {
            out.discrepancies.push(rep);
        }
    }
    for e in &table.entries {
        if !rd.roots.iter().any(|(r, _)| *r == e.x) {
            out.missing.push(rational_display(&e.x));
        }
    }
    Ok(out)
}

/// Floating value, for quick inspection.
pub fn to_f64(x: &BigRational) -> f64 {
    x.numer().to_f64().unwrap() / x.denom().to_f64().unwrap()
}

/// Whether `x` lies in `[−1, 1]`.
pub fn in_unit_interval(x: &BigRational) -> bool {
    x.abs() <= BigRational::one()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn vals(d: usize) -> Vec<BigRational> {
        landau_singularities(d).values()
    }

    fn list(v: &[(i64, i64)]) -> Vec<BigRational> {
        v.iter().map(|&(n, d)| rat(n, d)).collect()
    }

    #[test]
    fn small_dimensions() {
        assert_eq!(vals(4), list(&[(-8, 1), (-6, 1), (-3, 1), (-2, 1), (1, 1)]));
        assert_eq!(vals(5), list(&[(-15, 1), (-10, 1), (-5, 1), (-5, 3), (1, 1), (5, 1)]));
        assert_eq!(
            vals(6),
            list(&[
                (-24, 1),
                (-15, 1),
                (-9, 1),
                (-60, 7),
                (-15, 2),
                (-5, 1),
                (-4, 1),
                (-15, 4),
                (-3, 2),
                (1, 1),
                (3, 1)
            ])
        );
        assert_eq!(
            vals(7),
            list(&[
                (-35, 1),
                (-21, 1),
                (-14, 1),
                (-63, 5),
                (-21, 2),
                (-7, 1),
                (-7, 2),
                (-3, 1),
                (-7, 5),
                (1, 1),
                (7, 3),
                (21, 1)
            ])
        );
    }

    #[test]
    fn witnesses_for_seven() {
        let t = landau_singularities(7);
        let find = |x: BigRational| t.entries.iter().find(|e| e.x == x).unwrap().witnesses.clone();
        assert!(find(rat(21, 1)).contains(&(0, 2)));
        assert!(find(rat(-21, 2)).contains(&(3, 2)));
    }

    #[test]
    fn extremal_cases() {
        let e = extremal_singularities(7);
        assert_eq!(e.s_min_closed, rat(-35, 1));
        assert_eq!(e.s_max_closed, rat(21, 1));
        assert!(e.s_max_holds() && e.witness_ok);
        let e = extremal_singularities(9);
        assert_eq!(e.s_max_enumerated, rat(9, 2));
        assert!(e.s_max_holds());
    }

    #[test]
    fn order_predictor() {
        assert_eq!(predict_order(5), 6);
        assert_eq!(predict_order(7), 11);
        assert_eq!(predict_order(8), 14);
        assert_eq!(predict_order(4), 4);
        assert_eq!(predict_order(6), 8);
    }

    #[test]
    fn properties_up_to_one_hundred() {
        for d in 3..=100 {
            let t = landau_singularities(d);
            assert!(t.contains(&rat(1, 1)));
            let inside: Vec<_> = t.entries.iter().filter(|e| in_unit_interval(&e.x)).collect();
            assert_eq!(inside.len(), 1, "d = {d}");
            let e = extremal_singularities(d);
            assert!(e.s_min_holds(), "d = {d}");
            assert!(e.s_max_holds(), "d = {d}");
            assert!(e.witness_ok, "d = {d}");
            let n = t.entries.len();
            assert!(5 * n >= d * d && n <= d * d, "d = {d}: {n} entries");
        }
    }

    #[test]
    fn toy_comparison() {
        // (1 − x)θ − x has leading coefficient x(1 − x) in the D_x basis
        let l = DiffOperator::theta(Rationals, vec![vec![rat(0, 1), rat(-1, 1)], vec![rat(1, 1), rat(-1, 1)]]);
        let table = SingularityTable {
            d: 0,
            entries: vec![SingularityEntry {
                x: rat(1, 1),
                witnesses: vec![],
            }],
            at_infinity: vec![],
        };
        let c = compare_with_ode(&l, &table).unwrap();
        assert!(c.agrees());
        assert_eq!(c.matched.len(), 1);
        assert_eq!(c.matched[0].root, "1");
    }

    #[test]
    fn apparent_patterns() {
        let r = |v: &[i64]| v.iter().map(|&x| rat(x, 1)).collect::<Vec<_>>();
        assert!(is_apparent_pattern(&r(&[0, 1, 2, 4]), 4, 1));
        assert!(is_apparent_pattern(&r(&[0, 1, 3, 4]), 4, 2));
        assert!(!is_apparent_pattern(&r(&[0, 1, 3, 4]), 4, 1));
        assert!(!is_apparent_pattern(&r(&[0, 1, 1, 2]), 4, 1));
        assert!(!is_apparent_pattern(&[rat(0, 1), rat(1, 2)], 2, 1));
    }
}
