use lgf_core::exec::Policy;
use lgf_core::guess::{
    fit_ode_formula, guess_ode, minimal_ode, nullity, optimal_pair, scan_triples, MinimalOptions, ScanOptions,
};
use lgf_core::modular::nth_prime;
use lgf_core::series::lgf_series_mod;

#[test]
fn nullity_is_monotone_in_both_directions() {
    let s = lgf_series_mod(4, 100, nth_prime(0)).unwrap();
    let mut grid = vec![vec![0usize; 16]; 8];
    for (q, row) in grid.iter_mut().enumerate().skip(3) {
        for (d, f) in row.iter_mut().enumerate().skip(4) {
            if (q + 1) * (d + 1) + 10 <= s.truncation() {
                *f = nullity(&s, q, d, Policy::Sequential).unwrap();
            }
        }
    }
    for q in 3..8 {
        for d in 4..15 {
            if (q + 1) * (d + 2) + 10 > s.truncation() {
                continue;
            }
            assert!(grid[q][d] <= grid[q][d + 1], "D step at ({q},{d})");
            if q + 1 < 8 && (q + 2) * (d + 1) + 10 <= s.truncation() {
                assert!(grid[q][d] <= grid[q + 1][d], "Q step at ({q},{d})");
            }
        }
    }
}

#[test]
fn five_dimensional_formula_and_minimal_order() {
    let s = lgf_series_mod(5, 150, nth_prime(1)).unwrap();
    let triples = scan_triples(
        &s,
        &ScanOptions {
            q_max: 20,
            ..Default::default()
        },
    )
    .unwrap();
    let formula = fit_ode_formula(&triples).unwrap();
    assert_eq!((formula.m, formula.q, formula.c), (7, 6, 23));
    let pair = optimal_pair(&formula).unwrap();
    assert_eq!((pair.q, pair.d), (7, 10));
    let min = minimal_ode(&s, &formula, &MinimalOptions::default()).unwrap();
    assert_eq!(min.minimal.f(), 1);
    assert_eq!(min.minimal.operator(0).order(), 6);
}

#[test]
fn four_dimensional_operator_has_order_four() {
    let s = lgf_series_mod(4, 60, nth_prime(0)).unwrap();
    let cand = guess_ode(&s, 4, 7).unwrap();
    assert_eq!(cand.f(), 1);
    assert_eq!(cand.operator(0).order(), 4);
    assert_eq!(guess_ode(&s, 3, 7).unwrap().f(), 0);
}
