use num_bigint::BigInt;
use proptest::prelude::*;
use sheetslice::setkit::{
    check_entropy_content, check_entropy_doubling, kolmogorov_count, kolmogorov_entropy, minkowski_content,
    minkowski_dimension, upsilon, CompactSet1D, PsiFunction, Q,
};

fn q(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

/// Up to four pieces with endpoints `k/den` in `[0, 4]`; a quarter are points.
fn arb_set() -> impl Strategy<Value = CompactSet1D> {
    prop::collection::vec((1i64..=48, 0i64..=192, 0i64..=192, prop::bool::weighted(0.25)), 1..=4).prop_map(|raw| {
        let pieces = raw
            .into_iter()
            .map(|(den, a, len, point)| {
                let a = a % (4 * den + 1);
                let b = if point { a } else { (a + len % (4 * den + 1)).min(4 * den) };
                (q(a, den), q(b, den))
            })
            .collect();
        CompactSet1D::new(pieces).unwrap()
    })
}

/// `#{i : F ∩ [i/n, (i+1)/n) ≠ ∅}` by scanning every cell.
fn content_by_scan(f: &CompactSet1D, n: u64) -> u64 {
    let n = n as i64;
    (0..=4 * n + 1)
        .filter(|&i| {
            let (lo, hi) = (q(i, n), q(i + 1, n));
            f.pieces().iter().any(|(a, b)| *a < hi && *b >= lo)
        })
        .count() as u64
}

/// Largest ε-separated subset of a short point list, by trying all subsets.
fn packing_by_search(points: &[Q], eps: &Q) -> u64 {
    let n = points.len();
    (0u32..1 << n)
        .filter(|mask| {
            let chosen: Vec<&Q> = (0..n).filter(|i| mask & (1 << i) != 0).map(|i| &points[i]).collect();
            chosen.iter().enumerate().all(|(i, a)| chosen[i + 1..].iter().all(|b| if a > b { *a - *b >= *eps } else { *b - *a >= *eps }))
        })
        .map(|mask| mask.count_ones() as u64)
        .max()
        .unwrap_or(0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn content_matches_a_cell_scan(f in arb_set(), n in 1u64..64) {
        prop_assert_eq!(minkowski_content(&f, n).unwrap(), content_by_scan(&f, n));
    }

    #[test]
    fn entropy_and_content_inequalities_hold(f in arb_set(), n in 1u64..256) {
        prop_assert!(check_entropy_content(&f, n).unwrap());
        prop_assert!(check_entropy_doubling(&f, &q(1, n as i64)).unwrap());
    }

    #[test]
    fn witnesses_are_separated_and_inside(f in arb_set(), n in 1i64..64) {
        let eps = q(1, n);
        let (k, pts) = kolmogorov_entropy(&f, &eps).unwrap();
        prop_assert_eq!(k as usize, pts.len());
        prop_assert!(pts.iter().all(|p| f.contains(p)));
        prop_assert!(pts.windows(2).all(|w| &w[1] - &w[0] >= eps));
    }

    #[test]
    fn greedy_packing_is_maximal_on_finite_sets(
        raw in prop::collection::vec(0i64..=60, 1..=10), den in 1i64..=12, gap in 1i64..=20,
    ) {
        let points: Vec<Q> = raw.iter().map(|&a| q(a, den)).collect();
        let f = CompactSet1D::new(points.iter().map(|p| (p.clone(), p.clone())).collect()).unwrap();
        let distinct: Vec<Q> = f.pieces().iter().map(|(a, _)| a.clone()).collect();
        let eps = q(gap, 4 * den);
        prop_assert_eq!(kolmogorov_count(&f, &eps).unwrap(), packing_by_search(&distinct, &eps));
    }

    #[test]
    fn lower_dimension_never_exceeds_upper(f in arb_set()) {
        // Fine enough that the shortest possible interval, 1/48, spans many cells.
        let scales: Vec<u64> = (2..=16).map(|k| 1u64 << k).collect();
        let est = minkowski_dimension(&f, &scales).unwrap();
        prop_assert!(est.lower <= est.upper + 1e-12);
        if f.pieces().iter().any(|(a, b)| a < b) {
            prop_assert!((est.upper - 1.0).abs() < 0.05 && (est.lower - 1.0).abs() < 0.05, "{est:?}");
        }
    }

    #[test]
    fn upsilon_class_is_invariant_under_scaling(alpha in 0.5f64..8.0, d in 3u32..9, r in 0.05f64..20.0, point in any::<bool>()) {
        let f = if point { CompactSet1D::point(1.5).unwrap() } else { CompactSet1D::interval(1.0, 2.0).unwrap() };
        let base = upsilon(&f, &PsiFunction::psi_alpha(alpha).unwrap(), d, 1e6).unwrap();
        let scaled = upsilon(&f, &PsiFunction::scaled_psi_alpha(alpha, r).unwrap(), d, 1e6).unwrap();
        prop_assert_eq!(base.class, scaled.class);
    }
}

/// `{0} ∪ {1/k}` has box dimension 1/2.
#[test]
fn harmonic_sequence_has_dimension_one_half() {
    let mut points: Vec<f64> = (1..=20_000).map(|k| 1.0 / k as f64).collect();
    points.push(0.0);
    let f = CompactSet1D::from_points(&points).unwrap();
    let scales: Vec<u64> = (4..=16).map(|k| 1u64 << k).collect();
    let est = minkowski_dimension(&f, &scales).unwrap();
    assert!((est.upper - 0.5).abs() < 0.05 && (est.lower - 0.5).abs() < 0.05, "{est:?}");
}
