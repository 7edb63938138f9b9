use proptest::prelude::*;
use sheetslice::acceptance::{SandwichGrids, Scale};
use sheetslice::kernels::{
    big_f_by_quadrature, big_f_eps, f_eps, fit_sandwich, g_by_double_quadrature, g_eps, gaussian_ball_prob,
    EpsKernelParams, KernelLemma, SANDWICH_ROUNDING,
};
use statrs::distribution::{ContinuousCDF, Normal};

type KernelFn = fn(EpsKernelParams, f64) -> f64;
const ALL: [(&str, KernelFn); 3] = [("f", f_eps), ("F", big_f_eps), ("G", g_eps)];

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn closed_form_matches_quadrature(eps in 0.01f64..2.0, d in 1u32..9, x in 0.0f64..3.0) {
        let p = EpsKernelParams::new(eps, d).unwrap();
        let (a, b) = (big_f_eps(p, x), big_f_by_quadrature(p, x));
        prop_assert!((a - b).abs() <= 1e-9 * a.max(b), "{a} vs {b}");
    }

    #[test]
    fn kernels_decrease_in_distance(eps in 0.01f64..2.0, d in 1u32..9, x in -2.0f64..2.0, dx in 0.0f64..1.0) {
        let p = EpsKernelParams::new(eps, d).unwrap();
        let y = x.abs() + dx;
        for (name, k) in ALL {
            prop_assert!(k(p, y) <= k(p, x) * (1.0 + 1e-10), "{name}: k({y}) = {} > k({x}) = {}", k(p, y), k(p, x));
        }
    }

    #[test]
    fn kernels_increase_in_eps(eps in 0.01f64..2.0, de in 0.0f64..1.0, d in 1u32..9, x in 0.0f64..2.0) {
        let (p, q) = (EpsKernelParams::new(eps, d).unwrap(), EpsKernelParams::new(eps + de, d).unwrap());
        for (name, k) in ALL {
            prop_assert!(k(p, x) <= k(q, x) * (1.0 + 1e-10), "{name}");
        }
    }
}

#[test]
fn g_matches_the_double_integral() {
    for (eps, d, x) in [(0.1, 3, 0.0), (0.3, 4, 0.01), (0.5, 5, 0.2), (1.2, 6, 0.05), (0.05, 7, 1.5)] {
        let p = EpsKernelParams::new(eps, d).unwrap();
        let (a, b) = (g_eps(p, x), g_by_double_quadrature(p, x));
        assert!((a - b).abs() <= 1e-8 * a.max(b), "ε = {eps}, d = {d}, x = {x}: {a} vs {b}");
    }
}

/// One constant per kernel and dimension, fitted on one ε grid, bounds the
/// kernel on a disjoint ε grid.
#[test]
fn sandwich_constants_do_not_depend_on_eps() {
    let g = SandwichGrids::new(Scale::Desk);
    for lemma in [KernelLemma::F, KernelLemma::G] {
        for d in 3..=6 {
            let s = fit_sandwich(lemma, d, &g.fit_eps, &g.fit_x).unwrap();
            let (up, low) = s.validate(&g.val_eps, &g.val_x).unwrap();
            assert!(up <= 1.0 + SANDWICH_ROUNDING && low <= 1.0 + SANDWICH_ROUNDING, "{lemma:?} d = {d}: {up}, {low}");
            let spread = |v: &[f64]| v.iter().cloned().fold(0.0, f64::max) / v.iter().cloned().fold(f64::INFINITY, f64::min);
            assert!(spread(&s.upper_by_eps) < 4.0 && spread(&s.lower_by_eps) < 4.0, "{lemma:?} d = {d}: {s:?}");
        }
    }
}

/// In one dimension `P{σ|g| ≤ ε} = 2Φ(ε/σ) − 1`.
#[test]
fn ball_probability_matches_the_normal_cdf() {
    let phi = Normal::new(0.0, 1.0).unwrap();
    for (sigma, eps) in [(1.0, 0.1), (0.5, 0.5), (2.0, 3.0)] {
        let exact = 2.0 * phi.cdf(eps / sigma) - 1.0;
        let est = gaussian_ball_prob(sigma, eps, 1, 200_000, 9).unwrap();
        assert!((est.estimate - exact).abs() < 5.0 * est.se, "σ = {sigma}, ε = {eps}: {} vs {exact}", est.estimate);
        assert!(est.ci_lo <= est.estimate && est.estimate <= est.ci_hi);
    }
}
