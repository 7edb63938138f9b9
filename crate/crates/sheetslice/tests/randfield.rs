use proptest::prelude::*;
use sheetslice::randfield::{build_sheet, sample_bm, sample_white_noise, slice, GridSpec};
use sheetslice::stats;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn rectangle_mass_equals_the_noise_inside(
        ns in 2usize..12, nt in 2usize..12, dim in 1usize..4, seed in any::<u64>(),
        a in 0usize..12, b in 0usize..12, c in 0usize..12, e in 0usize..12,
    ) {
        let spec = GridSpec::new(1.5, 0.75, ns, nt, dim, seed).unwrap();
        let noise = sample_white_noise(&spec).unwrap();
        let sheet = build_sheet(&noise);
        let (i1, i2) = (a.min(c) % (ns + 1), a.max(c) % (ns + 1));
        let (i1, i2) = (i1.min(i2), i1.max(i2));
        let (j1, j2) = (b.min(e) % (nt + 1), b.max(e) % (nt + 1));
        let (j1, j2) = (j1.min(j2), j1.max(j2));
        let mass = sheet.rect_mass(i1, j1, i2, j2);
        let cells = ((i2 - i1) * (j2 - j1)).max(1) as f64;
        for k in 0..dim {
            let direct: f64 = (i1..i2).flat_map(|i| (j1..j2).map(move |j| (i, j))).map(|(i, j)| noise.cell(i, j)[k]).sum();
            prop_assert!((mass[k] - direct).abs() <= 1e-10 * cells, "{} vs {}", mass[k], direct);
        }
    }

    #[test]
    fn sampling_is_a_pure_function_of_spec_and_seed(seed in any::<u64>(), n in 2usize..10) {
        let spec = GridSpec::unit(n, 2, seed).unwrap();
        prop_assert_eq!(build_sheet(&sample_white_noise(&spec).unwrap()), build_sheet(&sample_white_noise(&spec).unwrap()));
        let times = [0.0, 0.5, 1.0, 2.0];
        prop_assert_eq!(sample_bm(3, &times, seed).unwrap(), sample_bm(3, &times, seed).unwrap());
        let other = GridSpec::unit(n, 2, seed ^ 1).unwrap();
        prop_assert_ne!(sample_white_noise(&spec).unwrap().cells, sample_white_noise(&other).unwrap().cells);
    }
}

/// `B(2s, 2t)/2` has the law of `B(s, t)`: compare means and variances.
#[test]
fn sheet_scaling_preserves_the_first_two_moments() {
    const SHEETS: u64 = 4000;
    let (mut small, mut large) = (Vec::new(), Vec::new());
    for k in 0..SHEETS {
        let spec = GridSpec::new(2.0, 2.0, 8, 8, 1, k).unwrap();
        let sheet = build_sheet(&sample_white_noise(&spec).unwrap());
        // Nodes (s, t) = (0.75, 0.5) and (1.5, 1.0).
        small.push(sheet.value(3, 2)[0]);
        large.push(sheet.value(6, 4)[0] / 2.0);
    }
    for xs in [&small, &large] {
        let (m, se) = stats::mean_se(xs);
        assert!(m.abs() < 5.0 * se, "mean {m} ± {se}");
        let sq: Vec<f64> = xs.iter().map(|x| x * x).collect();
        let (v, se) = stats::mean_se(&sq);
        assert!((v - 0.375).abs() < 5.0 * se, "variance {v} ± {se}");
    }
    let diff: Vec<f64> = small.iter().zip(&large).map(|(a, b)| a * a - b * b).collect();
    let (m, se) = stats::mean_se(&diff);
    assert!(m.abs() < 5.0 * se, "second moments differ by {m} ± {se}");
}

#[test]
fn slice_is_a_brownian_motion_in_t() {
    // Var B(s, t) = s·t on each coordinate, along a snapped slice.
    const SHEETS: u64 = 3000;
    let mut at: Vec<Vec<f64>> = vec![Vec::new(); 3];
    for k in 0..SHEETS {
        let spec = GridSpec::new(2.0, 2.0, 16, 16, 2, 1000 + k).unwrap();
        let sheet = build_sheet(&sample_white_noise(&spec).unwrap());
        let sl = slice(&sheet, 1.5).unwrap();
        for (m, j) in [4usize, 8, 16].iter().enumerate() {
            at[m].push(sl.path.point(*j)[1].powi(2));
        }
    }
    for (m, t) in [0.5, 1.0, 2.0].iter().enumerate() {
        let (v, se) = stats::mean_se(&at[m]);
        assert!((v - 1.5 * t).abs() < 5.0 * se, "t = {t}: {v} ± {se}");
    }
}
