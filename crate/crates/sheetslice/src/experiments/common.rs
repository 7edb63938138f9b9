use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::config::ExperimentConfig;
use super::report::{Check, Fit, TrialRecord};
use crate::rng;
use crate::stats;

/// Run one closure per trial index in parallel. Each trial owns the
/// stream `rng::trial(seed, index)`, and results come back in index order,
/// so the output does not depend on the thread count.
pub(crate) fn par_trials<F>(c: &ExperimentConfig, f: F) -> Vec<TrialRecord>
where
    F: Fn(&mut ChaCha8Rng) -> Vec<f64> + Sync,
{
    let seed = c.trial_seed();
    c.trial_range()
        .into_par_iter()
        .map(|index| {
            let mut g = rng::trial(seed, index);
            TrialRecord { index, values: f(&mut g) }
        })
        .collect()
}

/// Fit `log y` on `log x`, record the slope and compare it with `target`.
pub(crate) fn slope_check(
    fits: &mut Vec<Fit>,
    name: &str,
    xs: &[f64],
    ys: &[f64],
    ses: &[f64],
    target: f64,
    tol: f64,
) -> Check {
    match stats::loglog_fit(xs, ys, ses) {
        Some(fit) => {
            fits.push(Fit::slope(name, &fit, Some(target)));
            Check::new(
                name,
                (fit.slope - target).abs() <= tol,
                format!("slope {:.3} ± {:.3}, target {target:.3} ± {tol:.3}", fit.slope, fit.slope_se),
            )
        }
        None => Check::inconclusive(name, "too few usable points for a fit".into()),
    }
}

/// Column-minimum threshold `2√(ln k / k)` for a mesh of `k` cells per unit.
pub(crate) fn modulus_threshold(k: usize) -> f64 {
    2.0 * ((k as f64).ln() / k as f64).sqrt()
}

/// Dyadic box counts of the columns whose minimum lies below the level
/// threshold, for `k_j = 2^j` from 8 up to the mesh `k` (a power of two).
/// `col_min` holds `k + 1` values at `s = 1 + i/k`.
pub(crate) fn box_counts(col_min: &[f64], k: usize) -> Vec<(usize, f64)> {
    let mut out = Vec::new();
    let mut kj = 8;
    while kj <= k {
        let thr = modulus_threshold(kj);
        let per = k / kj;
        let n = (0..kj).filter(|&b| col_min[b * per..=(b + 1) * per].iter().any(|&m| m <= thr)).count();
        out.push((kj, n as f64));
        kj *= 2;
    }
    out
}

/// Dyadic levels used by [`box_counts`].
pub(crate) fn box_levels(k: usize) -> Vec<usize> {
    std::iter::successors(Some(8usize), |x| Some(x * 2)).take_while(|&x| x <= k).collect()
}

/// Fit the box-count exponent from per-trial counts laid out by level.
pub(crate) fn box_dimension_check(
    rep: &mut super::report::ExperimentReport,
    levels: &[usize],
    offset: usize,
    target: f64,
    tol: f64,
) {
    let n = rep.trials.len() as u64;
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    let mut ses = Vec::new();
    for (j, &kj) in levels.iter().enumerate() {
        let vals: Vec<f64> = rep.trials.iter().map(|t| t.values[offset + j]).collect();
        let (est, lo, hi) = stats::summarize(&vals, false);
        let (_, se) = stats::mean_se(&vals);
        rep.points.push(super::report::PointEstimate {
            series: String::new(),
            param: kj as f64,
            estimate: est,
            ci_lo: lo,
            ci_hi: hi,
            n_trials: n,
        });
        let frac = vals.iter().map(|v| v / kj as f64).collect::<Vec<_>>();
        let (fe, flo, fhi) = stats::summarize(&frac, false);
        rep.points.push(super::report::PointEstimate {
            series: "fraction".into(),
            param: kj as f64,
            estimate: fe,
            ci_lo: flo,
            ci_hi: fhi,
            n_trials: n,
        });
        if est > 0.0 {
            xs.push(kj as f64);
            ys.push(est);
            ses.push(se.max(1e-3 * est));
        }
    }
    if xs.len() < 2 {
        rep.fits.push(Fit { name: "dimension".into(), value: 0.0, se: 0.0, target: Some(target) });
        rep.notes.push("no marked boxes at two or more levels: dimension reported as 0 (low confidence)".into());
        rep.checks.push(Check::new("dimension", target.abs() <= tol, "empty box counts".into()));
        return;
    }
    let check = slope_check(&mut rep.fits, "dimension", &xs, &ys, &ses, target, tol);
    rep.checks.push(check);
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn box_counts_of_a_single_low_column() {
        let k = 64;
        let mut m = vec![10.0; k + 1];
        m[20] = 0.0;
        let c = box_counts(&m, k);
        assert_eq!(c.iter().map(|x| x.0).collect::<Vec<_>>(), vec![8, 16, 32, 64]);
        // Column 20 sits inside one box per level, or on a shared edge.
        assert!(c.iter().all(|&(_, n)| n == 1.0 || n == 2.0));
        assert_eq!(box_levels(64), vec![8, 16, 32, 64]);
    }
}
