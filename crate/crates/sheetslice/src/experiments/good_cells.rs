//! Maximal number of good cells per column.
//!
//! On a `k × k` lattice of `[1,2]²`, a node is good when `|B| ≤ 2√(log k/k)`
//! there. `N_i` counts good nodes in column `i`. The maximum over columns is
//! normalized by `(log k)^{(8-d)/2}` for `d ≥ 2` and by `√k (log k)^{3/2}`
//! for `d = 1`; the normalized values should stay bounded along the ladder.

use super::common::{modulus_threshold, par_trials};
use super::config::ExperimentConfig;
use super::report::{Check, ExperimentReport, PointEstimate, TrialRecord};
use crate::error::{config, Result};
use crate::randfield::{l1, ColumnWalker};
use crate::stats;

/// Growth normalization for the maximal good-cell count.
pub fn good_cell_scale(k: u64, d: u32) -> f64 {
    let lk = (k as f64).ln();
    if d == 1 {
        (k as f64).sqrt() * lk.powf(1.5)
    } else {
        lk.powf((8.0 - d as f64) / 2.0)
    }
}

fn validate(c: &ExperimentConfig) -> Result<()> {
    if !(1..=3).contains(&c.dim) {
        return Err(config("good-cell counts need d ∈ {1,2,3}"));
    }
    if c.k_ladder.is_empty() || c.k_ladder[0] < 4 {
        return Err(config("k_ladder needs entries of at least 4"));
    }
    Ok(())
}

/// Maximal good-node count over the columns of one `k × k` sample.
pub(crate) fn max_good<R: rand::Rng>(k: u64, dim: usize, rng: &mut R) -> u64 {
    let k = k as usize;
    let t: Vec<f64> = (0..k).map(|j| 1.0 + j as f64 / k as f64).collect();
    let thr = modulus_threshold(k);
    let mut w = ColumnWalker::new(t, dim).expect("valid nodes");
    w.advance(1.0, rng);
    let mut best = 0;
    for i in 0..k {
        if i > 0 {
            w.advance(1.0 / k as f64, rng);
        }
        let n = w.values().chunks_exact(dim).filter(|x| l1(x) <= thr).count();
        best = best.max(n);
    }
    best as u64
}

pub(crate) fn trials(c: &ExperimentConfig) -> Result<Vec<TrialRecord>> {
    validate(c)?;
    Ok(par_trials(c, |g| {
        c.k_ladder.iter().map(|&k| max_good(k, c.dim as usize, g) as f64 / good_cell_scale(k, c.dim)).collect()
    }))
}

pub(crate) fn finalize(c: &ExperimentConfig, trials: Vec<TrialRecord>) -> Result<ExperimentReport> {
    validate(c)?;
    let mut rep = ExperimentReport::new(c, trials);
    let n = rep.trials.len() as u64;
    let mut est = Vec::new();
    for (j, &k) in c.k_ladder.iter().enumerate() {
        let vals: Vec<f64> = rep.trials.iter().map(|t| t.values[j]).collect();
        let (e, lo, hi) = stats::summarize(&vals, false);
        rep.points.push(PointEstimate { series: String::new(), param: k as f64, estimate: e, ci_lo: lo, ci_hi: hi, n_trials: n });
        est.push(e);
    }
    let ratio = |a: f64, b: f64| if a > 0.0 { b / a } else { f64::INFINITY };
    let worst_step = est.windows(2).map(|w| ratio(w[0], w[1])).fold(0.0, f64::max);
    let overall = ratio(est[0], *est.last().expect("non-empty ladder"));
    let ok = worst_step < 2.0 && overall < 2.0;
    rep.checks.push(Check::new(
        "bounded_growth",
        ok,
        format!("largest consecutive ratio {worst_step:.3}, first-to-last ratio {overall:.3}"),
    ));
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scale_formulas() {
        let l = (64f64).ln();
        assert!((good_cell_scale(64, 2) - l.powi(3)).abs() < 1e-9);
        assert!((good_cell_scale(64, 3) - l.powf(2.5)).abs() < 1e-9);
        assert!((good_cell_scale(64, 1) - 8.0 * l.powf(1.5)).abs() < 1e-9);
    }
}
