//! Box-counting dimension of `{s ∈ [1,2] : 0 ∈ B(s,[1,2])}`.
//!
//! A column is marked when its minimum over the `t` nodes falls below the
//! modulus threshold of the box level being counted. At level `k_j` the walk
//! is the restriction of one fine `k × k` sample, so all levels share a
//! single sheet per trial.

use super::common::{box_counts, box_dimension_check, box_levels, par_trials};
use super::config::ExperimentConfig;
use super::report::{ExperimentReport, TrialRecord};
use crate::error::{config, Result};
use crate::randfield::ColumnWalker;

fn validate(c: &ExperimentConfig) -> Result<usize> {
    let k = c.mesh();
    if !k.is_power_of_two() || k < 16 {
        return Err(config("zero scan needs a power-of-two mesh of at least 16"));
    }
    Ok(k)
}

/// Expected dimension `1 ∧ (2 − d/2)`, floored at 0.
pub fn zero_set_dimension(d: u32) -> f64 {
    (2.0 - d as f64 / 2.0).clamp(0.0, 1.0)
}

/// Column minima of `|B(s,·)|₁` over `t ∈ {1 + j/k}`, at `s = 1 + i/k`.
pub(crate) fn column_minima<R: rand::Rng>(t_nodes: &[f64], dim: usize, k: usize, rng: &mut R) -> Vec<f64> {
    let mut w = ColumnWalker::new(t_nodes.to_vec(), dim).expect("valid nodes");
    let mut out = Vec::with_capacity(k + 1);
    w.advance(1.0, rng);
    out.push(w.min_l1().0);
    for _ in 0..k {
        w.advance(1.0 / k as f64, rng);
        out.push(w.min_l1().0);
    }
    out
}

pub(crate) fn trials(c: &ExperimentConfig) -> Result<Vec<TrialRecord>> {
    let k = validate(c)?;
    let t: Vec<f64> = (0..=k).map(|j| 1.0 + j as f64 / k as f64).collect();
    Ok(par_trials(c, |g| {
        let m = column_minima(&t, c.dim as usize, k, g);
        box_counts(&m, k).into_iter().map(|x| x.1).collect()
    }))
}

pub(crate) fn finalize(c: &ExperimentConfig, trials: Vec<TrialRecord>) -> Result<ExperimentReport> {
    let k = validate(c)?;
    let mut rep = ExperimentReport::new(c, trials);
    let target = zero_set_dimension(c.dim);
    let tol = if c.dim == 2 { 0.1 } else { 0.15 };
    if c.dim >= 4 {
        rep.notes.push("d ≥ 4: the zero set is expected to be empty, marked fractions should shrink".into());
    }
    box_dimension_check(&mut rep, &box_levels(k), 0, target, tol);
    Ok(rep)
}
