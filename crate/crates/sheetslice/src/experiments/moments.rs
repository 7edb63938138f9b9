//! Second moments of a simulated sheet against `min(s,u)·min(t,v)·δ_ij`.

use super::config::ExperimentConfig;
use super::report::{Check, ExperimentReport, PointEstimate, TrialRecord};
use crate::error::Result;
use crate::randfield::{build_sheet, sample_white_noise, GridSpec};
use crate::rng;
use crate::stats;

/// Fractions of the grid extent used as probe nodes along each axis.
const PROBES: [f64; 3] = [0.25, 0.5, 1.0];

fn probe_index(n: usize, frac: f64) -> usize {
    ((n as f64 * frac).round() as usize).clamp(1, n)
}

/// `(i, j)` grid indices of the probe nodes.
fn probes(g: &GridSpec) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for &a in &PROBES {
        for &b in &PROBES {
            out.push((probe_index(g.ns, a), probe_index(g.nt, b)));
        }
    }
    out
}

pub(crate) fn trials(c: &ExperimentConfig) -> Result<Vec<TrialRecord>> {
    c.grid.validate()?;
    let nodes = probes(&c.grid);
    let seed = c.trial_seed();
    // Each sheet builds its noise in parallel internally, so trials run
    // one at a time here.
    c.trial_range()
        .map(|index| {
            let mut spec = c.grid.clone();
            spec.seed = rng::derive(seed, index);
            let sheet = build_sheet(&sample_white_noise(&spec)?);
            let mut values = Vec::new();
            // Squares of coordinate 0 at each node, then the cross product
            // of coordinates 0 and 1 at the far corner when d ≥ 2.
            for &(i, j) in &nodes {
                values.push(sheet.value(i, j)[0].powi(2));
            }
            let (i, j) = *nodes.last().expect("nine probes");
            let v = sheet.value(i, j);
            values.push(if v.len() > 1 { v[0] * v[1] } else { 0.0 });
            Ok(TrialRecord { index, values })
        })
        .collect()
}

pub(crate) fn finalize(c: &ExperimentConfig, trials: Vec<TrialRecord>) -> Result<ExperimentReport> {
    let nodes = probes(&c.grid);
    let mut rep = ExperimentReport::new(c, trials);
    let n = rep.trials.len() as u64;
    let (ds, dt) = (c.grid.ds(), c.grid.dt());
    let mut worst: f64 = 0.0;
    for (k, &(i, j)) in nodes.iter().enumerate() {
        let vals: Vec<f64> = rep.trials.iter().map(|t| t.values[k]).collect();
        let (m, se) = stats::mean_se(&vals);
        let exact = i as f64 * ds * j as f64 * dt;
        rep.points.push(PointEstimate {
            series: String::new(),
            param: exact,
            estimate: m,
            ci_lo: m - stats::Z975 * se,
            ci_hi: m + stats::Z975 * se,
            n_trials: n,
        });
        // Deviations are scaled by the standard error under the Gaussian
        // null, Var(X²) = 2v²; the sample one is unreliable for skewed
        // squares at small n.
        if n > 0 && exact > 0.0 {
            worst = worst.max((m - exact).abs() / (2f64.sqrt() * exact / (n as f64).sqrt()));
        }
    }
    let cross: Vec<f64> = rep.trials.iter().map(|t| t.values[nodes.len()]).collect();
    let (m, _) = stats::mean_se(&cross);
    let (i, j) = *nodes.last().expect("nine probes");
    let corner = i as f64 * ds * j as f64 * dt;
    if n > 0 && c.dim > 1 {
        worst = worst.max(m.abs() / (corner / (n as f64).sqrt()));
    }
    if n < 2 {
        rep.checks.push(Check::inconclusive("covariance", "need at least 2 sheets".into()));
    } else {
        rep.checks.push(Check::new("covariance", worst < 5.0, format!("max deviation {worst:.2} standard errors")));
    }
    Ok(rep)
}
