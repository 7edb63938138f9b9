//! Box-counting dimension of the double-point columns.
//!
//! From one sheet, `B¹(s,t) = B(s,5/2−t) − B(s,5/2)` and
//! `B²(s,t) = B(s,5/2+t) − B(s,5/2)` are independent sheets. A column `s` is
//! marked when `min_{t₁,t₂ ∈ [1,2]} |B²(s,t₂) − B¹(s,t₁)|` is small. The
//! common `B(s,5/2)` cancels, so the search is a closest-pair query between
//! the images of `t ∈ [1/2,3/2]` and `t ∈ [7/2,9/2]` under `B(s,·)`.

use rand::seq::index::sample;

use super::common::{box_counts, box_dimension_check, box_levels, modulus_threshold, par_trials};
use super::config::ExperimentConfig;
use super::report::{Check, ExperimentReport, TrialRecord};
use crate::error::{config, Result};
use crate::randfield::ColumnWalker;
use crate::rng;

/// Small sheets per trial in the independence check.
pub const INDEPENDENCE_SHEETS: usize = 64;
/// Number of `(s,t,u,v)` quadruples in the independence check.
pub const INDEPENDENCE_QUADRUPLES: usize = 20;
const QUARTER_GRID: [f64; 5] = [1.0, 1.25, 1.5, 1.75, 2.0];

/// Expected dimension `1 ∧ (3 − d/2)`, floored at 0.
pub fn double_point_dimension(d: u32) -> f64 {
    (3.0 - d as f64 / 2.0).clamp(0.0, 1.0)
}

fn validate(c: &ExperimentConfig) -> Result<usize> {
    let k = c.mesh();
    if !k.is_power_of_two() || !(16..=512).contains(&k) {
        return Err(config("double-point scan needs a power-of-two mesh in [16, 512]"));
    }
    if c.dim < 2 {
        return Err(config("double-point scan needs d ≥ 2"));
    }
    Ok(k)
}

/// `min(cap, min_{p∈P, q∈Q} |p − q|₁)` for flat point clouds.
///
/// `Q` is sorted on its first coordinate, and for each `p` the scan moves
/// outward from `p`'s position until the first-coordinate gap alone exceeds
/// the best distance found so far.
pub fn closest_pair_l1(p: &[f64], q: &[f64], d: usize, cap: f64) -> f64 {
    let mut qs: Vec<&[f64]> = q.chunks_exact(d).collect();
    qs.sort_by(|a, b| a[0].total_cmp(&b[0]));
    let keys: Vec<f64> = qs.iter().map(|x| x[0]).collect();
    let mut best = cap;
    let dist = |a: &[f64], b: &[f64], bound: f64| {
        let mut s = 0.0;
        for (x, y) in a.iter().zip(b) {
            s += (x - y).abs();
            if s >= bound {
                break;
            }
        }
        s
    };
    for x in p.chunks_exact(d) {
        let at = keys.partition_point(|&k| k < x[0]);
        for y in qs[at..].iter() {
            if y[0] - x[0] >= best {
                break;
            }
            best = best.min(dist(x, y, best));
        }
        for y in qs[..at].iter().rev() {
            if x[0] - y[0] >= best {
                break;
            }
            best = best.min(dist(x, y, best));
        }
    }
    best
}

fn scan_nodes(k: usize) -> (Vec<f64>, usize) {
    let lower: Vec<f64> = (0..=k).map(|j| 0.5 + j as f64 / k as f64).collect();
    let n = lower.len();
    let t = lower.iter().copied().chain((0..=k).map(|j| 3.5 + j as f64 / k as f64)).collect();
    (t, n)
}

/// Quadruples `(s,t,u,v)` on the quarter grid, fixed by the config seed.
pub(crate) fn quadruples(c: &ExperimentConfig) -> Vec<[usize; 4]> {
    let mut g = rng::stream(rng::derive(c.trial_seed(), 7), 0);
    sample(&mut g, 625, INDEPENDENCE_QUADRUPLES)
        .into_iter()
        .map(|i| [i % 5, (i / 5) % 5, (i / 25) % 5, i / 125])
        .collect()
}

/// Per quadruple, sums of `X·Y` and `(X·Y)²` over small one-dimensional
/// sheets with `X = B¹(s,t)`, `Y = B²(u,v)`.
fn independence_sums<R: rand::Rng>(quads: &[[usize; 4]], rng: &mut R) -> Vec<f64> {
    // t nodes: 5/2 − t for t descending, then 5/2, then 5/2 + v.
    let mut t: Vec<f64> = QUARTER_GRID.iter().rev().map(|x| 2.5 - x).collect();
    t.push(2.5);
    t.extend(QUARTER_GRID.iter().map(|x| 2.5 + x));
    let mut sums = vec![0.0; 2 * quads.len()];
    for _ in 0..INDEPENDENCE_SHEETS {
        let mut w = ColumnWalker::new(t.clone(), 1).expect("valid nodes");
        let mut cols = Vec::with_capacity(5);
        let mut prev = 0.0;
        for &s in &QUARTER_GRID {
            w.advance(s - prev, rng);
            prev = s;
            cols.push(w.values().to_vec());
        }
        for (q, quad) in quads.iter().enumerate() {
            let [si, ti, ui, vi] = *quad;
            // 5/2 − QUARTER_GRID[ti] sits at node 4 − ti; 5/2 + v at 6 + vi.
            let x = cols[si][4 - ti] - cols[si][5];
            let y = cols[ui][6 + vi] - cols[ui][5];
            sums[2 * q] += x * y;
            sums[2 * q + 1] += (x * y).powi(2);
        }
    }
    sums
}

pub(crate) fn trials(c: &ExperimentConfig) -> Result<Vec<TrialRecord>> {
    let k = validate(c)?;
    let d = c.dim as usize;
    let (t, split) = scan_nodes(k);
    // Only the coarsest level threshold matters, so the search can stop there.
    let cap = 1.001 * modulus_threshold(8);
    let quads = quadruples(c);
    Ok(par_trials(c, |g| {
        let mut w = ColumnWalker::new(t.clone(), d).expect("valid nodes");
        let mut mins = Vec::with_capacity(k + 1);
        w.advance(1.0, g);
        for i in 0..=k {
            if i > 0 {
                w.advance(1.0 / k as f64, g);
            }
            let (a, b) = w.values().split_at(split * d);
            mins.push(closest_pair_l1(a, b, d, cap));
        }
        let mut out: Vec<f64> = box_counts(&mins, k).into_iter().map(|x| x.1).collect();
        out.extend(independence_sums(&quads, g));
        out
    }))
}

pub(crate) fn finalize(c: &ExperimentConfig, trials: Vec<TrialRecord>) -> Result<ExperimentReport> {
    let k = validate(c)?;
    let levels = box_levels(k);
    let mut rep = ExperimentReport::new(c, trials);
    let d = c.dim;
    let tol = if d == 5 { 0.2 } else { 0.15 };
    box_dimension_check(&mut rep, &levels, 0, double_point_dimension(d), tol);

    let n = (rep.trials.len() * INDEPENDENCE_SHEETS) as f64;
    let off = levels.len();
    let mut worst: f64 = 0.0;
    for q in 0..INDEPENDENCE_QUADRUPLES {
        let sxy: f64 = rep.trials.iter().map(|t| t.values[off + 2 * q]).sum();
        let sxx: f64 = rep.trials.iter().map(|t| t.values[off + 2 * q + 1]).sum();
        let cov = sxy / n;
        let se = ((sxx / n - cov * cov).max(0.0) / n).sqrt();
        if se > 0.0 {
            worst = worst.max(cov.abs() / se);
        }
    }
    rep.checks.push(Check::new(
        "independence",
        worst < 5.0,
        format!("max |cross-cov| = {worst:.2} standard errors over {INDEPENDENCE_QUADRUPLES} quadruples"),
    ));
    Ok(rep)
}
