//! Monte Carlo experiments.
//!
//! Every experiment is a pair of functions: one produces raw
//! [`TrialRecord`]s for the configured trial range, the other summarizes a
//! set of records into an [`ExperimentReport`]. Reports carry their raw
//! trials, so [`merge`] is the union of trial sets followed by the same
//! summary, and is therefore associative and commutative.

mod common;
pub mod config;
mod double_points;
mod escape;
mod good_cells;
mod hitting;
mod moments;
pub mod report;
mod sheet_hit;
mod zeros;

use std::collections::BTreeMap;
use std::time::Instant;

pub use config::ExperimentConfig;
pub use double_points::{closest_pair_l1, double_point_dimension, INDEPENDENCE_QUADRUPLES, INDEPENDENCE_SHEETS};
pub use escape::{complete_blocks, set_critical_rate, transition_alpha, Trend, DEFAULT_SUBSTEPS, MIN_EPOCHS};
pub use good_cells::good_cell_scale;
pub use report::{points_csv, Check, ExperimentReport, Fit, Outcome, PointEstimate, TrialRecord};
pub use sheet_hit::{sandwich_profile, LATTICE_LAMBDA};
pub use zeros::zero_set_dimension;

use crate::error::{config, Error, Result};

/// Names accepted by [`run`].
pub const EXPERIMENTS: [&str; 8] = [
    "sheet_moments",
    "hit_prob_bm",
    "hit_prob_two_bm",
    "hit_prob_sheet",
    "zero_projection_scan",
    "good_cell_counts",
    "double_point_scan",
    "escape_rate_probe",
];

type TrialFn = fn(&ExperimentConfig) -> Result<Vec<TrialRecord>>;
type FinalizeFn = fn(&ExperimentConfig, Vec<TrialRecord>) -> Result<ExperimentReport>;

fn dispatch(name: &str) -> Result<(TrialFn, FinalizeFn)> {
    Ok(match name {
        "sheet_moments" => (moments::trials, moments::finalize),
        "hit_prob_bm" => (hitting::trials_bm, hitting::finalize_bm),
        "hit_prob_two_bm" => (hitting::trials_two_bm, hitting::finalize_two_bm),
        "hit_prob_sheet" => (sheet_hit::trials, sheet_hit::finalize),
        "zero_projection_scan" => (zeros::trials, zeros::finalize),
        "good_cell_counts" => (good_cells::trials, good_cells::finalize),
        "double_point_scan" => (double_points::trials, double_points::finalize),
        "escape_rate_probe" => (escape::trials, escape::finalize),
        other => return Err(config(format!("unknown experiment {other:?}"))),
    })
}

/// Identifiers of the numerical policies every report is produced under.
pub fn policies() -> BTreeMap<String, String> {
    [
        ("zero_threshold", "2*sqrt(ln k / k)"),
        ("continuous_infimum", "grid minimum; Brownian-bridge refinement for single motions"),
        ("sheet_lattice", "per-eps sub-lattice with spacing ~ eps^2/2, diagonal <= eps/4"),
        ("rare_events", "multilevel splitting with weighted copies"),
        ("slope_fit", "weighted least squares on log-log points, inverse-variance weights"),
        ("escape_time", "exact Ornstein-Uhlenbeck transitions in log time"),
        ("double_point_search", "sorted closest-pair scan with pruning"),
        ("rng", "ChaCha8 stream per (seed, trial index)"),
    ]
    .into_iter()
    .map(|(a, b)| (a.to_string(), b.to_string()))
    .collect()
}

/// Run the experiment named in `c.experiment` over its trial range.
pub fn run(c: &ExperimentConfig) -> Result<ExperimentReport> {
    c.validate()?;
    let (trials, finalize) = dispatch(&c.experiment)?;
    let start = Instant::now();
    let records = trials(c)?;
    let mut rep = finalize(c, records)?;
    rep.wall_clock = start.elapsed().as_secs_f64();
    Ok(rep)
}

/// Recompute a report from its raw trials.
pub fn finalize(c: &ExperimentConfig, trials: Vec<TrialRecord>) -> Result<ExperimentReport> {
    let (_, f) = dispatch(&c.experiment)?;
    f(c, trials)
}

/// Pool two reports of the same experiment and configuration.
///
/// Refused when the experiment names or config hashes differ, or when the
/// two reports share a trial index.
pub fn merge(a: &ExperimentReport, b: &ExperimentReport) -> Result<ExperimentReport> {
    if a.experiment != b.experiment {
        return Err(Error::Merge(format!("experiments differ: {} vs {}", a.experiment, b.experiment)));
    }
    if a.config_hash != b.config_hash || a.config.hash() != b.config.hash() {
        return Err(Error::Merge("config hashes differ".into()));
    }
    let mut trials: Vec<TrialRecord> = a.trials.iter().chain(&b.trials).cloned().collect();
    trials.sort_by_key(|t| t.index);
    if trials.windows(2).any(|w| w[0].index == w[1].index) {
        return Err(Error::Merge("trial index ranges overlap".into()));
    }
    let mut c = a.config.clone();
    c.trials = trials.len() as u64;
    c.trial_offset = trials.first().map_or(0, |t| t.index);
    let mut rep = finalize(&c, trials)?;
    rep.wall_clock = a.wall_clock + b.wall_clock;
    Ok(rep)
}

/// `P{inf_{1≤t≤2} |X(t)| ≤ r}` for a `d`-dimensional Brownian motion.
pub fn hit_prob_bm(d: u32, r_ladder: &[f64], trials: u64, seed: u64) -> Result<ExperimentReport> {
    let mut c = ExperimentConfig::new("hit_prob_bm", d, seed);
    c.ladder = r_ladder.to_vec();
    c.trials = trials;
    run(&c)
}

/// Conditional probability `P(inf|ρY+X| ≤ r | inf|X| ≤ r)` over `t ∈ [1,2]`.
pub fn hit_prob_two_bm(d: u32, rho_ladder: &[f64], r: f64, trials: u64, seed: u64) -> Result<ExperimentReport> {
    let mut c = ExperimentConfig::new("hit_prob_two_bm", d, seed);
    c.ladder = rho_ladder.to_vec();
    c.radius = r;
    c.trials = trials;
    run(&c)
}

macro_rules! named_runner {
    ($(#[$m:meta])* $fn:ident, $name:literal) => {
        $(#[$m])*
        pub fn $fn(c: &ExperimentConfig) -> Result<ExperimentReport> {
            let mut c = c.clone();
            c.experiment = $name.into();
            run(&c)
        }
    };
}

named_runner!(
    /// Sheet hitting probability of `F × [1,2]` for an ε ladder.
    hit_prob_sheet,
    "hit_prob_sheet"
);
named_runner!(
    /// Box dimension of the columns whose slice hits 0.
    zero_projection_scan,
    "zero_projection_scan"
);
named_runner!(
    /// Normalized maximal good-cell counts along `k_ladder`.
    good_cell_counts,
    "good_cell_counts"
);
named_runner!(
    /// Box dimension of the double-point columns and the independence check.
    double_point_scan,
    "double_point_scan"
);
named_runner!(
    /// Escape-rate trends along the α ladder.
    escape_rate_probe,
    "escape_rate_probe"
);
named_runner!(
    /// Second moments of simulated sheets.
    sheet_moments,
    "sheet_moments"
);
