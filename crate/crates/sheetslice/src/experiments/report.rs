use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use crate::stats::LineFit;

/// Raw per-trial output. Reports keep these so that merging is the union of
/// trial sets followed by the same deterministic summary.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub index: u64,
    pub values: Vec<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Outcome {
    Pass,
    Inconclusive,
    Fail,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub outcome: Outcome,
    pub detail: String,
}

impl Check {
    pub fn new(name: &str, pass: bool, detail: String) -> Self {
        Check { name: name.into(), outcome: if pass { Outcome::Pass } else { Outcome::Fail }, detail }
    }

    pub fn inconclusive(name: &str, detail: String) -> Self {
        Check { name: name.into(), outcome: Outcome::Inconclusive, detail }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Fit {
    pub name: String,
    pub value: f64,
    pub se: f64,
    pub target: Option<f64>,
}

impl Fit {
    pub fn slope(name: &str, fit: &LineFit, target: Option<f64>) -> Self {
        Fit { name: name.into(), value: fit.slope, se: fit.slope_se, target }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointEstimate {
    /// Empty for the main series.
    pub series: String,
    pub param: f64,
    pub estimate: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    pub n_trials: u64,
}

impl PointEstimate {
    pub fn se(&self) -> f64 {
        (self.ci_hi - self.ci_lo) / (2.0 * crate::stats::Z975)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub experiment: String,
    pub config: ExperimentConfig,
    pub config_hash: String,
    pub seed: u64,
    pub policies: BTreeMap<String, String>,
    pub points: Vec<PointEstimate>,
    pub fits: Vec<Fit>,
    pub checks: Vec<Check>,
    pub notes: Vec<String>,
    pub trials: Vec<TrialRecord>,
    /// Seconds spent in `run`; not serialized, so reports stay reproducible.
    #[serde(skip)]
    pub wall_clock: f64,
}

impl ExperimentReport {
    pub fn new(config: &ExperimentConfig, trials: Vec<TrialRecord>) -> Self {
        ExperimentReport {
            experiment: config.experiment.clone(),
            config: config.clone(),
            config_hash: config.hash(),
            seed: config.seed,
            policies: super::policies(),
            points: Vec::new(),
            fits: Vec::new(),
            checks: Vec::new(),
            notes: Vec::new(),
            trials,
            wall_clock: 0.0,
        }
    }

    /// Worst outcome over all checks; `Pass` when there are none.
    pub fn outcome(&self) -> Outcome {
        self.checks.iter().map(|c| c.outcome).max().unwrap_or(Outcome::Pass)
    }

    pub fn fit(&self, name: &str) -> Option<&Fit> {
        self.fits.iter().find(|f| f.name == name)
    }

    pub fn series(&self, series: &str) -> Vec<&PointEstimate> {
        self.points.iter().filter(|p| p.series == series).collect()
    }

    /// CSV of the points, see [`points_csv`].
    pub fn to_csv(&self) -> String {
        points_csv(&self.points)
    }

    /// Header sidecar: everything but the raw trials.
    pub fn header_json(&self) -> String {
        let mut v = serde_json::to_value(self).expect("report serializes");
        if let Some(obj) = v.as_object_mut() {
            obj.remove("trials");
        }
        serde_json::to_string_pretty(&v).expect("json")
    }

    /// Full report including raw trials.
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("report serializes")
    }

    pub fn from_json(s: &str) -> crate::Result<Self> {
        serde_json::from_str(s).map_err(|e| crate::Error::Parse(e.to_string()))
    }
}

/// One row per point: `param,estimate,ci_lo,ci_hi,n_trials`. Points of a
/// named series carry the series as a `name:` prefix on `param`.
pub fn points_csv(points: &[PointEstimate]) -> String {
    let mut out = String::from("param,estimate,ci_lo,ci_hi,n_trials\n");
    for p in points {
        let param = if p.series.is_empty() { fmt_num(p.param) } else { format!("{}:{}", p.series, fmt_num(p.param)) };
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            param,
            fmt_num(p.estimate),
            fmt_num(p.ci_lo),
            fmt_num(p.ci_hi),
            p.n_trials
        ));
    }
    out
}

fn fmt_num(x: f64) -> String {
    format!("{x:.10e}")
}
