use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{config, Result};
use crate::randfield::GridSpec;
use crate::setkit::CompactSet1D;

/// Everything that determines an experiment's output.
///
/// Not every field is used by every experiment; unused fields keep their
/// defaults. `trials` and `trial_offset` select which trial indices are run
/// and are left out of the config hash, so runs over different index ranges
/// of the same experiment can be merged.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentConfig {
    pub experiment: String,
    pub dim: u32,
    /// Sampling grid. Experiments on the window `[1,2]²` use
    /// `s_max = t_max = 2` and read the mesh from `ns`.
    pub grid: GridSpec,
    pub set: CompactSet1D,
    /// Comparison set for level ratios (hitting experiments).
    pub reference_set: Option<CompactSet1D>,
    /// ε, r or ρ ladder, depending on the experiment.
    pub ladder: Vec<f64>,
    /// Interval widths for the fixed-width sheet variant.
    pub widths: Vec<f64>,
    pub k_ladder: Vec<u64>,
    pub alphas: Vec<f64>,
    /// Ball radius for the two-motion experiment.
    pub radius: f64,
    /// Dyadic epochs of the escape probe.
    pub epochs: u32,
    /// Time steps per unit time or per epoch.
    pub substeps: u32,
    /// Number of `s` nodes for the set mode of the escape probe; 0 disables it.
    pub set_nodes: u32,
    pub trials: u64,
    pub trial_offset: u64,
    pub seed: u64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            experiment: String::new(),
            dim: 3,
            grid: GridSpec { s_max: 2.0, t_max: 2.0, ns: 256, nt: 256, dim: 3, seed: 0 },
            set: "1,2".parse().expect("literal set"),
            reference_set: None,
            ladder: Vec::new(),
            widths: Vec::new(),
            k_ladder: Vec::new(),
            alphas: Vec::new(),
            radius: 0.1,
            epochs: 0,
            substeps: 0,
            set_nodes: 0,
            trials: 1,
            trial_offset: 0,
            seed: 0,
        }
    }
}

impl ExperimentConfig {
    pub fn new(experiment: &str, dim: u32, seed: u64) -> Self {
        let mut c = ExperimentConfig { experiment: experiment.to_string(), dim, seed, ..Default::default() };
        c.grid.dim = dim as usize;
        c.grid.seed = seed;
        c
    }

    /// Square grid on `[0,2]²` with mesh `1/k`.
    pub fn with_mesh(mut self, k: usize) -> Self {
        self.grid = GridSpec { s_max: 2.0, t_max: 2.0, ns: 2 * k, nt: 2 * k, dim: self.dim as usize, seed: self.seed };
        self
    }

    /// Cells per unit length of the grid.
    pub fn mesh(&self) -> usize {
        (self.grid.ns as f64 / self.grid.s_max).round() as usize
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(config("trials must be at least 1"));
        }
        if self.dim == 0 || self.grid.dim != self.dim as usize {
            return Err(config("dim must be positive and match the grid dimension"));
        }
        self.grid.validate()?;
        for (name, l) in [("ladder", &self.ladder), ("widths", &self.widths), ("alphas", &self.alphas)] {
            if l.iter().any(|x| !(x.is_finite() && *x > 0.0)) {
                return Err(config(format!("{name} entries must be positive")));
            }
            if l.windows(2).any(|w| w[1] <= w[0]) {
                return Err(config(format!("{name} must be sorted increasing without repeats")));
            }
        }
        if self.k_ladder.windows(2).any(|w| w[1] <= w[0]) {
            return Err(config("k_ladder must be sorted increasing"));
        }
        Ok(())
    }

    /// Seed derived for this experiment's trial streams.
    pub fn trial_seed(&self) -> u64 {
        crate::rng::derive(self.seed, hash_str(&self.experiment))
    }

    /// Hash of every field except the trial range, as 16 hex digits.
    pub fn hash(&self) -> String {
        let mut c = self.clone();
        c.trials = 0;
        c.trial_offset = 0;
        let json = serde_json::to_string(&c).expect("config serializes");
        let digest = Sha256::digest(json.as_bytes());
        digest.iter().take(8).map(|b| format!("{b:02x}")).collect()
    }

    pub fn trial_range(&self) -> std::ops::Range<u64> {
        self.trial_offset..self.trial_offset + self.trials
    }
}

fn hash_str(s: &str) -> u64 {
    let d = Sha256::digest(s.as_bytes());
    u64::from_le_bytes(d[..8].try_into().expect("digest has 32 bytes"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hash_ignores_trial_range() {
        let mut a = ExperimentConfig::new("hit_prob_bm", 3, 1);
        a.ladder = vec![0.1, 0.2];
        let mut b = a.clone();
        b.trials = 77;
        b.trial_offset = 5;
        assert_eq!(a.hash(), b.hash());
        b.seed = 2;
        assert_ne!(a.hash(), b.hash());
    }

    #[test]
    fn validation() {
        let mut c = ExperimentConfig::new("x", 3, 0);
        assert!(c.validate().is_ok());
        c.ladder = vec![0.2, 0.1];
        assert!(c.validate().is_err());
        c.ladder = vec![];
        c.grid.dim = 2;
        assert!(c.validate().is_err());
    }
}
