use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::path::Path;
use crate::error::{config, domain, Result};
use crate::rng;

const NOISE_LABEL: u64 = 0x6e6f_6973_65;

/// Rectangular grid `[0, s_max] × [0, t_max]` split into `ns × nt` cells
/// carrying `dim`-vector noise.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub s_max: f64,
    pub t_max: f64,
    pub ns: usize,
    pub nt: usize,
    pub dim: usize,
    pub seed: u64,
}

impl GridSpec {
    pub fn new(s_max: f64, t_max: f64, ns: usize, nt: usize, dim: usize, seed: u64) -> Result<Self> {
        let spec = GridSpec { s_max, t_max, ns, nt, dim, seed };
        spec.validate()?;
        Ok(spec)
    }

    /// Unit square with `n × n` cells.
    pub fn unit(n: usize, dim: usize, seed: u64) -> Result<Self> {
        Self::new(1.0, 1.0, n, n, dim, seed)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.s_max.is_finite() && self.s_max > 0.0 && self.t_max.is_finite() && self.t_max > 0.0) {
            return Err(config("grid extents must be finite and positive"));
        }
        if self.ns < 2 || self.nt < 2 {
            return Err(config("grid needs at least 2 cells per axis"));
        }
        if self.dim == 0 {
            return Err(config("dimension must be at least 1"));
        }
        (self.ns + 1)
            .checked_mul(self.nt + 1)
            .and_then(|c| c.checked_mul(self.dim))
            .ok_or_else(|| config("ns·nt·dim overflows"))?;
        Ok(())
    }

    pub fn ds(&self) -> f64 {
        self.s_max / self.ns as f64
    }

    pub fn dt(&self) -> f64 {
        self.t_max / self.nt as f64
    }
}

/// Independent centered Gaussian cells, per-coordinate variance `Δs·Δt`.
/// Layout is `cells[(i * nt + j) * dim + c]`.
#[derive(Clone, Debug, PartialEq)]
pub struct NoiseGrid {
    pub spec: GridSpec,
    pub cells: Vec<f64>,
}

impl NoiseGrid {
    pub fn cell(&self, i: usize, j: usize) -> &[f64] {
        let d = self.spec.dim;
        let k = (i * self.spec.nt + j) * d;
        &self.cells[k..k + d]
    }
}

/// Grid values `B(iΔs, jΔt)`, layout `values[(i * (nt+1) + j) * dim + c]`.
#[derive(Clone, Debug, PartialEq)]
pub struct SheetSample {
    pub spec: GridSpec,
    pub values: Vec<f64>,
}

impl SheetSample {
    pub fn value(&self, i: usize, j: usize) -> &[f64] {
        let d = self.spec.dim;
        let k = (i * (self.spec.nt + 1) + j) * d;
        &self.values[k..k + d]
    }

    /// Noise mass of the grid rectangle `[i1Δs, i2Δs] × [j1Δt, j2Δt]`
    /// recovered from the four corner values.
    pub fn rect_mass(&self, i1: usize, j1: usize, i2: usize, j2: usize) -> Vec<f64> {
        let (a, b, c, e) = (self.value(i2, j2), self.value(i1, j2), self.value(i2, j1), self.value(i1, j1));
        (0..self.spec.dim).map(|k| a[k] - b[k] - c[k] + e[k]).collect()
    }
}

/// Draw a noise grid. Row `i` is generated from its own stream, so the grid
/// is a pure function of the grid spec.
pub fn sample_white_noise(spec: &GridSpec) -> Result<NoiseGrid> {
    spec.validate()?;
    let sd = (spec.ds() * spec.dt()).sqrt();
    let row = spec.nt * spec.dim;
    let key = rng::derive(spec.seed, NOISE_LABEL);
    let mut cells = vec![0.0; spec.ns * row];
    cells.par_chunks_mut(row).enumerate().for_each(|(i, chunk)| {
        let mut g = rng::stream(key, i as u64);
        for x in chunk.iter_mut() {
            let z: f64 = g.sample(StandardNormal);
            *x = sd * z;
        }
    });
    Ok(NoiseGrid { spec: spec.clone(), cells })
}

/// Two-dimensional prefix sums of the noise. Each row is accumulated left to
/// right and then added to the row below, always in the same order.
pub fn build_sheet(noise: &NoiseGrid) -> SheetSample {
    let spec = noise.spec.clone();
    let (ns, nt, d) = (spec.ns, spec.nt, spec.dim);
    let w = (nt + 1) * d;
    let mut values = vec![0.0; (ns + 1) * w];
    let mut run = vec![0.0; d];
    for i in 0..ns {
        run.iter_mut().for_each(|x| *x = 0.0);
        for j in 0..nt {
            let cell = noise.cell(i, j);
            for c in 0..d {
                run[c] += cell[c];
                let below = values[i * w + (j + 1) * d + c];
                values[(i + 1) * w + (j + 1) * d + c] = below + run[c];
            }
        }
    }
    SheetSample { spec, values }
}

/// A row `t ↦ B(s, t)` of a sheet, with the snapping applied to `s`.
#[derive(Clone, Debug, PartialEq)]
pub struct Slice {
    pub index: usize,
    pub snapped_s: f64,
    pub snap_distance: f64,
    pub path: Path,
}

/// Extract the slice at the grid line nearest to `s`.
pub fn slice(sheet: &SheetSample, s: f64) -> Result<Slice> {
    let spec = &sheet.spec;
    if !(0.0..=spec.s_max).contains(&s) {
        return Err(domain(format!("slice position {s} outside [0, {}]", spec.s_max)));
    }
    let index = ((s / spec.ds()).round() as usize).min(spec.ns);
    let snapped_s = index as f64 * spec.ds();
    let times: Vec<f64> = (0..=spec.nt).map(|j| j as f64 * spec.dt()).collect();
    let d = spec.dim;
    let start = index * (spec.nt + 1) * d;
    let points = sheet.values[start..start + (spec.nt + 1) * d].to_vec();
    Ok(Slice {
        index,
        snapped_s,
        snap_distance: (s - snapped_s).abs(),
        path: Path::new(times, points, d)?,
    })
}
