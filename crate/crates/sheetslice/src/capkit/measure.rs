use rayon::prelude::*;

use super::kernel::Kernel;
use crate::error::{domain, Error, Result};

/// Atoms in `R^dim` with probability weights.
#[derive(Clone, Debug, PartialEq)]
pub struct DiscreteMeasure {
    pub dim: usize,
    /// Flattened coordinates, `atoms[i * dim + c]`.
    pub atoms: Vec<f64>,
    pub weights: Vec<f64>,
}

impl DiscreteMeasure {
    pub fn new(dim: usize, atoms: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        if dim == 0 || atoms.len() != dim * weights.len() || weights.is_empty() {
            return Err(domain("atoms and weights do not match"));
        }
        if weights.iter().any(|&w| !(w >= 0.0)) {
            return Err(domain("weights must be nonnegative"));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(domain(format!("weights sum to {total}, not 1")));
        }
        Ok(DiscreteMeasure { dim, atoms, weights })
    }

    /// Equal weights on the given atoms.
    pub fn uniform(dim: usize, atoms: Vec<f64>) -> Result<Self> {
        let n = atoms.len() / dim.max(1);
        Self::new(dim, atoms, vec![1.0 / n as f64; n])
    }

    pub fn point_mass(x: &[f64]) -> Self {
        DiscreteMeasure { dim: x.len(), atoms: x.to_vec(), weights: vec![1.0] }
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn atom(&self, i: usize) -> &[f64] {
        &self.atoms[i * self.dim..(i + 1) * self.dim]
    }

    /// Translate every atom by `shift`.
    pub fn shifted(&self, shift: &[f64]) -> Self {
        let atoms = self
            .atoms
            .chunks_exact(self.dim)
            .flat_map(|a| a.iter().zip(shift).map(|(x, s)| x + s).collect::<Vec<_>>())
            .collect();
        DiscreteMeasure { dim: self.dim, atoms, weights: self.weights.clone() }
    }

    /// Product measure `self × other` with coordinates `(self, other)`.
    pub fn product(&self, other: &DiscreteMeasure) -> Self {
        let mut atoms = Vec::with_capacity(self.len() * other.len() * (self.dim + other.dim));
        let mut weights = Vec::with_capacity(self.len() * other.len());
        for i in 0..self.len() {
            for j in 0..other.len() {
                atoms.extend_from_slice(self.atom(i));
                atoms.extend_from_slice(other.atom(j));
                weights.push(self.weights[i] * other.weights[j]);
            }
        }
        DiscreteMeasure { dim: self.dim + other.dim, atoms, weights }
    }

    /// Smallest ℓ¹ distance between distinct atoms.
    pub fn min_gap(&self) -> f64 {
        let n = self.len();
        let mut best = f64::INFINITY;
        if self.dim == 1 {
            let mut xs = self.atoms.clone();
            xs.sort_by(f64::total_cmp);
            for w in xs.windows(2) {
                best = best.min(w[1] - w[0]);
            }
            return best;
        }
        for i in 0..n {
            for j in i + 1..n {
                best = best.min(l1_dist(self.atom(i), self.atom(j)));
            }
        }
        best
    }
}

pub(crate) fn l1_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum()
}

/// Dense kernel matrix `K[i][j] = k(|x_i − x_j|)` with the diagonal set to
/// `k(h/2)`, `h` the smallest positive atom gap.
pub fn kernel_matrix(mu: &DiscreteMeasure, k: &Kernel) -> Vec<f64> {
    let n = mu.len();
    let h = mu.min_gap();
    let diag = if h.is_finite() { k.eval(h / 2.0) } else { k.eval(0.0) };
    let mut m = vec![0.0; n * n];
    m.par_chunks_mut(n).enumerate().for_each(|(i, row)| {
        let xi = mu.atom(i);
        for (j, v) in row.iter_mut().enumerate() {
            *v = if i == j { diag } else { k.eval(l1_dist(xi, mu.atom(j))) };
        }
    });
    m
}

/// `I_k(μ) = Σ w_i w_j k(x_i − x_j)`, self-terms at half the minimum gap.
/// Returns `+∞` when any term is infinite.
pub fn energy(mu: &DiscreteMeasure, k: &Kernel) -> f64 {
    let n = mu.len();
    let h = mu.min_gap();
    let diag = if h.is_finite() { k.eval(h / 2.0) } else { k.eval(0.0) };
    let rows: Vec<f64> = (0..n)
        .into_par_iter()
        .map(|i| {
            let xi = mu.atom(i);
            let mut s = 0.0;
            for j in 0..n {
                let v = if i == j { diag } else { k.eval(l1_dist(xi, mu.atom(j))) };
                s += mu.weights[j] * v;
            }
            mu.weights[i] * s
        })
        .collect();
    rows.iter().sum()
}

/// `I_k(σ, ρ) = Σ σ_i ρ_j k(x_i − y_j)`; the kernel is even, so the
/// symmetrization is the identity. Coincident atoms contribute `k(h/2)`
/// with `h` the smaller of the two minimum gaps.
pub fn bilinear_energy(sigma: &DiscreteMeasure, rho: &DiscreteMeasure, k: &Kernel) -> Result<f64> {
    if sigma.dim != rho.dim {
        return Err(Error::Domain("measures live in different dimensions".into()));
    }
    if sigma == rho {
        return Ok(energy(sigma, k));
    }
    let h = sigma.min_gap().min(rho.min_gap());
    let diag = if h.is_finite() { k.eval(h / 2.0) } else { k.eval(0.0) };
    let rows: Vec<f64> = (0..sigma.len())
        .into_par_iter()
        .map(|i| {
            let xi = sigma.atom(i);
            let mut s = 0.0;
            for j in 0..rho.len() {
                let r = l1_dist(xi, rho.atom(j));
                s += rho.weights[j] * if r == 0.0 { diag } else { k.eval(r) };
            }
            sigma.weights[i] * s
        })
        .collect();
    Ok(rows.iter().sum())
}
