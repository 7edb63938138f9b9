use serde::{Deserialize, Serialize};

use super::kernel::Kernel;
use super::measure::{kernel_matrix, DiscreteMeasure};
use crate::error::{domain, Result};
use crate::setkit::CompactSet1D;

/// Stopping rule of the simplex solver.
pub const GAP_TOLERANCE: f64 = 1e-9;
pub const MAX_ITERATIONS: usize = 100_000;

#[derive(Clone, Debug, PartialEq)]
pub struct CapacityResult {
    /// `1 / min I_k(μ)` over measures on the atoms.
    pub capacity: f64,
    pub energy: f64,
    pub minimizer: DiscreteMeasure,
    pub duality_gap: f64,
    pub iterations: usize,
    pub converged: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimplexSolution {
    pub weights: Vec<f64>,
    pub value: f64,
    pub duality_gap: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Minimize `wᵀKw` over the probability simplex with pairwise
/// Frank–Wolfe steps.
///
/// Each step moves mass from the support vertex with the largest gradient
/// (the away vertex) to the vertex with the smallest (the Frank–Wolfe
/// vertex), with exact line search. The gradient is updated in `O(n)` per
/// step and recomputed from scratch every few thousand steps.
pub fn minimize_quadratic(k: &[f64], n: usize) -> SimplexSolution {
    let mut w = vec![1.0 / n as f64; n];
    let mut g = vec![0.0; n];
    let refresh = |w: &[f64], g: &mut [f64]| {
        for (i, gi) in g.iter_mut().enumerate() {
            let row = &k[i * n..(i + 1) * n];
            *gi = row.iter().zip(w).map(|(a, b)| a * b).sum();
        }
        w.iter().zip(g.iter()).map(|(a, b)| a * b).sum::<f64>()
    };
    let mut value = refresh(&w, &mut g);
    let mut iterations = 0;
    let mut gap;
    loop {
        let (mut j, mut a) = (0, usize::MAX);
        for i in 0..n {
            if g[i] < g[j] {
                j = i;
            }
            if w[i] > 0.0 && (a == usize::MAX || g[i] > g[a]) {
                a = i;
            }
        }
        gap = 2.0 * (value - g[j]);
        if gap < GAP_TOLERANCE || iterations >= MAX_ITERATIONS || a == j {
            break;
        }
        let curv = k[j * n + j] + k[a * n + a] - 2.0 * k[j * n + a];
        let slope = g[a] - g[j];
        let gamma = if curv > 0.0 { (slope / curv).min(w[a]) } else { w[a] };
        if gamma <= 0.0 {
            break;
        }
        w[a] -= gamma;
        if w[a] < 1e-300 {
            w[a] = 0.0;
        }
        w[j] += gamma;
        value += -2.0 * gamma * slope + gamma * gamma * curv;
        let (rj, ra) = (&k[j * n..(j + 1) * n], &k[a * n..(a + 1) * n]);
        for i in 0..n {
            g[i] += gamma * (rj[i] - ra[i]);
        }
        iterations += 1;
        if iterations % 5000 == 0 {
            value = refresh(&w, &mut g);
        }
    }
    value = refresh(&w, &mut g);
    let gmin = g.iter().copied().fold(f64::INFINITY, f64::min);
    gap = 2.0 * (value - gmin);
    let total: f64 = w.iter().sum();
    w.iter_mut().for_each(|x| *x /= total);
    SimplexSolution { weights: w, value, duality_gap: gap, iterations, converged: gap < GAP_TOLERANCE }
}

/// Capacity of a finite atom set: minimize the energy over weights.
pub fn capacity_on_atoms(dim: usize, atoms: Vec<f64>, k: &Kernel) -> Result<CapacityResult> {
    let n = atoms.len() / dim.max(1);
    if n == 0 {
        return Err(domain("no atoms"));
    }
    let trial = DiscreteMeasure::uniform(dim, atoms)?;
    let km = kernel_matrix(&trial, k);
    if km.iter().all(|v| v.is_infinite()) {
        return Ok(CapacityResult {
            capacity: 0.0,
            energy: f64::INFINITY,
            minimizer: trial,
            duality_gap: 0.0,
            iterations: 0,
            converged: true,
        });
    }
    if km.iter().any(|v| !v.is_finite()) {
        return Err(domain("kernel matrix has infinite entries off the diagonal"));
    }
    let sol = minimize_quadratic(&km, n);
    let minimizer = DiscreteMeasure::new(dim, trial.atoms, sol.weights)?;
    Ok(CapacityResult {
        capacity: 1.0 / sol.value,
        energy: sol.value,
        minimizer,
        duality_gap: sol.duality_gap,
        iterations: sol.iterations,
        converged: sol.converged,
    })
}

/// `m` atoms spread over `F`: each interval component gets a share
/// proportional to its length (at least 2) placed at cell midpoints, each
/// isolated point gets one atom.
pub fn atoms_on_set(f: &CompactSet1D, m: usize) -> Result<Vec<f64>> {
    if f.is_empty() {
        return Err(domain("set is empty"));
    }
    let pieces = f.pieces_f64();
    let total: f64 = pieces.iter().map(|(a, b)| b - a).sum();
    let mut out = Vec::new();
    for (a, b) in pieces {
        let len = b - a;
        if len == 0.0 {
            out.push(a);
            continue;
        }
        let share = ((m as f64 * len / total).round() as usize).max(2);
        let h = len / share as f64;
        out.extend((0..share).map(|j| a + (j as f64 + 0.5) * h));
    }
    Ok(out)
}

/// `Cap_k(F)` approximated on `m` atoms.
pub fn capacity(f: &CompactSet1D, k: &Kernel, m: usize) -> Result<CapacityResult> {
    if m < 2 {
        return Err(domain("capacity needs at least 2 atoms"));
    }
    if let Kernel::Constant(c) = k {
        let atoms = atoms_on_set(f, m)?;
        let mu = DiscreteMeasure::uniform(1, atoms)?;
        return Ok(CapacityResult {
            capacity: 1.0 / c,
            energy: *c,
            minimizer: mu,
            duality_gap: 0.0,
            iterations: 0,
            converged: true,
        });
    }
    capacity_on_atoms(1, atoms_on_set(f, m)?, k)
}

/// Midpoints of an `n`-per-axis grid on `[0,1]^m`, flattened.
pub fn cube_midpoints(m: usize, n: usize) -> Vec<f64> {
    let total = n.pow(m as u32);
    let mut out = Vec::with_capacity(total * m);
    for idx in 0..total {
        let mut r = idx;
        let mut coords = vec![0.0; m];
        for c in (0..m).rev() {
            coords[c] = ((r % n) as f64 + 0.5) / n as f64;
            r /= n;
        }
        out.extend(coords);
    }
    out
}

/// Atoms of `[0,1]^m × F` with `n` per cube axis and `n` along `F`.
pub fn product_atoms(f: &CompactSet1D, m: usize, n: usize) -> Result<Vec<f64>> {
    let cube = cube_midpoints(m, n);
    let line = atoms_on_set(f, n)?;
    let mut out = Vec::with_capacity(cube.len() / m.max(1) * line.len() * (m + 1));
    for c in cube.chunks_exact(m) {
        for &x in &line {
            out.extend_from_slice(c);
            out.push(x);
        }
    }
    Ok(out)
}
