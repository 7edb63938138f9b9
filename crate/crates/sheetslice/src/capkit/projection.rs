use serde::{Deserialize, Serialize};

use super::capacity::{atoms_on_set, capacity_on_atoms, product_atoms};
use super::kernel::{project_kernel_with, Kernel, ProjectionForm};
use super::measure::{l1_dist, DiscreteMeasure};
use crate::error::{domain, Result};
use crate::setkit::CompactSet1D;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProjectionCheck {
    /// Capacity of `[0,1]^m × F` for `k`.
    pub product_capacity: f64,
    /// Capacity of `F` for the projected kernel.
    pub projected_capacity: f64,
    pub relative_gap: f64,
    /// False when either optimization stopped on the iteration cap.
    pub converged: bool,
}

/// Compare `Cap_k([0,1]^m × F)` on an `atoms`-per-axis product grid with
/// `Cap_{Π_m k}(F)` on `atoms` points of `F`.
///
/// The projected kernel is the [`ProjectionForm::Difference`] one, which is
/// the kernel a product `λ_m × μ` actually sees.
pub fn projection_theorem_check(f: &CompactSet1D, k: &Kernel, m: usize, atoms: usize) -> Result<ProjectionCheck> {
    if m == 0 || atoms < 2 {
        return Err(domain("projection check needs m ≥ 1 and at least 2 atoms per axis"));
    }
    if let Kernel::Constant(_) = k {
        return Ok(ProjectionCheck {
            product_capacity: 1.0,
            projected_capacity: 1.0,
            relative_gap: 0.0,
            converged: true,
        });
    }
    let lhs = capacity_on_atoms(m + 1, product_atoms(f, m, atoms)?, k)?;
    let pk = project_kernel_with(k, m as u32, ProjectionForm::Difference)?;
    let rhs = capacity_on_atoms(1, atoms_on_set(f, atoms)?, &pk)?;
    let (a, b) = (lhs.capacity, rhs.capacity);
    Ok(ProjectionCheck {
        product_capacity: a,
        projected_capacity: b,
        relative_gap: (a - b).abs() / a.max(b),
        converged: lhs.converged && rhs.converged,
    })
}

/// `sup_{x, r} μ(B(x; r)) / r^α` over the atoms of `μ` and the given radii,
/// with closed ℓ¹ balls.
pub fn frostman_ratio(mu: &DiscreteMeasure, alpha: f64, radii: &[f64]) -> Result<f64> {
    if !(alpha > 0.0) {
        return Err(domain("Frostman exponent must be positive"));
    }
    let mut best: f64 = 0.0;
    for i in 0..mu.len() {
        let xi = mu.atom(i);
        let dists: Vec<f64> = (0..mu.len()).map(|j| l1_dist(xi, mu.atom(j))).collect();
        for &r in radii {
            if r <= 0.0 {
                return Ok(f64::INFINITY);
            }
            let mass: f64 = dists
                .iter()
                .zip(&mu.weights)
                .filter(|(d, _)| **d <= r)
                .map(|(_, w)| w)
                .sum();
            best = best.max(mass / r.powf(alpha));
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_kernel_has_zero_gap() {
        let f: CompactSet1D = "1,2".parse().unwrap();
        let c = projection_theorem_check(&f, &Kernel::Constant(1.0), 1, 8).unwrap();
        assert_eq!(c.relative_gap, 0.0);
    }

    #[test]
    fn point_mass_ratio_blows_up() {
        let mu = DiscreteMeasure::point_mass(&[0.5]);
        let small = frostman_ratio(&mu, 0.5, &[1e-6]).unwrap();
        let large = frostman_ratio(&mu, 0.5, &[1e-2]).unwrap();
        assert!(small > 50.0 * large);
    }
}
