//! Kernels, energies and capacities.
//!
//! Capacities are computed on a finite set of atoms by minimizing the
//! discrete energy `wᵀKw` over the probability simplex. All kernels are
//! radial in the ℓ¹ norm; strict positive type is assumed, not checked.

mod capacity;
mod kernel;
mod measure;
mod projection;
pub mod record;

pub use capacity::{
    atoms_on_set, capacity, capacity_on_atoms, cube_midpoints, minimize_quadratic, product_atoms, CapacityResult,
    SimplexSolution, GAP_TOLERANCE, MAX_ITERATIONS,
};
pub use kernel::{project_kernel, project_kernel_with, riesz_eval, Kernel, ProjectionForm};
pub use measure::{bilinear_energy, energy, kernel_matrix, DiscreteMeasure};
pub use projection::{frostman_ratio, projection_theorem_check, ProjectionCheck};
