//! White noise, Brownian sheets, Brownian paths and slices.
//!
//! Two sampling routes are provided. [`sample_white_noise`] and
//! [`build_sheet`] materialize a whole sheet on a grid, which is what the
//! distributional checks use. [`ColumnWalker`] generates the slices
//! `t ↦ B(s, t)` one column at a time by adding independent Brownian
//! increments in `s`; it needs memory proportional to one column and is what
//! the large experiments use.

mod grid;
mod path;
mod walker;

pub use grid::{build_sheet, sample_white_noise, slice, GridSpec, NoiseGrid, SheetSample, Slice};
pub use path::{sample_bm, Path};
pub use walker::ColumnWalker;

/// ℓ¹ norm.
#[inline]
pub fn l1(v: &[f64]) -> f64 {
    v.iter().map(|x| x.abs()).sum()
}
