//! Slices of the Brownian sheet: simulation, set functions, capacities,
//! ε-kernels and the Monte Carlo experiments built on them.

pub mod acceptance;
pub mod capkit;
pub mod experiments;
pub mod error;
pub mod kernels;
pub mod quad;
pub mod randfield;
pub mod rng;
pub mod setkit;
pub mod stats;

pub use error::{Error, Result};

/// `log_+(y) = max(ln y, 1)`.
pub fn log_plus(y: f64) -> f64 {
    if y.is_nan() {
        return f64::NAN;
    }
    y.ln().max(1.0)
}

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/introduction.md")]
mod book_introduction {}
#[cfg(doctest)]
#[doc = include_str!("../../../book/src/randfield.md")]
mod book_randfield {}
#[cfg(doctest)]
#[doc = include_str!("../../../book/src/setkit.md")]
mod book_setkit {}
#[cfg(doctest)]
#[doc = include_str!("../../../book/src/capkit.md")]
mod book_capkit {}
#[cfg(doctest)]
#[doc = include_str!("../../../book/src/kernels.md")]
mod book_kernels {}
#[cfg(doctest)]
#[doc = include_str!("../../../book/src/experiments.md")]
mod book_experiments {}
#[cfg(doctest)]
#[doc = include_str!("../../../book/src/cli.md")]
mod book_cli {}
#[cfg(doctest)]
#[doc = include_str!("../../../book/src/acceptance.md")]
mod book_acceptance {}
