//! Compact subsets of the half-line and their size functionals.
//!
//! Endpoints are exact rationals, so cell counts and packing numbers are
//! exact integers with no boundary ambiguity.

mod dimension;
mod entropy;
mod escape;
mod hausdorff;
mod set;

pub use dimension::{minkowski_dimension, minkowski_dimension_cloud, packing_dimension, Decomposition, DimensionEstimate};
pub use entropy::{
    check_entropy_content, check_entropy_doubling, kolmogorov_count, kolmogorov_count_f64, kolmogorov_entropy,
    minkowski_content,
};
pub use escape::{fin_loc_classify, tail_exponent, upsilon, Convergence, PsiFunction, Upsilon, UPSILON_NODES, UPSILON_X_MAX};
pub use hausdorff::{eval_phi_trace, hausdorff_cover_count, hausdorff_measure_upper, MeasureFunction};
pub use set::{parse_q, q_from_f64, q_int, q_to_f64, CompactSet1D, Q};
