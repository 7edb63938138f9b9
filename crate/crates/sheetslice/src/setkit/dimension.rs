use serde::{Deserialize, Serialize};

use super::entropy::minkowski_content;
use super::set::CompactSet1D;
use crate::error::{domain, Result};
use crate::stats;

/// Upper and lower box-counting slopes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DimensionEstimate {
    pub upper: f64,
    pub lower: f64,
    pub low_confidence: bool,
}

/// A finite list of compact pieces whose union is the set of interest.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct Decomposition {
    pub members: Vec<CompactSet1D>,
}

impl Decomposition {
    pub fn new(members: Vec<CompactSet1D>) -> Self {
        Decomposition { members }
    }

    pub fn union(&self) -> CompactSet1D {
        self.members.iter().fold(CompactSet1D::empty(), |acc, m| acc.union(m))
    }
}

/// Box-counting estimates of the upper and lower Minkowski dimension.
///
/// Only the finer half of the supplied scales is used (at least three). The
/// slope of `log M_n` against `log n` is fitted on every window of three
/// consecutive scales there; `upper` is the largest window slope and `lower`
/// the smallest, so `lower ≤ upper` by construction.
pub fn minkowski_dimension(f: &CompactSet1D, n_values: &[u64]) -> Result<DimensionEstimate> {
    let mut ns: Vec<u64> = n_values.iter().copied().filter(|&n| n > 0).collect();
    ns.sort_unstable();
    ns.dedup();
    if ns.len() < 3 {
        return Err(domain("dimension estimate needs at least 3 distinct scales"));
    }
    let counts = ns
        .iter()
        .map(|&n| minkowski_content(f, n))
        .collect::<Result<Vec<u64>>>()?;
    if f.is_empty() {
        return Ok(DimensionEstimate { upper: 0.0, lower: 0.0, low_confidence: true });
    }
    let keep = (ns.len() / 2 + 1).max(3).min(ns.len());
    let start = ns.len() - keep;
    let x: Vec<f64> = ns[start..].iter().map(|&n| (n as f64).ln()).collect();
    let y: Vec<f64> = counts[start..].iter().map(|&m| (m as f64).ln()).collect();
    let mut upper = f64::NEG_INFINITY;
    let mut lower = f64::INFINITY;
    for w in 0..=(x.len() - 3) {
        let fit = stats::line(&x[w..w + 3], &y[w..w + 3]).expect("distinct scales");
        upper = upper.max(fit.slope);
        lower = lower.min(fit.slope);
    }
    let flat = counts.iter().all(|&m| m == counts[0]);
    Ok(DimensionEstimate { upper, lower, low_confidence: flat && !f.is_finite() })
}

/// Box-counting estimate for a sampled point cloud.
pub fn minkowski_dimension_cloud(points: &[f64], n_values: &[u64]) -> Result<DimensionEstimate> {
    minkowski_dimension(&CompactSet1D::from_points(points)?, n_values)
}

/// Largest upper Minkowski estimate over the members of a decomposition.
pub fn packing_dimension(d: &Decomposition, n_values: &[u64]) -> Result<f64> {
    if d.members.is_empty() {
        return Err(domain("decomposition is empty"));
    }
    let mut best = f64::NEG_INFINITY;
    for m in &d.members {
        best = best.max(minkowski_dimension(m, n_values)?.upper);
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dyadic(lo: u32, hi: u32) -> Vec<u64> {
        (lo..=hi).map(|k| 1u64 << k).collect()
    }

    #[test]
    fn interval_has_dimension_one() {
        let e = minkowski_dimension(&"1,2".parse().unwrap(), &dyadic(4, 12)).unwrap();
        assert!((e.upper - 1.0).abs() < 0.02 && (e.lower - 1.0).abs() < 0.02, "{e:?}");
        assert!(!e.low_confidence);
    }

    #[test]
    fn finite_set_has_dimension_zero() {
        let f = CompactSet1D::from_points(&[1.0, 1.25, 1.5, 1.75, 2.0]).unwrap();
        let e = minkowski_dimension(&f, &dyadic(6, 12)).unwrap();
        assert!(e.upper.abs() < 0.02 && e.lower.abs() < 0.02, "{e:?}");
    }

    #[test]
    fn too_few_scales_is_an_error() {
        assert!(minkowski_dimension(&"1,2".parse().unwrap(), &[4, 8]).is_err());
        assert!(minkowski_dimension(&"1,2".parse().unwrap(), &[4, 4, 8]).is_err());
    }

    #[test]
    fn packing_takes_the_largest_member() {
        let n = dyadic(4, 12);
        let d = Decomposition::new(vec![
            "1,3/2".parse().unwrap(),
            CompactSet1D::from_points(&[1.75, 1.875, 2.0]).unwrap(),
        ]);
        assert!((packing_dimension(&d, &n).unwrap() - 1.0).abs() < 0.02);
        let pts = Decomposition::new(vec![
            "1,1".parse().unwrap(),
            "3/2,3/2".parse().unwrap(),
            "7/4,7/4".parse().unwrap(),
        ]);
        assert_eq!(packing_dimension(&pts, &n).unwrap(), 0.0);
        assert!(packing_dimension(&Decomposition::default(), &n).is_err());
    }
}
