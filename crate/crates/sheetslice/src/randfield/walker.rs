use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{domain, Result};

/// Streams the slices `t ↦ B(s, t)` of a Brownian sheet at fixed `t` nodes
/// while `s` increases.
///
/// For `s < s'` the difference `B(s', ·) − B(s, ·)` is a Brownian motion in
/// `t` with variance `s' − s` per unit time, independent of everything up to
/// `s`. Each call to [`advance`](Self::advance) adds one such increment, so
/// the sheet is exact in law at the visited `(s, t)` nodes.
#[derive(Clone, Debug)]
pub struct ColumnWalker {
    dim: usize,
    sd_gaps: Vec<f64>,
    t_nodes: Vec<f64>,
    values: Vec<f64>,
    s: f64,
}

impl ColumnWalker {
    /// Start at `s = 0` where the slice vanishes.
    pub fn new(t_nodes: Vec<f64>, dim: usize) -> Result<Self> {
        if dim == 0 || t_nodes.is_empty() {
            return Err(domain("walker needs a dimension and at least one node"));
        }
        if !(t_nodes[0] >= 0.0) || t_nodes.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(domain("t nodes must be non-negative and strictly increasing"));
        }
        let mut prev = 0.0;
        let sd_gaps = t_nodes
            .iter()
            .map(|&t| {
                let g = (t - prev).sqrt();
                prev = t;
                g
            })
            .collect();
        let values = vec![0.0; t_nodes.len() * dim];
        Ok(ColumnWalker { dim, sd_gaps, t_nodes, values, s: 0.0 })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    pub fn t_nodes(&self) -> &[f64] {
        &self.t_nodes
    }

    pub fn len(&self) -> usize {
        self.t_nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t_nodes.is_empty()
    }

    /// Current column, `values[k * dim + c] = B_c(s, t_k)`.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn point(&self, k: usize) -> &[f64] {
        &self.values[k * self.dim..(k + 1) * self.dim]
    }

    /// Move from `s` to `s + ds`.
    pub fn advance<R: Rng + ?Sized>(&mut self, ds: f64, rng: &mut R) {
        debug_assert!(ds >= 0.0);
        let scale = ds.sqrt();
        let d = self.dim;
        let mut inc = vec![0.0; d];
        for (k, &gap) in self.sd_gaps.iter().enumerate() {
            let sd = scale * gap;
            let row = &mut self.values[k * d..(k + 1) * d];
            for c in 0..d {
                let z: f64 = rng.sample(StandardNormal);
                inc[c] += sd * z;
                row[c] += inc[c];
            }
        }
        self.s += ds;
    }

    /// Smallest ℓ¹ norm over the nodes and the node attaining it.
    pub fn min_l1(&self) -> (f64, usize) {
        let mut best = (f64::INFINITY, 0);
        for (k, p) in self.values.chunks_exact(self.dim).enumerate() {
            let v = super::l1(p);
            if v < best.0 {
                best = (v, k);
            }
        }
        best
    }

    /// Smallest ℓ¹ norm over nodes whose index is a multiple of `stride`.
    pub fn min_l1_strided(&self, stride: usize) -> f64 {
        self.values
            .chunks_exact(self.dim)
            .step_by(stride.max(1))
            .map(super::l1)
            .fold(f64::INFINITY, f64::min)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;

    #[test]
    fn walker_is_reproducible() {
        let nodes: Vec<f64> = (1..=10).map(|k| k as f64 / 10.0).collect();
        let run = || {
            let mut w = ColumnWalker::new(nodes.clone(), 2).unwrap();
            let mut g = rng::stream(5, 0);
            w.advance(0.5, &mut g);
            w.advance(0.25, &mut g);
            w.values().to_vec()
        };
        assert_eq!(run(), run());
    }

    #[test]
    fn rejects_bad_nodes() {
        assert!(ColumnWalker::new(vec![0.5, 0.5], 1).is_err());
        assert!(ColumnWalker::new(vec![], 1).is_err());
        assert!(ColumnWalker::new(vec![1.0], 0).is_err());
    }
}
