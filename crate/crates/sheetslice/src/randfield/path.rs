use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{domain, Result};
use crate::rng;

/// A sampled path in `R^dim`, points stored row after row.
#[derive(Clone, Debug, PartialEq)]
pub struct Path {
    pub times: Vec<f64>,
    pub points: Vec<f64>,
    pub dim: usize,
}

impl Path {
    pub fn new(times: Vec<f64>, points: Vec<f64>, dim: usize) -> Result<Self> {
        if dim == 0 || points.len() != times.len() * dim {
            return Err(domain("path points do not match times"));
        }
        if times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(domain("path times must be strictly increasing"));
        }
        Ok(Path { times, points, dim })
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn point(&self, k: usize) -> &[f64] {
        &self.points[k * self.dim..(k + 1) * self.dim]
    }
}

/// Standard Brownian motion started at 0 at time 0, observed at `times`.
pub fn sample_bm(dim: usize, times: &[f64], seed: u64) -> Result<Path> {
    if dim == 0 {
        return Err(domain("dimension must be at least 1"));
    }
    if times.first().is_some_and(|&t| !(t >= 0.0)) {
        return Err(domain("times must start at a non-negative value"));
    }
    if times.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(domain("times must be strictly increasing"));
    }
    let mut g = rng::stream(rng::derive(seed, 0x626d), 0);
    let mut points = Vec::with_capacity(times.len() * dim);
    let mut x = vec![0.0; dim];
    let mut prev = 0.0;
    for &t in times {
        let sd = (t - prev).sqrt();
        for xc in x.iter_mut() {
            let z: f64 = g.sample(StandardNormal);
            *xc += sd * z;
        }
        points.extend_from_slice(&x);
        prev = t;
    }
    Path::new(times.to_vec(), points, dim)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_time_gives_zero_point() {
        let p = sample_bm(3, &[0.0], 9).unwrap();
        assert_eq!(p.points, vec![0.0; 3]);
    }

    #[test]
    fn bad_times_are_rejected() {
        assert!(sample_bm(1, &[0.5, 0.5], 0).is_err());
        assert!(sample_bm(1, &[-1.0], 0).is_err());
        assert!(sample_bm(1, &[1.0, 0.5], 0).is_err());
    }
}
