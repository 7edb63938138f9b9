//! The ε-kernels `f_ε`, `F_ε = ∫₀¹ f_ε(·+y) dy`, `G_ε = ∫₀¹ F_ε(·+y) dy`
//! and the Gaussian small-ball probability they bound.
//!
//! All three are functions of `|x|` (the ℓ¹ norm in the vector case).

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::capkit::riesz_eval;
use crate::error::{domain, Result};
use crate::quad;
use crate::rng;
use crate::stats;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpsKernelParams {
    pub eps: f64,
    pub d: u32,
}

impl EpsKernelParams {
    pub fn new(eps: f64, d: u32) -> Result<Self> {
        if !(eps > 0.0 && eps.is_finite()) || d == 0 {
            return Err(domain("ε-kernels need ε > 0 and d ≥ 1"));
        }
        Ok(EpsKernelParams { eps, d })
    }
}

/// `f_ε(x) = ((ε/|x|^{1/2}) ∧ 1)^d`.
pub fn f_eps(p: EpsKernelParams, x: f64) -> f64 {
    let y = x.abs();
    if y <= p.eps * p.eps {
        1.0
    } else {
        (p.eps / y.sqrt()).powi(p.d as i32)
    }
}

/// `∫_a^b u^{-d/2} du` for `0 < a ≤ b`.
fn power_integral(d: u32, a: f64, b: f64) -> f64 {
    if d == 2 {
        (b / a).ln()
    } else {
        let e = 1.0 - d as f64 / 2.0;
        (b.powf(e) - a.powf(e)) / e
    }
}

/// `F_ε(x) = ∫_0^1 f_ε(y + |x|) dy`, in closed form.
pub fn big_f_eps(p: EpsKernelParams, x: f64) -> f64 {
    let y = x.abs();
    let e2 = p.eps * p.eps;
    let ed = p.eps.powi(p.d as i32);
    if y >= e2 {
        ed * power_integral(p.d, y, 1.0 + y)
    } else if e2 - y >= 1.0 {
        1.0
    } else {
        (e2 - y) + ed * power_integral(p.d, e2, 1.0 + y)
    }
}

/// `G_ε(x) = ∫_0^1 F_ε(y + |x|) dy`, by adaptive quadrature of the closed
/// form with a break at the kink `ε² − |x|`.
pub fn g_eps(p: EpsKernelParams, x: f64) -> f64 {
    let y = x.abs();
    let kink = p.eps * p.eps - y;
    let mut breaks = vec![0.0];
    if kink > 0.0 && kink < 1.0 {
        breaks.push(kink);
    }
    let w = (y.max(kink.max(0.0)) * 0.5).max(1e-12);
    for b in quad::geometric_breaks(0.0, 1.0, w) {
        if b > 0.0 && b < 1.0 && !breaks.contains(&b) {
            breaks.push(b);
        }
    }
    breaks.push(1.0);
    breaks.sort_by(f64::total_cmp);
    quad::integrate_breaks(|u| big_f_eps(p, y + u), &breaks, 1e-12, 0.0).value
}

/// Monte Carlo estimate of `P{σ|g| ≤ ε}` for a standard normal `g ∈ R^d`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BallProb {
    pub estimate: f64,
    pub se: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    pub hits: u64,
    pub trials: u64,
}

const BALL_BLOCK: u64 = 4096;

pub fn gaussian_ball_prob(sigma: f64, eps: f64, d: u32, trials: u64, seed: u64) -> Result<BallProb> {
    if trials < 10_000 {
        return Err(domain("gaussian_ball_prob needs at least 10⁴ trials"));
    }
    if !(sigma > 0.0 && eps > 0.0) || d == 0 {
        return Err(domain("σ, ε must be positive and d ≥ 1"));
    }
    let r = eps / sigma;
    let blocks = trials.div_ceil(BALL_BLOCK);
    let hits: u64 = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let mut g = rng::trial(seed, b);
            let n = BALL_BLOCK.min(trials - b * BALL_BLOCK);
            let mut h = 0u64;
            for _ in 0..n {
                let mut s = 0.0;
                for _ in 0..d {
                    let z: f64 = g.sample(StandardNormal);
                    s += z.abs();
                    if s > r {
                        break;
                    }
                }
                // Remaining draws are skipped on early exit; each trial
                // still starts from a fresh position in the block stream.
                if s <= r {
                    h += 1;
                }
            }
            h
        })
        .sum();
    let n = trials as f64;
    let p = hits as f64 / n;
    let se = (p * (1.0 - p) / n).sqrt();
    let (ci_lo, ci_hi) = stats::wilson(p, n);
    Ok(BallProb { estimate: p, se, ci_lo, ci_hi, hits, trials })
}

/// `F_ε(x)` by direct quadrature of its definition; the oracle for
/// [`big_f_eps`].
pub fn big_f_by_quadrature(p: EpsKernelParams, x: f64) -> f64 {
    let y = x.abs();
    quad::integrate_breaks(|u| f_eps(p, y + u), &kinked_breaks(p.eps * p.eps - y, y), 1e-13, 0.0).value
}

/// `∬_{[0,1]²} f_ε(|x| + y₁ + y₂) dy` by nested quadrature of `f_ε`.
pub fn g_by_double_quadrature(p: EpsKernelParams, x: f64) -> f64 {
    let y = x.abs();
    let inner = |v: f64| big_f_by_quadrature(p, y + v);
    quad::integrate_breaks(inner, &kinked_breaks(p.eps * p.eps - y, y), 1e-12, 0.0).value
}

/// `½ ∫_0^2 F_ε(|x| + y) dy`, the right side of the averaging bound on `G_ε`.
pub fn half_double_length_average(p: EpsKernelParams, x: f64) -> f64 {
    let y = x.abs();
    let mut breaks: Vec<f64> = kinked_breaks(p.eps * p.eps - y, y);
    breaks.push(2.0);
    0.5 * quad::integrate_breaks(|u| big_f_eps(p, y + u), &breaks, 1e-12, 0.0).value
}

/// Partition of `[0,1]` with a break at an interior kink and geometric
/// refinement near the left end, where the integrand varies on scale `y`.
fn kinked_breaks(kink: f64, y: f64) -> Vec<f64> {
    let mut breaks = vec![0.0, 1.0];
    if kink > 0.0 && kink < 1.0 {
        breaks.push(kink);
    }
    let w = (y.max(kink.max(0.0)) * 0.5).max(1e-12);
    breaks.extend(quad::geometric_breaks(0.0, 1.0, w));
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();
    breaks
}

/// Which ε-kernel a sandwich bound compares with `ε^d U_β`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum KernelLemma {
    /// `F_ε` against `U_{(d−2)/2}`.
    F,
    /// `G_ε` against `U_{(d−4)/2}`.
    G,
}

impl KernelLemma {
    pub fn beta(self, d: u32) -> f64 {
        match self {
            KernelLemma::F => (d as f64 - 2.0) / 2.0,
            KernelLemma::G => (d as f64 - 4.0) / 2.0,
        }
    }

    pub fn value(self, p: EpsKernelParams, x: f64) -> f64 {
        match self {
            KernelLemma::F => big_f_eps(p, x),
            KernelLemma::G => g_eps(p, x),
        }
    }

    /// `ε^d U_β(x)`.
    pub fn bound(self, p: EpsKernelParams, x: f64) -> f64 {
        p.eps.powi(p.d as i32) * riesz_eval(self.beta(p.d), x)
    }
}

/// Relative slack for [`Sandwich::validate`]: the ratio at `x = 2` does not
/// depend on ε, so fit and validation grids meet it up to rounding.
pub const SANDWICH_ROUNDING: f64 = 1e-12;

/// Fitted constants of `v ≤ c_up ε^d U_β` on `(0,2]` and
/// `ε^d U_β ≤ c_low v` on `[ε², 2]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Sandwich {
    pub lemma: KernelLemma,
    pub d: u32,
    pub upper: f64,
    pub lower: f64,
    /// Per-ε maxima, in the order of the fitting ε grid.
    pub upper_by_eps: Vec<f64>,
    pub lower_by_eps: Vec<f64>,
}

/// Largest ratios `v/b` and `b/v` for one ε over `xs ∪ {ε², 2}`.
fn ratio_maxima(lemma: KernelLemma, p: EpsKernelParams, xs: &[f64]) -> (f64, f64) {
    let e2 = p.eps * p.eps;
    let mut up: f64 = 0.0;
    let mut low: f64 = 0.0;
    for &x in xs.iter().chain([e2, 2.0].iter()) {
        if !(x > 0.0 && x <= 2.0) {
            continue;
        }
        let v = lemma.value(p, x);
        let b = lemma.bound(p, x);
        up = up.max(v / b);
        if x >= e2 {
            low = low.max(b / v);
        }
    }
    (up, low)
}

/// Fit the constants as the largest observed ratios over the grid.
pub fn fit_sandwich(lemma: KernelLemma, d: u32, eps: &[f64], xs: &[f64]) -> Result<Sandwich> {
    if eps.is_empty() {
        return Err(domain("the ε grid is empty"));
    }
    let mut upper_by_eps = Vec::with_capacity(eps.len());
    let mut lower_by_eps = Vec::with_capacity(eps.len());
    for &e in eps {
        let (u, l) = ratio_maxima(lemma, EpsKernelParams::new(e, d)?, xs);
        upper_by_eps.push(u);
        lower_by_eps.push(l);
    }
    Ok(Sandwich {
        lemma,
        d,
        upper: upper_by_eps.iter().copied().fold(0.0, f64::max),
        lower: lower_by_eps.iter().copied().fold(0.0, f64::max),
        upper_by_eps,
        lower_by_eps,
    })
}

impl Sandwich {
    /// Largest ratios over a validation grid, relative to the fitted
    /// constants; both bounds hold there when the pair is at most 1.
    pub fn validate(&self, eps: &[f64], xs: &[f64]) -> Result<(f64, f64)> {
        let mut worst = (0.0f64, 0.0f64);
        for &e in eps {
            let (u, l) = ratio_maxima(self.lemma, EpsKernelParams::new(e, self.d)?, xs);
            worst = (worst.0.max(u / self.upper), worst.1.max(l / self.lower));
        }
        Ok(worst)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn f_eps_examples() {
        let p = EpsKernelParams::new(1.0, 2).unwrap();
        assert_eq!(f_eps(p, 0.0), 1.0);
        assert!((f_eps(p, 4.0) - 0.25).abs() < 1e-15);
        assert!(EpsKernelParams::new(0.0, 2).is_err());
    }

    #[test]
    fn big_f_example() {
        let p = EpsKernelParams::new(0.1, 4).unwrap();
        let v = big_f_eps(p, 0.01);
        assert!((v - 1e-4 * (1.0 / 0.01 - 1.0 / 1.01)).abs() < 1e-15, "{v}");
    }

    #[test]
    fn big_f_saturates_for_large_eps() {
        let p = EpsKernelParams::new(2.0, 3).unwrap();
        assert_eq!(big_f_eps(p, 0.5), 1.0);
    }

    #[test]
    fn closed_form_matches_quadrature() {
        for (e, d, x) in [(0.1, 4, 0.01), (0.3, 3, 0.02), (0.05, 5, 0.7), (1.5, 3, 0.4)] {
            let p = EpsKernelParams::new(e, d).unwrap();
            let (a, b) = (big_f_eps(p, x), big_f_by_quadrature(p, x));
            assert!((a - b).abs() <= 1e-9 * a, "{e} {d} {x}: {a} vs {b}");
        }
    }

    #[test]
    fn g_double_integral_and_average_bound() {
        let p = EpsKernelParams::new(0.2, 4).unwrap();
        for x in [0.01, 0.1, 1.0] {
            let g = g_eps(p, x);
            assert!((g - g_by_double_quadrature(p, x)).abs() <= 1e-8 * g);
            assert!(g >= half_double_length_average(p, x));
        }
    }
}
