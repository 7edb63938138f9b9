use serde::{Deserialize, Serialize};

use super::dimension::Decomposition;
use super::entropy::kolmogorov_count_f64;
use super::set::CompactSet1D;
use crate::error::{domain, Error, Result};
use crate::log_plus;

/// Gauge `ψ` in the escape integral.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum PsiFunction {
    /// `scale · (log_+ x)^{2/α}`.
    PsiAlpha { alpha: f64, scale: f64 },
    /// Piecewise-linear in `log x` through `(x, ψ(x))` knots, extended past
    /// the last knot with the last slope.
    Table { knots: Vec<(f64, f64)> },
}

impl PsiFunction {
    pub fn psi_alpha(alpha: f64) -> Result<Self> {
        Self::scaled_psi_alpha(alpha, 1.0)
    }

    pub fn scaled_psi_alpha(alpha: f64, scale: f64) -> Result<Self> {
        let p = PsiFunction::PsiAlpha { alpha, scale };
        p.validate()?;
        Ok(p)
    }

    pub fn table(knots: Vec<(f64, f64)>) -> Result<Self> {
        let p = PsiFunction::Table { knots };
        p.validate()?;
        Ok(p)
    }

    /// Reject gauges that are not positive, non-decreasing and unbounded.
    pub fn validate(&self) -> Result<()> {
        match self {
            PsiFunction::PsiAlpha { alpha, scale } => {
                if !(alpha.is_finite() && *alpha > 0.0 && scale.is_finite() && *scale > 0.0) {
                    return Err(domain("ψ_α needs α > 0 and a positive scale"));
                }
            }
            PsiFunction::Table { knots } => {
                if knots.len() < 2 {
                    return Err(domain("ψ table needs at least two knots"));
                }
                if knots.iter().any(|&(x, y)| !(x >= 1.0 && y > 0.0 && y.is_finite())) {
                    return Err(domain("ψ table knots must have x ≥ 1 and positive values"));
                }
                if knots.windows(2).any(|w| !(w[1].0 > w[0].0) || w[1].1 < w[0].1) {
                    return Err(domain("ψ table must be non-decreasing in strictly increasing x"));
                }
                let n = knots.len();
                if knots[n - 1].1 <= knots[n - 2].1 {
                    return Err(domain("ψ must tend to infinity; the table ends flat"));
                }
            }
        }
        Ok(())
    }

    pub fn eval(&self, x: f64) -> f64 {
        match self {
            PsiFunction::PsiAlpha { alpha, scale } => scale * log_plus(x).powf(2.0 / alpha),
            PsiFunction::Table { knots } => {
                let lx = x.ln();
                let n = knots.len();
                let seg = knots
                    .windows(2)
                    .position(|w| x <= w[1].0)
                    .unwrap_or(n - 2);
                let (x0, y0) = knots[seg];
                let (x1, y1) = knots[seg + 1];
                if x <= x0 {
                    return y0;
                }
                let (l0, l1) = (x0.ln(), x1.ln());
                y0 + (y1 - y0) * (lx - l0) / (l1 - l0)
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Convergence {
    Finite,
    Infinite,
    Inconclusive,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Upsilon {
    /// Trapezoid value of the integral truncated at `x_max`.
    pub value: f64,
    pub class: Convergence,
    /// Exponent `e` of the tail `∝ (log x)^e` when a tail model applies.
    pub tail_exponent: Option<f64>,
}

/// Number of trapezoid nodes in `u = log x`.
pub const UPSILON_NODES: usize = 10_000;
/// Default truncation point of the quadrature.
pub const UPSILON_X_MAX: f64 = 1e12;

/// Exponent `e` with integrand `≍ (log x)^e` for `ψ = c·ψ_α`.
///
/// Sets with positive length have `K_F(1/ψ) ≍ ψ`, finite sets have
/// `K_F ≍ #F`; dividing by `ψ^{(d-2)/2} = (log x)^{(d-2)/α}` gives
/// `(4-d)/α` and `-(d-2)/α` respectively.
pub fn tail_exponent(f: &CompactSet1D, alpha: f64, d: u32) -> f64 {
    let d = d as f64;
    if f.is_finite() {
        -(d - 2.0) / alpha
    } else {
        (4.0 - d) / alpha
    }
}

/// `Υ_F(ψ) = ∫_1^∞ [K_F(1/ψ(x)) / ψ(x)^{(d-2)/2} ∧ 1] dx/x`.
///
/// The numeric value is diagnostic; the classification comes from the
/// symbolic tail exponent, using that `∫ dx/(x (log x)^p)` converges iff
/// `p > 1`.
pub fn upsilon(f: &CompactSet1D, psi: &PsiFunction, d: u32, x_max: f64) -> Result<Upsilon> {
    if d < 3 {
        return Err(domain("the escape integral needs d ≥ 3"));
    }
    psi.validate()?;
    if !(x_max > 1.0) {
        return Err(domain("x_max must exceed 1"));
    }
    let umax = x_max.ln();
    let h = umax / (UPSILON_NODES - 1) as f64;
    let power = (d as f64 - 2.0) / 2.0;
    let mut value = 0.0;
    for k in 0..UPSILON_NODES {
        let x = (k as f64 * h).exp();
        let p = psi.eval(x);
        let kf = kolmogorov_count_f64(f, 1.0 / p)? as f64;
        let g = (kf / p.powf(power)).min(1.0);
        let w = if k == 0 || k == UPSILON_NODES - 1 { 0.5 } else { 1.0 };
        value += w * g * h;
    }
    let (class, tail) = match psi {
        _ if f.is_empty() => (Convergence::Finite, None),
        PsiFunction::PsiAlpha { alpha, .. } => {
            let e = tail_exponent(f, *alpha, d);
            let class = if -e > 1.0 { Convergence::Finite } else { Convergence::Infinite };
            (class, Some(e))
        }
        PsiFunction::Table { .. } => (Convergence::Inconclusive, None),
    };
    Ok(Upsilon { value, class, tail_exponent: tail })
}

/// Whether every member of the decomposition has a finite escape integral.
///
/// This certifies membership relative to the supplied decomposition only.
pub fn fin_loc_classify(dec: &Decomposition, psi: &PsiFunction, d: u32) -> Result<bool> {
    let mut all = true;
    for m in &dec.members {
        match upsilon(m, psi, d, UPSILON_X_MAX)?.class {
            Convergence::Finite => {}
            Convergence::Infinite => all = false,
            Convergence::Inconclusive => {
                return Err(Error::Inconclusive("member has no tail model; supply ψ_α".into()))
            }
        }
    }
    Ok(all)
}
