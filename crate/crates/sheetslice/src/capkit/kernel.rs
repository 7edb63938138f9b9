use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::kernels::{big_f_eps, f_eps, g_eps, EpsKernelParams};
use crate::log_plus;
use crate::quad;

/// How a kernel on `R^{n}` is pushed down to `R^{n-m}` by integrating
/// out an `m`-cube.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ProjectionForm {
    /// `x ↦ ∫_{[0,1]^m} k(|x| + |y|) dy`.
    Shifted,
    /// `x ↦ ∬_{[0,1]^m × [0,1]^m} k(|x| + |y − z|) dy dz`, the kernel seen by
    /// `λ_m × μ` when `λ_m` is Lebesgue measure on the cube.
    Difference,
}

/// Radial kernel `k(|x|)`, nonnegative and possibly infinite at 0.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Kernel {
    Riesz { beta: f64 },
    Projected { base: Box<Kernel>, m: u32, form: ProjectionForm },
    FEps(EpsKernelParams),
    BigFEps(EpsKernelParams),
    GEps(EpsKernelParams),
    Constant(f64),
}

/// `U_β(x)`: 1 for β < 0, `log_+(1/|x|)` for β = 0, `|x|^{-β}` for β > 0,
/// extended by `+∞` at 0 when β ≥ 0.
pub fn riesz_eval(beta: f64, x: f64) -> f64 {
    let r = x.abs();
    if beta < 0.0 {
        1.0
    } else if r == 0.0 {
        f64::INFINITY
    } else if beta == 0.0 {
        log_plus(1.0 / r)
    } else {
        r.powf(-beta)
    }
}

/// `∫_0^1 (x+y)^{-β} dy`.
fn riesz_shift(beta: f64, x: f64) -> f64 {
    if beta == 1.0 {
        ((1.0 + x) / x).ln()
    } else {
        ((1.0 + x).powf(1.0 - beta) - x.powf(1.0 - beta)) / (1.0 - beta)
    }
}

/// `∫_0^1 y (x+y)^{-β} dy = ∫_0^1 (x+y)^{1-β} dy − x ∫_0^1 (x+y)^{-β} dy`.
fn riesz_shift_first_moment(beta: f64, x: f64, shift: f64) -> f64 {
    let upper = if beta == 2.0 {
        ((1.0 + x) / x).ln()
    } else {
        ((1.0 + x).powf(2.0 - beta) - x.powf(2.0 - beta)) / (2.0 - beta)
    };
    upper - x * shift
}

fn riesz_projected_once(beta: f64, form: ProjectionForm, x: f64) -> f64 {
    if x == 0.0 && beta >= 1.0 {
        return f64::INFINITY;
    }
    let a = riesz_shift(beta, x);
    match form {
        ProjectionForm::Shifted => a,
        ProjectionForm::Difference => 2.0 * (a - riesz_shift_first_moment(beta, x, a)),
    }
}

/// One integration step `x ↦ ∫_0^1 w(u) g(x+u) du` with `w = 1` or
/// `w = 2(1−u)`.
fn project_once_numeric<G: Fn(f64) -> f64>(g: G, form: ProjectionForm, x: f64) -> f64 {
    let breaks = quad::geometric_breaks(0.0, 1.0, x.max(1e-12));
    let q = match form {
        ProjectionForm::Shifted => quad::integrate_breaks(|u| g(x + u), &breaks, 1e-10, 0.0),
        ProjectionForm::Difference => {
            quad::integrate_breaks(|u| 2.0 * (1.0 - u) * g(x + u), &breaks, 1e-10, 0.0)
        }
    };
    q.value
}

impl Kernel {
    pub fn riesz(beta: f64) -> Self {
        Kernel::Riesz { beta }
    }

    /// Evaluate at distance `r = |x| ≥ 0`.
    pub fn eval(&self, r: f64) -> f64 {
        let r = r.abs();
        match self {
            Kernel::Riesz { beta } => riesz_eval(*beta, r),
            Kernel::Constant(c) => *c,
            Kernel::FEps(p) => f_eps(*p, r),
            Kernel::BigFEps(p) => big_f_eps(*p, r),
            Kernel::GEps(p) => g_eps(*p, r),
            Kernel::Projected { base, m, form } => eval_projected(base, *m, *form, r),
        }
    }

    /// Whether `k(0) = +∞`.
    pub fn is_singular(&self) -> bool {
        self.eval(0.0).is_infinite()
    }
}

fn eval_projected(base: &Kernel, m: u32, form: ProjectionForm, r: f64) -> f64 {
    match (base, m) {
        (_, 0) => base.eval(r),
        (Kernel::Constant(c), _) => *c,
        (Kernel::Riesz { beta }, 1) if *beta < 0.0 => 1.0,
        (Kernel::Riesz { beta }, 1) if *beta > 0.0 => riesz_projected_once(*beta, form, r),
        (Kernel::Riesz { beta }, _) if *beta > 0.0 => {
            project_once_numeric(|y| riesz_projected_once(*beta, form, y), form, r)
        }
        _ => project_once_numeric(|y| eval_projected(base, m - 1, form, y), form, r),
    }
}

/// `Π_m k: x ↦ ∫_{[0,1]^m} k(x + y) dy`.
pub fn project_kernel(k: &Kernel, m: u32) -> Result<Kernel> {
    project_kernel_with(k, m, ProjectionForm::Shifted)
}

pub fn project_kernel_with(k: &Kernel, m: u32, form: ProjectionForm) -> Result<Kernel> {
    if m == 0 {
        return Err(domain("projection needs m ≥ 1"));
    }
    if let Kernel::Constant(c) = k {
        return Ok(Kernel::Constant(*c));
    }
    Ok(Kernel::Projected { base: Box::new(k.clone()), m, form })
}

impl fmt::Display for Kernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Kernel::Riesz { beta } => write!(f, "riesz(beta={beta})"),
            Kernel::Constant(c) => write!(f, "constant(value={c})"),
            Kernel::FEps(p) => write!(f, "f_eps(eps={},d={})", p.eps, p.d),
            Kernel::BigFEps(p) => write!(f, "F_eps(eps={},d={})", p.eps, p.d),
            Kernel::GEps(p) => write!(f, "G_eps(eps={},d={})", p.eps, p.d),
            Kernel::Projected { base, m, form } => {
                let form = match form {
                    ProjectionForm::Shifted => "shifted",
                    ProjectionForm::Difference => "difference",
                };
                write!(f, "projected(m={m},form={form},base={base})")
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn riesz_examples() {
        assert_eq!(riesz_eval(2.0, 0.5), 4.0);
        assert_eq!(riesz_eval(-1.0, 123.0), 1.0);
        assert_eq!(riesz_eval(-1.0, 0.0), 1.0);
        assert!((riesz_eval(0.0, (-2f64).exp()) - 2.0).abs() < 1e-12);
        assert_eq!(riesz_eval(0.0, 0.9), 1.0);
        assert!(riesz_eval(0.5, 0.0).is_infinite());
        assert!(riesz_eval(0.0, 0.0).is_infinite());
    }

    #[test]
    fn projected_closed_forms_match_quadrature() {
        for &beta in &[0.5, 1.0, 1.5, 2.0, 2.5] {
            for &form in &[ProjectionForm::Shifted, ProjectionForm::Difference] {
                for &x in &[1e-3, 0.1, 0.7, 2.0] {
                    let closed = riesz_projected_once(beta, form, x);
                    let numeric = project_once_numeric(|y| riesz_eval(beta, y), form, x);
                    assert!(
                        ((closed - numeric) / closed).abs() < 1e-8,
                        "β={beta} {form:?} x={x}: {closed} vs {numeric}"
                    );
                }
            }
        }
    }

    #[test]
    fn shifted_projection_of_u2() {
        let k = project_kernel(&Kernel::riesz(2.0), 1).unwrap();
        assert!((k.eval(1.0) - 0.5).abs() < 1e-14);
        let c = project_kernel(&Kernel::Constant(1.0), 3).unwrap();
        assert_eq!(c.eval(0.3), 1.0);
    }

    #[test]
    fn two_fold_projection_is_iterated() {
        let k2 = project_kernel(&Kernel::riesz(1.5), 2).unwrap();
        // ∫∫ (x+y+z)^{-3/2} dy dz, antiderivative in closed form.
        let x: f64 = 0.3;
        let exact = 4.0 * (2.0 * (x + 1.0).sqrt() - x.sqrt() - (x + 2.0).sqrt());
        assert!(((k2.eval(x) - exact) / exact).abs() < 1e-8, "{} vs {exact}", k2.eval(x));
    }
}
