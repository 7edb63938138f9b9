use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive};

use super::set::{q_to_f64, CompactSet1D, Q};
use crate::error::{domain, Result};
use crate::log_plus;

/// Gauge function used in Hausdorff covers.
#[derive(Clone)]
pub enum MeasureFunction {
    /// `x^α`.
    Power(f64),
    /// `[log_+(1/x)]^{-(8-d)/2}` for `d ∈ {2, 3}`.
    PhiTrace(u32),
    /// Any non-decreasing function, with a stated doubling constant and the
    /// threshold below which it holds.
    Custom {
        name: String,
        eval: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
        doubling: f64,
        threshold: f64,
    },
}

impl fmt::Debug for MeasureFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MeasureFunction::Power(a) => write!(f, "power({a})"),
            MeasureFunction::PhiTrace(d) => write!(f, "phi_trace({d})"),
            MeasureFunction::Custom { name, .. } => write!(f, "custom({name})"),
        }
    }
}

impl MeasureFunction {
    pub fn phi_trace(d: u32) -> Result<Self> {
        if d != 2 && d != 3 {
            return Err(domain("phi_trace is defined for d ∈ {2, 3}"));
        }
        Ok(MeasureFunction::PhiTrace(d))
    }

    pub fn eval(&self, x: f64) -> f64 {
        match self {
            MeasureFunction::Power(a) => x.powf(*a),
            MeasureFunction::PhiTrace(d) => phi(x, *d),
            MeasureFunction::Custom { eval, .. } => eval(x),
        }
    }

    /// `(C, x0)` such that `φ(2x) ≤ C φ(x)` for `0 < x ≤ x0`.
    pub fn doubling(&self) -> (f64, f64) {
        match self {
            MeasureFunction::Power(a) => (2f64.powf(*a), f64::INFINITY),
            // Below 1/(2e) both log_+ values are unfloored and the ratio
            // (L(x)/L(2x))^p is largest when L(2x) = 1.
            MeasureFunction::PhiTrace(d) => {
                let p = (8.0 - *d as f64) / 2.0;
                ((1.0 + std::f64::consts::LN_2).powf(p), 0.5 / std::f64::consts::E)
            }
            MeasureFunction::Custom { doubling, threshold, .. } => (*doubling, *threshold),
        }
    }
}

fn phi(x: f64, d: u32) -> f64 {
    log_plus(1.0 / x).powf(-(8.0 - d as f64) / 2.0)
}

/// `Φ(x) = [log_+(1/x)]^{-(8-d)/2}`.
pub fn eval_phi_trace(x: f64, d: u32) -> Result<f64> {
    if !(x > 0.0) {
        return Err(domain("phi_trace needs x > 0"));
    }
    if d != 2 && d != 3 {
        return Err(domain("phi_trace is defined for d ∈ {2, 3}"));
    }
    Ok(phi(x, d))
}

/// Upper bound on `H_φ^{(r)}(F)` from a greedy left-to-right cover by
/// closed balls `[x, x + 2r]` of radius `r`.
///
/// The value is `(number of balls) · φ(r)`. It bounds the infimum from
/// above but is not itself monotone in `r`.
pub fn hausdorff_cover_count(f: &CompactSet1D, r: &Q) -> Result<u64> {
    if !r.is_positive() {
        return Err(domain("cover radius must be positive"));
    }
    let width = r * Q::from_integer(BigInt::from(2));
    let mut covered: Option<Q> = None;
    let mut balls = 0u64;
    for (a, b) in f.pieces() {
        let start = match &covered {
            Some(c) if c >= b => continue,
            Some(c) if c >= a => c.clone(),
            _ => {
                balls += 1;
                let end = a + &width;
                if &end >= b {
                    covered = Some(end);
                    continue;
                }
                end
            }
        };
        let more = ((b - &start) / &width).ceil().to_integer().to_u64().expect("ball count fits");
        balls += more;
        covered = Some(&start + &width * Q::from_integer(BigInt::from(more)));
    }
    Ok(balls)
}

pub fn hausdorff_measure_upper(f: &CompactSet1D, phi: &MeasureFunction, r: &Q) -> Result<f64> {
    let balls = hausdorff_cover_count(f, r)?;
    Ok(balls as f64 * phi.eval(q_to_f64(r)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> Q {
        Q::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn unit_interval_cover_is_exact() {
        let f: CompactSet1D = "0,1".parse().unwrap();
        for m in [1, 3, 7, 10, 64] {
            let h = hausdorff_measure_upper(&f, &MeasureFunction::Power(1.0), &q(1, 2 * m)).unwrap();
            assert!((h - 0.5).abs() < 1e-12, "m={m} h={h}");
        }
    }

    #[test]
    fn singleton_bound_vanishes() {
        let f: CompactSet1D = "3/2,3/2".parse().unwrap();
        let h = hausdorff_measure_upper(&f, &MeasureFunction::Power(0.5), &q(1, 1_000_000)).unwrap();
        assert!((h - 1e-3).abs() < 1e-12);
    }

    #[test]
    fn cover_bridges_close_pieces() {
        // One ball [1, 1.2] covers both points, the next starts at 1.5.
        let f: CompactSet1D = "1,1;11/10,11/10;3/2,2".parse().unwrap();
        assert_eq!(hausdorff_cover_count(&f, &q(1, 10)).unwrap(), 1 + 3);
    }

    #[test]
    fn phi_trace_values() {
        assert!((eval_phi_trace((-1f64).exp(), 3).unwrap() - 1.0).abs() < 1e-12);
        assert!((eval_phi_trace((-4f64).exp(), 2).unwrap() - 1.0 / 64.0).abs() < 1e-12);
        assert!(eval_phi_trace(0.1, 4).is_err());
        assert!(eval_phi_trace(0.0, 3).is_err());
    }

    #[test]
    fn phi_trace_doubling_constant_holds() {
        let phi = MeasureFunction::phi_trace(3).unwrap();
        let (c, x0) = phi.doubling();
        let mut x = x0;
        while x > 1e-300 {
            assert!(phi.eval(2.0 * x) <= c * phi.eval(x) * (1.0 + 1e-12));
            x *= 0.7;
        }
    }
}
