//! Small statistics helpers shared by the Monte Carlo code.

use serde::{Deserialize, Serialize};

/// Two-sided 97.5% normal quantile.
pub const Z975: f64 = 1.959_963_984_540_054;

/// Mean and standard error of the mean, summed in slice order.
pub fn mean_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = xs.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let ss: f64 = xs.iter().map(|x| (x - mean) * (x - mean)).sum();
    (mean, (ss / (n as f64 - 1.0) / n as f64).sqrt())
}

/// Sample covariance of paired observations and the standard error of that
/// estimate (delta method on the product variable).
pub fn cov_se(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    assert_eq!(xs.len(), ys.len());
    let n = xs.len() as f64;
    let (mx, _) = mean_se(xs);
    let (my, _) = mean_se(ys);
    let prods: Vec<f64> = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).collect();
    let (m, se) = mean_se(&prods);
    (m * n / (n - 1.0), se)
}

/// Wilson score interval for a proportion.
pub fn wilson(p: f64, n: f64) -> (f64, f64) {
    let z2 = Z975 * Z975;
    let denom = 1.0 + z2 / n;
    let centre = (p + z2 / (2.0 * n)) / denom;
    let half = Z975 * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    ((centre - half).max(0.0), (centre + half).min(1.0))
}

/// Point estimate with a 95% interval from i.i.d. per-trial values.
///
/// Values in `[0,1]` are treated as probabilities: the interval is clamped to
/// `[0,1]` and falls back to a Wilson interval when the sample variance is
/// zero, so the half-width is always positive.
pub fn summarize(xs: &[f64], probability: bool) -> (f64, f64, f64) {
    let (m, se) = mean_se(xs);
    let n = xs.len() as f64;
    if probability {
        if se == 0.0 || !se.is_finite() {
            let (lo, hi) = wilson(m.clamp(0.0, 1.0), n);
            return (m, lo, hi);
        }
        return (m, (m - Z975 * se).max(0.0), (m + Z975 * se).min(1.0));
    }
    (m, m - Z975 * se, m + Z975 * se)
}

/// Result of a straight-line fit `y = intercept + slope * x`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    pub slope_se: f64,
    pub points: usize,
}

/// Weighted least squares. With `w = 1/var(y)` the slope error is the
/// known-variance standard error; with unit weights it is rescaled by the
/// residual variance.
pub fn weighted_line(x: &[f64], y: &[f64], w: &[f64], known_variance: bool) -> Option<LineFit> {
    let n = x.len();
    if n < 2 || y.len() != n || w.len() != n {
        return None;
    }
    let sw: f64 = w.iter().sum();
    let mx = x.iter().zip(w).map(|(a, b)| a * b).sum::<f64>() / sw;
    let my = y.iter().zip(w).map(|(a, b)| a * b).sum::<f64>() / sw;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for i in 0..n {
        sxx += w[i] * (x[i] - mx) * (x[i] - mx);
        sxy += w[i] * (x[i] - mx) * (y[i] - my);
    }
    if sxx <= 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let slope_se = if known_variance {
        (1.0 / sxx).sqrt()
    } else if n > 2 {
        let rss: f64 = (0..n)
            .map(|i| w[i] * (y[i] - intercept - slope * x[i]).powi(2))
            .sum();
        (rss / (n as f64 - 2.0) / sxx).sqrt()
    } else {
        0.0
    };
    Some(LineFit { slope, intercept, slope_se, points: n })
}

/// Ordinary least squares with unit weights.
pub fn line(x: &[f64], y: &[f64]) -> Option<LineFit> {
    weighted_line(x, y, &vec![1.0; x.len()], false)
}

/// Log-log fit of estimates against a parameter, weighted by the inverse
/// variance of `log(estimate)` derived from each point's standard error.
pub fn loglog_fit(param: &[f64], est: &[f64], se: &[f64]) -> Option<LineFit> {
    let mut x = Vec::new();
    let mut y = Vec::new();
    let mut w = Vec::new();
    for i in 0..param.len() {
        if est[i] > 0.0 && se[i] > 0.0 && param[i] > 0.0 {
            x.push(param[i].ln());
            y.push(est[i].ln());
            let rel = se[i] / est[i];
            w.push(1.0 / (rel * rel));
        }
    }
    weighted_line(&x, &y, &w, true)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_line_is_recovered() {
        let x = [0.0, 1.0, 2.0, 3.0];
        let y: Vec<f64> = x.iter().map(|v| 2.0 - 0.5 * v).collect();
        let f = line(&x, &y).unwrap();
        assert!((f.slope + 0.5).abs() < 1e-12);
        assert!((f.intercept - 2.0).abs() < 1e-12);
        assert!(f.slope_se < 1e-12);
    }

    #[test]
    fn wilson_half_width_is_below_the_wald_bound() {
        for &n in &[10.0, 100.0, 10000.0] {
            for &p in &[0.0, 0.1, 0.5, 1.0] {
                let (lo, hi) = wilson(p, n);
                assert!(hi > lo);
                assert!((hi - lo) / 2.0 <= Z975 / (2.0 * f64::sqrt(n)) + 1e-12);
            }
        }
    }

    #[test]
    fn mean_se_of_constant_is_zero() {
        let (m, se) = mean_se(&[3.0; 5]);
        assert_eq!(m, 3.0);
        assert_eq!(se, 0.0);
    }
}
