//! Adaptive Gauss–Kronrod (7/15) quadrature.

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = WGK[7] * fc;
    let mut g = WG[3] * fc;
    for j in 0..7 {
        let x = h * XGK[j];
        let s = f(c - x) + f(c + x);
        k += WGK[j] * s;
        if j % 2 == 1 {
            g += WG[j / 2] * s;
        }
    }
    (k * h, ((k - g) * h).abs())
}

/// Outcome of an adaptive integration.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Quad {
    pub value: f64,
    pub error: f64,
    pub converged: bool,
}

/// Integrate `f` over `[a, b]` to relative tolerance `rel` (or absolute
/// tolerance `abs`, whichever is looser), bisecting the worst interval.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, rel: f64, abs: f64) -> Quad {
    integrate_breaks(f, &[a, b], rel, abs)
}

/// As [`integrate`], starting from the partition given by `breaks`.
pub fn integrate_breaks<F: Fn(f64) -> f64>(f: F, breaks: &[f64], rel: f64, abs: f64) -> Quad {
    const MAX_INTERVALS: usize = 4000;
    let mut parts: Vec<(f64, f64, f64, f64)> = breaks
        .windows(2)
        .filter(|w| w[1] > w[0])
        .map(|w| {
            let (v, e) = gk15(&f, w[0], w[1]);
            (w[0], w[1], v, e)
        })
        .collect();
    loop {
        let value: f64 = parts.iter().map(|p| p.2).sum();
        let error: f64 = parts.iter().map(|p| p.3).sum();
        let tol = abs.max(rel * value.abs());
        if error <= tol || parts.len() >= MAX_INTERVALS {
            return Quad { value, error, converged: error <= tol };
        }
        let (worst, _) = parts
            .iter()
            .enumerate()
            .fold((0, -1.0), |acc, (i, p)| if p.3 > acc.1 { (i, p.3) } else { acc });
        let (a, b, _, _) = parts.swap_remove(worst);
        let m = 0.5 * (a + b);
        if !(m > a && m < b) {
            return Quad { value, error, converged: false };
        }
        let (v1, e1) = gk15(&f, a, m);
        let (v2, e2) = gk15(&f, m, b);
        parts.push((a, m, v1, e1));
        parts.push((m, b, v2, e2));
    }
}

/// Break points `a, a+w, a+2w, a+4w, …, b` for integrands that vary on the
/// scale `w` near the left end.
pub fn geometric_breaks(a: f64, b: f64, w: f64) -> Vec<f64> {
    let mut out = vec![a];
    if w > 0.0 {
        let mut step = w;
        while a + step < b {
            out.push(a + step);
            step *= 2.0;
        }
    }
    out.push(b);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomials_and_smooth_functions() {
        let q = integrate(|x| x * x, 0.0, 3.0, 1e-12, 0.0);
        assert!((q.value - 9.0).abs() < 1e-12 && q.converged);
        let q = integrate(f64::exp, 0.0, 1.0, 1e-12, 0.0);
        assert!((q.value - (1f64.exp() - 1.0)).abs() < 1e-12);
    }

    #[test]
    fn endpoint_singularity_with_breaks() {
        let q = integrate_breaks(|x| x.powf(-0.5), &geometric_breaks(0.0, 1.0, 1e-8), 1e-10, 0.0);
        assert!((q.value - 2.0).abs() < 1e-6, "{q:?}");
    }
}
