//! Hitting probabilities of small balls by one or two Brownian motions on
//! the time window `[1, 2]`.

use rand::Rng;
use rand_distr::StandardNormal;

use super::common::{par_trials, slope_check};
use super::config::ExperimentConfig;
use super::report::{Check, ExperimentReport, Fit, PointEstimate, TrialRecord};
use crate::error::{config, Result};
use crate::stats;

pub(crate) const MAXD: usize = 8;
type V = [f64; MAXD];

fn l1(x: &V, d: usize) -> f64 {
    x[..d].iter().map(|v| v.abs()).sum()
}

/// Smallest ℓ¹ norm on the segment from `x` to `y`. The norm is convex and
/// piecewise linear along the segment, so the minimum sits at an endpoint
/// or where a coordinate changes sign.
fn segment_min_l1(x: &V, y: &V, d: usize) -> f64 {
    let mut best = l1(x, d).min(l1(y, d));
    for i in 0..d {
        let (a, b) = (x[i], y[i]);
        if a * b < 0.0 {
            let th = a / (a - b);
            let s: f64 = (0..d).map(|c| (x[c] + th * (y[c] - x[c])).abs()).sum();
            best = best.min(s);
        }
    }
    best
}

fn gauss<R: Rng>(rng: &mut R, d: usize, sd: f64) -> V {
    let mut v = [0.0; MAXD];
    for c in v.iter_mut().take(d) {
        let z: f64 = rng.sample(StandardNormal);
        *c = sd * z;
    }
    v
}

/// Multilevel splitting search for the first entrance of Brownian motion
/// into nested ℓ¹ balls.
///
/// The path is simulated on a coarse time step; a step is refined by
/// Brownian-bridge midpoints only while the segment could come within the
/// current target radius. When a ball is entered, the particle is replaced
/// by `split` independent copies of weight `w/split` that continue from the
/// entrance point, so the sum of weights reaching each ball is an unbiased
/// estimate of its hitting probability.
struct BallSearch<'a> {
    d: usize,
    radii: &'a [f64],
    split: &'a [u32],
    dt0: f64,
    dt_min: f64,
    horizon: f64,
}

impl BallSearch<'_> {
    fn scan<R: Rng>(&self, x: &V, y: &V, dt: f64, t0: f64, r: f64, rng: &mut R) -> Option<(f64, V)> {
        let m = segment_min_l1(x, y, self.d);
        if m - r > 3.0 * self.d as f64 * dt.sqrt() {
            return None;
        }
        if dt <= self.dt_min {
            return (m <= r).then_some((t0 + dt, *y));
        }
        let noise = gauss(rng, self.d, (dt / 4.0).sqrt());
        let mut mid = [0.0; MAXD];
        for c in 0..self.d {
            mid[c] = 0.5 * (x[c] + y[c]) + noise[c];
        }
        if let Some(hit) = self.scan(x, &mid, dt / 2.0, t0, r, rng) {
            return Some(hit);
        }
        if l1(&mid, self.d) <= r {
            return Some((t0 + dt / 2.0, mid));
        }
        self.scan(&mid, y, dt / 2.0, t0 + dt / 2.0, r, rng)
    }

    /// Record the balls containing `x` from level `next` on; returns the
    /// first level not yet entered.
    fn enter(&self, x: &V, mut next: usize, w: f64, tally: &mut [f64]) -> usize {
        while next < self.radii.len() && l1(x, self.d) <= self.radii[next] {
            tally[next] += w;
            next += 1;
        }
        next
    }

    fn walk<R: Rng>(&self, mut t: f64, mut x: V, next: usize, w: f64, rng: &mut R, tally: &mut [f64]) {
        while t < self.horizon {
            let dt = self.dt0.min(self.horizon - t);
            let step = gauss(rng, self.d, dt.sqrt());
            let mut y = x;
            for c in 0..self.d {
                y[c] += step[c];
            }
            if let Some((tau, z)) = self.scan(&x, &y, dt, t, self.radii[next], rng) {
                tally[next] += w;
                let reached = self.enter(&z, next + 1, w, tally);
                if reached == self.radii.len() {
                    return;
                }
                let copies = self.split[reached - 1];
                for _ in 0..copies {
                    self.walk(tau, z, reached, w / copies as f64, rng, tally);
                }
                return;
            }
            x = y;
            t += dt;
        }
    }
}

/// Copies spawned on entering ball `k` when heading for ball `k+1`, chosen
/// so that roughly one copy reaches the next ball: the ratio of hitting
/// probabilities of nested balls is about `(r_{k+1}/r_k)^{d-2}`.
fn split_factors(radii_desc: &[f64], d: u32) -> Vec<u32> {
    radii_desc
        .windows(2)
        .map(|w| ((w[0] / w[1]).powi(d as i32 - 2).round() as u32).max(1))
        .collect()
}

/// Ladder radii in decreasing order, preceded by unreported doubling levels
/// up to `d/2` so that splitting starts while hits are still common.
fn search_radii(ladder: &[f64], d: u32) -> Vec<f64> {
    let top = ladder[ladder.len() - 1];
    let mut aux: Vec<f64> = std::iter::successors(Some(2.0 * top), |r| Some(2.0 * r))
        .take_while(|&r| r <= d as f64 / 2.0)
        .collect();
    aux.reverse();
    aux.extend(ladder.iter().rev());
    aux
}

pub(crate) fn validate_bm(c: &ExperimentConfig) -> Result<()> {
    if c.dim < 3 || c.dim as usize > MAXD {
        return Err(config(format!("ball hitting needs 3 ≤ d ≤ {MAXD}")));
    }
    if c.ladder.is_empty() {
        return Err(config("radius ladder is empty"));
    }
    Ok(())
}

pub(crate) fn trials_bm(c: &ExperimentConfig) -> Result<Vec<TrialRecord>> {
    validate_bm(c)?;
    let d = c.dim as usize;
    let radii = search_radii(&c.ladder, c.dim);
    let aux = radii.len() - c.ladder.len();
    let split = split_factors(&radii, c.dim);
    let steps = if c.substeps == 0 { 64 } else { c.substeps };
    let search = BallSearch {
        d,
        radii: &radii,
        split: &split,
        dt0: 1.0 / steps as f64,
        dt_min: (radii[radii.len() - 1] / (30.0 * d as f64)).powi(2),
        horizon: 2.0,
    };
    Ok(par_trials(c, |rng| {
        let mut tally = vec![0.0; radii.len()];
        let x = gauss(rng, d, 1.0);
        let next = search.enter(&x, 0, 1.0, &mut tally);
        if next < radii.len() {
            if next == 0 {
                search.walk(1.0, x, 0, 1.0, rng, &mut tally);
            } else {
                let copies = split[next - 1];
                for _ in 0..copies {
                    search.walk(1.0, x, next, 1.0 / copies as f64, rng, &mut tally);
                }
            }
        }
        tally.reverse();
        tally.truncate(tally.len() - aux);
        tally
    }))
}

pub(crate) fn finalize_bm(c: &ExperimentConfig, trials: Vec<TrialRecord>) -> Result<ExperimentReport> {
    let mut rep = ExperimentReport::new(c, trials);
    let n = rep.trials.len() as u64;
    let (mut xs, mut ys, mut ses) = (Vec::new(), Vec::new(), Vec::new());
    for (k, &r) in c.ladder.iter().enumerate() {
        let vals: Vec<f64> = rep.trials.iter().map(|t| t.values[k]).collect();
        let (est, lo, hi) = stats::summarize(&vals, true);
        let (_, se) = stats::mean_se(&vals);
        rep.points.push(PointEstimate { series: String::new(), param: r, estimate: est, ci_lo: lo, ci_hi: hi, n_trials: n });
        if est > 0.0 {
            xs.push(r);
            ys.push(est);
            ses.push(se);
        } else {
            rep.notes.push(format!("r = {r}: no hits, excluded from the slope fit"));
        }
    }
    let target = c.dim as f64 - 2.0;
    rep.checks.push(slope_check(&mut rep.fits, "slope", &xs, &ys, &ses, target, 0.1 * target));
    Ok(rep)
}

pub(crate) fn trials_two_bm(c: &ExperimentConfig) -> Result<Vec<TrialRecord>> {
    validate_two_bm(c)?;
    let d = c.dim as usize;
    let steps = if c.substeps == 0 { 1024 } else { c.substeps } as usize;
    let sd = (1.0 / steps as f64).sqrt();
    let r = c.radius;
    let rhos = c.ladder.clone();
    Ok(par_trials(c, |rng| {
        let mut x = gauss(rng, d, 1.0);
        let mut y = gauss(rng, d, 1.0);
        let mut hit_x = false;
        let mut hit_z = vec![false; rhos.len()];
        let mut z = [0.0; MAXD];
        for step in 0..=steps {
            if step > 0 {
                let (a, b) = (gauss(rng, d, sd), gauss(rng, d, sd));
                for k in 0..d {
                    x[k] += a[k];
                    y[k] += b[k];
                }
            }
            hit_x |= l1(&x, d) <= r;
            for (j, &rho) in rhos.iter().enumerate() {
                if !hit_z[j] {
                    for k in 0..d {
                        z[k] = rho * y[k] + x[k];
                    }
                    hit_z[j] = l1(&z, d) <= r;
                }
            }
        }
        let mut out = vec![if hit_x { 1.0 } else { 0.0 }];
        out.extend(hit_z.iter().map(|&h| if h && hit_x { 1.0 } else { 0.0 }));
        out.extend(hit_z.iter().map(|&h| if h { 1.0 } else { 0.0 }));
        out
    }))
}

fn validate_two_bm(c: &ExperimentConfig) -> Result<()> {
    if c.dim < 3 || c.dim as usize > MAXD {
        return Err(config(format!("two-motion hitting needs 3 ≤ d ≤ {MAXD}")));
    }
    if c.ladder.is_empty() {
        return Err(config("ρ ladder is empty"));
    }
    if !(c.radius > 0.0) || c.ladder.iter().any(|&rho| rho <= c.radius || rho > 1.0) {
        return Err(config("two-motion hitting needs 0 < r < ρ ≤ 1"));
    }
    Ok(())
}

pub(crate) fn finalize_two_bm(c: &ExperimentConfig, trials: Vec<TrialRecord>) -> Result<ExperimentReport> {
    let mut rep = ExperimentReport::new(c, trials);
    let n = rep.trials.len();
    let m = c.ladder.len();
    let base: Vec<f64> = rep.trials.iter().map(|t| t.values[0]).collect();
    let successes: f64 = base.iter().sum();
    let mean_x = successes / n as f64;
    let (mut xs, mut ys, mut ses) = (Vec::new(), Vec::new(), Vec::new());
    let mut c_rho: f64 = 0.0;
    let mut c_ratio: f64 = 0.0;
    for (j, &rho) in c.ladder.iter().enumerate() {
        let joint: Vec<f64> = rep.trials.iter().map(|t| t.values[1 + j]).collect();
        let ratio = if successes > 0.0 { joint.iter().sum::<f64>() / successes } else { f64::NAN };
        // Delta method for a ratio of means.
        let resid: Vec<f64> = joint.iter().zip(&base).map(|(a, b)| a - ratio * b).collect();
        let (_, se_r) = stats::mean_se(&resid);
        let se = se_r / mean_x;
        let lo = (ratio - stats::Z975 * se).max(0.0);
        let hi = (ratio + stats::Z975 * se).min(1.0);
        rep.points.push(PointEstimate { series: String::new(), param: rho, estimate: ratio, ci_lo: lo, ci_hi: hi, n_trials: n as u64 });
        let uncond: Vec<f64> = rep.trials.iter().map(|t| t.values[1 + m + j]).collect();
        let (ue, ulo, uhi) = stats::summarize(&uncond, true);
        rep.points.push(PointEstimate { series: "unconditional".into(), param: rho, estimate: ue, ci_lo: ulo, ci_hi: uhi, n_trials: n as u64 });
        if ratio > 0.0 && se > 0.0 {
            xs.push(rho);
            ys.push(ratio);
            ses.push(se);
        }
        let dd = c.dim as f64 - 2.0;
        c_rho = c_rho.max(ratio / rho.powf(dd));
        c_ratio = c_ratio.max(ratio / (c.radius / rho).powf(dd));
    }
    let dd = c.dim as f64 - 2.0;
    rep.fits.push(Fit { name: "c_rho_power".into(), value: c_rho, se: 0.0, target: None });
    rep.fits.push(Fit { name: "c_ratio_power".into(), value: c_ratio, se: 0.0, target: None });
    if successes < 50.0 {
        rep.checks.push(Check::inconclusive("conditioning", format!("only {successes} conditioning successes")));
        return Ok(rep);
    }
    if let Some(fit) = stats::loglog_fit(&xs, &ys, &ses) {
        rep.fits.push(Fit::slope("slope", &fit, Some(-dd)));
        rep.checks.push(Check::new(
            "decreasing_in_rho",
            fit.slope < 0.0,
            format!("log-log slope {:.3} ± {:.3}", fit.slope, fit.slope_se),
        ));
    }
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn segment_minimum_finds_the_crossing() {
        let mut x = [0.0; MAXD];
        let mut y = [0.0; MAXD];
        x[0] = -1.0;
        x[1] = 0.5;
        y[0] = 1.0;
        y[1] = 0.5;
        assert!((segment_min_l1(&x, &y, 2) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn split_factors_follow_the_exponent() {
        assert_eq!(split_factors(&[0.2, 0.1, 0.05], 3), vec![2, 2]);
        assert_eq!(split_factors(&[0.2, 0.1], 5), vec![8]);
    }
}
