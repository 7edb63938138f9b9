//! `P{inf_{s∈F} inf_{1≤t≤2} |B(s,t)| ≤ ε}` for compact `F ⊆ [1,2]`.
//!
//! Each ε is observed on its own sub-lattice of the base mesh with spacing
//! close to `ε²/2`, so every ε sees the same discretization in Brownian
//! units and the bias of the grid minimum is a common factor that leaves
//! log-log slopes intact. Rare events are reached by RESTART splitting in
//! `s`: the columns `B(s,·)` form a Markov process in `s`, and a path whose
//! column minimum enters a deeper region is retried from that state.

use rand::Rng;

use super::common::{par_trials, slope_check};
use super::config::ExperimentConfig;
use super::report::{Check, ExperimentReport, Fit, PointEstimate, TrialRecord};
use crate::error::{config, Result};
use crate::randfield::{l1, ColumnWalker};
use crate::rng;
use crate::setkit::{kolmogorov_count_f64, CompactSet1D};
use crate::stats;

/// Target lattice spacing in units of `ε²`.
pub const LATTICE_LAMBDA: f64 = 0.5;
const PILOT_PATHS: u64 = 128;
const MAX_FACTOR: usize = 32;
const MAX_BURST: usize = 64;
const THRESHOLD_RATIO: f64 = std::f64::consts::SQRT_2;

#[derive(Clone, Debug)]
struct Level {
    eps: f64,
    stride: usize,
}

#[derive(Clone, Copy, Debug)]
struct SNode {
    s: f64,
    /// Grid index counted from `s = 1`, or `None` for an isolated point.
    index: Option<usize>,
}

#[derive(Clone, Debug)]
struct Design {
    dim: usize,
    nodes: Vec<SNode>,
    t_nodes: Vec<f64>,
    levels: Vec<Level>,
    thresholds: Vec<f64>,
    /// Copies spawned on crossing each threshold.
    factors: Vec<usize>,
}

#[derive(Clone)]
struct Particle {
    walker: ColumnWalker,
    next_node: usize,
    /// Running lattice minimum per ε level.
    mins: Vec<f64>,
    /// Running minimum on the base lattice.
    base_min: f64,
    /// Regions (threshold sets) the current column lies in.
    region: usize,
    /// Splitting factor applied on entering each region the particle is
    /// currently in; lags `region` until the splits are made.
    applied: Vec<usize>,
    weight: f64,
    /// Retrials die when the column leaves region `confine - 1`.
    confine: usize,
}

/// Lattice stride for `ε`, or `None` when even the base mesh is too coarse
/// (cell diagonal above `ε/4`).
fn stride_for(eps: f64, k: usize) -> Option<usize> {
    let h0 = 1.0 / k as f64;
    let diag_ok = |m: usize| std::f64::consts::SQRT_2 * m as f64 * h0 <= eps / 4.0;
    if !diag_ok(1) {
        return None;
    }
    let mut m = ((LATTICE_LAMBDA * eps * eps * k as f64).round() as usize).max(1);
    while m > 1 && !diag_ok(m) {
        m -= 1;
    }
    Some(m)
}

fn s_nodes(f: &CompactSet1D, k: usize) -> Vec<SNode> {
    let mut out = Vec::new();
    for (a, b) in f.pieces_f64() {
        if a == b {
            out.push(SNode { s: a, index: None });
            continue;
        }
        let lo = ((a - 1.0) * k as f64 - 1e-9).ceil().max(0.0) as usize;
        let hi = ((b - 1.0) * k as f64 + 1e-9).floor() as usize;
        for i in lo..=hi {
            out.push(SNode { s: 1.0 + i as f64 / k as f64, index: Some(i) });
        }
    }
    out.sort_by(|x, y| x.s.total_cmp(&y.s));
    out.dedup_by(|x, y| (x.s - y.s).abs() < 1e-15);
    out
}

impl Design {
    fn new(f: &CompactSet1D, eps: &[(f64, usize)], k: usize, dim: usize) -> Self {
        Design {
            dim,
            nodes: s_nodes(f, k),
            t_nodes: (0..=k).map(|j| 1.0 + j as f64 / k as f64).collect(),
            levels: eps.iter().map(|&(eps, stride)| Level { eps, stride }).collect(),
            thresholds: Vec::new(),
            factors: Vec::new(),
        }
    }

    fn fresh(&self) -> Particle {
        Particle {
            walker: ColumnWalker::new(self.t_nodes.clone(), self.dim).expect("valid nodes"),
            next_node: 0,
            mins: vec![f64::INFINITY; self.levels.len()],
            base_min: f64::INFINITY,
            region: 0,
            applied: Vec::new(),
            weight: 1.0,
            confine: 0,
        }
    }

    /// Number of thresholds at or above `x` (thresholds are decreasing).
    fn region_of(&self, x: f64) -> usize {
        self.thresholds.iter().take_while(|&&th| x <= th).count()
    }

    /// Advance to the next column and update the running minima. Returns a
    /// bit mask of the ε levels first reached at this column.
    fn step<R: Rng>(&self, p: &mut Particle, rng: &mut R) -> u64 {
        let node = self.nodes[p.next_node];
        let prev = if p.next_node == 0 { 0.0 } else { self.nodes[p.next_node - 1].s };
        p.walker.advance(node.s - prev, rng);
        p.next_node += 1;
        let vals = p.walker.values();
        let d = self.dim;
        let (col_min, _) = p.walker.min_l1();
        p.base_min = p.base_min.min(col_min);
        p.region = self.region_of(col_min);
        let mut fresh_hits = 0;
        for (l, (lv, m)) in self.levels.iter().zip(p.mins.iter_mut()).enumerate() {
            let on_lattice = node.index.is_none_or(|i| i % lv.stride == 0);
            if !on_lattice || col_min > lv.eps {
                continue;
            }
            let v = if lv.stride == 1 {
                col_min
            } else {
                vals.chunks_exact(d).step_by(lv.stride).map(l1).fold(f64::INFINITY, f64::min)
            };
            if v <= lv.eps && *m > lv.eps {
                fresh_hits |= 1 << l;
            }
            *m = m.min(v);
        }
        fresh_hits
    }

    /// Weighted first-hit counts, one per ε level (RESTART splitting).
    ///
    /// Entering region `j` (column minimum at most `θ_j`) spawns
    /// `factors[j] − 1` retrials that live only while the column stays in
    /// that region; the original continues unconfined and gets its weight
    /// back when it leaves. An event carries the weight `1/∏ f` over the
    /// factors applied for the regions currently occupied, which makes the
    /// tally unbiased for the first-hit probability. When one step enters
    /// several regions, factors that would push the burst of copies above
    /// `MAX_BURST` are replaced by 1.
    fn run<R: Rng>(&self, rng: &mut R) -> Vec<f64> {
        let mut tally = vec![0.0; self.levels.len()];
        let mut stack = vec![self.fresh()];
        while let Some(mut p) = stack.pop() {
            loop {
                if p.next_node == self.nodes.len() {
                    break;
                }
                let mut burst = 1;
                while p.applied.len() < p.region {
                    let j = p.applied.len();
                    let f = if burst * self.factors[j] <= MAX_BURST { self.factors[j] } else { 1 };
                    burst *= f;
                    p.applied.push(f);
                    p.weight /= f as f64;
                    for _ in 1..f {
                        let mut q = p.clone();
                        q.confine = j + 1;
                        stack.push(q);
                    }
                }
                let hits = self.step(&mut p, rng);
                if p.region < p.confine {
                    break;
                }
                while p.applied.len() > p.region {
                    p.weight *= p.applied.pop().expect("non-empty") as f64;
                }
                if hits != 0 {
                    for (l, t) in tally.iter_mut().enumerate() {
                        if hits & (1 << l) != 0 {
                            *t += p.weight;
                        }
                    }
                }
            }
        }
        tally
    }

    /// Choose thresholds and splitting factors from pilot runs.
    ///
    /// Candidate thresholds form a geometric ladder above the smallest ε;
    /// the ones a plain pilot reaches with frequency above 1/2 are dropped.
    /// A fixed-effort pass then estimates, from resampled entrance states,
    /// the probability `p_j` of reaching region `j+1` before leaving region
    /// `j`, and sets `factors[j] ≈ 1/p_j`.
    fn plan_thresholds(&mut self, seed: u64) {
        let eps_min = self.levels.iter().map(|l| l.eps).fold(f64::INFINITY, f64::min);
        let mut g = rng::stream(seed, 0);
        let mut mins: Vec<f64> = (0..PILOT_PATHS)
            .map(|_| {
                let mut p = self.fresh();
                while p.next_node < self.nodes.len() {
                    self.step(&mut p, &mut g);
                }
                p.base_min
            })
            .collect();
        mins.sort_by(f64::total_cmp);
        let frac = |theta: f64| mins.partition_point(|&m| m <= theta) as f64 / mins.len() as f64;
        let mut th = Vec::new();
        let mut theta = eps_min * THRESHOLD_RATIO;
        while frac(theta) <= 0.5 && theta < 1e3 {
            th.push(theta);
            theta *= THRESHOLD_RATIO;
        }
        th.reverse();
        self.thresholds = th;
        let q = self.thresholds.len();
        // Entrance states of region 0.
        let mut entered: Vec<Particle> = (0..PILOT_PATHS)
            .filter_map(|_| {
                let mut p = self.fresh();
                while p.next_node < self.nodes.len() {
                    self.step(&mut p, &mut g);
                    if p.region >= 1 {
                        return Some(p);
                    }
                }
                None
            })
            .collect();
        let mut factors = Vec::with_capacity(q);
        for j in 0..q {
            if entered.is_empty() {
                factors.push(MAX_FACTOR);
                continue;
            }
            // Success: the column reaches the next region, or ε_min below
            // the last threshold, before leaving region j.
            let reached = |p: &Particle| if j + 1 < q { p.region >= j + 2 } else { p.base_min <= eps_min };
            let mut next = Vec::new();
            for i in 0..PILOT_PATHS as usize {
                let mut p = entered[i % entered.len()].clone();
                let mut ok = reached(&p);
                while !ok && p.region > j && p.next_node < self.nodes.len() {
                    self.step(&mut p, &mut g);
                    ok = reached(&p);
                }
                if ok {
                    next.push(p);
                }
            }
            let pj = next.len() as f64 / PILOT_PATHS as f64;
            factors.push(if pj > 0.0 { ((1.0 / pj).round() as usize).clamp(1, MAX_FACTOR) } else { MAX_FACTOR });
            entered = next;
        }
        self.factors = factors;
    }
}

fn validate(c: &ExperimentConfig) -> Result<()> {
    if c.dim < 3 {
        return Err(config("sheet hitting needs d ≥ 3"));
    }
    for f in std::iter::once(&c.set).chain(c.reference_set.iter()) {
        let (lo, hi) = match (f.pieces_f64().first(), f.pieces_f64().last()) {
            (Some(a), Some(b)) => (a.0, b.1),
            _ => return Err(config("set is empty")),
        };
        if lo < 1.0 || hi > 2.0 {
            return Err(config("sheet hitting needs F ⊆ [1,2]"));
        }
    }
    if c.ladder.is_empty() && c.widths.is_empty() {
        return Err(config("ε ladder is empty"));
    }
    if c.widths.iter().any(|&w| w > 1.0) {
        return Err(config("widths must be at most 1"));
    }
    Ok(())
}

/// Decay exponent of the hitting probability in ε predicted for `F`. It is
/// 0 when the profile `ε^{d-2} K_F(ε²) ∧ 1` saturates, as for intervals in
/// d < 4.
fn local_exponent(f: &CompactSet1D, d: u32) -> f64 {
    let dim = if f.is_finite() { 0.0 } else { 1.0 };
    (d as f64 - 2.0 - 2.0 * dim).max(0.0)
}

struct Plan {
    main: Design,
    reference: Option<Design>,
    widths: Vec<Design>,
    excluded: Vec<f64>,
}

fn plan(c: &ExperimentConfig) -> Result<Plan> {
    validate(c)?;
    let k = c.mesh();
    let d = c.dim as usize;
    let mut levels = Vec::new();
    let mut excluded = Vec::new();
    for &e in &c.ladder {
        match stride_for(e, k) {
            Some(m) => levels.push((e, m)),
            None => excluded.push(e),
        }
    }
    let seed = c.trial_seed();
    let mut main = Design::new(&c.set, &levels, k, d);
    main.plan_thresholds(rng::derive(seed, 1));
    let reference = c.reference_set.as_ref().map(|r| {
        let mut des = Design::new(r, &levels, k, d);
        des.plan_thresholds(rng::derive(seed, 2));
        des
    });
    let mut widths = Vec::new();
    for (i, &w) in c.widths.iter().enumerate() {
        let eps = w.sqrt();
        let f = CompactSet1D::interval(1.0, 1.0 + w)?;
        let m = stride_for(eps, k).ok_or_else(|| config(format!("mesh too coarse for width {w}")))?;
        let mut des = Design::new(&f, &[(eps, m)], k, d);
        des.plan_thresholds(rng::derive(seed, 100 + i as u64));
        widths.push(des);
    }
    Ok(Plan { main, reference, widths, excluded })
}

pub(crate) fn trials(c: &ExperimentConfig) -> Result<Vec<TrialRecord>> {
    let p = plan(c)?;
    Ok(par_trials(c, |g| {
        let mut out = p.main.run(g);
        if let Some(r) = &p.reference {
            out.extend(r.run(g));
        }
        for w in &p.widths {
            out.extend(w.run(g));
        }
        out
    }))
}

/// `ε^{d-2} K_F(ε²) ∧ 1`.
pub fn sandwich_profile(f: &CompactSet1D, d: u32, eps: f64) -> Result<f64> {
    let k = kolmogorov_count_f64(f, eps * eps)? as f64;
    Ok((eps.powi(d as i32 - 2) * k).min(1.0))
}

pub(crate) fn finalize(c: &ExperimentConfig, trials: Vec<TrialRecord>) -> Result<ExperimentReport> {
    let p = plan(c)?;
    let mut rep = ExperimentReport::new(c, trials);
    let n = rep.trials.len() as u64;
    for e in &p.excluded {
        rep.notes.push(format!("ε = {e}: mesh too coarse (cell diagonal above ε/4), excluded"));
    }
    rep.notes.push(format!("splitting thresholds {:?} with factors {:?}", p.main.thresholds, p.main.factors));
    let nl = p.main.levels.len();
    let column = |rep: &ExperimentReport, j: usize| -> Vec<f64> { rep.trials.iter().map(|t| t.values[j]).collect() };
    let series = |rep: &mut ExperimentReport, name: &str, offset: usize, params: &[f64]| {
        let mut out = Vec::new();
        for (j, &param) in params.iter().enumerate() {
            let vals = column(rep, offset + j);
            let (est, lo, hi) = stats::summarize(&vals, true);
            let (_, se) = stats::mean_se(&vals);
            rep.points.push(PointEstimate { series: name.into(), param, estimate: est, ci_lo: lo, ci_hi: hi, n_trials: n });
            out.push((param, est, se));
        }
        out
    };
    let eps: Vec<f64> = p.main.levels.iter().map(|l| l.eps).collect();
    let main = series(&mut rep, "", 0, &eps);
    let usable: Vec<&(f64, f64, f64)> = main.iter().filter(|x| x.1 > 0.0 && x.1 < 1.0).collect();
    let xs: Vec<f64> = usable.iter().map(|x| x.0).collect();
    let ys: Vec<f64> = usable.iter().map(|x| x.1).collect();
    let ses: Vec<f64> = usable.iter().map(|x| x.2).collect();
    if xs.len() >= 2 {
        let target = local_exponent(&c.set, c.dim);
        rep.checks.push(slope_check(&mut rep.fits, "slope", &xs, &ys, &ses, target, 0.2));
        let prof: Vec<f64> = xs.iter().map(|&e| sandwich_profile(&c.set, c.dim, e)).collect::<Result<_>>()?;
        if let Some(pf) = stats::line(&xs.iter().map(|x| x.ln()).collect::<Vec<_>>(), &prof.iter().map(|x| x.ln()).collect::<Vec<_>>()) {
            rep.fits.push(Fit::slope("profile_slope", &pf, None));
        }
        let c_upper = ys.iter().zip(&prof).map(|(y, q)| y / q).fold(0.0, f64::max);
        let c_lower = ys.iter().zip(&prof).map(|(y, q)| q / y).fold(0.0, f64::max);
        rep.fits.push(Fit { name: "sandwich_upper_c".into(), value: c_upper, se: 0.0, target: None });
        rep.fits.push(Fit { name: "sandwich_lower_c".into(), value: c_lower, se: 0.0, target: None });
    }
    let monotone = main.windows(2).all(|w| w[1].1 + stats::Z975 * (w[0].2 + w[1].2) >= w[0].1);
    rep.checks.push(Check::new("monotone_in_eps", monotone, "estimates non-decreasing in ε within CI".into()));

    let mut offset = nl;
    if let (Some(_), Some(rset)) = (&p.reference, &c.reference_set) {
        let refs = series(&mut rep, "reference", offset, &eps);
        offset += nl;
        let mut logs = Vec::new();
        let mut var = 0.0;
        for (a, b) in main.iter().zip(&refs) {
            if a.1 > 0.0 && b.1 > 0.0 {
                logs.push((a.1 / b.1).ln());
                var += (a.2 / a.1).powi(2) + (b.2 / b.1).powi(2);
            }
        }
        if !logs.is_empty() {
            let m = logs.len() as f64;
            let ratio = (logs.iter().sum::<f64>() / m).exp();
            let se = ratio * (var / (m * m)).sqrt();
            let e0 = eps[0];
            let target = kolmogorov_count_f64(&c.set, e0 * e0)? as f64 / kolmogorov_count_f64(rset, e0 * e0)? as f64;
            rep.fits.push(Fit { name: "level_ratio".into(), value: ratio, se, target: Some(target) });
            rep.checks.push(Check::new(
                "level_ratio",
                (ratio - target).abs() <= 1.0,
                format!("level ratio {ratio:.3} ± {se:.3} vs {target}"),
            ));
        }
    }
    if !c.widths.is_empty() {
        let ws = series(&mut rep, "width", offset, &c.widths);
        let usable: Vec<_> = ws.iter().filter(|x| x.1 > 0.0 && x.1 < 1.0).collect();
        let xs: Vec<f64> = usable.iter().map(|x| x.0).collect();
        let ys: Vec<f64> = usable.iter().map(|x| x.1).collect();
        let ses: Vec<f64> = usable.iter().map(|x| x.2).collect();
        if xs.len() >= 2 {
            let target = (c.dim as f64 - 2.0) / 2.0;
            rep.checks.push(slope_check(&mut rep.fits, "width_slope", &xs, &ys, &ses, target, 0.25 * target));
        }
    }
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn strides_follow_eps_squared() {
        assert_eq!(stride_for(0.1, 200), Some(1));
        assert_eq!(stride_for(0.2, 200), Some(4));
        assert_eq!(stride_for(0.1f64 * 8f64.sqrt(), 200), Some(8));
        assert_eq!(stride_for(0.01, 200), None);
        // Large ε: the diagonal rule caps the stride.
        let m = stride_for(10.0, 200).unwrap();
        assert!(std::f64::consts::SQRT_2 * m as f64 / 200.0 <= 10.0 / 4.0);
    }

    #[test]
    fn nodes_cover_intervals_and_points() {
        let f: CompactSet1D = "1,5/4;3/2,3/2".parse().unwrap();
        let n = s_nodes(&f, 8);
        let s: Vec<f64> = n.iter().map(|x| x.s).collect();
        assert_eq!(s, vec![1.0, 1.125, 1.25, 1.5]);
        assert!(n[3].index.is_none());
    }
}
