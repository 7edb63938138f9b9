//! The desk-scale acceptance suite.
//!
//! Thirteen criteria, each a mix of exact checks, closed-form oracles and
//! Monte Carlo trend fits. [`Scale::Desk`] uses the full sample sizes and
//! tolerances; [`Scale::Smoke`] runs the same code on tiny inputs, which is
//! only useful to exercise the plumbing.

use std::fmt;
use std::time::Instant;

use num_bigint::BigInt;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::capkit::{capacity, energy, projection_theorem_check, DiscreteMeasure, Kernel};
use crate::error::Result;
use crate::experiments::{self, ExperimentConfig, ExperimentReport, Outcome};
use crate::kernels::{self, EpsKernelParams, KernelLemma};
use crate::randfield::{build_sheet, sample_white_noise, GridSpec};
use crate::setkit::{check_entropy_content, check_entropy_doubling, upsilon, CompactSet1D, Convergence, PsiFunction, Q};
use crate::{rng, stats};

/// Master seed of the suite.
pub const SEED: u64 = 1;

pub const TITLES: [&str; 13] = [
    "covariance law",
    "entropy and content inequalities",
    "kernel sandwiches",
    "energy oracle",
    "capacity trend for riesz(1)",
    "projection theorem",
    "Brownian motion hitting exponent",
    "sheet hitting sandwich",
    "zero-set projection dimension",
    "good-cell growth",
    "double-point dimension",
    "escape classifier",
    "determinism across thread counts",
];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Scale {
    Desk,
    Smoke,
}

impl Scale {
    fn pick<T>(self, desk: T, smoke: T) -> T {
        match self {
            Scale::Desk => desk,
            Scale::Smoke => smoke,
        }
    }
}

/// One sub-check of a criterion.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Part {
    pub label: String,
    pub outcome: Outcome,
    pub detail: String,
}

impl Part {
    fn new(label: impl Into<String>, pass: bool, detail: String) -> Self {
        Part { label: label.into(), outcome: if pass { Outcome::Pass } else { Outcome::Fail }, detail }
    }

    /// Worst check of a report, with the report's check details.
    fn from_report(label: impl Into<String>, rep: &ExperimentReport) -> Self {
        let detail = rep.checks.iter().map(|c| format!("{} {:?}: {}", c.name, c.outcome, c.detail)).collect::<Vec<_>>();
        Part { label: label.into(), outcome: rep.outcome(), detail: detail.join("; ") }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CriterionResult {
    pub id: u8,
    pub title: String,
    pub outcome: Outcome,
    pub parts: Vec<Part>,
    pub seconds: f64,
}

impl fmt::Display for CriterionResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = match self.outcome {
            Outcome::Pass => "PASS",
            Outcome::Fail => "FAIL",
            Outcome::Inconclusive => "INCONCLUSIVE",
        };
        let parts: Vec<String> = self.parts.iter().map(|p| format!("[{}] {}", p.label, p.detail)).collect();
        write!(f, "criterion {:>2} {tag}: {} ({:.1}s) {}", self.id, self.title, self.seconds, parts.join(" | "))
    }
}

/// Run criterion `id` (1 to 13).
pub fn run_criterion(id: u8, scale: Scale) -> Result<CriterionResult> {
    let start = Instant::now();
    let parts = match id {
        1 => covariance(scale)?,
        2 => entropy(scale)?,
        3 => kernel_sandwiches(scale)?,
        4 => energy_oracle(scale)?,
        5 => capacity_trend(scale)?,
        6 => projection(scale)?,
        7 => bm_hitting(scale)?,
        8 => sheet_hitting(scale)?,
        9 => zero_set(scale)?,
        10 => good_cells(scale)?,
        11 => double_points(scale)?,
        12 => escape(scale)?,
        13 => determinism(scale)?,
        _ => return Err(crate::error::config(format!("no acceptance criterion {id}"))),
    };
    Ok(CriterionResult {
        id,
        title: TITLES[id as usize - 1].into(),
        outcome: parts.iter().map(|p| p.outcome).max().unwrap_or(Outcome::Pass),
        parts,
        seconds: start.elapsed().as_secs_f64(),
    })
}

/// Random finite union of intervals and points with rational endpoints in
/// `[0, 4]` and denominators up to 64.
pub fn random_set<R: Rng + ?Sized>(g: &mut R) -> CompactSet1D {
    let pieces = g.random_range(1..=4);
    let mut out = Vec::with_capacity(pieces);
    for _ in 0..pieces {
        let q: i64 = g.random_range(1..=64);
        let a: i64 = g.random_range(0..=4 * q);
        let b = if g.random_bool(0.25) { a } else { g.random_range(a..=4 * q) };
        out.push((Q::new(BigInt::from(a), BigInt::from(q)), Q::new(BigInt::from(b), BigInt::from(q))));
    }
    CompactSet1D::new(out).expect("ordered endpoints")
}

fn covariance(scale: Scale) -> Result<Vec<Part>> {
    const N: usize = 32;
    const PAIRS: usize = 20;
    let sheets = scale.pick(10_000, 300);
    let mut g = rng::stream(SEED, 1);
    let pairs: Vec<[usize; 6]> = (0..PAIRS)
        .map(|p| {
            let c1 = g.random_range(0..2);
            // Every other pair shares the coordinate, so both branches of δ are tested.
            let c2 = if p % 2 == 0 { c1 } else { g.random_range(0..2) };
            [g.random_range(1..=N), g.random_range(1..=N), c1, g.random_range(1..=N), g.random_range(1..=N), c2]
        })
        .collect();
    let mut sums = vec![(0.0, 0.0); PAIRS];
    for k in 0..sheets {
        let spec = GridSpec::unit(N, 2, rng::derive(SEED, k))?;
        let sheet = build_sheet(&sample_white_noise(&spec)?);
        for (p, &[i1, j1, c1, i2, j2, c2]) in pairs.iter().enumerate() {
            let xy = sheet.value(i1, j1)[c1] * sheet.value(i2, j2)[c2];
            sums[p].0 += xy;
            sums[p].1 += xy * xy;
        }
    }
    let n = sheets as f64;
    let h = 1.0 / N as f64;
    let mut worst: f64 = 0.0;
    for (p, &[i1, j1, c1, i2, j2, c2]) in pairs.iter().enumerate() {
        let target = if c1 == c2 { (i1.min(i2) as f64 * h) * (j1.min(j2) as f64 * h) } else { 0.0 };
        let mean = sums[p].0 / n;
        let se = ((sums[p].1 / n - mean * mean).max(0.0) / n).sqrt();
        worst = worst.max((mean - target).abs() / se);
    }
    Ok(vec![Part::new(
        "cov",
        worst < 5.0,
        format!("{sheets} sheets on {N}×{N}, {PAIRS} pairs: max |Cov − min·min·δ| = {worst:.2} standard errors"),
    )])
}

fn entropy(scale: Scale) -> Result<Vec<Part>> {
    let sets = scale.pick(1000, 50);
    let mut g = rng::stream(SEED, 2);
    let (mut content_bad, mut doubling_bad) = (0usize, 0usize);
    for _ in 0..sets {
        let f = random_set(&mut g);
        for _ in 0..10 {
            let n: u64 = g.random_range(2..=1024);
            content_bad += usize::from(!check_entropy_content(&f, n)?);
            let eps = Q::new(BigInt::from(g.random_range(1..=8u64)), BigInt::from(n));
            doubling_bad += usize::from(!check_entropy_doubling(&f, &eps)?);
        }
    }
    let checks = sets * 10;
    Ok(vec![
        Part::new("content", content_bad == 0, format!("K ≤ M ≤ 3K failed in {content_bad} of {checks}")),
        Part::new("doubling", doubling_bad == 0, format!("K(ε) ≤ 6K(2ε) failed in {doubling_bad} of {checks}")),
    ])
}

fn dyadic(exps: &[f64]) -> Vec<f64> {
    exps.iter().map(|&k| 2f64.powf(-k)).collect()
}

/// `n` geometric points from `a` to `b`, shifted by `shift` steps.
fn geometric(a: f64, b: f64, n: usize, shift: f64) -> Vec<f64> {
    let r = (b / a).ln() / (n - 1) as f64;
    (0..n).map(|i| a * ((i as f64 + shift) * r).exp()).filter(|&x| x <= b).collect()
}

/// Fitting and validation grids of the kernel sandwiches: dyadic ε and
/// geometric x in `[1e-6, 2]`, interleaved between the two.
#[derive(Clone, Debug, PartialEq)]
pub struct SandwichGrids {
    pub fit_eps: Vec<f64>,
    pub val_eps: Vec<f64>,
    pub fit_x: Vec<f64>,
    pub val_x: Vec<f64>,
}

impl SandwichGrids {
    pub fn new(scale: Scale) -> Self {
        let n = scale.pick(41, 9);
        SandwichGrids {
            fit_eps: dyadic(&[1.0, 2.0, 3.0, 4.0, 5.0, 6.0]),
            val_eps: dyadic(&[1.5, 2.5, 3.5, 4.5, 5.5]),
            fit_x: geometric(1e-6, 2.0, n, 0.0),
            val_x: geometric(1e-6, 2.0, n, 0.5),
        }
    }
}

fn kernel_sandwiches(scale: Scale) -> Result<Vec<Part>> {
    let mut parts = Vec::new();
    let grids = SandwichGrids::new(scale);
    let ball_trials = scale.pick(1_000_000, 20_000);
    let ratios = [0.5, 1.0, 2.0];
    let mut g = rng::stream(SEED, 3);

    for d in [3u32, 4, 5] {
        // Small-ball probabilities: upper bound f_ε(σ²) and one fitted lower constant.
        let ball = |eps: &[f64], salt: u64| -> Result<Vec<(f64, kernels::BallProb)>> {
            let mut out = Vec::new();
            for (a, &e) in eps.iter().enumerate() {
                for (b, &r) in ratios.iter().enumerate() {
                    let sigma = e / r;
                    let f = kernels::f_eps(EpsKernelParams::new(e, d)?, sigma * sigma);
                    let seed = rng::derive(SEED, (salt << 16) | ((d as u64) << 8) | ((a as u64) << 4) | b as u64);
                    out.push((f, kernels::gaussian_ball_prob(sigma, e, d, ball_trials, seed)?));
                }
            }
            Ok(out)
        };
        let fit = ball(&dyadic(&[1.0, 3.0]), 1)?;
        let val = ball(&dyadic(&[2.0, 4.0]), 2)?;
        let c = fit.iter().map(|(f, p)| p.estimate / f).fold(f64::INFINITY, f64::min);
        let upper_ok = fit.iter().chain(&val).all(|(f, p)| p.estimate <= f + 5.0 * p.se);
        let lower_ok = c > 0.0 && val.iter().all(|(f, p)| p.estimate + 5.0 * p.se >= c * f);
        parts.push(Part::new(
            format!("ball d={d}"),
            upper_ok && lower_ok,
            format!("P ≤ f_ε(σ²) + 5se: {upper_ok}; fitted c = {c:.4e}, validation c·f ≤ P + 5se: {lower_ok}"),
        ));

        for lemma in [KernelLemma::F, KernelLemma::G] {
            let s = kernels::fit_sandwich(lemma, d, &grids.fit_eps, &grids.fit_x)?;
            let (wu, wl) = s.validate(&grids.val_eps, &grids.val_x)?;
            let spread = |v: &[f64]| v.iter().copied().fold(0.0, f64::max) / v.iter().copied().fold(f64::INFINITY, f64::min);
            parts.push(Part::new(
                format!("{lemma:?} d={d}"),
                wu <= 1.0 + kernels::SANDWICH_ROUNDING && wl <= 1.0 + kernels::SANDWICH_ROUNDING,
                format!(
                    "c_up = {:.4}, c_low = {:.4} (per-ε spread {:.3}, {:.3}); validation ratios {wu:.4}, {wl:.4}",
                    s.upper,
                    s.lower,
                    spread(&s.upper_by_eps),
                    spread(&s.lower_by_eps)
                ),
            ));
        }

        let avg_ok = dyadic(&[1.0, 2.0, 3.0, 4.0]).iter().all(|&e| {
            let p = EpsKernelParams::new(e, d).expect("positive ε");
            [0.01, 0.1, 1.0].iter().all(|&x| kernels::g_eps(p, x) >= kernels::half_double_length_average(p, x))
        });
        parts.push(Part::new(format!("G average d={d}"), avg_ok, format!("G_ε(x) ≥ ½∫₀²F_ε(x+y)dy at all points: {avg_ok}")));
    }

    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let p = EpsKernelParams::new(g.random_range(0.01..2.0), g.random_range(1..=6))?;
        let x = g.random_range(0.0..3.0);
        let (a, b) = (kernels::big_f_eps(p, x), kernels::big_f_by_quadrature(p, x));
        worst = worst.max((a - b).abs() / a.abs().max(f64::MIN_POSITIVE));
    }
    parts.push(Part::new("F closed form", worst <= 1e-9, format!("max relative gap to quadrature over 100 points {worst:.2e}")));
    Ok(parts)
}

fn midpoints(n: usize) -> Vec<f64> {
    (0..n).map(|i| (i as f64 + 0.5) / n as f64).collect()
}

fn energy_oracle(scale: Scale) -> Result<Vec<Part>> {
    let n = scale.pick(4096, 512);
    let e = energy(&DiscreteMeasure::uniform(1, midpoints(n))?, &Kernel::riesz(0.5));
    let target = 8.0 / 3.0;
    let rel = (e - target).abs() / target;
    Ok(vec![Part::new("energy", rel < 0.01, format!("{n} atoms: I = {e:.5}, relative error {rel:.4} vs 8/3"))])
}

fn capacity_trend(scale: Scale) -> Result<Vec<Part>> {
    let top = scale.pick(12, 7);
    let unit = CompactSet1D::interval(0.0, 1.0)?;
    let mut caps = Vec::new();
    for j in 5..=top {
        caps.push(capacity(&unit, &Kernel::riesz(1.0), 1 << j)?.capacity);
    }
    let decreasing = caps.windows(2).all(|w| w[1] < w[0]);
    let last = *caps.last().expect("non-empty");
    Ok(vec![Part::new(
        "cap",
        decreasing && last < 0.25,
        format!("caps at 2^5..2^{top}: {}; monotone {decreasing}, last {last:.4} < 0.25", fmt_list(&caps)),
    )])
}

fn projection(scale: Scale) -> Result<Vec<Part>> {
    let atoms = scale.pick(64, 16);
    let mut parts = Vec::new();
    for (name, f) in [("[1,2]", CompactSet1D::interval(1.0, 2.0)?), ("[1,1.5]∪[2,2.5]", "1,1.5;2,2.5".parse()?)] {
        let c = projection_theorem_check(&f, &Kernel::riesz(1.5), 1, atoms)?;
        parts.push(Part::new(
            name,
            c.relative_gap < 0.1,
            format!(
                "Cap([0,1]×F) = {:.4}, Cap_Π(F) = {:.4}, gap {:.3} at {atoms} per axis",
                c.product_capacity, c.projected_capacity, c.relative_gap
            ),
        ));
    }
    Ok(parts)
}

fn bm_hitting(scale: Scale) -> Result<Vec<Part>> {
    let paths = scale.pick(100_000, 2_000);
    let ladder = [0.02, 0.04, 0.08, 0.12, 0.2];
    let mut parts = Vec::new();
    for d in [3, 5] {
        let rep = experiments::hit_prob_bm(d, &ladder, paths, SEED)?;
        parts.push(Part::from_report(format!("d={d}"), &rep));
    }
    Ok(parts)
}

fn sheet_hitting(scale: Scale) -> Result<Vec<Part>> {
    let mut c5 = ExperimentConfig::new("hit_prob_sheet", 5, SEED).with_mesh(scale.pick(200, 50));
    c5.ladder = scale.pick(vec![0.1, 0.1414, 0.2, 0.2828], vec![0.4, 0.5657, 0.8]);
    c5.trials = scale.pick(12_000, 50);
    let mut c3 = ExperimentConfig::new("hit_prob_sheet", 3, SEED).with_mesh(scale.pick(800, 100));
    c3.ladder = scale.pick(vec![0.05, 0.0707, 0.1, 0.1414], vec![0.2, 0.2828, 0.4]);
    c3.set = "1;1.3;1.6;1.9".parse()?;
    c3.reference_set = Some("1.5".parse()?);
    c3.trials = scale.pick(100_000, 200);
    Ok(vec![
        Part::from_report("d=5 F=[1,2]", &experiments::hit_prob_sheet(&c5)?),
        Part::from_report("d=3 four points", &experiments::hit_prob_sheet(&c3)?),
    ])
}

/// Average the per-level mean box counts over seeds, then fit; standard
/// errors come from the seed-to-seed spread.
fn pooled_zero_dimension(d: u32, mesh: usize, seeds: u64, sheets: u64, tol: f64) -> Result<Part> {
    let mut per_seed: Vec<Vec<(f64, f64)>> = Vec::new();
    for s in 0..seeds {
        let mut c = ExperimentConfig::new("zero_projection_scan", d, SEED + s).with_mesh(mesh);
        c.trials = sheets;
        let rep = experiments::zero_projection_scan(&c)?;
        per_seed.push(rep.series("").iter().map(|p| (p.param, p.estimate)).collect());
    }
    let levels: Vec<f64> = per_seed[0].iter().map(|x| x.0).collect();
    let (mut xs, mut ys, mut ses) = (Vec::new(), Vec::new(), Vec::new());
    for (j, &k) in levels.iter().enumerate() {
        let vals: Vec<f64> = per_seed.iter().map(|v| v[j].1).collect();
        let (m, se) = stats::mean_se(&vals);
        if m > 0.0 {
            xs.push(k);
            ys.push(m);
            ses.push(se.max(1e-3 * m));
        }
    }
    let target = experiments::zero_set_dimension(d);
    let label = format!("d={d} {mesh}²");
    Ok(match stats::loglog_fit(&xs, &ys, &ses) {
        Some(fit) => Part::new(
            label,
            (fit.slope - target).abs() <= tol,
            format!(
                "{seeds} seeds × {sheets} sheets: dimension {:.3} ± {:.3}, target {target:.2} ± {tol}",
                fit.slope, fit.slope_se
            ),
        ),
        None => Part { label, outcome: Outcome::Inconclusive, detail: "fewer than two levels with marked boxes".into() },
    })
}

fn zero_set(scale: Scale) -> Result<Vec<Part>> {
    let (seeds, sheets) = scale.pick((8, 8), (2, 2));
    Ok(vec![
        pooled_zero_dimension(2, scale.pick(2048, 128), seeds, sheets, 0.1)?,
        pooled_zero_dimension(3, scale.pick(4096, 128), seeds, sheets, 0.15)?,
    ])
}

fn good_cells(scale: Scale) -> Result<Vec<Part>> {
    let ladder = scale.pick(vec![256, 512, 1024, 2048, 4096], vec![64, 128]);
    let mut parts = Vec::new();
    // The column maximum is heavy tailed, and more so as d grows.
    for (d, trials) in [(1, 32), (2, 64), (3, 256)] {
        let mut c = ExperimentConfig::new("good_cell_counts", d, SEED);
        c.k_ladder = ladder.clone();
        c.trials = scale.pick(trials, 2);
        let rep = experiments::good_cell_counts(&c)?;
        parts.push(Part::from_report(format!("d={d}"), &rep));
    }
    Ok(parts)
}

fn double_points(scale: Scale) -> Result<Vec<Part>> {
    let mut parts = Vec::new();
    for d in [4, 5] {
        let mut c = ExperimentConfig::new("double_point_scan", d, SEED).with_mesh(scale.pick(512, 32));
        c.trials = scale.pick(64, 2);
        let rep = experiments::double_point_scan(&c)?;
        parts.push(Part::from_report(format!("d={d}"), &rep));
    }
    Ok(parts)
}

/// Smallest α at which `Υ_F(ψ_α)` is classified infinite, by bisection.
fn upsilon_threshold(f: &CompactSet1D, d: u32) -> Result<f64> {
    let finite = |a: f64| -> Result<bool> {
        Ok(upsilon(f, &PsiFunction::psi_alpha(a)?, d, 1e4)?.class == Convergence::Finite)
    };
    let (mut lo, mut hi) = (1e-3, 64.0);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if finite(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(hi)
}

fn escape(scale: Scale) -> Result<Vec<Part>> {
    let mut parts = Vec::new();
    let cases = [("interval", CompactSet1D::interval(1.0, 2.0)?, 1.0), ("singleton", CompactSet1D::point(1.5)?, 0.0)];
    for d in [5u32, 6, 7] {
        for (name, f, dim) in &cases {
            let expect = d as f64 - 2.0 - 2.0 * dim;
            let got = upsilon_threshold(f, d)?;
            let at = upsilon(f, &PsiFunction::psi_alpha(expect)?, d, 1e4)?.class;
            parts.push(Part::new(
                format!("Υ {name} d={d}"),
                (got - expect).abs() < 1e-9 && at == Convergence::Infinite,
                format!("threshold {got:.10}, expected {expect}; class at the threshold {at:?}"),
            ));
        }
    }
    let mut c = ExperimentConfig::new("escape_rate_probe", 5, SEED);
    c.alphas = vec![1.0, 7.0];
    c.epochs = scale.pick(1023, 63);
    c.trials = scale.pick(64, 4);
    parts.push(Part::from_report("probe d=5", &experiments::escape_rate_probe(&c)?));
    Ok(parts)
}

/// Small configurations of every experiment, for the determinism check.
pub fn reduced_configs() -> Vec<ExperimentConfig> {
    let mut out = Vec::new();
    let mut c = ExperimentConfig::new("sheet_moments", 2, SEED);
    c.grid = GridSpec::unit(8, 2, SEED).expect("valid grid");
    c.trials = 16;
    out.push(c);
    let mut c = ExperimentConfig::new("hit_prob_bm", 3, SEED);
    c.ladder = vec![0.05, 0.1, 0.2];
    c.trials = 64;
    out.push(c);
    let mut c = ExperimentConfig::new("hit_prob_two_bm", 3, SEED);
    c.ladder = vec![0.5, 1.0];
    c.radius = 0.1;
    c.trials = 64;
    out.push(c);
    let mut c = ExperimentConfig::new("hit_prob_sheet", 3, SEED).with_mesh(50);
    c.ladder = vec![0.3, 0.4];
    c.trials = 24;
    out.push(c);
    let mut c = ExperimentConfig::new("zero_projection_scan", 3, SEED).with_mesh(32);
    c.trials = 4;
    out.push(c);
    let mut c = ExperimentConfig::new("good_cell_counts", 2, SEED);
    c.k_ladder = vec![16, 32];
    c.trials = 4;
    out.push(c);
    let mut c = ExperimentConfig::new("double_point_scan", 4, SEED).with_mesh(16);
    c.trials = 4;
    out.push(c);
    let mut c = ExperimentConfig::new("escape_rate_probe", 5, SEED);
    c.alphas = vec![1.0, 7.0];
    c.epochs = 15;
    c.trials = 4;
    out.push(c);
    out
}

/// Every serialized form of a report run on a pool of `threads` threads.
pub fn report_bytes_with_threads(c: &ExperimentConfig, threads: usize) -> Result<String> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| crate::error::config(format!("thread pool: {e}")))?;
    let rep = pool.install(|| experiments::run(c))?;
    Ok(format!("{}\n{}\n{}", rep.to_csv(), rep.header_json(), rep.to_json()))
}

fn determinism(scale: Scale) -> Result<Vec<Part>> {
    let _ = scale;
    let mut parts = Vec::new();
    for c in reduced_configs() {
        let same = report_bytes_with_threads(&c, 1)? == report_bytes_with_threads(&c, 8)?;
        parts.push(Part::new(c.experiment.clone(), same, format!("1 vs 8 threads byte-identical: {same}")));
    }
    Ok(parts)
}

fn fmt_list(v: &[f64]) -> String {
    v.iter().map(|x| format!("{x:.4}")).collect::<Vec<_>>().join(", ")
}
