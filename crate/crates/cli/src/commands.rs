//! One function per subcommand. Each returns an [`Artifact`] or an error
//! together with what is known of its output location.

use std::path::{Path, PathBuf};

use serde_json::{json, Value};
use sheetslice::acceptance::{self, SandwichGrids, Scale};
use sheetslice::capkit::{self, record, Kernel};
use sheetslice::experiments::{self, ExperimentConfig, ExperimentReport, Outcome, PointEstimate};
use sheetslice::kernels::{self, EpsKernelParams, KernelLemma};
use sheetslice::randfield::{build_sheet, sample_white_noise, GridSpec};
use sheetslice::setkit::{minkowski_content, minkowski_dimension, CompactSet1D};
use sheetslice::Error;

use crate::args::{Command, HitMode, TrialArgs};
use crate::output::{failure_artifact, Artifact};

/// Exit codes: 0 pass, 1 fail, 2 usage, 3 inconclusive.
pub fn exit_code(o: Outcome) -> u8 {
    match o {
        Outcome::Pass => 0,
        Outcome::Fail => 1,
        Outcome::Inconclusive => 3,
    }
}

pub fn error_code(e: &Error) -> u8 {
    match e {
        Error::Config(_) | Error::Parse(_) | Error::Domain(_) | Error::Merge(_) => 2,
        Error::Inconclusive(_) => 3,
    }
}

/// A failed run, with the place its failure marker goes if it got that far.
pub struct Failure {
    pub error: Error,
    pub marker: Option<Artifact>,
}

impl From<Error> for Failure {
    fn from(error: Error) -> Self {
        Failure { error, marker: None }
    }
}

fn point(series: &str, param: f64, value: f64) -> PointEstimate {
    PointEstimate { series: series.into(), param, estimate: value, ci_lo: value, ci_hi: value, n_trials: 1 }
}

fn parse_set(s: &str) -> Result<CompactSet1D, Failure> {
    Ok(s.parse::<CompactSet1D>()?)
}

fn parse_grid(s: &str) -> Result<(usize, usize), Failure> {
    let bad = || Failure::from(Error::Parse(format!("grid {s:?}: expected NSxNT")));
    let (a, b) = s.split_once(['x', 'X']).ok_or_else(bad)?;
    Ok((a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?))
}

fn with_trials(mut c: ExperimentConfig, t: &TrialArgs, default: u64) -> ExperimentConfig {
    c.trials = t.trials.unwrap_or(default);
    c.trial_offset = t.trial_offset;
    c
}

/// Run an experiment; on error the failure marker goes under the config hash.
fn run_experiment(c: &ExperimentConfig) -> Result<(ExperimentReport, Artifact), Failure> {
    match experiments::run(c) {
        Ok(rep) => {
            let art = Artifact::from_report(&rep);
            Ok((rep, art))
        }
        Err(error) => {
            let params = serde_json::to_value(c).expect("config serializes");
            let marker = failure_artifact(&c.experiment, &c.hash(), params, &error.to_string());
            Err(Failure { error, marker: Some(marker) })
        }
    }
}

/// Console summary of a report.
pub fn print_report(rep: &ExperimentReport) {
    say!(
        "{} ({} trials, config {}, {:.1}s)",
        rep.experiment,
        rep.trials.len(),
        rep.config_hash,
        rep.wall_clock
    );
    for f in &rep.fits {
        match f.target {
            Some(t) => say!("  {} = {:.4} ± {:.4} (target {t:.4})", f.name, f.value, f.se),
            None => say!("  {} = {:.4} ± {:.4}", f.name, f.value, f.se),
        }
    }
    for c in &rep.checks {
        say!("  check {}: {:?}: {}", c.name, c.outcome, c.detail);
    }
    for n in &rep.notes {
        say!("  note: {n}");
    }
}

fn experiment(c: ExperimentConfig) -> Result<Artifact, Failure> {
    let (rep, art) = run_experiment(&c)?;
    print_report(&rep);
    Ok(art)
}

pub fn run(cmd: &Command) -> Result<Artifact, Failure> {
    let seed = cmd.common().seed;
    match cmd {
        Command::Simulate { grid, dim, s_max, t_max, trials, .. } => {
            let (ns, nt) = parse_grid(grid)?;
            let mut c = ExperimentConfig::new("sheet_moments", *dim, seed);
            c.grid = GridSpec::new(*s_max, *t_max, ns, nt, *dim as usize, seed)?;
            let c = with_trials(c, trials, 200);
            let (rep, mut art) = run_experiment(&c)?;
            print_report(&rep);
            let sheet = build_sheet(&sample_white_noise(&c.grid)?);
            let mut csv = String::from("s,t");
            for k in 1..=*dim {
                csv.push_str(&format!(",B{k}"));
            }
            csv.push('\n');
            for i in 0..=ns {
                for j in 0..=nt {
                    csv.push_str(&format!("{:.10e},{:.10e}", i as f64 * c.grid.ds(), j as f64 * c.grid.dt()));
                    for v in sheet.value(i, j) {
                        csv.push_str(&format!(",{v:.10e}"));
                    }
                    csv.push('\n');
                }
            }
            art.files.push(("sheet.csv".into(), csv));
            Ok(art)
        }
        Command::Capacity { set, beta, atoms, .. } => {
            let f = parse_set(set)?;
            let k = Kernel::riesz(*beta);
            let r = capkit::capacity(&f, &k, *atoms)?;
            say!(
                "capacity = {:.10e} (energy {:.10e}, {} iterations, duality gap {:.2e}, converged {})",
                r.capacity, r.energy, r.iterations, r.duality_gap, r.converged
            );
            let outcome = if r.converged { Outcome::Pass } else { Outcome::Inconclusive };
            let params = json!({ "set": set, "beta": beta, "atoms": atoms });
            let results = json!({
                "capacity": r.capacity,
                "energy": r.energy,
                "iterations": r.iterations,
                "duality_gap": r.duality_gap,
                "converged": r.converged,
            });
            let mut art = Artifact::new("capacity", params, results, vec![point("", *atoms as f64, r.capacity)], outcome);
            art.files.push(("minimizer.txt".into(), record::to_record(&k, &r.minimizer)));
            Ok(art)
        }
        Command::Dimension { set, scales, .. } => {
            let f = parse_set(set)?;
            let est = minkowski_dimension(&f, scales)?;
            let mut points = Vec::new();
            for &n in scales {
                points.push(point("", n as f64, minkowski_content(&f, n)? as f64));
            }
            say!("upper = {:.4}, lower = {:.4}, low confidence {}", est.upper, est.lower, est.low_confidence);
            let outcome = if est.low_confidence { Outcome::Inconclusive } else { Outcome::Pass };
            let params = json!({ "set": set, "scales": scales });
            Ok(Artifact::new("dimension", params, serde_json::to_value(&est).expect("json"), points, outcome))
        }
        Command::Kernels { eps, dim, x, .. } => {
            let p = EpsKernelParams::new(*eps, *dim)?;
            let mut points = Vec::new();
            for &xv in x {
                points.push(point("f", xv, kernels::f_eps(p, xv)));
                points.push(point("F", xv, kernels::big_f_eps(p, xv)));
                points.push(point("G", xv, kernels::g_eps(p, xv)));
            }
            let grids = SandwichGrids::new(Scale::Desk);
            let mut fits = Vec::new();
            let mut ok = true;
            for lemma in [KernelLemma::F, KernelLemma::G] {
                let s = kernels::fit_sandwich(lemma, *dim, &grids.fit_eps, &grids.fit_x)?;
                let (wu, wl) = s.validate(&grids.val_eps, &grids.val_x)?;
                let holds = wu <= 1.0 + kernels::SANDWICH_ROUNDING && wl <= 1.0 + kernels::SANDWICH_ROUNDING;
                ok &= holds;
                say!("{lemma:?}: c_up = {:.4}, c_low = {:.4}, validation ratios {wu:.4}, {wl:.4}", s.upper, s.lower);
                fits.push(json!({ "lemma": s.lemma, "upper": s.upper, "lower": s.lower, "validation": [wu, wl], "holds": holds }));
            }
            let params = json!({ "eps": eps, "dim": dim, "x": x });
            let outcome = if ok { Outcome::Pass } else { Outcome::Fail };
            Ok(Artifact::new("kernels", params, json!({ "sandwich": fits }), points, outcome))
        }
        Command::Hitprob { mode, dim, ladder, radius, set, reference, widths, mesh, trials, .. } => {
            let c = match mode {
                HitMode::Bm => {
                    let mut c = ExperimentConfig::new("hit_prob_bm", *dim, seed);
                    c.ladder = ladder.clone();
                    with_trials(c, trials, 10_000)
                }
                HitMode::Two => {
                    let mut c = ExperimentConfig::new("hit_prob_two_bm", *dim, seed);
                    c.ladder = ladder.clone();
                    c.radius = *radius;
                    with_trials(c, trials, 10_000)
                }
                HitMode::Sheet => {
                    let mut c = ExperimentConfig::new("hit_prob_sheet", *dim, seed).with_mesh(*mesh);
                    c.ladder = ladder.clone();
                    c.set = parse_set(set)?;
                    c.reference_set = reference.as_deref().map(parse_set).transpose()?;
                    c.widths = widths.clone();
                    with_trials(c, trials, 1_000)
                }
            };
            experiment(c)
        }
        Command::Zeros { dim, mesh, trials, .. } => {
            experiment(with_trials(ExperimentConfig::new("zero_projection_scan", *dim, seed).with_mesh(*mesh), trials, 8))
        }
        Command::Doublepoints { dim, mesh, trials, .. } => {
            experiment(with_trials(ExperimentConfig::new("double_point_scan", *dim, seed).with_mesh(*mesh), trials, 8))
        }
        Command::Goodcells { dim, k_ladder, trials, .. } => {
            let mut c = ExperimentConfig::new("good_cell_counts", *dim, seed);
            c.k_ladder = k_ladder.clone();
            experiment(with_trials(c, trials, 16))
        }
        Command::Escape { dim, alphas, epochs, substeps, set, set_nodes, trials, .. } => {
            let mut c = ExperimentConfig::new("escape_rate_probe", *dim, seed);
            c.alphas = alphas.clone();
            c.epochs = *epochs;
            c.substeps = *substeps;
            c.set = parse_set(set)?;
            c.set_nodes = *set_nodes;
            experiment(with_trials(c, trials, 32))
        }
        Command::Merge { reports, .. } => {
            let mut merged: Option<ExperimentReport> = None;
            for path in reports {
                let rep = read_report(path)?;
                merged = Some(match merged {
                    None => rep,
                    Some(acc) => experiments::merge(&acc, &rep)?,
                });
            }
            let rep = merged.expect("at least two reports");
            print_report(&rep);
            Ok(Artifact::from_report(&rep))
        }
        Command::CheckAll { desk, only, .. } => check_all(*desk, only),
    }
}

fn read_report(path: &Path) -> Result<ExperimentReport, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
    Ok(ExperimentReport::from_json(&text)?)
}

fn check_all(desk: bool, only: &[u8]) -> Result<Artifact, Failure> {
    let scale = if desk { Scale::Desk } else { Scale::Smoke };
    let ids: Vec<u8> = if only.is_empty() { (1..=13).collect() } else { only.to_vec() };
    let mut results = Vec::new();
    for id in ids {
        let r = acceptance::run_criterion(id, scale)?;
        say!("{r}");
        results.push(r);
    }
    let outcome = results.iter().map(|r| r.outcome).max().unwrap_or(Outcome::Pass);
    let points = results
        .iter()
        .map(|r| point("", r.id as f64, if r.outcome == Outcome::Pass { 1.0 } else { 0.0 }))
        .collect();
    let label = if desk { "desk" } else { "smoke" };
    let params = json!({ "scale": label, "criteria": results.iter().map(|r| r.id).collect::<Vec<_>>() });
    // Timings stay on the console so that reruns write identical files.
    let mut kept = results.clone();
    for r in &mut kept {
        r.seconds = 0.0;
    }
    let body: Value = serde_json::to_value(&kept).expect("json");
    let summary: String = kept
        .iter()
        .map(|r| {
            let parts: Vec<String> = r.parts.iter().map(|p| format!("[{}] {:?}: {}", p.label, p.outcome, p.detail)).collect();
            format!("criterion {:>2} {:?}: {} {}\n", r.id, r.outcome, r.title, parts.join(" | "))
        })
        .collect();
    let mut art = Artifact::new("check-all", params, body, points, outcome);
    art.hash = label.into();
    art.files.push(("summary.txt".into(), summary));
    Ok(art)
}

/// Write an artifact and report where it went.
pub fn persist(art: &Artifact, root: &Path, plot: bool) -> std::io::Result<PathBuf> {
    let dir = art.write(root, plot)?;
    say!("wrote {}", dir.display());
    Ok(dir)
}
