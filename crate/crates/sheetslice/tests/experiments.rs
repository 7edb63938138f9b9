use sheetslice::experiments::{self, ExperimentConfig, ExperimentReport};
use sheetslice::{stats, Error};

fn bm(trials: u64, offset: u64) -> ExperimentConfig {
    let mut c = ExperimentConfig::new("hit_prob_bm", 3, 11);
    c.ladder = vec![0.05, 0.1, 0.2];
    c.trials = trials;
    c.trial_offset = offset;
    c
}

fn two_bm() -> ExperimentConfig {
    let mut c = ExperimentConfig::new("hit_prob_two_bm", 3, 5);
    c.ladder = vec![0.2, 0.4, 0.8];
    c.radius = 0.1;
    c.substeps = 256;
    c.trials = 3000;
    c
}

/// Everything except the wall clock.
fn same(a: &ExperimentReport, b: &ExperimentReport) -> bool {
    (&a.points, &a.fits, &a.checks, &a.trials, &a.config_hash) == (&b.points, &b.fits, &b.checks, &b.trials, &b.config_hash)
}

fn with_threads(n: usize, c: &ExperimentConfig) -> ExperimentReport {
    let pool = rayon::ThreadPoolBuilder::new().num_threads(n).build().unwrap();
    pool.install(|| experiments::run(c)).unwrap()
}

#[test]
fn merging_split_runs_reproduces_the_whole_run() {
    let whole = experiments::run(&bm(900, 0)).unwrap();
    let parts: Vec<ExperimentReport> = [(0, 200), (200, 500), (700, 200)].iter().map(|&(o, n)| experiments::run(&bm(n, o)).unwrap()).collect();
    let left = experiments::merge(&experiments::merge(&parts[0], &parts[1]).unwrap(), &parts[2]).unwrap();
    let right = experiments::merge(&parts[0], &experiments::merge(&parts[1], &parts[2]).unwrap()).unwrap();
    let swapped = experiments::merge(&parts[2], &experiments::merge(&parts[1], &parts[0]).unwrap()).unwrap();
    assert!(same(&left, &whole) && same(&right, &whole) && same(&swapped, &whole));
}

#[test]
fn merge_refuses_mismatched_or_overlapping_reports() {
    let a = experiments::run(&bm(50, 0)).unwrap();
    let overlap = experiments::run(&bm(50, 25)).unwrap();
    assert!(matches!(experiments::merge(&a, &overlap), Err(Error::Merge(_))));
    let mut other = bm(50, 50);
    other.ladder = vec![0.05, 0.1, 0.3];
    let b = experiments::run(&other).unwrap();
    assert!(matches!(experiments::merge(&a, &b), Err(Error::Merge(_))));
    let zeros = experiments::run(&ExperimentConfig { trials: 2, ..ExperimentConfig::new("zero_projection_scan", 3, 11).with_mesh(32) }).unwrap();
    assert!(matches!(experiments::merge(&a, &zeros), Err(Error::Merge(_))));
}

#[test]
fn reports_do_not_depend_on_the_thread_count() {
    let mut sheet = ExperimentConfig::new("hit_prob_sheet", 3, 2).with_mesh(64);
    sheet.ladder = vec![0.2, 0.3];
    sheet.trials = 40;
    let mut cells = ExperimentConfig::new("good_cell_counts", 2, 2);
    cells.k_ladder = vec![16, 32];
    cells.trials = 6;
    for c in [bm(300, 0), two_bm(), sheet, cells] {
        let (one, many) = (with_threads(1, &c), with_threads(4, &c));
        assert!(same(&one, &many), "{}", c.experiment);
    }
}

#[test]
fn invalid_configs_are_rejected() {
    let mut c = bm(0, 0);
    assert!(matches!(experiments::run(&c), Err(Error::Config(_))));
    c.trials = 10;
    c.ladder = vec![0.2, 0.1];
    assert!(matches!(experiments::run(&c), Err(Error::Config(_))));
    let mut low = bm(10, 0);
    low.dim = 2;
    low.grid.dim = 2;
    assert!(matches!(experiments::run(&low), Err(Error::Config(_))));
    let mut rho = two_bm();
    rho.ladder = vec![0.05, 0.2];
    assert!(matches!(experiments::run(&rho), Err(Error::Config(_))), "ρ ≤ r must be rejected");
    let unknown = ExperimentConfig::new("no_such_experiment", 3, 1);
    assert!(experiments::run(&unknown).is_err());
}

#[test]
fn probabilities_stay_in_the_unit_interval_within_the_wald_bound() {
    let rep = experiments::run(&two_bm()).unwrap();
    let bm = experiments::run(&bm(2000, 0)).unwrap();
    for p in rep.points.iter().chain(&bm.points) {
        assert!((0.0..=1.0).contains(&p.estimate) && p.ci_lo >= 0.0 && p.ci_hi <= 1.0, "{p:?}");
        assert!(p.ci_lo <= p.estimate && p.estimate <= p.ci_hi, "{p:?}");
    }
    let wald = stats::Z975 / (2.0 * (rep.trials.len() as f64).sqrt());
    for p in rep.series("unconditional") {
        assert!(p.ci_hi - p.ci_lo <= 2.0 * wald + 1e-12, "{p:?}");
    }
}

#[test]
fn doubling_the_time_resolution_stays_within_the_intervals() {
    let coarse = experiments::run(&bm(4000, 0)).unwrap();
    let mut fine = bm(4000, 0);
    fine.substeps = 128;
    let fine = experiments::run(&fine).unwrap();
    for (a, b) in coarse.points.iter().zip(&fine.points) {
        let width = (a.ci_hi - a.ci_lo).max(b.ci_hi - b.ci_lo);
        assert!((a.estimate - b.estimate).abs() < width, "r = {}: {} vs {}", a.param, a.estimate, b.estimate);
    }
}

#[test]
fn sheet_hitting_grows_with_eps_and_with_the_set() {
    // d = 5 keeps the events rare, where every ε sees the same lattice in
    // Brownian units.
    let run = |set: &str| {
        let mut c = ExperimentConfig::new("hit_prob_sheet", 5, 4).with_mesh(100);
        c.ladder = vec![0.1, 0.2, 0.4];
        c.set = set.parse().unwrap();
        c.trials = 1500;
        experiments::run(&c).unwrap()
    };
    let (small, large) = (run("1.2,1.5"), run("1,2"));
    for rep in [&small, &large] {
        assert!(rep.points.windows(2).all(|w| w[0].estimate <= w[1].estimate), "{:?}", rep.points);
        assert!(rep.checks.iter().any(|c| c.name == "monotone_in_eps" && c.outcome == experiments::Outcome::Pass));
    }
    for (a, b) in small.points.iter().zip(&large.points) {
        assert!(a.estimate <= b.estimate, "ε = {}: {} vs {}", a.param, a.estimate, b.estimate);
    }
}

#[test]
fn saturated_sheet_hitting_targets_a_flat_slope() {
    // In d = 3 an interval is hit with probability bounded below.
    let mut c = ExperimentConfig::new("hit_prob_sheet", 3, 4).with_mesh(200);
    c.ladder = vec![0.1, 0.2, 0.3];
    c.trials = 400;
    let rep = experiments::run(&c).unwrap();
    assert_eq!(rep.fit("slope").and_then(|f| f.target), Some(0.0));
}
