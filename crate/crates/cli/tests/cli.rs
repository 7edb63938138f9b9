use std::path::Path;
use std::process::{Command, Output};

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sheetslice"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn only_subdir(dir: &Path) -> std::path::PathBuf {
    let mut entries: Vec<_> = std::fs::read_dir(dir).unwrap().map(|e| e.unwrap().path()).collect();
    assert_eq!(entries.len(), 1, "{entries:?}");
    entries.pop().unwrap()
}

fn read_tree(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in std::fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                out.push((p.strip_prefix(dir).unwrap().display().to_string(), std::fs::read(&p).unwrap()));
            }
        }
    }
    out.sort();
    out
}

#[test]
fn missing_dim_exits_with_usage_code() {
    let tmp = tempfile::tempdir().unwrap();
    let o = run(tmp.path(), &["simulate", "--grid", "8x8"]);
    assert_eq!(code(&o), 2);
    assert!(!tmp.path().join("out").exists());
}

#[test]
fn unknown_subcommand_is_a_usage_error() {
    let tmp = tempfile::tempdir().unwrap();
    assert_eq!(code(&run(tmp.path(), &["frobnicate"])), 2);
}

#[test]
fn unreadable_config_is_a_usage_error() {
    let tmp = tempfile::tempdir().unwrap();
    assert_eq!(code(&run(tmp.path(), &["zeros", "--dim", "3", "--config", "nope.ini"])), 2);
}

#[test]
fn capacity_writes_report_header_and_minimizer() {
    let tmp = tempfile::tempdir().unwrap();
    let o = run(tmp.path(), &["capacity", "--set", "1,2", "--beta", "0.5", "--atoms", "128"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(String::from_utf8_lossy(&o.stdout).contains("capacity = "));
    let dir = only_subdir(&tmp.path().join("out/capacity"));
    for f in ["report.csv", "header.json", "minimizer.txt"] {
        assert!(dir.join(f).is_file(), "{f}");
    }
    let header: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.join("header.json")).unwrap()).unwrap();
    assert_eq!(header["config_hash"].as_str().unwrap(), dir.file_name().unwrap().to_str().unwrap());
    assert!(header["policies"].as_object().is_some_and(|p| !p.is_empty()));
}

#[test]
fn rerun_overwrites_byte_identically() {
    let tmp = tempfile::tempdir().unwrap();
    let args = ["hitprob", "--dim", "3", "--ladder", "0.05,0.1,0.2", "--trials", "200", "--plot"];
    run(tmp.path(), &args);
    let first = read_tree(&tmp.path().join("out"));
    let o = run(tmp.path(), &[&args[..], &["--threads", "1"]].concat());
    assert!(matches!(code(&o), 0 | 1));
    assert_eq!(first, read_tree(&tmp.path().join("out")));
    assert!(first.iter().any(|(name, _)| name.ends_with("plot.svg")));
}

#[test]
fn invalid_ladder_leaves_a_failure_marker() {
    let tmp = tempfile::tempdir().unwrap();
    let o = run(tmp.path(), &["hitprob", "--dim", "3", "--ladder", "0.2,0.1", "--trials", "10"]);
    assert_eq!(code(&o), 2);
    let dir = only_subdir(&tmp.path().join("out/hit_prob_bm"));
    let header = std::fs::read_to_string(dir.join("header.json")).unwrap();
    assert!(header.contains("\"status\": \"failed\""), "{header}");
}

#[test]
fn failing_check_exits_with_one() {
    // Two sheets at a coarse mesh see no double points: the dimension
    // check fails.
    let tmp = tempfile::tempdir().unwrap();
    let o = run(tmp.path(), &["doublepoints", "--dim", "5", "--mesh", "32", "--trials", "2"]);
    assert_eq!(code(&o), 1);
}

#[test]
fn low_confidence_dimension_is_inconclusive() {
    let tmp = tempfile::tempdir().unwrap();
    // A short interval inside one cell at every scale gives flat counts.
    let o = run(tmp.path(), &["dimension", "--set", "0.1,0.1001", "--scales", "2,4,8"]);
    assert_eq!(code(&o), 3, "{}", String::from_utf8_lossy(&o.stdout));
}

#[test]
fn config_file_values_apply_and_flags_win() {
    let tmp = tempfile::tempdir().unwrap();
    std::fs::write(tmp.path().join("run.ini"), "seed = 3\nout = from_file\n[simulate]\ndim = 2\ngrid = 8x8\ntrials = 5\n").unwrap();
    let o = run(tmp.path(), &["simulate", "--config", "run.ini", "--seed", "9"]);
    assert!(matches!(code(&o), 0 | 1), "{}", String::from_utf8_lossy(&o.stderr));
    let dir = only_subdir(&tmp.path().join("from_file/sheet_moments"));
    let header = std::fs::read_to_string(dir.join("header.json")).unwrap();
    let v: serde_json::Value = serde_json::from_str(&header).unwrap();
    assert_eq!(v["seed"], 9);
    assert_eq!(v["config"]["dim"], 2);
    assert!(dir.join("sheet.csv").is_file());
}

#[test]
fn merge_pools_split_runs_and_refuses_overlap() {
    let tmp = tempfile::tempdir().unwrap();
    let base = ["hitprob", "--dim", "3", "--ladder", "0.1,0.2", "--trials", "100"];
    run(tmp.path(), &[&base[..], &["--out", "a"]].concat());
    run(tmp.path(), &[&base[..], &["--out", "b", "--trial-offset", "100"]].concat());
    let mut whole = base.to_vec();
    whole[6] = "200";
    run(tmp.path(), &[&whole[..], &["--out", "w"]].concat());
    let ra = only_subdir(&tmp.path().join("a/hit_prob_bm")).join("report.json");
    let rb = only_subdir(&tmp.path().join("b/hit_prob_bm")).join("report.json");
    let (ra, rb) = (ra.to_str().unwrap(), rb.to_str().unwrap());
    let o = run(tmp.path(), &["merge", ra, rb, "--out", "m"]);
    assert!(matches!(code(&o), 0 | 1));
    let csv = |root: &str| std::fs::read(only_subdir(&tmp.path().join(root).join("hit_prob_bm")).join("report.csv")).unwrap();
    assert_eq!(csv("m"), csv("w"));
    assert_eq!(code(&run(tmp.path(), &["merge", ra, ra, "--out", "m2"])), 2);
}

#[test]
fn check_all_smoke_subset() {
    let tmp = tempfile::tempdir().unwrap();
    let o = run(tmp.path(), &["check-all", "--only", "2,13"]);
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert_eq!(code(&o), 0, "{stdout}");
    assert!(stdout.contains("criterion  2 PASS") && stdout.contains("criterion 13 PASS"), "{stdout}");
    let summary = std::fs::read_to_string(tmp.path().join("out/check-all/smoke/summary.txt")).unwrap();
    assert_eq!(summary.lines().count(), 2);
}
