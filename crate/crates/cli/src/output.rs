//! On-disk layout `out/<experiment>/<config-hash>/` and the SVG plot.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde_json::{json, Value};
use sha2::{Digest, Sha256};
use sheetslice::experiments::{self, points_csv, ExperimentReport, Outcome, PointEstimate};

/// Everything one command writes.
pub struct Artifact {
    pub experiment: String,
    pub hash: String,
    pub points: Vec<PointEstimate>,
    pub header: Value,
    /// Extra files placed next to the report, by name.
    pub files: Vec<(String, String)>,
    pub outcome: Outcome,
}

/// First 8 bytes of the SHA-256 of the JSON text, in hex.
pub fn hash_value(v: &Value) -> String {
    let digest = Sha256::digest(v.to_string().as_bytes());
    digest.iter().take(8).map(|b| format!("{b:02x}")).collect()
}

fn outcome_str(o: Outcome) -> &'static str {
    match o {
        Outcome::Pass => "pass",
        Outcome::Fail => "fail",
        Outcome::Inconclusive => "inconclusive",
    }
}

impl Artifact {
    /// A report of a non-experiment command, hashed on its parameters.
    pub fn new(experiment: &str, params: Value, results: Value, points: Vec<PointEstimate>, outcome: Outcome) -> Self {
        let hash = hash_value(&json!({ "experiment": experiment, "params": params }));
        let header = json!({
            "experiment": experiment,
            "config_hash": hash,
            "params": params,
            "policies": experiments::policies(),
            "results": results,
            "outcome": outcome_str(outcome),
        });
        Artifact { experiment: experiment.into(), hash, points, header, files: Vec::new(), outcome }
    }

    /// The persisted copy has its wall clock zeroed so that reruns write
    /// identical bytes; the time is printed instead.
    pub fn from_report(rep: &ExperimentReport) -> Self {
        let mut rep = rep.clone();
        rep.wall_clock = 0.0;
        let header: Value = serde_json::from_str(&rep.header_json()).expect("header is JSON");
        Artifact {
            experiment: rep.experiment.clone(),
            hash: rep.config_hash.clone(),
            points: rep.points.clone(),
            header,
            files: vec![("report.json".into(), rep.to_json())],
            outcome: rep.outcome(),
        }
    }

    pub fn dir(&self, root: &Path) -> PathBuf {
        root.join(&self.experiment).join(&self.hash)
    }

    /// Write the report, its header and any extra files, plus the plot when
    /// asked for. Returns the directory.
    pub fn write(&self, root: &Path, plot: bool) -> std::io::Result<PathBuf> {
        let dir = self.dir(root);
        std::fs::create_dir_all(&dir)?;
        std::fs::write(dir.join("report.csv"), points_csv(&self.points))?;
        let header = serde_json::to_string_pretty(&self.header).expect("json");
        std::fs::write(dir.join("header.json"), header + "\n")?;
        for (name, body) in &self.files {
            std::fs::write(dir.join(name), body)?;
        }
        if plot {
            if let Some(svg) = loglog_svg(&self.experiment, &self.points) {
                std::fs::write(dir.join("plot.svg"), svg)?;
            }
        }
        Ok(dir)
    }
}

/// The marker written when a run stops with an error after its output
/// directory is known.
pub fn failure_artifact(experiment: &str, hash: &str, params: Value, error: &str) -> Artifact {
    let header = json!({
        "experiment": experiment,
        "config_hash": hash,
        "params": params,
        "policies": experiments::policies(),
        "status": "failed",
        "error": error,
    });
    Artifact {
        experiment: experiment.into(),
        hash: hash.into(),
        points: Vec::new(),
        header,
        files: Vec::new(),
        outcome: Outcome::Fail,
    }
}

const W: f64 = 640.0;
const H: f64 = 420.0;
const MARGIN: f64 = 60.0;
const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

/// Log-log scatter of every series with positive values, with CI bars.
/// `None` when nothing is plottable.
pub fn loglog_svg(title: &str, points: &[PointEstimate]) -> Option<String> {
    let usable: Vec<&PointEstimate> = points.iter().filter(|p| p.param > 0.0 && p.estimate > 0.0).collect();
    if usable.len() < 2 {
        return None;
    }
    let lx = |x: f64| x.log10();
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for p in &usable {
        x0 = x0.min(lx(p.param));
        x1 = x1.max(lx(p.param));
        y0 = y0.min(lx(p.estimate.min(p.ci_lo.max(p.estimate * 1e-3))));
        y1 = y1.max(lx(p.ci_hi.max(p.estimate)));
    }
    let pad = |a: f64, b: f64| if b - a < 1e-9 { (a - 0.5, b + 0.5) } else { (a - 0.05 * (b - a), b + 0.05 * (b - a)) };
    let ((x0, x1), (y0, y1)) = (pad(x0, x1), pad(y0, y1));
    let sx = |x: f64| MARGIN + (lx(x) - x0) / (x1 - x0) * (W - 2.0 * MARGIN);
    let sy = |y: f64| H - MARGIN - (lx(y) - y0) / (y1 - y0) * (H - 2.0 * MARGIN);

    let mut svg = String::new();
    let _ = writeln!(svg, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" font-family="sans-serif" font-size="12">"#);
    let _ = writeln!(svg, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(svg, r#"<text x="{}" y="24" text-anchor="middle" font-size="14">{}</text>"#, W / 2.0, escape(title));
    let _ = writeln!(
        svg,
        r#"<rect x="{MARGIN}" y="{MARGIN}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        W - 2.0 * MARGIN,
        H - 2.0 * MARGIN
    );
    for (v, anchor_x) in [(x0, true), (x1, true), (y0, false), (y1, false)] {
        let label = format!("{:.3e}", 10f64.powf(v));
        if anchor_x {
            let _ = writeln!(svg, r#"<text x="{:.1}" y="{}" text-anchor="middle">{label}</text>"#, sx(10f64.powf(v)), H - MARGIN + 18.0);
        } else {
            let _ = writeln!(svg, r#"<text x="{}" y="{:.1}" text-anchor="end">{label}</text>"#, MARGIN - 4.0, sy(10f64.powf(v)));
        }
    }
    let mut series: Vec<&str> = usable.iter().map(|p| p.series.as_str()).collect();
    series.dedup();
    series.sort_unstable();
    series.dedup();
    for (k, name) in series.iter().enumerate() {
        let color = COLORS[k % COLORS.len()];
        let label = if name.is_empty() { "main" } else { name };
        let _ = writeln!(svg, r#"<text x="{}" y="{}" fill="{color}">{}</text>"#, W - MARGIN + 4.0, MARGIN + 14.0 * k as f64 + 10.0, escape(label));
        for p in usable.iter().filter(|p| p.series == *name) {
            let (x, y) = (sx(p.param), sy(p.estimate));
            if p.ci_lo > 0.0 && p.ci_hi > p.ci_lo {
                let _ = writeln!(svg, r#"<line x1="{x:.1}" y1="{:.1}" x2="{x:.1}" y2="{:.1}" stroke="{color}"/>"#, sy(p.ci_lo), sy(p.ci_hi));
            }
            let _ = writeln!(svg, r#"<circle cx="{x:.1}" cy="{y:.1}" r="3" fill="{color}"/>"#);
        }
    }
    svg.push_str("</svg>\n");
    Some(svg)
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
