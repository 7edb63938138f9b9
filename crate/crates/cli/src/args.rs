//! Command-line arguments and the INI config file they mirror.

use std::path::PathBuf;

use clap::{ArgAction, Args, CommandFactory, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "sheetslice", version, about = "Brownian-sheet slice experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

/// Options shared by every subcommand.
#[derive(Debug, Clone, Args)]
pub struct Common {
    /// Flat `key = value` file mirroring the flags; flags given on the
    /// command line win. Keys may also sit under a `[subcommand]` section.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Root of the `<experiment>/<config-hash>/` output tree.
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Worker threads; results do not depend on it.
    #[arg(long)]
    pub threads: Option<usize>,
    /// Also write a log-log `plot.svg`.
    #[arg(long)]
    pub plot: bool,
}

/// Trial selection for Monte Carlo subcommands.
#[derive(Debug, Clone, Args)]
pub struct TrialArgs {
    #[arg(long)]
    pub trials: Option<u64>,
    /// First trial index, for runs that are merged later.
    #[arg(long, default_value_t = 0)]
    pub trial_offset: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum HitMode {
    /// One Brownian motion, r ladder.
    Bm,
    /// Two motions, ρ ladder at fixed radius.
    Two,
    /// Brownian sheet over `F × [1,2]`, ε ladder.
    Sheet,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate sheets: one sample grid plus covariance checks.
    Simulate {
        /// Cells as `NSxNT`.
        #[arg(long, default_value = "64x64")]
        grid: String,
        #[arg(long)]
        dim: u32,
        #[arg(long, default_value_t = 1.0)]
        s_max: f64,
        #[arg(long, default_value_t = 1.0)]
        t_max: f64,
        #[command(flatten)]
        trials: TrialArgs,
        #[command(flatten)]
        common: Common,
    },
    /// Riesz capacity of a set.
    Capacity {
        /// Set as `a,b;c;…` (intervals and points).
        #[arg(long)]
        set: String,
        #[arg(long)]
        beta: f64,
        #[arg(long, default_value_t = 1024)]
        atoms: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Minkowski content and box-counting dimension of a set.
    Dimension {
        #[arg(long)]
        set: String,
        /// Grid sizes n of the content counts.
        #[arg(long, value_delimiter = ',', default_value = "16,32,64,128,256,512,1024,2048,4096")]
        scales: Vec<u64>,
        #[command(flatten)]
        common: Common,
    },
    /// The ε-kernels at a list of points, with fitted sandwich constants.
    Kernels {
        #[arg(long)]
        eps: f64,
        #[arg(long)]
        dim: u32,
        #[arg(long, value_delimiter = ',', default_value = "0.001,0.01,0.1,1")]
        x: Vec<f64>,
        #[command(flatten)]
        common: Common,
    },
    /// Hitting probabilities.
    Hitprob {
        #[arg(long, value_enum, default_value = "bm")]
        mode: HitMode,
        #[arg(long)]
        dim: u32,
        #[arg(long, value_delimiter = ',', required = true)]
        ladder: Vec<f64>,
        /// Ball radius of the two-motion mode.
        #[arg(long, default_value_t = 0.1)]
        radius: f64,
        #[arg(long, default_value = "1,2")]
        set: String,
        /// Comparison set for the level ratio (sheet mode).
        #[arg(long)]
        reference: Option<String>,
        /// Interval widths for the width series (sheet mode).
        #[arg(long, value_delimiter = ',')]
        widths: Vec<f64>,
        /// Cells per unit length of the sheet lattice.
        #[arg(long, default_value_t = 200)]
        mesh: usize,
        #[command(flatten)]
        trials: TrialArgs,
        #[command(flatten)]
        common: Common,
    },
    /// Box dimension of the columns whose slice comes near 0.
    Zeros {
        #[arg(long)]
        dim: u32,
        #[arg(long, default_value_t = 512)]
        mesh: usize,
        #[command(flatten)]
        trials: TrialArgs,
        #[command(flatten)]
        common: Common,
    },
    /// Box dimension of the double-point columns.
    Doublepoints {
        #[arg(long)]
        dim: u32,
        #[arg(long, default_value_t = 128)]
        mesh: usize,
        #[command(flatten)]
        trials: TrialArgs,
        #[command(flatten)]
        common: Common,
    },
    /// Normalized maximal good-cell counts along a k ladder.
    Goodcells {
        #[arg(long)]
        dim: u32,
        #[arg(long, value_delimiter = ',', default_value = "64,128,256,512")]
        k_ladder: Vec<u64>,
        #[command(flatten)]
        trials: TrialArgs,
        #[command(flatten)]
        common: Common,
    },
    /// Escape-rate trends along an α ladder.
    Escape {
        #[arg(long)]
        dim: u32,
        #[arg(long, value_delimiter = ',', required = true)]
        alphas: Vec<f64>,
        #[arg(long, default_value_t = 255)]
        epochs: u32,
        #[arg(long, default_value_t = 0)]
        substeps: u32,
        #[arg(long, default_value = "1,2")]
        set: String,
        /// s-nodes of the set mode; 0 runs the fixed-s probe only.
        #[arg(long, default_value_t = 0)]
        set_nodes: u32,
        #[command(flatten)]
        trials: TrialArgs,
        #[command(flatten)]
        common: Common,
    },
    /// Pool saved `report.json` files of the same experiment and config.
    Merge {
        #[arg(required = true, num_args = 2..)]
        reports: Vec<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Run the acceptance suite.
    CheckAll {
        /// Full sample sizes; without it every criterion runs on tiny inputs.
        #[arg(long)]
        desk: bool,
        /// Criteria to run, by number.
        #[arg(long, value_delimiter = ',')]
        only: Vec<u8>,
        #[command(flatten)]
        common: Common,
    },
}

impl Command {
    pub fn common(&self) -> &Common {
        match self {
            Command::Simulate { common, .. }
            | Command::Capacity { common, .. }
            | Command::Dimension { common, .. }
            | Command::Kernels { common, .. }
            | Command::Hitprob { common, .. }
            | Command::Zeros { common, .. }
            | Command::Doublepoints { common, .. }
            | Command::Goodcells { common, .. }
            | Command::Escape { common, .. }
            | Command::Merge { common, .. }
            | Command::CheckAll { common, .. } => common,
        }
    }
}

fn usage(msg: String) -> clap::Error {
    Cli::command().error(clap::error::ErrorKind::ValueValidation, msg)
}

/// Position of the subcommand name in `argv`.
fn subcommand_index(argv: &[String]) -> Option<usize> {
    argv.iter().skip(1).position(|a| !a.starts_with('-')).map(|i| i + 1)
}

fn flag_value<'a>(argv: &'a [String], long: &str) -> Option<&'a str> {
    let flag = format!("--{long}");
    let prefix = format!("--{long}=");
    argv.iter().enumerate().find_map(|(i, a)| {
        if *a == flag {
            argv.get(i + 1).map(String::as_str)
        } else {
            a.strip_prefix(&prefix)
        }
    })
}

fn has_flag(argv: &[String], long: &str) -> bool {
    let flag = format!("--{long}");
    let prefix = format!("--{long}=");
    argv.iter().any(|a| *a == flag || a.starts_with(&prefix))
}

/// Append the config file's entries for flags not given on the command
/// line. Keys of the general section apply to every subcommand; keys under
/// `[<subcommand>]` override them.
pub fn merge_config(mut argv: Vec<String>) -> Result<Vec<String>, clap::Error> {
    let Some(path) = flag_value(&argv, "config").map(PathBuf::from) else {
        return Ok(argv);
    };
    let Some(sub_at) = subcommand_index(&argv) else {
        return Ok(argv);
    };
    let sub_name = argv[sub_at].clone();
    let text = std::fs::read_to_string(&path).map_err(|e| usage(format!("cannot read config {}: {e}", path.display())))?;
    let ini = ini::Ini::load_from_str(&text).map_err(|e| usage(format!("config {}: {e}", path.display())))?;
    let cmd = Cli::command();
    let sub = cmd.find_subcommand(&sub_name).ok_or_else(|| usage(format!("unknown subcommand {sub_name}")))?;

    let mut entries: Vec<(String, String)> = Vec::new();
    for section in [None, Some(sub_name.as_str())] {
        if let Some(props) = ini.section(section) {
            for (k, v) in props.iter() {
                let key = k.trim().replace('_', "-");
                entries.retain(|(old, _)| *old != key);
                entries.push((key, v.trim().to_string()));
            }
        }
    }
    for (key, value) in entries {
        if key == "config" || has_flag(&argv, &key) {
            continue;
        }
        let arg = sub
            .get_arguments()
            .find(|a| a.get_long() == Some(key.as_str()))
            .ok_or_else(|| usage(format!("config key {key:?} is not an option of {sub_name}")))?;
        if matches!(arg.get_action(), ArgAction::SetTrue) {
            match value.as_str() {
                "true" | "yes" | "1" | "on" => argv.push(format!("--{key}")),
                "false" | "no" | "0" | "off" => {}
                other => return Err(usage(format!("config key {key:?}: expected a boolean, got {other:?}"))),
            }
        } else {
            argv.push(format!("--{key}"));
            argv.push(value);
        }
    }
    Ok(argv)
}

pub fn parse(argv: Vec<String>) -> Result<Cli, clap::Error> {
    Cli::try_parse_from(merge_config(argv)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn argv(s: &str) -> Vec<String> {
        s.split_whitespace().map(String::from).collect()
    }

    #[test]
    fn simulate_parses() {
        let cli = parse(argv("sheetslice simulate --grid 256x256 --dim 3 --seed 7")).unwrap();
        match cli.command {
            Command::Simulate { grid, dim, common, .. } => {
                assert_eq!((grid.as_str(), dim, common.seed), ("256x256", 3, 7));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn missing_dim_is_a_usage_error() {
        let e = parse(argv("sheetslice simulate --grid 8x8")).unwrap_err();
        assert_eq!(e.exit_code(), 2);
    }

    #[test]
    fn flag_wins_over_config() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.ini");
        std::fs::write(&path, "seed = 3\ndim = 2\n[simulate]\ngrid = 16x16\nplot = true\n").unwrap();
        let line = format!("sheetslice simulate --config {} --seed 9", path.display());
        let cli = parse(argv(&line)).unwrap();
        match cli.command {
            Command::Simulate { grid, dim, common, .. } => {
                assert_eq!((grid.as_str(), dim, common.seed, common.plot), ("16x16", 2, 9, true));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn unknown_config_key_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.ini");
        std::fs::write(&path, "dimm = 2\n").unwrap();
        let line = format!("sheetslice zeros --config {}", path.display());
        assert_eq!(parse(argv(&line)).unwrap_err().exit_code(), 2);
    }
}
