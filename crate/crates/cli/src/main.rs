//! `gksrom`: simulate the generalized Kuramoto-Sivashinsky equation, build
//! POD and POD-DEIM reduced models, and evaluate them.

mod commands;
mod config;
mod error;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::config::{ExperimentConfig, RankRuleKind, StrategyKind};
use crate::error::CliError;

/// Default output directory when neither `--out` nor `output.dir` is set.
pub const OUT_DIR_ENV: &str = "GKS_OUT_DIR";

#[derive(Parser, Debug)]
#[command(name = "gksrom", version, about = "Reduced-order modelling workbench for the gKS equation")]
struct Cli {
    #[command(flatten)]
    overrides: Overrides,
    #[command(subcommand)]
    command: Command,
}

/// Flags that override configuration file values.
#[derive(Args, Debug, Default)]
struct Overrides {
    /// TOML experiment configuration; omitted fields take default values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (falls back to `output.dir`, then $GKS_OUT_DIR, then `gks-out`).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    gamma: Option<f64>,
    #[arg(long, global = true)]
    length: Option<f64>,
    #[arg(long, global = true)]
    points: Option<usize>,
    #[arg(long, global = true)]
    dt: Option<f64>,
    #[arg(long, global = true)]
    record_every: Option<f64>,
    #[arg(long, global = true)]
    total_time: Option<f64>,
    /// Initial condition: `random`, `sample`, `ic1` or `ic2`.
    #[arg(long, global = true)]
    ic: Option<String>,
    #[arg(long, global = true)]
    ic_modes: Option<usize>,
    #[arg(long, global = true, value_enum)]
    strategy: Option<StrategyArg>,
    /// Parameter of single- and multi-trajectory plans.
    #[arg(long, global = true, allow_hyphen_values = true)]
    plan_gamma: Option<f64>,
    #[arg(long, global = true)]
    trajectories: Option<usize>,
    /// Built-in parameter set for multi-parameter plans (`G1`..`G4`).
    #[arg(long, global = true)]
    set: Option<String>,
    #[arg(long, global = true, value_delimiter = ',', allow_hyphen_values = true)]
    gammas: Option<Vec<f64>>,
    #[arg(long, global = true)]
    total_snapshots: Option<usize>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    threshold: Option<f64>,
    #[arg(long, global = true, value_enum)]
    rank_rule: Option<RankRuleArg>,
    #[arg(long, global = true)]
    no_deim: bool,
    #[arg(long, global = true)]
    deim_size: Option<usize>,
    /// Choose the DEIM dimension with the rank rule on the nonlinear-term spectrum.
    #[arg(long, global = true)]
    deim_from_spectrum: bool,
    #[arg(long, global = true)]
    tol: Option<f64>,
    #[arg(long, global = true)]
    horizon: Option<f64>,
    #[arg(long, global = true)]
    num_ics: Option<usize>,
    #[arg(long, global = true, value_delimiter = ',', allow_hyphen_values = true)]
    study_gammas: Option<Vec<f64>>,
    #[arg(long, global = true, value_delimiter = ',')]
    study_modes: Option<Vec<usize>>,
    /// Run trajectory-level work on the calling thread only.
    #[arg(long, global = true)]
    sequential: bool,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum StrategyArg {
    Single,
    MultiTrajectory,
    MultiParameter,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum RankRuleArg {
    Cumulative,
    Energy,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum RunMode {
    Galerkin,
    Deim,
    /// Identity basis (r = M) Galerkin model; needs no basis file.
    FullRank,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Integrate the full-order model and write a trajectory file.
    Simulate {
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Run a training campaign and write state and nonlinear-term snapshot files.
    Campaign,
    /// Build a POD basis (and DEIM operator) from snapshot files.
    BuildRom {
        /// State snapshot file written by `campaign`.
        #[arg(long, required_unless_present = "sweep_lengths")]
        snapshots: Option<PathBuf>,
        /// Nonlinear-term snapshot file; required unless DEIM is disabled.
        #[arg(long)]
        forcing: Option<PathBuf>,
        /// Instead of reading snapshots, run the plan at each domain length
        /// (grid spacing held fixed) and tabulate the selected rank.
        #[arg(long, value_delimiter = ',')]
        sweep_lengths: Option<Vec<f64>>,
    },
    /// Integrate a reduced model and write its lifted trajectory.
    RunRom {
        /// Basis file from `build-rom`; not used in full-rank mode.
        #[arg(long)]
        basis: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "galerkin")]
        mode: RunMode,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Relative error series and prediction time of one trajectory against another.
    Compare {
        #[arg(long)]
        rom: PathBuf,
        #[arg(long)]
        fom: PathBuf,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Time-averaged power spectrum of a trajectory.
    Spectra {
        #[arg(long)]
        trajectory: PathBuf,
        /// Averaging window `t0,t1`; the whole trajectory by default.
        #[arg(long, value_delimiter = ',')]
        window: Option<Vec<f64>>,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Averaged prediction times over a grid of parameters, mode counts and models.
    PredtimeStudy,
}

impl Overrides {
    fn apply(&self, c: &mut ExperimentConfig) {
        macro_rules! set {
            ($src:expr => $dst:expr) => {
                if let Some(v) = $src.clone() {
                    $dst = v;
                }
            };
        }
        set!(self.gamma => c.equation.gamma);
        set!(self.length => c.equation.length);
        set!(self.points => c.equation.points);
        set!(self.dt => c.solver.dt);
        set!(self.record_every => c.solver.record_every);
        set!(self.total_time => c.solver.total_time);
        set!(self.ic => c.initial.kind);
        set!(self.ic_modes => c.initial.modes);
        set!(self.plan_gamma => c.plan.gamma);
        set!(self.trajectories => c.plan.trajectories);
        set!(self.gammas => c.plan.gammas);
        set!(self.total_snapshots => c.plan.total_snapshots);
        set!(self.seed => c.plan.base_seed);
        set!(self.threshold => c.rom.threshold);
        set!(self.tol => c.metrics.tolerance);
        set!(self.horizon => c.metrics.horizon);
        set!(self.num_ics => c.metrics.num_ics);
        set!(self.study_gammas => c.metrics.gammas);
        set!(self.study_modes => c.metrics.ic_modes);
        if let Some(s) = self.strategy {
            c.plan.strategy = match s {
                StrategyArg::Single => StrategyKind::Single,
                StrategyArg::MultiTrajectory => StrategyKind::MultiTrajectory,
                StrategyArg::MultiParameter => StrategyKind::MultiParameter,
            };
        }
        if self.set.is_some() {
            c.plan.set = self.set.clone();
        } else if self.gammas.is_some() {
            c.plan.set = None;
        }
        if let Some(r) = self.rank_rule {
            c.rom.rank_rule = match r {
                RankRuleArg::Cumulative => RankRuleKind::Cumulative,
                RankRuleArg::Energy => RankRuleKind::Energy,
            };
        }
        if self.no_deim {
            c.rom.deim = false;
        }
        if self.deim_size.is_some() {
            c.rom.deim_size = self.deim_size;
        }
        if self.deim_from_spectrum {
            c.rom.deim_from_spectrum = true;
        }
    }
}

fn effective_config(o: &Overrides) -> Result<ExperimentConfig, CliError> {
    let mut config = match &o.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    o.apply(&mut config);
    config.validate()?;
    Ok(config)
}

fn run(cli: Cli) -> Result<(), CliError> {
    let config = effective_config(&cli.overrides)?;
    // `--out` is not written into the saved config so reruns elsewhere hash identically
    let out_dir = cli
        .overrides
        .out
        .clone()
        .or_else(|| config.output.dir.clone())
        .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("gks-out"));
    let ctx = commands::Context {
        execution: if cli.overrides.sequential { gks_rom::Execution::Sequential } else { gks_rom::Execution::Parallel },
        config,
        out_dir,
    };
    match cli.command {
        Command::Simulate { output } => commands::simulate(&ctx, output),
        Command::Campaign => commands::campaign(&ctx),
        Command::BuildRom { snapshots, forcing, sweep_lengths } => match sweep_lengths {
            Some(lengths) => commands::rank_sweep(&ctx, &lengths),
            None => commands::build_rom(&ctx, snapshots.expect("required by clap"), forcing),
        },
        Command::RunRom { basis, mode, output } => commands::run_rom(&ctx, basis, mode, output),
        Command::Compare { rom, fom, output } => commands::compare(&ctx, &rom, &fom, output),
        Command::Spectra { trajectory, window, output } => {
            let window = match window.as_deref() {
                None => None,
                Some(&[t0, t1]) => Some((t0, t1)),
                Some(_) => return Err(CliError::Validation("--window takes exactly two values t0,t1".into())),
            };
            commands::spectra(&ctx, &trajectory, window, output)
        }
        Command::PredtimeStudy => commands::predtime_study(&ctx),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_win_over_file_values() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.toml");
        std::fs::write(&path, "[equation]\ngamma = 0.7\nlength = 30.0\n").unwrap();
        let cli = Cli::try_parse_from(["gksrom", "--config", path.to_str().unwrap(), "simulate", "--gamma", "3"]).unwrap();
        let c = effective_config(&cli.overrides).unwrap();
        assert_eq!(c.equation.gamma, 3.0);
        assert_eq!(c.equation.length, 30.0);
    }

    #[test]
    fn gamma_list_replaces_named_set() {
        let cli = Cli::try_parse_from([
            "gksrom",
            "campaign",
            "--strategy",
            "multi-parameter",
            "--gammas",
            "0,0.5",
            "--total-snapshots",
            "10",
        ])
        .unwrap();
        let c = effective_config(&cli.overrides).unwrap();
        assert_eq!(c.plan.gammas, vec![0.0, 0.5]);
        assert!(c.plan.set.is_none());
    }
}
