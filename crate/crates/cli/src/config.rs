//! Experiment configuration: a TOML file with every field defaulted, plus
//! command-line overrides applied on top.

use std::path::{Path, PathBuf};

use gks_rom::initial::{fixed_ic, sample_initial_condition, InitialConditionSpec, TRAINING_MODES};
use gks_rom::rom::{DeimSize, RankRule};
use gks_rom::snapshots::{training_set, trajectory_seed, DEFAULT_TOTAL_SNAPSHOTS};
use gks_rom::{Clock, GksParams, Grid, Strategy, TrainingPlan};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::CliError;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub equation: EquationConfig,
    pub solver: SolverConfig,
    pub initial: InitialConfig,
    pub plan: PlanConfig,
    pub rom: RomConfig,
    pub metrics: MetricsConfig,
    pub output: OutputConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EquationConfig {
    pub gamma: f64,
    pub length: f64,
    pub points: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    pub dt: f64,
    /// Snapshot spacing.
    pub record_every: f64,
    pub total_time: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InitialConfig {
    /// `random`, or one of the fixed sets `sample`, `ic1`, `ic2`.
    pub kind: String,
    /// Mode count `J` for random initial conditions.
    pub modes: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StrategyKind {
    Single,
    MultiTrajectory,
    MultiParameter,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PlanConfig {
    pub strategy: StrategyKind,
    /// Parameter for the single- and multi-trajectory strategies.
    pub gamma: f64,
    /// `W` for the multi-trajectory strategy.
    pub trajectories: usize,
    /// Built-in parameter set (`G1`..`G4`) for the multi-parameter strategy.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub set: Option<String>,
    /// Explicit parameter list, used when `set` is absent.
    pub gammas: Vec<f64>,
    pub total_snapshots: usize,
    pub ic_modes: usize,
    pub base_seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RankRuleKind {
    /// Tail sums of singular values against `threshold`.
    Cumulative,
    /// Tail sums of squared singular values against `threshold`.
    Energy,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RomConfig {
    pub threshold: f64,
    pub rank_rule: RankRuleKind,
    pub deim: bool,
    /// DEIM dimension; the POD rank when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub deim_size: Option<usize>,
    /// Size DEIM by applying the rank rule to the nonlinear-term spectrum.
    pub deim_from_spectrum: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RomVariantMode {
    Galerkin,
    Deim,
}

/// One reduced model in a prediction-time study: either a stored basis or
/// a training plan to build it from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StudyRom {
    pub id: String,
    #[serde(default = "default_study_mode")]
    pub mode: RomVariantMode,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub basis: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub plan: Option<PlanConfig>,
}

fn default_study_mode() -> RomVariantMode {
    RomVariantMode::Galerkin
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MetricsConfig {
    pub tolerance: f64,
    /// Mode counts `J` of the test initial conditions.
    pub ic_modes: Vec<usize>,
    pub num_ics: usize,
    pub gammas: Vec<f64>,
    pub horizon: f64,
    pub roms: Vec<StudyRom>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dir: Option<PathBuf>,
}

impl Default for EquationConfig {
    fn default() -> Self {
        EquationConfig { gamma: 0.0, length: 60.0, points: 256 }
    }
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig { dt: 1e-3, record_every: 0.5, total_time: 10_000.0 }
    }
}

impl Default for InitialConfig {
    fn default() -> Self {
        InitialConfig { kind: "random".into(), modes: TRAINING_MODES }
    }
}

impl Default for PlanConfig {
    fn default() -> Self {
        PlanConfig {
            strategy: StrategyKind::Single,
            gamma: 0.0,
            trajectories: 1,
            set: None,
            gammas: Vec::new(),
            total_snapshots: DEFAULT_TOTAL_SNAPSHOTS,
            ic_modes: TRAINING_MODES,
            base_seed: 0,
        }
    }
}

impl Default for RomConfig {
    fn default() -> Self {
        RomConfig { threshold: 1e-2, rank_rule: RankRuleKind::Cumulative, deim: true, deim_size: None, deim_from_spectrum: false }
    }
}

impl Default for MetricsConfig {
    fn default() -> Self {
        let plan = |strategy, gamma, trajectories, set: Option<&str>| PlanConfig {
            strategy,
            gamma,
            trajectories,
            set: set.map(str::to_string),
            ..PlanConfig::default()
        };
        let rom = |id: &str, p| StudyRom { id: id.into(), mode: RomVariantMode::Galerkin, basis: None, plan: Some(p) };
        MetricsConfig {
            tolerance: 0.1,
            ic_modes: vec![3, 8, 22],
            num_ics: 3,
            gammas: vec![0.0],
            horizon: 300.0,
            roms: vec![
                rom("ROM1", plan(StrategyKind::Single, 0.0, 1, None)),
                rom("ROM2", plan(StrategyKind::MultiTrajectory, 5.0, 250, None)),
                rom("ROM3", plan(StrategyKind::MultiParameter, 0.0, 1, Some("G4"))),
            ],
        }
    }
}

fn field(path: &str, message: impl std::fmt::Display) -> CliError {
    CliError::Validation(format!("{path}: {message}"))
}

impl PlanConfig {
    pub fn strategy(&self, path: &str) -> Result<Strategy, CliError> {
        Ok(match self.strategy {
            StrategyKind::Single => Strategy::SingleTrajectory { gamma: self.gamma },
            StrategyKind::MultiTrajectory => Strategy::MultiTrajectory { gamma: self.gamma, trajectories: self.trajectories },
            StrategyKind::MultiParameter => {
                let gammas = match &self.set {
                    Some(name) => training_set(name).map_err(|e| field(&format!("{path}.set"), e))?,
                    None => self.gammas.clone(),
                };
                Strategy::MultiParameter { gammas }
            }
        })
    }

    pub fn training_plan(&self, solver: &SolverConfig, path: &str) -> Result<TrainingPlan, CliError> {
        let plan = TrainingPlan {
            strategy: self.strategy(path)?,
            total_snapshots: self.total_snapshots,
            record_every: solver.record_every,
            dt: solver.dt,
            ic_modes: self.ic_modes,
            base_seed: self.base_seed,
        };
        plan.validate().map_err(|e| field(path, e))?;
        Ok(plan)
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Validation(format!("config: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Io(format!("reading {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    /// Canonical serialization; parsing it back yields an equal config.
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// SHA-256 of the canonical serialization, hex encoded.
    pub fn hash(&self) -> String {
        Sha256::digest(self.to_toml().as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn grid(&self) -> Result<Grid, CliError> {
        Grid::new(self.equation.points, self.equation.length).map_err(|e| field("equation", e))
    }

    pub fn params(&self) -> Result<GksParams, CliError> {
        GksParams::new(self.equation.gamma, self.grid()?).map_err(|e| field("equation.gamma", e))
    }

    pub fn clock(&self) -> Result<Clock, CliError> {
        Clock::new(self.solver.total_time, self.solver.dt, self.solver.record_every).map_err(|e| field("solver", e))
    }

    pub fn rank_rule(&self) -> RankRule {
        match self.rom.rank_rule {
            RankRuleKind::Cumulative => RankRule::CumulativeSigma { threshold: self.rom.threshold },
            RankRuleKind::Energy => RankRule::EnergyTail { epsilon: self.rom.threshold },
        }
    }

    pub fn deim_size(&self) -> DeimSize {
        match (self.rom.deim, self.rom.deim_size) {
            (false, _) => DeimSize::None,
            (true, Some(n)) => DeimSize::Fixed(n),
            (true, None) if self.rom.deim_from_spectrum => DeimSize::Threshold,
            (true, None) => DeimSize::MatchRank,
        }
    }

    /// Initial condition of a single simulation. Random draws use the same
    /// seed as the first trajectory of a campaign with this `base_seed`.
    pub fn initial_condition(&self) -> Result<InitialConditionSpec, CliError> {
        match self.initial.kind.as_str() {
            "random" => sample_initial_condition(self.initial.modes, trajectory_seed(self.plan.base_seed, 0, 0))
                .map_err(|e| field("initial.modes", e)),
            name => fixed_ic(name)
                .map(|ic| ic.spec())
                .ok_or_else(|| field("initial.kind", format!("unknown initial condition {name:?}"))),
        }
    }

    /// Checks every field, reporting the first problem with its path.
    pub fn validate(&self) -> Result<(), CliError> {
        self.params()?;
        if !(self.solver.dt.is_finite() && self.solver.dt > 0.0) {
            return Err(field("solver.dt", format!("must be positive, got {}", self.solver.dt)));
        }
        if !(self.solver.record_every.is_finite() && self.solver.record_every > 0.0) {
            return Err(field("solver.record_every", format!("must be positive, got {}", self.solver.record_every)));
        }
        let steps = (self.solver.record_every / self.solver.dt).round();
        if steps < 1.0 || (steps * self.solver.dt - self.solver.record_every).abs() > 1e-12 * self.solver.record_every {
            return Err(field(
                "solver.record_every",
                format!("{} is not an integer multiple of solver.dt = {}", self.solver.record_every, self.solver.dt),
            ));
        }
        if !(self.solver.total_time.is_finite() && self.solver.total_time >= 0.0) {
            return Err(field("solver.total_time", format!("must be nonnegative, got {}", self.solver.total_time)));
        }
        self.initial_condition()?;
        self.plan.training_plan(&self.solver, "plan")?;
        self.rank_rule().validate().map_err(|e| field("rom.threshold", e))?;
        if self.rom.deim_size == Some(0) {
            return Err(field("rom.deim_size", "must be positive"));
        }
        if self.rom.deim_size.is_some() && self.rom.deim_from_spectrum {
            return Err(field("rom.deim_from_spectrum", "conflicts with rom.deim_size"));
        }
        let m = &self.metrics;
        if !(m.tolerance.is_finite() && m.tolerance > 0.0) {
            return Err(field("metrics.tolerance", format!("must be positive, got {}", m.tolerance)));
        }
        if m.num_ics == 0 {
            return Err(field("metrics.num_ics", "must be positive"));
        }
        if m.ic_modes.contains(&0) {
            return Err(field("metrics.ic_modes", "mode counts must be positive"));
        }
        if let Some(g) = m.gammas.iter().find(|g| !g.is_finite()) {
            return Err(field("metrics.gammas", format!("must be finite, got {g}")));
        }
        if !(m.horizon.is_finite() && m.horizon > 0.0) {
            return Err(field("metrics.horizon", format!("must be positive, got {}", m.horizon)));
        }
        for (i, rom) in m.roms.iter().enumerate() {
            let path = format!("metrics.roms[{i}]");
            match (&rom.basis, &rom.plan) {
                (Some(_), None) => {}
                (None, Some(plan)) => {
                    plan.training_plan(&self.solver, &format!("{path}.plan"))?;
                }
                _ => return Err(field(&path, "give exactly one of `basis` or `plan`")),
            }
        }
        Ok(())
    }
}
