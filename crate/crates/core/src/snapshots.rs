//! Training campaigns: full-order runs sampled into snapshot matrices.

use std::collections::BTreeMap;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::grid::{GksParams, Grid};
use crate::initial::{sample_initial_condition, TRAINING_MODES};
use crate::nonlinear::nonlinear_term_into;
use crate::simulate::{Clock, FullOrderModel, DEFAULT_DT, DEFAULT_RECORD_EVERY};
use crate::solver::Dynamics;

pub const DEFAULT_TOTAL_SNAPSHOTS: usize = 20_000;

/// How the `N*` snapshot budget is split across parameters and trajectories.
#[derive(Debug, Clone, PartialEq)]
pub enum Strategy {
    /// One long trajectory at a single `gamma`.
    SingleTrajectory { gamma: f64 },
    /// `W` shorter trajectories from independent initial conditions.
    MultiTrajectory { gamma: f64, trajectories: usize },
    /// One trajectory per listed `gamma`.
    MultiParameter { gammas: Vec<f64> },
}

impl Strategy {
    pub fn gammas(&self) -> Vec<f64> {
        match self {
            Strategy::SingleTrajectory { gamma } | Strategy::MultiTrajectory { gamma, .. } => vec![*gamma],
            Strategy::MultiParameter { gammas } => gammas.clone(),
        }
    }

    pub fn trajectories_per_gamma(&self) -> usize {
        match self {
            Strategy::MultiTrajectory { trajectories, .. } => *trajectories,
            _ => 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainingPlan {
    pub strategy: Strategy,
    pub total_snapshots: usize,
    pub record_every: f64,
    pub dt: f64,
    pub ic_modes: usize,
    pub base_seed: u64,
}

impl TrainingPlan {
    pub fn new(strategy: Strategy) -> Self {
        TrainingPlan {
            strategy,
            total_snapshots: DEFAULT_TOTAL_SNAPSHOTS,
            record_every: DEFAULT_RECORD_EVERY,
            dt: DEFAULT_DT,
            ic_modes: TRAINING_MODES,
            base_seed: 0,
        }
    }

    pub fn with_total_snapshots(mut self, n: usize) -> Self {
        self.total_snapshots = n;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.base_seed = seed;
        self
    }

    /// Number of trajectories, `K * W`.
    pub fn num_trajectories(&self) -> usize {
        self.strategy.gammas().len() * self.strategy.trajectories_per_gamma()
    }

    /// Snapshots recorded on each trajectory.
    pub fn snapshots_per_trajectory(&self) -> usize {
        self.total_snapshots / self.num_trajectories().max(1)
    }

    pub fn validate(&self) -> Result<()> {
        let gammas = self.strategy.gammas();
        if gammas.is_empty() {
            return Err(Error::invalid("plan needs at least one gamma"));
        }
        if let Some(g) = gammas.iter().find(|g| !g.is_finite()) {
            return Err(Error::invalid(format!("gamma must be finite, got {g}")));
        }
        if self.strategy.trajectories_per_gamma() == 0 {
            return Err(Error::invalid("trajectory count W must be positive"));
        }
        if self.total_snapshots == 0 {
            return Err(Error::invalid("total snapshot count must be positive"));
        }
        if self.ic_modes == 0 {
            return Err(Error::invalid("initial conditions need at least one mode"));
        }
        let n = self.num_trajectories();
        if !self.total_snapshots.is_multiple_of(n) {
            return Err(Error::invalid(format!(
                "{} trajectories do not divide {} snapshots",
                n, self.total_snapshots
            )));
        }
        self.clock()?;
        Ok(())
    }

    pub fn clock(&self) -> Result<Clock> {
        let n = self.snapshots_per_trajectory();
        Clock::new(n as f64 * self.record_every, self.dt, self.record_every)
    }
}

/// Seed for trajectory `w` at parameter index `k`.
pub fn trajectory_seed(base_seed: u64, k: usize, w: usize) -> u64 {
    // splitmix64 finalizer over the packed (k, w) pair
    let mut z = ((k as u64) << 32 | w as u64).wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    base_seed ^ (z ^ (z >> 31))
}

/// The four five-member parameter training sets, keyed `G1`..`G4`.
pub fn builtin_training_sets() -> BTreeMap<&'static str, Vec<f64>> {
    BTreeMap::from([
        ("G1", vec![3.0, 4.0, 5.0, 7.0, 10.0]),
        ("G2", vec![0.0, 4.0, 5.0, 7.0, 10.0]),
        ("G3", vec![0.0, 0.3, 1.0, 5.0, 10.0]),
        ("G4", vec![0.0, 0.2, 0.5, 0.7, 0.9]),
    ])
}

pub fn training_set(name: &str) -> Result<Vec<f64>> {
    builtin_training_sets()
        .into_iter()
        .find(|(k, _)| k.eq_ignore_ascii_case(name))
        .map(|(_, v)| v)
        .ok_or_else(|| Error::UnknownTrainingSet(name.to_string()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SnapshotKind {
    /// Solution states `u(t_j)`.
    State,
    /// Nonlinear term `f(u(t_j))`.
    Nonlinear,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ColumnMeta {
    pub gamma: f64,
    pub trajectory: u32,
    pub time: f64,
}

/// `M x N*` matrix of snapshot columns with per-column provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct SnapshotMatrix {
    pub kind: SnapshotKind,
    pub data: DMatrix<f64>,
    pub columns: Vec<ColumnMeta>,
}

impl SnapshotMatrix {
    pub fn new(kind: SnapshotKind, data: DMatrix<f64>, columns: Vec<ColumnMeta>) -> Result<Self> {
        if columns.len() != data.ncols() {
            return Err(Error::DimensionMismatch(format!(
                "{} metadata entries for {} columns",
                columns.len(),
                data.ncols()
            )));
        }
        Ok(SnapshotMatrix { kind, data, columns })
    }

    pub fn num_rows(&self) -> usize {
        self.data.nrows()
    }

    pub fn num_cols(&self) -> usize {
        self.data.ncols()
    }
}

struct TrajectoryOutput {
    states: Vec<f64>,
    forcing: Vec<f64>,
}

/// Runs every `(gamma_k, w)` trajectory of the plan and assembles aligned
/// `u`- and `f`-snapshot matrices. Columns are ordered by `(k, w, j)`.
pub fn run_campaign(
    plan: &TrainingPlan,
    grid: Grid,
    execution: Execution,
) -> Result<(SnapshotMatrix, SnapshotMatrix)> {
    plan.validate()?;
    let clock = plan.clock()?;
    let gammas = plan.strategy.gammas();
    let per_gamma = plan.strategy.trajectories_per_gamma();
    let m = grid.num_points();

    let models = gammas
        .iter()
        .map(|&g| FullOrderModel::new(GksParams::new(g, grid)?, plan.dt))
        .collect::<Result<Vec<_>>>()?;

    let jobs: Vec<(usize, usize)> = (0..gammas.len())
        .flat_map(|k| (0..per_gamma).map(move |w| (k, w)))
        .collect();

    let outputs = execution.try_map(jobs, |(k, w)| {
        let trajectory = k * per_gamma + w;
        let ic = sample_initial_condition(plan.ic_modes, trajectory_seed(plan.base_seed, k, w))?;
        let u0 = ic.evaluate(&grid);
        let traj = models[k]
            .simulate(&u0, Some(ic), &clock, Dynamics::Full)
            .map_err(|e| match e {
                Error::IntegrationFailure { time } => Error::CampaignFailure { gamma: gammas[k], trajectory, time },
                other => other,
            })?;
        let mut forcing = vec![0.0; traj.data.len()];
        for (u, f) in traj.snapshots().zip(forcing.chunks_exact_mut(m)) {
            nonlinear_term_into(u, &grid, f);
        }
        Ok::<_, Error>(TrajectoryOutput { states: traj.data, forcing })
    })?;

    let n = clock.record_count();
    let cols = n * outputs.len();
    let mut states = Vec::with_capacity(cols * m);
    let mut forcing = Vec::with_capacity(cols * m);
    let mut meta = Vec::with_capacity(cols);
    for (idx, out) in outputs.into_iter().enumerate() {
        let gamma = gammas[idx / per_gamma];
        states.extend_from_slice(&out.states);
        forcing.extend_from_slice(&out.forcing);
        meta.extend((0..n).map(|j| ColumnMeta {
            gamma,
            trajectory: idx as u32,
            time: clock.record_time(j),
        }));
    }
    let u = SnapshotMatrix::new(SnapshotKind::State, DMatrix::from_vec(m, cols, states), meta.clone())?;
    let f = SnapshotMatrix::new(SnapshotKind::Nonlinear, DMatrix::from_vec(m, cols, forcing), meta)?;
    Ok((u, f))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nonlinear::nonlinear_term;

    fn small_grid() -> Grid {
        Grid::new(32, 22.0).unwrap()
    }

    #[test]
    fn training_sets() {
        let sets = builtin_training_sets();
        assert_eq!(sets.len(), 4);
        assert_eq!(sets["G1"], vec![3.0, 4.0, 5.0, 7.0, 10.0]);
        assert_eq!(sets["G4"], vec![0.0, 0.2, 0.5, 0.7, 0.9]);
        assert_eq!(training_set("g3").unwrap(), vec![0.0, 0.3, 1.0, 5.0, 10.0]);
        assert!(matches!(training_set("G5"), Err(Error::UnknownTrainingSet(_))));
    }

    #[test]
    fn plan_shapes() {
        let single = TrainingPlan::new(Strategy::SingleTrajectory { gamma: 0.0 });
        assert_eq!(single.snapshots_per_trajectory(), 20_000);
        assert_eq!(single.clock().unwrap().total_time, 10_000.0);

        let multi = TrainingPlan::new(Strategy::MultiTrajectory { gamma: 5.0, trajectories: 250 });
        assert_eq!(multi.num_trajectories(), 250);
        assert_eq!(multi.snapshots_per_trajectory(), 80);

        let g4 = TrainingPlan::new(Strategy::MultiParameter { gammas: training_set("G4").unwrap() });
        assert_eq!(g4.snapshots_per_trajectory(), 4000);

        let bad = TrainingPlan::new(Strategy::MultiTrajectory { gamma: 5.0, trajectories: 3 });
        assert!(bad.validate().is_err());
        let zero = TrainingPlan::new(Strategy::MultiTrajectory { gamma: 5.0, trajectories: 0 });
        assert!(zero.validate().is_err());
    }

    #[test]
    fn seeds_differ_per_trajectory() {
        let mut seen = std::collections::HashSet::new();
        for k in 0..5 {
            for w in 0..250 {
                assert!(seen.insert(trajectory_seed(7, k, w)));
            }
        }
    }

    #[test]
    fn campaign_columns_are_aligned_and_ordered() {
        let plan = TrainingPlan::new(Strategy::MultiParameter { gammas: vec![0.0, 0.5] })
            .with_total_snapshots(8)
            .with_seed(11);
        let grid = small_grid();
        let (u, f) = run_campaign(&plan, grid, Execution::Parallel).unwrap();
        assert_eq!(u.num_cols(), 8);
        assert_eq!(f.kind, SnapshotKind::Nonlinear);
        for j in 0..8 {
            let col: Vec<f64> = u.data.column(j).iter().copied().collect();
            let expected = nonlinear_term(&col, &grid);
            assert_eq!(f.data.column(j).as_slice(), expected.as_slice());
        }
        let gammas: Vec<f64> = u.columns.iter().map(|c| c.gamma).collect();
        assert_eq!(gammas, vec![0.0, 0.0, 0.0, 0.0, 0.5, 0.5, 0.5, 0.5]);
        let times: Vec<f64> = u.columns.iter().map(|c| c.time).collect();
        assert_eq!(times, vec![0.5, 1.0, 1.5, 2.0, 0.5, 1.0, 1.5, 2.0]);
        assert_eq!(u.columns[5].trajectory, 1);
    }

    #[test]
    fn sequential_and_parallel_agree() {
        let plan = TrainingPlan::new(Strategy::MultiTrajectory { gamma: 1.0, trajectories: 4 })
            .with_total_snapshots(12);
        let (a, _) = run_campaign(&plan, small_grid(), Execution::Sequential).unwrap();
        let (b, _) = run_campaign(&plan, small_grid(), Execution::Parallel).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn seed_changes_data_not_structure() {
        let plan = TrainingPlan::new(Strategy::MultiTrajectory { gamma: 1.0, trajectories: 2 })
            .with_total_snapshots(6);
        let (a, _) = run_campaign(&plan.clone().with_seed(1), small_grid(), Execution::Sequential).unwrap();
        let (b, _) = run_campaign(&plan.with_seed(2), small_grid(), Execution::Sequential).unwrap();
        assert_eq!(a.columns, b.columns);
        assert_ne!(a.data, b.data);
    }
}
