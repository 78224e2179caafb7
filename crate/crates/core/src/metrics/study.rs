//! Prediction-time evaluation of reduced models against fresh full-order runs.

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::grid::GksParams;
use crate::initial::sample_initial_condition;
use crate::rom::system::integrate_rom_partial;
use crate::rom::{ReducedModel, RomMode};
use crate::simulate::{Clock, FullOrderModel, Trajectory};
use crate::solver::Dynamics;

use super::error::{prediction_time, relative_error_series, PredictionTime};

/// Number of random initial conditions averaged per `(gamma, J)` cell.
pub const DEFAULT_NUM_ICS: usize = 3;

/// Initial-condition mode counts used for testing reduced models.
pub const TEST_MODE_COUNTS: [usize; 3] = [3, 8, 22];

/// Prediction time of `model` against an existing full-order trajectory,
/// started from the same initial state at the same `gamma`.
pub fn rom_prediction_time(model: &ReducedModel, mode: RomMode, fom: &Trajectory, dt: f64, tol: f64) -> Result<PredictionTime> {
    let params = GksParams::new(fom.gamma, fom.grid)?;
    let system = model.assemble(&params, mode)?;
    let clock = Clock::new(fom.len() as f64 * fom.record_every, dt, fom.record_every)?;
    let (rom, failure) = integrate_rom_partial(&system, &model.basis, &fom.initial, &clock)?;
    if rom.lifted.is_empty() {
        return Ok(PredictionTime { time: 0.0, survived: false });
    }
    // compare only the records completed before any blow-up
    let reference = Trajectory {
        data: fom.data[..rom.lifted.data.len()].to_vec(),
        ..fom.clone()
    };
    let mut pt = prediction_time(&relative_error_series(&rom.lifted, &reference)?, tol)?;
    if failure.is_some() {
        pt.survived = false;
    }
    Ok(pt)
}

#[derive(Debug, Clone, PartialEq)]
pub struct PredictionOutcome {
    pub gamma: f64,
    pub ic_modes: usize,
    pub seed: u64,
    pub prediction: PredictionTime,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AveragedPrediction {
    pub mean: f64,
    pub outcomes: Vec<PredictionOutcome>,
}

/// Full-order reference run from a freshly sampled `J`-mode initial condition.
pub fn reference_trajectory(params: &GksParams, ic_modes: usize, seed: u64, clock: &Clock) -> Result<Trajectory> {
    let ic = sample_initial_condition(ic_modes, seed)?;
    let fom = FullOrderModel::new(*params, clock.dt)?;
    let u0 = ic.evaluate(&params.grid);
    fom.simulate(&u0, Some(ic), clock, Dynamics::Full)
}

/// Mean prediction time over one fresh initial condition per seed.
#[allow(clippy::too_many_arguments)]
pub fn averaged_prediction_time(
    model: &ReducedModel,
    mode: RomMode,
    params: &GksParams,
    ic_modes: usize,
    seeds: &[u64],
    clock: &Clock,
    tol: f64,
    execution: Execution,
) -> Result<AveragedPrediction> {
    if seeds.is_empty() {
        return Err(Error::invalid("need at least one initial condition"));
    }
    let outcomes = execution.try_map(seeds.to_vec(), |seed| {
        let fom = reference_trajectory(params, ic_modes, seed, clock)?;
        let prediction = rom_prediction_time(model, mode, &fom, clock.dt, tol)?;
        Ok::<_, Error>(PredictionOutcome { gamma: params.gamma, ic_modes, seed, prediction })
    })?;
    let mean = outcomes.iter().map(|o| o.prediction.time).sum::<f64>() / outcomes.len() as f64;
    Ok(AveragedPrediction { mean, outcomes })
}
