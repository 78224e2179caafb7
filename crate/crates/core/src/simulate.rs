//! Full-order time integration and recorded trajectories.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::grid::{GksParams, Grid};
use crate::initial::InitialConditionSpec;
use crate::linear::{build_linear_operator, LinearOperator};
use crate::solver::{CirculantResolvent, Dynamics, ImexStepper};

/// Default integration step.
pub const DEFAULT_DT: f64 = 1e-3;
/// Default snapshot spacing.
pub const DEFAULT_RECORD_EVERY: f64 = 0.5;

/// Integration horizon, step and recording interval.
///
/// States are recorded at `t = j * record_every` for `j = 1..=count`; the
/// initial state is kept separately.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Clock {
    pub total_time: f64,
    pub dt: f64,
    pub record_every: f64,
}

impl Clock {
    pub fn new(total_time: f64, dt: f64, record_every: f64) -> Result<Self> {
        let clock = Clock { total_time, dt, record_every };
        clock.validate()?;
        Ok(clock)
    }

    pub fn with_defaults(total_time: f64) -> Result<Self> {
        Clock::new(total_time, DEFAULT_DT, DEFAULT_RECORD_EVERY)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(Error::invalid(format!("dt must be positive, got {}", self.dt)));
        }
        if !(self.record_every.is_finite() && self.record_every > 0.0) {
            return Err(Error::invalid(format!(
                "record interval must be positive, got {}",
                self.record_every
            )));
        }
        if !(self.total_time.is_finite() && self.total_time >= 0.0) {
            return Err(Error::invalid(format!(
                "total time must be nonnegative, got {}",
                self.total_time
            )));
        }
        let steps = (self.record_every / self.dt).round();
        if steps < 1.0 || (steps * self.dt - self.record_every).abs() > 1e-12 * self.record_every {
            return Err(Error::invalid(format!(
                "record interval {} is not an integer multiple of dt {}",
                self.record_every, self.dt
            )));
        }
        Ok(())
    }

    pub fn steps_per_record(&self) -> usize {
        (self.record_every / self.dt).round() as usize
    }

    pub fn record_count(&self) -> usize {
        (self.total_time / self.record_every * (1.0 + 1e-12)).floor() as usize
    }

    pub fn record_time(&self, j: usize) -> f64 {
        (j + 1) as f64 * self.record_every
    }
}

/// Recorded solution history of one simulation.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub gamma: f64,
    pub grid: Grid,
    pub record_every: f64,
    pub ic: Option<InitialConditionSpec>,
    pub initial: Vec<f64>,
    /// Row-major `count x M`: snapshot `j` occupies `[j*M, (j+1)*M)`.
    pub data: Vec<f64>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.data.len() / self.grid.num_points()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn snapshot(&self, j: usize) -> &[f64] {
        let m = self.grid.num_points();
        &self.data[j * m..(j + 1) * m]
    }

    pub fn snapshots(&self) -> std::slice::ChunksExact<'_, f64> {
        self.data.chunks_exact(self.grid.num_points())
    }

    pub fn time(&self, j: usize) -> f64 {
        (j + 1) as f64 * self.record_every
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.len()).map(|j| self.time(j)).collect()
    }
}

/// Full-order model for one `gamma`: the operator and its factorization.
#[derive(Debug, Clone)]
pub struct FullOrderModel {
    params: GksParams,
    op: LinearOperator,
    resolvent: Arc<CirculantResolvent>,
}

impl FullOrderModel {
    pub fn new(params: GksParams, dt: f64) -> Result<Self> {
        let op = build_linear_operator(&params)?;
        let resolvent = Arc::new(CirculantResolvent::new(&op, dt)?);
        Ok(FullOrderModel { params, op, resolvent })
    }

    pub fn params(&self) -> &GksParams {
        &self.params
    }

    pub fn operator(&self) -> &LinearOperator {
        &self.op
    }

    pub fn resolvent(&self) -> &Arc<CirculantResolvent> {
        &self.resolvent
    }

    pub fn stepper(&self, dynamics: Dynamics) -> ImexStepper {
        ImexStepper::new(Arc::clone(&self.resolvent), dynamics)
    }

    pub fn simulate(
        &self,
        initial: &[f64],
        ic: Option<InitialConditionSpec>,
        clock: &Clock,
        dynamics: Dynamics,
    ) -> Result<Trajectory> {
        clock.validate()?;
        if (clock.dt - self.resolvent.dt()).abs() > 1e-15 * clock.dt {
            return Err(Error::invalid(format!(
                "clock dt {} differs from the factorized dt {}",
                clock.dt,
                self.resolvent.dt()
            )));
        }
        let m = self.params.grid.num_points();
        if initial.len() != m {
            return Err(Error::DimensionMismatch(format!(
                "initial state has {} entries, grid has {m}",
                initial.len()
            )));
        }
        if initial.iter().any(|v| !v.is_finite()) {
            return Err(Error::IntegrationFailure { time: 0.0 });
        }
        let count = clock.record_count();
        let per_record = clock.steps_per_record();
        let mut stepper = self.stepper(dynamics);
        let mut u = initial.to_vec();
        let mut data = Vec::with_capacity(count * m);
        let mut step = 0usize;
        for _ in 0..count {
            for _ in 0..per_record {
                stepper.advance(&mut u);
                step += 1;
                if !u.iter().sum::<f64>().is_finite() {
                    return Err(Error::IntegrationFailure { time: step as f64 * clock.dt });
                }
            }
            data.extend_from_slice(&u);
        }
        Ok(Trajectory {
            gamma: self.params.gamma,
            grid: self.params.grid,
            record_every: clock.record_every,
            ic,
            initial: initial.to_vec(),
            data,
        })
    }
}

/// Convenience wrapper building a [`FullOrderModel`] for a single run.
pub fn simulate(params: &GksParams, ic: &InitialConditionSpec, clock: &Clock) -> Result<Trajectory> {
    let fom = FullOrderModel::new(*params, clock.dt)?;
    let u0 = ic.evaluate(&params.grid);
    fom.simulate(&u0, Some(ic.clone()), clock, Dynamics::Full)
}
