//! Parametric POD and POD-DEIM reduced-order models for the generalized
//! Kuramoto-Sivashinsky equation
//!
//! ```text
//! u_t + (u^2/2)_x + u_xx + gamma u_xxx + u_xxxx = 0,   x in [0, L) periodic.
//! ```
//!
//! The full-order model is a second-order finite-difference discretization
//! stepped with IMEX Euler (implicit linear part via a circulant FFT solve,
//! explicit conservative quadratic flux). Training campaigns collect state
//! and nonlinear-term snapshots; [`rom`] builds POD bases, selects ranks,
//! computes DEIM interpolation and integrates the projected systems;
//! [`metrics`] measures prediction time and power spectra.

pub mod error;
pub mod exec;
pub mod grid;
pub mod initial;
pub mod io;
pub mod linear;
pub mod metrics;
pub mod nonlinear;
pub mod rom;
pub mod simulate;
pub mod snapshots;
pub mod solver;

pub use error::{Error, Result};
pub use exec::Execution;
pub use grid::{stability_info, GksParams, Grid, StabilityInfo};
pub use initial::{sample_initial_condition, InitialConditionSpec};
pub use linear::{build_linear_operator, LinearOperator};
pub use nonlinear::nonlinear_term;
pub use simulate::{simulate, Clock, FullOrderModel, Trajectory};
pub use snapshots::{run_campaign, SnapshotMatrix, Strategy, TrainingPlan};
pub use solver::{step_imex, CirculantResolvent, Dynamics, State};
