//! First-order IMEX Euler stepping with a diagonalized circulant solve.
//!
//! One step solves `(I - dt A) u^{n+1} = u^n + dt f(u^n)`. Since `A` is
//! circulant, `(I - dt A)^{-1}` is applied in Fourier space with one forward
//! and one inverse FFT.

use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::linear::LinearOperator;
use crate::nonlinear::nonlinear_term_into;

/// Precomputed factorization of `I - dt A(gamma)`. Immutable and shareable
/// across threads; per-simulation buffers live in [`ImexStepper`].
#[derive(Clone)]
pub struct CirculantResolvent {
    dt: f64,
    grid: Grid,
    /// `1 / ((1 - dt lambda_k) M)`, folding the inverse-FFT normalization in.
    scaled_inverse: Vec<Complex64>,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for CirculantResolvent {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("CirculantResolvent")
            .field("dt", &self.dt)
            .field("grid", &self.grid)
            .finish_non_exhaustive()
    }
}

impl CirculantResolvent {
    pub fn new(op: &LinearOperator, dt: f64) -> Result<Self> {
        if !(dt.is_finite() && dt > 0.0) {
            return Err(Error::invalid(format!("time step must be positive, got {dt}")));
        }
        let m = op.dim();
        let scale = 1.0 / m as f64;
        let mut scaled_inverse = Vec::with_capacity(m);
        for k in 0..m {
            let denom = Complex64::new(1.0, 0.0) - op.eigenvalue(k) * dt;
            if denom.norm() < 1e-14 {
                return Err(Error::Numerical(format!(
                    "I - dt A is singular on Fourier mode {k} for dt = {dt}"
                )));
            }
            scaled_inverse.push(denom.inv() * scale);
        }
        let mut planner = FftPlanner::new();
        Ok(CirculantResolvent {
            dt,
            grid: op.grid(),
            scaled_inverse,
            forward: planner.plan_fft_forward(m),
            inverse: planner.plan_fft_inverse(m),
        })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    /// Solves `(I - dt A) x = rhs` in place using caller-provided buffers.
    pub fn solve_in_place(&self, rhs: &mut [f64], buf: &mut [Complex64], scratch: &mut [Complex64]) {
        for (b, &r) in buf.iter_mut().zip(rhs.iter()) {
            *b = Complex64::new(r, 0.0);
        }
        self.forward.process_with_scratch(buf, scratch);
        for (b, s) in buf.iter_mut().zip(&self.scaled_inverse) {
            *b *= s;
        }
        self.inverse.process_with_scratch(buf, scratch);
        for (r, b) in rhs.iter_mut().zip(buf.iter()) {
            *r = b.re;
        }
    }

    fn scratch_len(&self) -> usize {
        self.forward
            .get_inplace_scratch_len()
            .max(self.inverse.get_inplace_scratch_len())
    }
}

/// Whether the explicit quadratic term participates in a step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Dynamics {
    #[default]
    Full,
    /// Drop the nonlinear term; used for linear-stability checks.
    LinearOnly,
}

/// Per-simulation stepping state over a shared [`CirculantResolvent`].
pub struct ImexStepper {
    resolvent: Arc<CirculantResolvent>,
    dynamics: Dynamics,
    forcing: Vec<f64>,
    buf: Vec<Complex64>,
    scratch: Vec<Complex64>,
}

impl ImexStepper {
    pub fn new(resolvent: Arc<CirculantResolvent>, dynamics: Dynamics) -> Self {
        let m = resolvent.grid.num_points();
        let scratch = vec![Complex64::default(); resolvent.scratch_len()];
        ImexStepper {
            resolvent,
            dynamics,
            forcing: vec![0.0; m],
            buf: vec![Complex64::default(); m],
            scratch,
        }
    }

    pub fn dt(&self) -> f64 {
        self.resolvent.dt
    }

    /// Advances `u` by one step in place. Does not check finiteness.
    #[inline]
    pub fn advance(&mut self, u: &mut [f64]) {
        let dt = self.resolvent.dt;
        if self.dynamics == Dynamics::Full {
            nonlinear_term_into(u, &self.resolvent.grid, &mut self.forcing);
            for (x, f) in u.iter_mut().zip(&self.forcing) {
                *x += dt * f;
            }
        }
        self.resolvent.solve_in_place(u, &mut self.buf, &mut self.scratch);
    }
}

/// Spatial state at a given time.
#[derive(Debug, Clone, PartialEq)]
pub struct State {
    pub values: Vec<f64>,
    pub time: f64,
}

impl State {
    pub fn new(values: Vec<f64>, time: f64) -> Self {
        State { values, time }
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }
}

/// One IMEX Euler step; fails if the result has non-finite entries.
pub fn step_imex(state: &State, resolvent: &Arc<CirculantResolvent>) -> Result<State> {
    if state.values.len() != resolvent.grid.num_points() {
        return Err(Error::DimensionMismatch(format!(
            "state has {} entries, grid has {}",
            state.values.len(),
            resolvent.grid.num_points()
        )));
    }
    let mut stepper = ImexStepper::new(Arc::clone(resolvent), Dynamics::Full);
    let mut next = state.clone();
    stepper.advance(&mut next.values);
    next.time = state.time + resolvent.dt;
    if !next.is_finite() {
        return Err(Error::IntegrationFailure { time: next.time });
    }
    Ok(next)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GksParams;
    use crate::initial::FIXED_IC1;
    use crate::linear::build_linear_operator;
    use crate::nonlinear::nonlinear_term;
    use nalgebra::{DMatrix, DVector};

    fn setup(m: usize, l: f64, gamma: f64, dt: f64) -> (LinearOperator, Arc<CirculantResolvent>) {
        let p = GksParams::new(gamma, Grid::new(m, l).unwrap()).unwrap();
        let op = build_linear_operator(&p).unwrap();
        let r = Arc::new(CirculantResolvent::new(&op, dt).unwrap());
        (op, r)
    }

    #[test]
    fn solve_matches_dense_lu() {
        let (op, r) = setup(32, 11.0, 0.3, 0.01);
        let rhs: Vec<f64> = (0..32).map(|i| (i as f64 * 0.37).sin() + 0.1).collect();
        let system = DMatrix::identity(32, 32) - op.to_dense() * 0.01;
        let expected = system.lu().solve(&DVector::from_column_slice(&rhs)).unwrap();
        let mut x = rhs.clone();
        let mut buf = vec![Complex64::default(); 32];
        let mut scratch = vec![Complex64::default(); r.scratch_len()];
        r.solve_in_place(&mut x, &mut buf, &mut scratch);
        for (a, b) in x.iter().zip(expected.iter()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn eigenmode_is_scaled_by_scalar_resolvent() {
        let (op, r) = setup(64, 60.0, 0.0, 0.001);
        let g = op.grid();
        let k = 5;
        let v: Vec<f64> = g
            .coordinates()
            .map(|x| (2.0 * std::f64::consts::PI * k as f64 * x / 60.0).cos())
            .collect();
        let lam = op.eigenvalue(k).re;
        let mut stepper = ImexStepper::new(r, Dynamics::LinearOnly);
        let mut u = v.clone();
        stepper.advance(&mut u);
        for (a, b) in u.iter().zip(&v) {
            assert!((a - b / (1.0 - 0.001 * lam)).abs() < 1e-13);
        }
    }

    #[test]
    fn constant_state_is_fixed_point() {
        let (_, r) = setup(16, 5.0, 1.0, 0.01);
        let s = step_imex(&State::new(vec![0.3; 16], 0.0), &r).unwrap();
        assert!(s.values.iter().all(|&v| (v - 0.3).abs() < 1e-15));
        assert!((s.time - 0.01).abs() < 1e-15);
    }

    #[test]
    fn one_step_from_ic1_matches_dense_reference() {
        let (op, r) = setup(256, 60.0, 0.7, 0.001);
        let g = op.grid();
        let u0 = FIXED_IC1.evaluate(&g);
        let next = step_imex(&State::new(u0.clone(), 0.0), &r).unwrap();

        let f = nonlinear_term(&u0, &g);
        let rhs = DVector::from_iterator(256, u0.iter().zip(&f).map(|(u, f)| u + 0.001 * f));
        let system = DMatrix::identity(256, 256) - op.to_dense() * 0.001;
        let expected = system.lu().solve(&rhs).unwrap();
        let err = (DVector::from_column_slice(&next.values) - &expected).norm();
        assert!(err <= 1e-12 * expected.norm(), "relative error {}", err / expected.norm());
    }

    #[test]
    fn blow_up_is_reported() {
        let (_, r) = setup(16, 5.0, 0.0, 0.01);
        let bad = State::new(vec![f64::NAN; 16], 2.0);
        match step_imex(&bad, &r) {
            Err(Error::IntegrationFailure { time }) => assert!((time - 2.01).abs() < 1e-12),
            other => panic!("expected integration failure, got {other:?}"),
        }
    }

    #[test]
    fn rejects_nonpositive_dt() {
        let p = GksParams::new(0.0, Grid::new(16, 5.0).unwrap()).unwrap();
        let op = build_linear_operator(&p).unwrap();
        assert!(CirculantResolvent::new(&op, 0.0).is_err());
        assert!(CirculantResolvent::new(&op, -1.0).is_err());
    }
}
