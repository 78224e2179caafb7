//! Reduced Galerkin and POD-DEIM systems and their time integration.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector, Dyn, LU};

use super::deim::DeimOperator;
use super::pod::PodBasis;
use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::linear::LinearOperator;
use crate::nonlinear::{nonlinear_at, nonlinear_term_into};
use crate::simulate::{Clock, Trajectory};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RomMode {
    /// Exact projection `U^T f(U beta)`; online cost scales with `M`.
    #[default]
    Galerkin,
    /// `(U^T Y)(P^T Y)^{-1} f_eta(U beta)`; touches only sampled stencil rows.
    Deim,
}

/// Online data for the DEIM nonlinear term. Sized by `(n, r)` only.
#[derive(Debug, Clone, PartialEq)]
pub struct DeimLift {
    /// `r x n`, `(U^T Y)(P^T Y)^{-1}`.
    pub lift: DMatrix<f64>,
    /// Grid rows of `U` needed to evaluate `f` at the DEIM indices.
    pub sample_nodes: Vec<usize>,
    /// `s x r`, rows of `U` at `sample_nodes`.
    pub sample_rows: DMatrix<f64>,
    /// For each DEIM index, positions of its `(i-1, i, i+1)` nodes in `sample_nodes`.
    pub stencils: Vec<[usize; 3]>,
    pub dx: f64,
}

impl DeimLift {
    pub fn new(basis: &PodBasis, deim: &DeimOperator, grid: &Grid) -> Result<Self> {
        let m = grid.num_points();
        if basis.dim() != m || deim.basis().nrows() != m {
            return Err(Error::DimensionMismatch(format!(
                "POD basis has {} rows, DEIM basis {}, grid {m}",
                basis.dim(),
                deim.basis().nrows()
            )));
        }
        let u = &basis.vectors;
        let lift = deim.right_solve(&(u.transpose() * deim.basis()));

        let mut nodes: Vec<usize> = deim
            .indices()
            .iter()
            .flat_map(|&i| [grid.wrap(i, -1), i, grid.wrap(i, 1)])
            .collect();
        nodes.sort_unstable();
        nodes.dedup();
        let position = |node: usize| nodes.binary_search(&node).expect("node collected above");
        let stencils = deim
            .indices()
            .iter()
            .map(|&i| [position(grid.wrap(i, -1)), position(i), position(grid.wrap(i, 1))])
            .collect();
        let sample_rows = DMatrix::from_fn(nodes.len(), basis.rank(), |a, b| u[(nodes[a], b)]);
        Ok(DeimLift {
            lift,
            sample_nodes: nodes,
            sample_rows,
            stencils,
            dx: grid.spacing(),
        })
    }

    pub fn size(&self) -> usize {
        self.stencils.len()
    }

    /// `out = lift * f_eta(U beta)` using caller-provided buffers.
    pub fn evaluate_into(&self, beta: &DVector<f64>, sampled: &mut DVector<f64>, f_eta: &mut DVector<f64>, out: &mut DVector<f64>) {
        sampled.gemv(1.0, &self.sample_rows, beta, 0.0);
        for (f, s) in f_eta.iter_mut().zip(&self.stencils) {
            *f = nonlinear_at(sampled[s[0]], sampled[s[1]], sampled[s[2]], self.dx);
        }
        out.gemv(1.0, &self.lift, f_eta, 0.0);
    }
}

/// Precomputed reduced operators for one `gamma`.
#[derive(Debug, Clone, PartialEq)]
pub struct RomSystem {
    pub reduced_linear: DMatrix<f64>,
    pub gamma: f64,
    pub mode: RomMode,
    pub grid: Grid,
    pub deim: Option<Arc<DeimLift>>,
}

fn reduced_linear(op: &LinearOperator, basis: &PodBasis) -> Result<DMatrix<f64>> {
    let m = op.dim();
    if basis.dim() != m {
        return Err(Error::DimensionMismatch(format!(
            "basis has {} rows but the operator acts on {m} points",
            basis.dim()
        )));
    }
    let mut au = DMatrix::zeros(m, basis.rank());
    let mut col = vec![0.0; m];
    for (j, u) in basis.vectors.column_iter().enumerate() {
        op.apply_into(u.as_slice(), &mut col);
        au.column_mut(j).copy_from_slice(&col);
    }
    Ok(basis.vectors.transpose() * au)
}

pub fn assemble_rom(op: &LinearOperator, basis: &PodBasis, deim: Option<&DeimOperator>) -> Result<RomSystem> {
    let reduced = reduced_linear(op, basis)?;
    let grid = op.grid();
    let (mode, lift) = match deim {
        Some(d) => (RomMode::Deim, Some(Arc::new(DeimLift::new(basis, d, &grid)?))),
        None => (RomMode::Galerkin, None),
    };
    Ok(RomSystem {
        reduced_linear: reduced,
        gamma: op.gamma(),
        mode,
        grid,
        deim: lift,
    })
}

impl RomSystem {
    pub fn rank(&self) -> usize {
        self.reduced_linear.nrows()
    }

    /// Same basis and DEIM data, linear part rebuilt for another `gamma`.
    pub fn with_operator(&self, op: &LinearOperator, basis: &PodBasis) -> Result<RomSystem> {
        if op.grid() != self.grid {
            return Err(Error::DimensionMismatch("operator grid differs from the ROM grid".into()));
        }
        Ok(RomSystem {
            reduced_linear: reduced_linear(op, basis)?,
            gamma: op.gamma(),
            mode: self.mode,
            grid: self.grid,
            deim: self.deim.clone(),
        })
    }

    pub fn stepper<'a>(&'a self, basis: &'a PodBasis, dt: f64) -> Result<ReducedStepper<'a>> {
        ReducedStepper::new(self, basis, dt)
    }
}

/// IMEX Euler on the reduced coordinates:
/// `(I - dt U^T A U) beta^{n+1} = beta^n + dt N(beta^n)`.
pub struct ReducedStepper<'a> {
    system: &'a RomSystem,
    basis: &'a PodBasis,
    dt: f64,
    factor: LU<f64, Dyn, Dyn>,
    nonlinear: DVector<f64>,
    full_state: DVector<f64>,
    full_forcing: Vec<f64>,
    sampled: DVector<f64>,
    f_eta: DVector<f64>,
}

impl<'a> ReducedStepper<'a> {
    fn new(system: &'a RomSystem, basis: &'a PodBasis, dt: f64) -> Result<Self> {
        if !(dt.is_finite() && dt > 0.0) {
            return Err(Error::invalid(format!("dt must be positive, got {dt}")));
        }
        let r = system.rank();
        if basis.rank() != r || basis.dim() != system.grid.num_points() {
            return Err(Error::DimensionMismatch(format!(
                "basis is {}x{}, system expects {}x{r}",
                basis.dim(),
                basis.rank(),
                system.grid.num_points()
            )));
        }
        let factor = (DMatrix::identity(r, r) - &system.reduced_linear * dt).lu();
        if !factor.is_invertible() {
            return Err(Error::Numerical("I - dt U^T A U is singular".into()));
        }
        let (s, n) = system
            .deim
            .as_ref()
            .map_or((0, 0), |d| (d.sample_nodes.len(), d.size()));
        let m = basis.dim();
        Ok(ReducedStepper {
            system,
            basis,
            dt,
            factor,
            nonlinear: DVector::zeros(r),
            full_state: DVector::zeros(if system.deim.is_some() { 0 } else { m }),
            full_forcing: vec![0.0; if system.deim.is_some() { 0 } else { m }],
            sampled: DVector::zeros(s),
            f_eta: DVector::zeros(n),
        })
    }

    /// Reduced nonlinear term `N(beta)` into the internal buffer.
    pub fn evaluate_nonlinear(&mut self, beta: &DVector<f64>) -> &DVector<f64> {
        match &self.system.deim {
            Some(lift) => lift.evaluate_into(beta, &mut self.sampled, &mut self.f_eta, &mut self.nonlinear),
            None => {
                self.full_state.gemv(1.0, &self.basis.vectors, beta, 0.0);
                nonlinear_term_into(self.full_state.as_slice(), &self.system.grid, &mut self.full_forcing);
                let f = nalgebra::DVectorView::from_slice(&self.full_forcing, self.full_forcing.len());
                self.nonlinear.gemv_tr(1.0, &self.basis.vectors, &f, 0.0);
            }
        }
        &self.nonlinear
    }

    pub fn advance(&mut self, beta: &mut DVector<f64>) {
        self.evaluate_nonlinear(beta);
        beta.axpy(self.dt, &self.nonlinear, 1.0);
        self.factor.solve_mut(beta);
    }
}

/// Reduced coefficients and their lift `U beta` on the recording clock.
#[derive(Debug, Clone, PartialEq)]
pub struct RomTrajectory {
    pub initial_coefficients: Vec<f64>,
    /// Row-major `count x r`.
    pub coefficients: Vec<f64>,
    pub lifted: Trajectory,
}

impl RomTrajectory {
    pub fn coefficient_row(&self, j: usize) -> &[f64] {
        let r = self.initial_coefficients.len();
        &self.coefficients[j * r..(j + 1) * r]
    }
}

/// Integrates from `beta_0 = U^T u_0` and lifts each recorded state.
pub fn integrate_rom(system: &RomSystem, basis: &PodBasis, u0: &[f64], clock: &Clock) -> Result<RomTrajectory> {
    match integrate_rom_partial(system, basis, u0, clock)? {
        (traj, None) => Ok(traj),
        (_, Some(time)) => Err(Error::IntegrationFailure { time }),
    }
}

/// Like [`integrate_rom`], but on blow-up returns the records completed so
/// far together with the failure time.
pub fn integrate_rom_partial(
    system: &RomSystem,
    basis: &PodBasis,
    u0: &[f64],
    clock: &Clock,
) -> Result<(RomTrajectory, Option<f64>)> {
    clock.validate()?;
    let m = system.grid.num_points();
    if u0.len() != m {
        return Err(Error::DimensionMismatch(format!("initial state has {} entries, grid has {m}", u0.len())));
    }
    let mut stepper = system.stepper(basis, clock.dt)?;
    let mut beta = basis.vectors.tr_mul(&DVector::from_column_slice(u0));
    let initial_coefficients = beta.as_slice().to_vec();
    let r = beta.len();
    let count = clock.record_count();
    let per_record = clock.steps_per_record();
    let mut coefficients = Vec::with_capacity(count * r);
    let mut data = Vec::with_capacity(count * m);
    let mut lifted = DVector::zeros(m);
    let mut step = 0usize;
    let mut failure = None;
    'records: for _ in 0..count {
        for _ in 0..per_record {
            stepper.advance(&mut beta);
            step += 1;
            if !beta.iter().sum::<f64>().is_finite() {
                failure = Some(step as f64 * clock.dt);
                break 'records;
            }
        }
        coefficients.extend_from_slice(beta.as_slice());
        lifted.gemv(1.0, &basis.vectors, &beta, 0.0);
        data.extend_from_slice(lifted.as_slice());
    }
    let traj = RomTrajectory {
        initial_coefficients,
        coefficients,
        lifted: Trajectory {
            gamma: system.gamma,
            grid: system.grid,
            record_every: clock.record_every,
            ic: None,
            initial: u0.to_vec(),
            data,
        },
    };
    Ok((traj, failure))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GksParams;
    use crate::initial::FIXED_IC1;
    use crate::linear::build_linear_operator;
    use crate::simulate::FullOrderModel;
    use crate::solver::Dynamics;

    fn operator(m: usize, l: f64, gamma: f64) -> LinearOperator {
        build_linear_operator(&GksParams::new(gamma, Grid::new(m, l).unwrap()).unwrap()).unwrap()
    }

    #[test]
    fn identity_basis_reproduces_operator() {
        let op = operator(16, 6.0, 0.4);
        let basis = PodBasis::from_orthonormal(DMatrix::identity(16, 16)).unwrap();
        let sys = assemble_rom(&op, &basis, None).unwrap();
        assert!((&sys.reduced_linear - op.to_dense()).abs().max() < 1e-9);
        assert_eq!(sys.mode, RomMode::Galerkin);
    }

    #[test]
    fn two_mode_projection_by_hand() {
        // Fourier cos/sin pair at mode 1 spans an invariant subspace of A:
        // U^T A U = [[Re l, Im l], [-Im l, Re l]] for U = [cos, sin]/sqrt(M/2).
        let m = 16;
        let op = operator(m, 8.0, 0.6);
        let g = op.grid();
        let norm = (m as f64 / 2.0).sqrt();
        let u = DMatrix::from_fn(m, 2, |i, j| {
            let t = 2.0 * std::f64::consts::PI * g.coordinate(i) / 8.0;
            if j == 0 { t.cos() / norm } else { t.sin() / norm }
        });
        let basis = PodBasis::from_orthonormal(u).unwrap();
        let sys = assemble_rom(&op, &basis, None).unwrap();
        let lam = op.eigenvalue(1);
        let expected = DMatrix::from_row_slice(2, 2, &[lam.re, lam.im, -lam.im, lam.re]);
        assert!((&sys.reduced_linear - expected).abs().max() < 1e-9, "{}", sys.reduced_linear);
    }

    #[test]
    fn full_rank_rom_matches_fom() {
        let op = operator(64, 22.0, 0.7);
        let grid = op.grid();
        let u0 = FIXED_IC1.evaluate(&grid);
        let clock = Clock::new(1.0, 0.001, 0.1).unwrap();
        let fom = FullOrderModel::new(GksParams::new(0.7, grid).unwrap(), 0.001)
            .unwrap()
            .simulate(&u0, None, &clock, Dynamics::Full)
            .unwrap();
        let q = DMatrix::from_fn(64, 64, |i, j| ((i * 37 + j * 11) % 23) as f64 - 11.0 + if i == j { 40.0 } else { 0.0 })
            .qr()
            .q();
        let basis = PodBasis::from_orthonormal(q).unwrap();
        let sys = assemble_rom(&op, &basis, None).unwrap();
        let rom = integrate_rom(&sys, &basis, &u0, &clock).unwrap();
        assert_eq!(rom.lifted.len(), fom.len());
        for (a, b) in rom.lifted.snapshots().zip(fom.snapshots()) {
            let diff: f64 = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
            let norm: f64 = b.iter().map(|y| y * y).sum::<f64>().sqrt();
            assert!(diff <= 1e-10 * norm);
        }
        // beta_0 = U^T u_0
        let beta0 = basis.vectors.tr_mul(&DVector::from_column_slice(&u0));
        assert_eq!(rom.initial_coefficients, beta0.as_slice());
    }

    #[test]
    fn gamma_change_keeps_basis_data() {
        let op = operator(32, 10.0, 0.0);
        let q = DMatrix::from_fn(32, 4, |i, j| ((i + 1) as f64 * (j + 1) as f64 * 0.13).sin()).qr().q();
        let basis = PodBasis::from_orthonormal(q.clone()).unwrap();
        let deim = DeimOperator::new(q).unwrap();
        let sys = assemble_rom(&op, &basis, Some(&deim)).unwrap();
        let other = sys.with_operator(&operator(32, 10.0, 2.0), &basis).unwrap();
        assert!(Arc::ptr_eq(sys.deim.as_ref().unwrap(), other.deim.as_ref().unwrap()));
        assert_ne!(sys.reduced_linear, other.reduced_linear);
        assert_eq!(other.gamma, 2.0);
    }

    #[test]
    fn deim_online_data_is_sized_by_n_and_r() {
        let op = operator(128, 30.0, 0.0);
        let q = DMatrix::from_fn(128, 6, |i, j| ((i + 3) as f64 * (j + 1) as f64 * 0.07).cos()).qr().q();
        let basis = PodBasis::from_orthonormal(q.clone()).unwrap();
        let deim = DeimOperator::new(q.columns(0, 5).into_owned()).unwrap();
        let sys = assemble_rom(&op, &basis, Some(&deim)).unwrap();
        let lift = sys.deim.as_ref().unwrap();
        assert_eq!(lift.lift.shape(), (6, 5));
        assert!(lift.sample_rows.nrows() <= 3 * 5);
        assert_eq!(lift.sample_rows.ncols(), 6);
        assert_eq!(lift.stencils.len(), 5);
    }

    #[test]
    fn mismatched_dimensions_are_rejected() {
        let op = operator(16, 6.0, 0.0);
        let basis = PodBasis::from_orthonormal(DMatrix::identity(8, 8)).unwrap();
        assert!(assemble_rom(&op, &basis, None).is_err());
    }
}
