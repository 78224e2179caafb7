//! Circulant finite-difference operator `A(gamma) = -D2 - gamma D3 - D4`.

use nalgebra::DMatrix;
use rustfft::num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::{GksParams, Grid};

/// Smallest grid the five-point stencil fits on without self-overlap.
pub const MIN_POINTS: usize = 5;

/// Offsets covered by [`LinearOperator::stencil`], in order.
pub const STENCIL_OFFSETS: [isize; 5] = [-2, -1, 0, 1, 2];

/// Second-order central stencils for the linear part of the gKS equation
/// with periodic wraparound.
///
/// Row `i` of the circulant matrix carries `stencil[j]` in column
/// `i + STENCIL_OFFSETS[j] (mod M)`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearOperator {
    stencil: [f64; 5],
    gamma: f64,
    grid: Grid,
}

pub fn build_linear_operator(params: &GksParams) -> Result<LinearOperator> {
    let grid = params.grid;
    let gamma = params.gamma;
    if grid.num_points() < MIN_POINTS {
        return Err(Error::invalid(format!(
            "linear operator needs at least {MIN_POINTS} grid points, got {}",
            grid.num_points()
        )));
    }
    if !gamma.is_finite() {
        return Err(Error::invalid(format!("gamma must be finite, got {gamma}")));
    }
    let dx = grid.spacing();
    let (h2, h3, h4) = (dx * dx, dx * dx * dx, dx * dx * dx * dx);

    // -D2: (-1, 2, -1)/dx^2, -gamma D3: gamma (1/2, -1, 0, 1, -1/2)/dx^3, -D4: -(1, -4, 6, -4, 1)/dx^4
    let far_left = 0.5 * gamma / h3 - 1.0 / h4;
    let near_left = -1.0 / h2 - gamma / h3 + 4.0 / h4;
    let near_right = -1.0 / h2 + gamma / h3 + 4.0 / h4;
    let far_right = -0.5 * gamma / h3 - 1.0 / h4;
    // The centre is fixed by the zero-row-sum condition so that the grouped
    // sum in `row_sum` cancels exactly.
    let centre = -((far_left + near_left) + (near_right + far_right));

    Ok(LinearOperator {
        stencil: [far_left, near_left, centre, near_right, far_right],
        gamma,
        grid,
    })
}

impl LinearOperator {
    pub fn stencil(&self) -> [f64; 5] {
        self.stencil
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn dim(&self) -> usize {
        self.grid.num_points()
    }

    pub fn row_sum(&self) -> f64 {
        let s = self.stencil;
        ((s[0] + s[1]) + (s[3] + s[4])) + s[2]
    }

    /// `out = A u`, evaluated through nested first differences so that
    /// constants are annihilated exactly.
    pub fn apply_into(&self, u: &[f64], out: &mut [f64]) {
        let m = self.dim();
        assert_eq!(u.len(), m, "state length must match the grid");
        assert_eq!(out.len(), m, "output length must match the grid");
        let dx = self.grid.spacing();
        let (h2, h3, h4) = (dx * dx, dx * dx * dx, dx * dx * dx * dx);

        // forward differences d[i] = u[i+1] - u[i]
        let d: Vec<f64> = (0..m).map(|i| u[(i + 1) % m] - u[i]).collect();
        // second differences s[i] = d[i] - d[i-1] = u[i+1] - 2u[i] + u[i-1]
        let s: Vec<f64> = (0..m).map(|i| d[i] - d[(i + m - 1) % m]).collect();
        for i in 0..m {
            let ip = (i + 1) % m;
            let im = (i + m - 1) % m;
            let second = s[i];
            let third = 0.5 * (s[ip] - s[im]);
            let fourth = (s[ip] - s[i]) - (s[i] - s[im]);
            out[i] = -second / h2 - self.gamma * third / h3 - fourth / h4;
        }
    }

    pub fn apply(&self, u: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; u.len()];
        self.apply_into(u, &mut out);
        out
    }

    /// Eigenvalue of the circulant matrix on the discrete Fourier mode
    /// `exp(2 pi i k j / M)`.
    pub fn eigenvalue(&self, k: usize) -> Complex64 {
        let m = self.dim();
        let dx = self.grid.spacing();
        let theta = 2.0 * std::f64::consts::PI * (k % m) as f64 / m as f64;
        let half = (0.5 * theta).sin();
        let s2 = half * half;
        // symbols: D2 -> -4 sin^2(t/2)/dx^2, D3 -> -4i sin t sin^2(t/2)/dx^3,
        // D4 -> 16 sin^4(t/2)/dx^4
        let re = 4.0 * s2 / (dx * dx) - 16.0 * s2 * s2 / (dx * dx * dx * dx);
        let im = self.gamma * 4.0 * theta.sin() * s2 / (dx * dx * dx);
        Complex64::new(re, im)
    }

    pub fn eigenvalues(&self) -> Vec<Complex64> {
        (0..self.dim()).map(|k| self.eigenvalue(k)).collect()
    }

    /// Dense `M x M` assembly; intended for small grids and reference solves.
    pub fn to_dense(&self) -> DMatrix<f64> {
        let m = self.dim();
        let mut a = DMatrix::zeros(m, m);
        for i in 0..m {
            for (c, &off) in self.stencil.iter().zip(STENCIL_OFFSETS.iter()) {
                a[(i, self.grid.wrap(i, off))] += c;
            }
        }
        a
    }
}
