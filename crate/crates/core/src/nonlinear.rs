//! Conservative discretization of the quadratic term `-1/2 d(u^2)/dx`.

use crate::grid::Grid;

/// Numerical flux at the face between nodes with values `left` and `right`.
#[inline]
pub fn face_flux(left: f64, right: f64) -> f64 {
    -(left * left + left * right + right * right) / 6.0
}

/// Nonlinear term at a single node from its periodic neighbours.
#[inline]
pub fn nonlinear_at(prev: f64, here: f64, next: f64, dx: f64) -> f64 {
    (face_flux(here, next) - face_flux(prev, here)) / dx
}

/// `out[i] = (F_{i+1/2} - F_{i-1/2}) / dx`, so that `u_t = A u + f(u)`
/// reproduces `u_t + (u^2/2)_x + ... = 0`.
pub fn nonlinear_term_into(u: &[f64], grid: &Grid, out: &mut [f64]) {
    let m = u.len();
    assert_eq!(m, grid.num_points(), "state length must match the grid");
    assert_eq!(out.len(), m, "output length must match the grid");
    let inv_dx = 1.0 / grid.spacing();
    // out[i] temporarily holds F_{i+1/2}
    for i in 0..m {
        out[i] = face_flux(u[i], u[(i + 1) % m]);
    }
    let wrap = out[m - 1];
    let mut prev = wrap;
    for v in out.iter_mut() {
        let face = *v;
        *v = (face - prev) * inv_dx;
        prev = face;
    }
}

pub fn nonlinear_term(u: &[f64], grid: &Grid) -> Vec<f64> {
    let mut out = vec![0.0; u.len()];
    nonlinear_term_into(u, grid, &mut out);
    out
}
