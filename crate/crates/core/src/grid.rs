//! Periodic grid, equation parameters and linear-stability bookkeeping.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Uniform periodic grid on `[0, L)` with `M` nodes.
///
/// The spacing is always derived from `(M, L)`; node `M` wraps to node `0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    num_points: usize,
    length: f64,
}

impl Grid {
    pub fn new(num_points: usize, length: f64) -> Result<Self> {
        if num_points == 0 {
            return Err(Error::invalid("grid needs at least one point"));
        }
        if !(length.is_finite() && length > 0.0) {
            return Err(Error::invalid(format!("domain length must be positive, got {length}")));
        }
        Ok(Grid { num_points, length })
    }

    /// The grid used throughout the reference study: `M = 256`, `L = 60`.
    pub fn reference() -> Self {
        Grid { num_points: 256, length: 60.0 }
    }

    pub fn num_points(&self) -> usize {
        self.num_points
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn spacing(&self) -> f64 {
        self.length / self.num_points as f64
    }

    pub fn coordinate(&self, i: usize) -> f64 {
        i as f64 * self.spacing()
    }

    pub fn coordinates(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.num_points).map(move |i| self.coordinate(i))
    }

    /// Periodic index `i + offset` wrapped into `0..M`.
    #[inline]
    pub fn wrap(&self, i: usize, offset: isize) -> usize {
        let m = self.num_points as isize;
        (i as isize + offset).rem_euclid(m) as usize
    }
}

/// Parameters of the generalized KS equation on a given grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GksParams {
    pub gamma: f64,
    pub grid: Grid,
}

impl GksParams {
    pub fn new(gamma: f64, grid: Grid) -> Result<Self> {
        if !gamma.is_finite() {
            return Err(Error::invalid(format!("gamma must be finite, got {gamma}")));
        }
        Ok(GksParams { gamma, grid })
    }

    pub fn with_gamma(&self, gamma: f64) -> Result<Self> {
        GksParams::new(gamma, self.grid)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StabilityInfo {
    /// Number of linearly unstable Fourier modes, `floor(L / 2pi)`.
    pub num_unstable: usize,
    /// Most unstable (fractional) mode index, `L / (2 sqrt(2) pi)`.
    pub most_unstable: f64,
}

pub fn stability_info(length: f64) -> Result<StabilityInfo> {
    if !(length.is_finite() && length > 0.0) {
        return Err(Error::invalid(format!("domain length must be positive, got {length}")));
    }
    Ok(StabilityInfo {
        num_unstable: (length / (2.0 * PI)).floor() as usize,
        most_unstable: length / (2.0 * 2f64.sqrt() * PI),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spacing_times_points_is_length() {
        let g = Grid::new(256, 60.0).unwrap();
        assert_eq!(g.spacing() * 256.0, 60.0);
        assert_eq!(g.wrap(0, -1), 255);
        assert_eq!(g.wrap(255, 2), 1);
    }

    #[test]
    fn rejects_bad_grid_and_gamma() {
        assert!(Grid::new(0, 1.0).is_err());
        assert!(Grid::new(8, 0.0).is_err());
        assert!(Grid::new(8, f64::NAN).is_err());
        assert!(GksParams::new(f64::INFINITY, Grid::reference()).is_err());
    }

    #[test]
    fn unstable_mode_counts() {
        assert_eq!(stability_info(2.0 * PI).unwrap().num_unstable, 1);
        assert_eq!(stability_info(PI).unwrap().num_unstable, 0);
        let s = stability_info(60.0).unwrap();
        assert_eq!(s.num_unstable, 9);
        assert!((s.most_unstable - 6.752).abs() < 1e-3);
        assert_eq!(s.most_unstable.round(), 7.0);
        assert!(stability_info(-1.0).is_err());
    }
}
