//! Random multi-mode cosine initial conditions and three fixed sets.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::grid::Grid;

/// Number of cosine modes used for training trajectories.
pub const TRAINING_MODES: usize = 8;

/// Largest amplitude produced by [`sample_initial_condition`].
pub const MAX_AMPLITUDE: f64 = 0.1;

/// `u(x, 0) = sum_j A_j cos(2 pi j x / L + phi_j)`, `j = 1..=J`.
#[derive(Debug, Clone, PartialEq)]
pub struct InitialConditionSpec {
    pub amplitudes: Vec<f64>,
    pub phases: Vec<f64>,
    pub seed: Option<u64>,
}

impl InitialConditionSpec {
    pub fn new(amplitudes: Vec<f64>, phases: Vec<f64>) -> Result<Self> {
        if amplitudes.len() != phases.len() {
            return Err(Error::invalid(format!(
                "{} amplitudes but {} phases",
                amplitudes.len(),
                phases.len()
            )));
        }
        if amplitudes.iter().chain(&phases).any(|v| !v.is_finite()) {
            return Err(Error::invalid("initial-condition coefficients must be finite"));
        }
        Ok(InitialConditionSpec { amplitudes, phases, seed: None })
    }

    pub fn num_modes(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn evaluate(&self, grid: &Grid) -> Vec<f64> {
        let l = grid.length();
        grid.coordinates()
            .map(|x| {
                self.amplitudes
                    .iter()
                    .zip(&self.phases)
                    .enumerate()
                    .map(|(j, (a, phi))| a * (2.0 * PI * (j + 1) as f64 * x / l + phi).cos())
                    .sum()
            })
            .collect()
    }
}

/// Draws `A_j ~ 0.1 Unif[-1, 1]`, `phi_j ~ Unif[0, 2 pi)` from a ChaCha8
/// stream keyed by `seed`.
pub fn sample_initial_condition(num_modes: usize, seed: u64) -> Result<InitialConditionSpec> {
    if num_modes == 0 {
        return Err(Error::invalid("initial condition needs at least one mode"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let amplitudes = (0..num_modes)
        .map(|_| MAX_AMPLITUDE * rng.random_range(-1.0..=1.0))
        .collect();
    let phases = (0..num_modes).map(|_| rng.random_range(0.0..2.0 * PI)).collect();
    Ok(InitialConditionSpec { amplitudes, phases, seed: Some(seed) })
}

/// Fixed eight-mode coefficient sets from the reference study.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FixedIc {
    pub name: &'static str,
    pub amplitudes: [f64; 8],
    pub phases: [f64; 8],
}

impl FixedIc {
    pub fn spec(&self) -> InitialConditionSpec {
        InitialConditionSpec {
            amplitudes: self.amplitudes.to_vec(),
            phases: self.phases.to_vec(),
            seed: None,
        }
    }

    pub fn evaluate(&self, grid: &Grid) -> Vec<f64> {
        self.spec().evaluate(grid)
    }
}

/// Initial condition of the single-trajectory chaotic comparison (gamma = 0.1).
pub const SAMPLE_IC: FixedIc = FixedIc {
    name: "sample",
    amplitudes: [
        3.0233e-2, 3.5171e-2, -7.3354e-2, -9.6221e-2, -1.9993e-2, 5.3954e-2, -6.7118e-2, -4.5122e-2,
    ],
    phases: [6.08, 3.0139, 6.2266, 3.1967, 4.983, 3.0123, 3.6808, 2.2941],
};

pub const FIXED_IC1: FixedIc = FixedIc {
    name: "ic1",
    amplitudes: [
        0.1593e-2, -8.4911e-2, 5.6365e-2, 5.4644e-2, -1.8904e-2, 6.2566e-2, 1.7180e-2, -2.1826e-2,
    ],
    phases: [3.5963, 2.1939, 4.1857, 5.4722, 5.5467, 4.5229, 1.2151, 0.16661],
};

#[allow(clippy::approx_constant)] // tabulated phase, not e
pub const FIXED_IC2: FixedIc = FixedIc {
    name: "ic2",
    amplitudes: [
        -1.5013e-2, 7.649e-2, 1.891e-2, 8.5255e-2, 5.531e-2, 2.4718e-2, 6.5647e-2, 9.6781e-2,
    ],
    phases: [3.3396, 3.6174, 1.7775, 5.3945, 2.7183, 0.1965, 5.1264, 4.5449],
};

pub fn fixed_ic(name: &str) -> Option<FixedIc> {
    [SAMPLE_IC, FIXED_IC1, FIXED_IC2]
        .into_iter()
        .find(|ic| ic.name.eq_ignore_ascii_case(name))
}
