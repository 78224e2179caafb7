//! Time-averaged Fourier energy spectra.
//!
//! Uses `u_hat_k = (1/M) sum_i u_i exp(-2 pi i k i / M)` and averages
//! `|u_hat_k|^2` over the snapshots in the window.

use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::simulate::Trajectory;

#[derive(Debug, Clone, PartialEq)]
pub struct PowerSpectrum {
    /// `k = 0..=M/2`.
    pub wavenumbers: Vec<usize>,
    pub energy: Vec<f64>,
    pub window: (f64, f64),
    pub samples: usize,
}

/// `|u_hat_k|^2` for all `k = 0..M`.
pub fn mode_energies(u: &[f64]) -> Vec<f64> {
    let m = u.len();
    let fft = FftPlanner::new().plan_fft_forward(m);
    let mut buf: Vec<Complex64> = u.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    fft.process(&mut buf);
    let scale = 1.0 / m as f64;
    buf.iter().map(|c| (c * scale).norm_sqr()).collect()
}

/// Averages over snapshots with `t_start <= t <= t_end`.
pub fn power_spectrum(traj: &Trajectory, window: (f64, f64)) -> Result<PowerSpectrum> {
    let (t0, t1) = window;
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    let empty = !(t0 <= t1);
    if empty {
        return Err(Error::invalid(format!("empty window [{t0}, {t1}]")));
    }
    let m = traj.grid.num_points();
    let tol = 1e-9 * traj.record_every;
    let selected: Vec<usize> = (0..traj.len())
        .filter(|&j| traj.time(j) >= t0 - tol && traj.time(j) <= t1 + tol)
        .collect();
    if selected.len() < 2 {
        return Err(Error::invalid(format!(
            "window [{t0}, {t1}] holds {} snapshots, need at least 2",
            selected.len()
        )));
    }
    let fft = FftPlanner::new().plan_fft_forward(m);
    let half = m / 2;
    let scale = 1.0 / m as f64;
    let mut energy = vec![0.0; half + 1];
    let mut buf = vec![Complex64::default(); m];
    for &j in &selected {
        for (b, &v) in buf.iter_mut().zip(traj.snapshot(j)) {
            *b = Complex64::new(v, 0.0);
        }
        fft.process(&mut buf);
        for (e, c) in energy.iter_mut().zip(&buf) {
            *e += (c * scale).norm_sqr();
        }
    }
    let count = selected.len() as f64;
    energy.iter_mut().for_each(|e| *e /= count);
    Ok(PowerSpectrum {
        wavenumbers: (0..=half).collect(),
        energy,
        window,
        samples: selected.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;

    fn static_traj(profile: Vec<f64>, copies: usize) -> Trajectory {
        let m = profile.len();
        Trajectory {
            gamma: 0.0,
            grid: Grid::new(m, 60.0).unwrap(),
            record_every: 0.5,
            ic: None,
            initial: profile.clone(),
            data: profile.iter().copied().cycle().take(m * copies).collect(),
        }
    }

    /// O(M^2) DFT with the same normalization.
    fn direct_dft_energy(u: &[f64], k: usize) -> f64 {
        let m = u.len() as f64;
        let (mut re, mut im) = (0.0, 0.0);
        for (i, v) in u.iter().enumerate() {
            let a = -2.0 * std::f64::consts::PI * k as f64 * i as f64 / m;
            re += v * a.cos();
            im += v * a.sin();
        }
        (re * re + im * im) / (m * m)
    }

    #[test]
    fn constant_field() {
        let s = power_spectrum(&static_traj(vec![0.3; 32], 4), (0.0, 10.0)).unwrap();
        assert!((s.energy[0] - 0.09).abs() < 1e-15);
        assert!(s.energy[1..].iter().all(|&e| e < 1e-30));
        assert_eq!(s.wavenumbers.len(), 17);
    }

    #[test]
    fn single_cosine_has_quarter_energy() {
        let g = Grid::new(64, 60.0).unwrap();
        let u: Vec<f64> = g.coordinates().map(|x| (2.0 * std::f64::consts::PI * x / 60.0).cos()).collect();
        assert!((direct_dft_energy(&u, 1) - 0.25).abs() < 1e-14);
        let s = power_spectrum(&static_traj(u, 3), (0.5, 1.5)).unwrap();
        assert!((s.energy[1] - 0.25).abs() < 1e-14);
        for (k, e) in s.energy.iter().enumerate() {
            if k != 1 {
                assert!(*e < 1e-28, "k={k}");
            }
        }
    }

    #[test]
    fn matches_direct_dft_and_parseval() {
        let u: Vec<f64> = (0..40).map(|i| ((i * 7 % 11) as f64 - 5.0) * 0.1).collect();
        let e = mode_energies(&u);
        for (k, ek) in e.iter().enumerate() {
            assert!((ek - direct_dft_energy(&u, k)).abs() < 1e-14);
        }
        let parseval: f64 = e.iter().sum();
        let mean_sq: f64 = u.iter().map(|v| v * v).sum::<f64>() / 40.0;
        assert!((parseval - mean_sq).abs() < 1e-12);
    }

    #[test]
    fn rotation_invariance() {
        let u: Vec<f64> = (0..32).map(|i| (i as f64 * 0.37).sin() + 0.2 * (i as f64 * 1.3).cos()).collect();
        let rotated: Vec<f64> = (0..32).map(|i| u[(i + 9) % 32]).collect();
        let a = power_spectrum(&static_traj(u, 2), (0.0, 1.0)).unwrap();
        let b = power_spectrum(&static_traj(rotated, 2), (0.0, 1.0)).unwrap();
        for (x, y) in a.energy.iter().zip(&b.energy) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn empty_window_is_rejected() {
        let t = static_traj(vec![1.0; 8], 3);
        assert!(power_spectrum(&t, (5.0, 1.0)).is_err());
        assert!(power_spectrum(&t, (0.0, 0.6)).is_err());
        assert!(power_spectrum(&t, (100.0, 200.0)).is_err());
    }
}
