use crate::error::{Error, Result};
use crate::simulate::Trajectory;

/// Default relative-error tolerance for prediction time.
pub const DEFAULT_TOLERANCE: f64 = 0.1;

#[derive(Debug, Clone, PartialEq)]
pub struct ErrorSeries {
    pub times: Vec<f64>,
    pub rel_l2: Vec<f64>,
}

/// `||u_rom - u_fom|| / ||u_fom||` at every shared recording time.
pub fn relative_error_series(rom: &Trajectory, fom: &Trajectory) -> Result<ErrorSeries> {
    if rom.grid.num_points() != fom.grid.num_points() {
        return Err(Error::DimensionMismatch(format!(
            "trajectories have M = {} and {}",
            rom.grid.num_points(),
            fom.grid.num_points()
        )));
    }
    if rom.len() != fom.len() || rom.record_every != fom.record_every {
        return Err(Error::ClockMismatch(format!(
            "{} records every {} vs {} records every {}",
            rom.len(),
            rom.record_every,
            fom.len(),
            fom.record_every
        )));
    }
    let rel_l2 = rom
        .snapshots()
        .zip(fom.snapshots())
        .map(|(a, b)| {
            let (mut diff, mut norm) = (0.0, 0.0);
            for (x, y) in a.iter().zip(b) {
                diff += (x - y) * (x - y);
                norm += y * y;
            }
            if norm == 0.0 {
                if diff == 0.0 { 0.0 } else { f64::INFINITY }
            } else {
                (diff / norm).sqrt()
            }
        })
        .collect();
    Ok(ErrorSeries { times: fom.times(), rel_l2 })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PredictionTime {
    pub time: f64,
    /// True when the tolerance was never exceeded over the horizon.
    pub survived: bool,
}

/// Largest recorded `t` whose running supremum of the error stays within
/// `tol`; zero if the first sample already exceeds it.
pub fn prediction_time(err: &ErrorSeries, tol: f64) -> Result<PredictionTime> {
    if err.rel_l2.is_empty() {
        return Err(Error::invalid("empty error series"));
    }
    // NaN counts as exceeding the tolerance
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    let first = err.rel_l2.iter().position(|e| !(*e <= tol));
    match first {
        None => Ok(PredictionTime { time: *err.times.last().unwrap(), survived: true }),
        Some(0) => Ok(PredictionTime { time: 0.0, survived: false }),
        Some(i) => Ok(PredictionTime { time: err.times[i - 1], survived: false }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;
    use proptest::prelude::*;

    fn traj(data: Vec<f64>, m: usize) -> Trajectory {
        Trajectory {
            gamma: 0.0,
            grid: Grid::new(m, 1.0).unwrap(),
            record_every: 0.5,
            ic: None,
            initial: vec![0.0; m],
            data,
        }
    }

    fn series(values: &[f64]) -> ErrorSeries {
        ErrorSeries {
            times: (1..=values.len()).map(|j| j as f64 * 0.5).collect(),
            rel_l2: values.to_vec(),
        }
    }

    #[test]
    fn identical_and_scaled() {
        let fom = traj(vec![1.0, -2.0, 3.0, 0.5, 0.1, 0.2], 3);
        let zero = relative_error_series(&fom, &fom).unwrap();
        assert!(zero.rel_l2.iter().all(|&e| e == 0.0));
        let scaled = traj(fom.data.iter().map(|v| 1.1 * v).collect(), 3);
        let e = relative_error_series(&scaled, &fom).unwrap();
        assert!(e.rel_l2.iter().all(|v| (v - 0.1).abs() < 1e-12));
    }

    #[test]
    fn two_snapshot_hand_values() {
        // snapshot 1: fom (3, 4), rom (3, 0) -> 4 / 5; snapshot 2: fom (1, 0), rom (0, 1) -> sqrt 2
        let fom = traj(vec![3.0, 4.0, 1.0, 0.0], 2);
        let rom = traj(vec![3.0, 0.0, 0.0, 1.0], 2);
        let e = relative_error_series(&rom, &fom).unwrap();
        assert!((e.rel_l2[0] - 0.8).abs() < 1e-15);
        assert!((e.rel_l2[1] - 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(e.times, vec![0.5, 1.0]);
    }

    #[test]
    fn clock_mismatch() {
        let a = traj(vec![1.0; 4], 2);
        let b = traj(vec![1.0; 6], 2);
        assert!(matches!(relative_error_series(&a, &b), Err(Error::ClockMismatch(_))));
    }

    #[test]
    fn running_supremum_rule() {
        let pt = prediction_time(&series(&[0.01, 0.05, 0.2, 0.05]), 0.1).unwrap();
        assert_eq!(pt, PredictionTime { time: 1.0, survived: false });
        let all = prediction_time(&series(&[0.01, 0.02, 0.03]), 0.1).unwrap();
        assert_eq!(all, PredictionTime { time: 1.5, survived: true });
        let first = prediction_time(&series(&[0.5, 0.01]), 0.1).unwrap();
        assert_eq!(first.time, 0.0);
        assert!(prediction_time(&series(&[]), 0.1).is_err());
        // NaN counts as exceeded
        assert_eq!(prediction_time(&series(&[0.01, f64::NAN]), 0.1).unwrap().time, 0.5);
    }

    proptest! {
        #[test]
        fn monotone_in_tolerance(values in proptest::collection::vec(0.0f64..1.0, 1..50), t1 in 0.0f64..1.0, t2 in 0.0f64..1.0) {
            let s = series(&values);
            let (lo, hi) = if t1 <= t2 { (t1, t2) } else { (t2, t1) };
            prop_assert!(prediction_time(&s, lo).unwrap().time <= prediction_time(&s, hi).unwrap().time);
        }

        #[test]
        fn appending_below_sup_never_decreases(values in proptest::collection::vec(0.0f64..0.2, 1..40), extra in 0.0f64..1.0) {
            let s = series(&values);
            let sup = values.iter().copied().fold(0.0, f64::max);
            let mut longer = values.clone();
            longer.push(extra * sup);
            let before = prediction_time(&s, 0.1).unwrap().time;
            let after = prediction_time(&series(&longer), 0.1).unwrap().time;
            prop_assert!(after >= before);
        }

        #[test]
        fn invariant_under_common_rescaling(data in proptest::collection::vec(-1.0f64..1.0, 8), noise in proptest::collection::vec(-0.1f64..0.1, 8), c in 0.1f64..10.0) {
            prop_assume!(data[..4].iter().any(|v| v.abs() > 1e-3) && data[4..].iter().any(|v| v.abs() > 1e-3));
            let fom = traj(data.clone(), 4);
            let rom = traj(data.iter().zip(&noise).map(|(a, b)| a + b).collect(), 4);
            let e1 = relative_error_series(&rom, &fom).unwrap();
            let fom_c = traj(fom.data.iter().map(|v| -c * v).collect(), 4);
            let rom_c = traj(rom.data.iter().map(|v| -c * v).collect(), 4);
            let e2 = relative_error_series(&rom_c, &fom_c).unwrap();
            for (a, b) in e1.rel_l2.iter().zip(&e2.rel_l2) {
                prop_assert!((a - b).abs() <= 1e-12 * a.max(1.0));
            }
        }
    }
}
