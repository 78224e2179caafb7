//! ROM quality measures: relative errors, prediction times and spectra.

pub mod error;
pub mod spectrum;
pub mod study;

pub use error::{prediction_time, relative_error_series, ErrorSeries, PredictionTime, DEFAULT_TOLERANCE};
pub use spectrum::{mode_energies, power_spectrum, PowerSpectrum};
pub use study::{
    averaged_prediction_time, reference_trajectory, rom_prediction_time, AveragedPrediction, PredictionOutcome,
    DEFAULT_NUM_ICS, TEST_MODE_COUNTS,
};
