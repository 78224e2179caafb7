use std::io;

use thiserror::Error;

/// Errors raised across the reduced-order modelling pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("integration failed at t = {time}: non-finite state")]
    IntegrationFailure { time: f64 },

    #[error("simulation failed for gamma = {gamma}, trajectory {trajectory} at t = {time}")]
    CampaignFailure {
        gamma: f64,
        trajectory: usize,
        time: f64,
    },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("clock mismatch: {0}")]
    ClockMismatch(String),

    #[error("unknown training set {0:?}")]
    UnknownTrainingSet(String),

    #[error("malformed file: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
}
