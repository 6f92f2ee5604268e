// SPDX-License-Identifier: Apache-2.0

use thiserror::Error;

pub type Result<T, E = PufError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum PufError {
    /// The rejection sampler could not land inside the truncation bound.
    #[error("degenerate variation spec: no sample within ±{bound} after {attempts} draws")]
    DegenerateSpec { bound: f64, attempts: usize },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("non-positive gate delay {delay_ps} ps (length_factor={length_factor}, k_temp={k_temp}, T={temperature})")]
    NonPositiveDelay {
        delay_ps: f64,
        length_factor: f64,
        k_temp: f64,
        temperature: f64,
    },

    #[error("temperature {0} °C outside the simulator range [-40, 125]")]
    TemperatureOutOfRange(f64),

    #[error("challenge/layout mismatch: {0}")]
    ChallengeMismatch(String),

    #[error("not in PUF mode")]
    NotPufMode,

    #[error("response length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("need at least {needed} dies, got {got}")]
    TooFewDies { needed: usize, got: usize },

    #[error("dataset has no stress responses")]
    EmptyStress,

    #[error("corrupt dataset: {0}")]
    CorruptDataset(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
