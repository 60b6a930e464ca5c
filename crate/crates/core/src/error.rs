use alloc::string::String;

use crate::statistics::Statistic;

/// Errors raised by the simulation and testing routines.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("sample size must be at least {min}, got {got}")]
    TooShort { min: usize, got: usize },

    #[error("invalid specification: {0}")]
    InvalidSpec(String),

    #[error("GARCH coefficients invalid at n = {n}: beta_n = {beta} < 0")]
    GarchCoefficients { n: usize, beta: f64 },

    #[error("jump probability lambda/n = {0} exceeds 1")]
    JumpProbability(f64),

    #[error("zero modulus at position {0}: sign is undefined")]
    ZeroModulus(usize),

    #[error("index {index} outside the valid range 1..={max}")]
    IndexOutOfRange { index: usize, max: usize },

    #[error("modulus inversion failed at t = {t}: squared innovation {value} is negative")]
    InversionFailed { t: usize, value: f64 },

    #[error("degenerate denominator while computing {0:?}")]
    Degenerate(Statistic),

    #[error("statistic {stat:?} does not belong to the {problem} problem")]
    ModelMismatch { stat: Statistic, problem: &'static str },

    #[error("diffusion variance became non-positive at step {step} of {steps}")]
    NonPositiveVariance { step: usize, steps: usize },

    #[error("invalid experiment configuration: {0}")]
    InvalidConfig(String),
}

pub type Result<T> = core::result::Result<T, Error>;
