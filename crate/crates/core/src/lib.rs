//! Wild-bootstrap inference under non-stationary stochastic volatility.
//!
//! The crate is `no_std` with `alloc`. It covers innovation and multiplier
//! laws, discrete volatility recursions (stochastic volatility, near-integrated
//! GARCH, jumps), the location / CUSUM / unit-root test statistics, the wild
//! bootstrap, a sequential Monte Carlo harness and an Euler oracle for the
//! continuous-time limits.

#![no_std]
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod bootstrap;
pub mod distributions;
pub mod ecdf;
pub mod error;
pub mod limitoracle;
pub mod montecarlo;
pub mod statistics;
pub mod volatility;

pub use bootstrap::{run_bootstrap, BootstrapConfig, BootstrapRun};
pub use distributions::{InnovationDraw, InnovationLaw, MultiplierLaw, SeedPath};
pub use error::{Error, Result};
pub use statistics::{Model, Sample, Statistic, Tail};
pub use volatility::{GarchSpec, JumpSpec, SvSpec, VolSpec, VolatilityPath};
