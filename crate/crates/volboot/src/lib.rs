//! Parallel Monte Carlo harness, CSV/JSON/SVG outputs and the `volboot`
//! command line on top of `volboot-core`.

pub mod cli;
pub mod error;
pub mod harness;
pub mod io;
pub mod manifest;
pub mod render;

pub use error::{AppError, Result};
pub use harness::{Harness, OracleConfig, OracleRun};
pub use manifest::{RunConfig, RunManifest};
