use std::time::{Duration, SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

use volboot_core::montecarlo::ExperimentConfig;

use crate::harness::OracleConfig;

/// What a run did; enough to repeat it exactly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "command", content = "config", rename_all = "lowercase")]
pub enum RunConfig {
    Size(ExperimentConfig),
    Power(ExperimentConfig),
    Oracle(OracleConfig),
}

impl RunConfig {
    pub fn seed(&self) -> u64 {
        match self {
            Self::Size(c) | Self::Power(c) => c.master_seed,
            Self::Oracle(c) => c.master_seed,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Size(_) => "size",
            Self::Power(_) => "power",
            Self::Oracle(_) => "oracle",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    #[serde(flatten)]
    pub run: RunConfig,
    pub seed: u64,
    /// Worker threads; results do not depend on it.
    pub threads: usize,
    pub started_unix_ms: u64,
    pub finished_unix_ms: u64,
    pub duration_secs: f64,
    pub outputs: Vec<String>,
}

impl RunManifest {
    pub fn new(run: RunConfig, threads: usize, started: SystemTime, outputs: Vec<String>) -> Self {
        let finished = SystemTime::now();
        let elapsed = finished.duration_since(started).unwrap_or(Duration::ZERO);
        Self {
            tool: env!("CARGO_PKG_NAME").into(),
            version: env!("CARGO_PKG_VERSION").into(),
            seed: run.seed(),
            run,
            threads,
            started_unix_ms: unix_ms(started),
            finished_unix_ms: unix_ms(finished),
            duration_secs: elapsed.as_secs_f64(),
            outputs,
        }
    }
}

fn unix_ms(t: SystemTime) -> u64 {
    t.duration_since(UNIX_EPOCH).map_or(0, |d| d.as_millis() as u64)
}
