//! Parallel drivers for the core experiments.
//!
//! Every replicate draws from its own seed lineage and results are collected
//! in index order, so tables are bit-identical for any thread count.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use volboot_core::distributions::{Level, SeedPath};
use volboot_core::ecdf::ks_two_sample;
use volboot_core::limitoracle::{discrete_mean_variance, simulate_limit, DiffusionSpec};
use volboot_core::montecarlo::{
    power_tables, prepare_path, replicate_power, replicate_size, size_tables, split_by_stat, ExperimentConfig,
    FanChartTable, PowerTable, PreparedPath,
};

use crate::error::{AppError, Result};

pub struct Harness {
    pool: rayon::ThreadPool,
}

impl Harness {
    /// `threads = 0` lets rayon pick.
    pub fn new(threads: usize) -> Result<Self> {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build()?;
        Ok(Self { pool })
    }

    pub fn threads(&self) -> usize {
        self.pool.current_num_threads()
    }

    pub fn prepare_paths(&self, config: &ExperimentConfig) -> Result<Vec<PreparedPath>> {
        config.validate()?;
        let paths = self.pool.install(|| {
            (1..=config.n_paths)
                .into_par_iter()
                .map(|p| prepare_path(config, p))
                .collect::<volboot_core::Result<Vec<_>>>()
        })?;
        Ok(paths)
    }

    pub fn run_size(&self, config: &ExperimentConfig) -> Result<Vec<FanChartTable>> {
        if config.alternative.is_some() {
            return Err(AppError::Config("size experiment takes no alternative".into()));
        }
        let paths = self.prepare_paths(config)?;
        let k = config.stats.len();
        let mut by_stat = vec![Vec::with_capacity(config.n_paths); k];
        for prepared in &paths {
            let reps = self.pool.install(|| {
                (1..=config.n_reps)
                    .into_par_iter()
                    .map(|r| replicate_size(config, prepared, r))
                    .collect::<volboot_core::Result<Vec<_>>>()
            })?;
            for (s, col) in split_by_stat(&reps, k).into_iter().enumerate() {
                by_stat[s].push(col);
            }
        }
        Ok(size_tables(config, &by_stat))
    }

    pub fn run_power(&self, config: &ExperimentConfig) -> Result<Vec<PowerTable>> {
        if config.alternative.is_none() {
            return Err(AppError::Config("power experiment needs an alternative".into()));
        }
        let paths = self.prepare_paths(config)?;
        let mut per_path = Vec::with_capacity(config.n_paths);
        for prepared in &paths {
            let reps = self.pool.install(|| {
                (1..=config.n_reps)
                    .into_par_iter()
                    .map(|r| replicate_power(config, prepared, r))
                    .collect::<volboot_core::Result<Vec<_>>>()
            })?;
            per_path.push(reps);
        }
        Ok(power_tables(config, &per_path)?)
    }

    pub fn run_oracle(&self, config: &OracleConfig) -> Result<OracleRun> {
        config.validate()?;
        let master = SeedPath::new(config.master_seed);
        let samples = self.pool.install(|| {
            (1..=config.reps)
                .into_par_iter()
                .map(|r| {
                    let f = simulate_limit(&config.spec, config.steps, &master.child(Level::Oracle, r as u64))?;
                    Ok(OracleSample {
                        replicate: r,
                        v1: f.v1,
                        m1: f.m1,
                    })
                })
                .collect::<volboot_core::Result<Vec<_>>>()
        })?;
        let discrete_v1 = match config.discrete_n {
            None => Vec::new(),
            Some(n) => self.pool.install(|| {
                (1..=config.reps)
                    .into_par_iter()
                    .map(|r| discrete_mean_variance(&config.spec, n, &master.child(Level::Path, r as u64)))
                    .collect::<volboot_core::Result<Vec<_>>>()
            })?,
        };
        let summary = OracleSummary::new(config, &samples, &discrete_v1);
        Ok(OracleRun {
            samples,
            discrete_v1,
            summary,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleConfig {
    pub spec: DiffusionSpec,
    pub steps: usize,
    pub reps: usize,
    pub master_seed: u64,
    /// Sample size of the discrete recursion compared against the oracle.
    pub discrete_n: Option<usize>,
}

impl OracleConfig {
    pub fn validate(&self) -> Result<()> {
        self.spec.validate()?;
        if self.steps < volboot_core::limitoracle::MIN_STEPS {
            return Err(volboot_core::Error::TooShort {
                min: volboot_core::limitoracle::MIN_STEPS,
                got: self.steps,
            }
            .into());
        }
        if self.reps == 0 {
            return Err(AppError::Config("oracle needs at least one replicate".into()));
        }
        if self.discrete_n == Some(0) {
            return Err(AppError::Config("discrete comparison needs n >= 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OracleSample {
    pub replicate: usize,
    pub v1: f64,
    pub m1: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleSummary {
    pub reps: usize,
    pub steps: usize,
    pub mean_v1: f64,
    pub var_v1: f64,
    pub mean_m1: f64,
    pub var_m1: f64,
    pub discrete_n: Option<usize>,
    /// Two-sample KS between oracle and discrete `v1` samples.
    pub ks_discrete: Option<f64>,
}

impl OracleSummary {
    fn new(config: &OracleConfig, samples: &[OracleSample], discrete: &[f64]) -> Self {
        let v1: Vec<f64> = samples.iter().map(|s| s.v1).collect();
        let m1: Vec<f64> = samples.iter().map(|s| s.m1).collect();
        let (mean_v1, var_v1) = mean_var(&v1);
        let (mean_m1, var_m1) = mean_var(&m1);
        Self {
            reps: samples.len(),
            steps: config.steps,
            mean_v1,
            var_v1,
            mean_m1,
            var_m1,
            discrete_n: config.discrete_n,
            ks_discrete: (!discrete.is_empty()).then(|| ks_two_sample(&v1, discrete)),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleRun {
    pub samples: Vec<OracleSample>,
    /// Empty unless a discrete comparison was requested.
    pub discrete_v1: Vec<f64>,
    pub summary: OracleSummary,
}

fn mean_var(x: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let m = x.iter().sum::<f64>() / n;
    let v = if x.len() > 1 {
        x.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    (m, v)
}
