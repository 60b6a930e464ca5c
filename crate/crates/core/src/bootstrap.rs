//! Wild bootstrap: residuals per testing problem, multiplier resampling,
//! bootstrap statistics and p-values.
//!
//! Bootstrap samples always satisfy the null of their problem: `y* = ε*`
//! tested against `θ̄ = 0` for the location problem, `y* = ε*` for CUSUM,
//! and `y*_t = y*_{t-1} + ε*_t` with `y*_0 = 0` for the unit root.

use alloc::vec;
use alloc::vec::Vec;

use crate::distributions::{Level, MultiplierLaw, SeedPath};
use crate::error::{Error, Result};
use crate::statistics::{self, Model, Sample, Statistic, Tail};

#[derive(Debug, Clone, PartialEq)]
pub struct BootstrapConfig {
    replications: usize,
    law: MultiplierLaw,
    seed: SeedPath,
}

impl BootstrapConfig {
    pub const DEFAULT_REPLICATIONS: usize = 199;

    pub fn new(replications: usize, law: MultiplierLaw, seed: SeedPath) -> Result<Self> {
        if replications == 0 {
            return Err(Error::InvalidConfig("bootstrap needs at least one replication".into()));
        }
        Ok(Self {
            replications,
            law,
            seed,
        })
    }

    pub fn replications(&self) -> usize {
        self.replications
    }

    pub fn law(&self) -> MultiplierLaw {
        self.law
    }

    pub fn seed(&self) -> &SeedPath {
        &self.seed
    }

    /// Lineage of the multipliers of replicate `b`.
    pub fn replicate_seed(&self, b: usize) -> SeedPath {
        self.seed.child(Level::Multipliers, b as u64)
    }
}

/// Outcome of one bootstrap test.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BootstrapRun {
    pub stat: Statistic,
    pub tail: Tail,
    pub tau_n: f64,
    /// `τ*_1, …, τ*_B`, indexed by replicate.
    pub tau_star: Vec<f64>,
    pub p_value: f64,
}

impl BootstrapRun {
    pub fn replications(&self) -> usize {
        self.tau_star.len()
    }

    /// Recomputes the p-value from the stored replicates.
    pub fn recompute_p_value(&self) -> f64 {
        p_value(self.tau_n, &self.tau_star, self.tail)
    }

    /// Bootstrap cdf `F*_n(x) = B⁻¹ #{b : τ*_b ≤ x}`.
    pub fn bootstrap_cdf(&self, x: f64) -> f64 {
        self.tau_star.iter().filter(|&&t| t <= x).count() as f64 / self.tau_star.len() as f64
    }
}

fn same_problem(a: &Model, b: &Model) -> bool {
    core::mem::discriminant(a) == core::mem::discriminant(b)
}

/// Location: `y_t - θ̄`; CUSUM: `y_t - ȳ`; unit root: `Δy_t` (null imposed).
pub fn residuals_for(model: &Model, sample: &Sample) -> Result<Vec<f64>> {
    if !same_problem(model, &sample.model()) {
        return Err(Error::InvalidConfig(alloc::format!(
            "sample belongs to the {} problem, not {}",
            sample.model().name(),
            model.name()
        )));
    }
    let y = sample.y();
    Ok(match *model {
        Model::Location { theta_bar } => y.iter().map(|v| v - theta_bar).collect(),
        Model::Cusum => {
            let ybar = y.iter().sum::<f64>() / y.len() as f64;
            y.iter().map(|v| v - ybar).collect()
        }
        Model::UnitRoot => statistics::differences(y),
    })
}

/// `ε*_t = ε̂_t w*_t` with the multipliers of replicate `b` (1-based).
pub fn wild_resample(residuals: &[f64], config: &BootstrapConfig, b: usize) -> Result<Vec<f64>> {
    if residuals.is_empty() {
        return Err(Error::TooShort { min: 1, got: 0 });
    }
    if b == 0 || b > config.replications {
        return Err(Error::IndexOutOfRange {
            index: b,
            max: config.replications,
        });
    }
    let mut out = vec![0.0; residuals.len()];
    config.law.fill(&mut config.replicate_seed(b).rng(), &mut out);
    out.iter_mut().zip(residuals).for_each(|(w, e)| *w *= e);
    Ok(out)
}

/// The statistic evaluated on the bootstrap sample built from `eps_star`.
pub fn bootstrap_statistic(stat: Statistic, eps_star: &[f64]) -> Result<f64> {
    if eps_star.is_empty() {
        return Err(Error::TooShort { min: 1, got: 0 });
    }
    match stat.default_model() {
        Model::Location { .. } => statistics::location_value(eps_star, 0.0, stat),
        Model::Cusum => statistics::cusum_value(eps_star, stat),
        Model::UnitRoot => statistics::unit_root_value(eps_star, stat),
    }
}

/// `(1 + #{b : τ*_b ≤ τ_n}) / (B + 1)` for the left tail and
/// `(1 + #{b : τ*_b ≥ τ_n}) / (B + 1)` for the right tail; ties count.
pub fn p_value(tau_n: f64, tau_star: &[f64], tail: Tail) -> f64 {
    let hits = match tail {
        Tail::Left => tau_star.iter().filter(|&&t| t <= tau_n).count(),
        Tail::Right => tau_star.iter().filter(|&&t| t >= tau_n).count(),
    };
    (1 + hits) as f64 / (tau_star.len() + 1) as f64
}

/// Computes `τ_n`, `B` wild-bootstrap replicates and the p-value.
pub fn run_bootstrap(sample: &Sample, stat: Statistic, config: &BootstrapConfig) -> Result<BootstrapRun> {
    let model = sample.model();
    let tau_n = sample.statistic(stat)?.value;
    let residuals = residuals_for(&model, sample)?;
    let n = residuals.len();
    let mut star = vec![0.0; n];
    let mut tau_star = Vec::with_capacity(config.replications);
    for b in 1..=config.replications {
        config.law.fill(&mut config.replicate_seed(b).rng(), &mut star);
        star.iter_mut().zip(&residuals).for_each(|(w, e)| *w *= e);
        tau_star.push(bootstrap_statistic(stat, &star)?);
    }
    let tail = stat.tail();
    let p = p_value(tau_n, &tau_star, tail);
    Ok(BootstrapRun {
        stat,
        tail,
        tau_n,
        tau_star,
        p_value: p,
    })
}
