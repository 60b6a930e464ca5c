//! Conditional Monte Carlo experiments: size (fan charts of bootstrap
//! p-value cdfs per volatility path) and local power.
//!
//! Lineage: `master → Path(p) → {Volatility, Innovations}` for the path and
//! `Path(p) → Replicate(r) → {Signs, Innovations, Bootstrap → Multipliers(b)}`
//! for each replicate. Replicate seeds do not depend on `c`, so power curves
//! use common random numbers across the grid.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::bootstrap::{self, BootstrapConfig};
use crate::distributions::{
    conditional_sign_redraw, draw_innovations, InnovationDraw, InnovationLaw, Level, MultiplierLaw, SeedPath,
};
use crate::ecdf::{self, Reference};
use crate::error::{Error, Result};
use crate::statistics::{Model, Sample, Statistic, Tail};
use crate::volatility::{self, GarchSpec, VolSpec, VolatilityPath};

pub use crate::ecdf::ks_distance;

/// Alternative family, one per testing problem.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum AlternativeKind {
    /// `y_t = -n^{-1/2} c + ε_t`, tested against `θ̄ = 0`.
    Location,
    /// Mean shift of `n^{-1/2} c` after `t = ⌊n/2⌋`.
    Cusum,
    /// `y_t = (1 - c/n) y_{t-1} + ε_t`.
    UnitRoot,
}

impl AlternativeKind {
    pub fn for_model(model: &Model) -> Self {
        match model {
            Model::Location { .. } => Self::Location,
            Model::Cusum => Self::Cusum,
            Model::UnitRoot => Self::UnitRoot,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Alternative {
    pub kind: AlternativeKind,
    pub c_grid: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ExperimentConfig {
    pub law: InnovationLaw,
    pub vol: VolSpec,
    /// Statistics evaluated on every replicate; all must share one problem.
    pub stats: Vec<Statistic>,
    pub n: usize,
    pub n_paths: usize,
    pub n_reps: usize,
    /// Bootstrap replications `B`.
    pub replications: usize,
    pub multiplier: MultiplierLaw,
    pub alternative: Option<Alternative>,
    pub alpha: f64,
    pub master_seed: u64,
    pub q_grid: Vec<f64>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            law: InnovationLaw::Gaussian,
            vol: VolSpec::Garch(GarchSpec::monte_carlo_default()),
            stats: vec![Statistic::LocationStudentizedNull],
            n: 500,
            n_paths: 100,
            n_reps: 1000,
            replications: BootstrapConfig::DEFAULT_REPLICATIONS,
            multiplier: MultiplierLaw::Gaussian,
            alternative: None,
            alpha: 0.05,
            master_seed: 42,
            q_grid: default_q_grid(),
        }
    }
}

/// `{0.01, 0.02, …, 0.99}`; `0.05` is a member, so the ecdf at the nominal
/// level is read off directly.
pub fn default_q_grid() -> Vec<f64> {
    (1..100).map(|i| i as f64 / 100.0).collect()
}

/// Replicates per path at the full budget: 50,000 for size, 10,000 for power.
pub const FULL_SIZE_REPS: usize = 50_000;
pub const FULL_POWER_REPS: usize = 10_000;

impl ExperimentConfig {
    pub fn problem(&self) -> Model {
        self.stats.first().map_or(Model::Location { theta_bar: 0.0 }, Statistic::default_model)
    }

    pub fn full_scale(mut self) -> Self {
        self.n_reps = if self.alternative.is_some() {
            FULL_POWER_REPS
        } else {
            FULL_SIZE_REPS
        };
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if self.n < 2 {
            return Err(Error::TooShort { min: 2, got: self.n });
        }
        if self.n_paths == 0 || self.n_reps == 0 || self.replications == 0 {
            return bad("paths, replicates and bootstrap replications must all be at least 1".into());
        }
        let Some(first) = self.stats.first() else {
            return bad("no statistic selected".into());
        };
        let problem = first.default_model();
        if let Some(s) = self.stats.iter().find(|s| !s.fits(&problem)) {
            return bad(alloc::format!(
                "{} and {} belong to different problems",
                first.short_name(),
                s.short_name()
            ));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return bad(alloc::format!("alpha must lie in (0, 1), got {}", self.alpha));
        }
        if self.q_grid.is_empty()
            || self.q_grid.iter().any(|q| !(0.0..=1.0).contains(q))
            || self.q_grid.windows(2).any(|w| w[1] <= w[0])
        {
            return bad("q grid must be a nonempty increasing subset of [0, 1]".into());
        }
        if let Some(alt) = &self.alternative {
            if alt.kind != AlternativeKind::for_model(&problem) {
                return bad(alloc::format!(
                    "{:?} alternative does not match the {} problem",
                    alt.kind,
                    problem.name()
                ));
            }
            if alt.c_grid.is_empty()
                || alt.c_grid.iter().any(|c| !(c.is_finite() && *c >= 0.0))
                || alt.c_grid.windows(2).any(|w| w[1] < w[0])
            {
                return bad("c grid must be nonempty, nonnegative and sorted".into());
            }
        }
        self.vol.validate()?;
        match &self.vol {
            VolSpec::Garch(g) => {
                g.coefficients(self.n)?;
            }
            VolSpec::Jump(j) => {
                let p = j.lambda / self.n as f64;
                if p > 1.0 {
                    return Err(Error::JumpProbability(p));
                }
            }
            VolSpec::Sv(_) => {}
        }
        Ok(())
    }

    pub fn path_seed(&self, p: usize) -> SeedPath {
        SeedPath::new(self.master_seed).child(Level::Path, p as u64)
    }

    pub fn replicate_seed(&self, p: usize, r: usize) -> SeedPath {
        self.path_seed(p).child(Level::Replicate, r as u64)
    }
}

/// A volatility path plus what replicates need from it.
#[derive(Debug, Clone, PartialEq)]
pub struct PreparedPath {
    pub index: usize,
    pub path: VolatilityPath,
    /// `|z_1|, …, |z_{n-1}|` recovered from a GARCH path.
    pub moduli: Option<Vec<f64>>,
}

/// Simulates path `p` (1-based).
pub fn prepare_path(config: &ExperimentConfig, p: usize) -> Result<PreparedPath> {
    let seed = config.path_seed(p);
    let vol_seed = seed.child(Level::Volatility, 0);
    let (path, moduli) = match config.vol {
        VolSpec::Sv(s) => (volatility::gen_sv_path(s, config.n, &vol_seed)?, None),
        VolSpec::Jump(j) => (volatility::gen_jump_path(j, config.n, &vol_seed)?, None),
        VolSpec::Garch(g) => {
            let z = draw_innovations(config.law, config.n, &seed.child(Level::Innovations, 0))?;
            let path = volatility::gen_garch_path(g, config.n, &z)?;
            let moduli = volatility::garch_inverted_moduli(&g, &path)?;
            (path, Some(moduli))
        }
    };
    Ok(PreparedPath { index: p, path, moduli })
}

/// Draws `{z_t}` from its law conditional on the volatility path.
///
/// GARCH paths fix `|z_t|` for `t ≤ n-1`; only the signs are redrawn and
/// `z_n` is unconditional. Other paths are independent of `{z_t}`.
pub fn conditional_innovations(law: InnovationLaw, path: &VolatilityPath, seed: &SeedPath) -> Result<InnovationDraw> {
    match path.spec() {
        VolSpec::Garch(g) => {
            let moduli = volatility::garch_inverted_moduli(g, path)?;
            innovations_from_moduli(law, &moduli, seed)
        }
        _ => draw_innovations(law, path.len(), &seed.child(Level::Innovations, 0)),
    }
}

fn innovations_from_moduli(law: InnovationLaw, moduli: &[f64], seed: &SeedPath) -> Result<InnovationDraw> {
    // an exactly recovered zero has no sign to condition on; any modulus
    // small enough gives probability 1/2 and the product stays zero
    let guarded: Vec<f64> = moduli.iter().map(|&m| m.max(f64::MIN_POSITIVE)).collect();
    let mut signs = conditional_sign_redraw(&guarded, law, &seed.child(Level::Signs, 0))?;
    let last = draw_innovations(law, 1, &seed.child(Level::Innovations, 0))?;
    let mut all = moduli.to_vec();
    all.push(last.moduli()[0]);
    signs.push(last.signs()[0]);
    Ok(InnovationDraw::from_parts(all, signs))
}

fn replicate_errors(config: &ExperimentConfig, prepared: &PreparedPath, seed: &SeedPath) -> Result<Vec<f64>> {
    let z = match &prepared.moduli {
        Some(m) => innovations_from_moduli(config.law, m, seed)?,
        None => draw_innovations(config.law, config.n, &seed.child(Level::Innovations, 0))?,
    };
    Ok(z.z().iter().zip(prepared.path.sigmas()).map(|(z, s)| z * s).collect())
}

/// The sample of the problem at drift `c` (`c = 0` is the null).
pub fn alternative_sample(kind: AlternativeKind, eps: &[f64], c: f64) -> Vec<f64> {
    let nf = eps.len() as f64;
    match kind {
        AlternativeKind::Location => {
            let shift = c / libm::sqrt(nf);
            eps.iter().map(|e| e - shift).collect()
        }
        AlternativeKind::Cusum => {
            let shift = c / libm::sqrt(nf);
            let brk = eps.len() / 2;
            eps.iter()
                .enumerate()
                .map(|(i, e)| if i + 1 > brk { e + shift } else { *e })
                .collect()
        }
        AlternativeKind::UnitRoot => {
            let rho = 1.0 - c / nf;
            let mut level = 0.0;
            eps.iter()
                .map(|e| {
                    level = rho * level + e;
                    level
                })
                .collect()
        }
    }
}

/// Bootstrap p-values of every statistic on `y`, sharing residuals and
/// multipliers across statistics.
fn p_values(config: &ExperimentConfig, y: Vec<f64>, boot_seed: &SeedPath, out: &mut Vec<f64>) -> Result<()> {
    let model = config.problem();
    let sample = Sample::new(y, model)?;
    let taus = config
        .stats
        .iter()
        .map(|&s| sample.statistic(s).map(|v| v.value))
        .collect::<Result<Vec<_>>>()?;
    let residuals = bootstrap::residuals_for(&model, &sample)?;
    let boot = BootstrapConfig::new(config.replications, config.multiplier, boot_seed.clone())?;
    let mut hits = vec![0usize; taus.len()];
    let mut star = vec![0.0; residuals.len()];
    for b in 1..=config.replications {
        config.multiplier.fill(&mut boot.replicate_seed(b).rng(), &mut star);
        star.iter_mut().zip(&residuals).for_each(|(w, e)| *w *= e);
        for ((stat, tau), h) in config.stats.iter().zip(&taus).zip(hits.iter_mut()) {
            let t = bootstrap::bootstrap_statistic(*stat, &star)?;
            let hit = match stat.tail() {
                Tail::Left => t <= *tau,
                Tail::Right => t >= *tau,
            };
            *h += usize::from(hit);
        }
    }
    let denom = (config.replications + 1) as f64;
    out.extend(hits.iter().map(|&h| (1 + h) as f64 / denom));
    Ok(())
}

/// Null p-values of replicate `r` on a prepared path, one per statistic.
pub fn replicate_size(config: &ExperimentConfig, prepared: &PreparedPath, r: usize) -> Result<Vec<f64>> {
    let seed = config.replicate_seed(prepared.index, r);
    let eps = replicate_errors(config, prepared, &seed)?;
    let kind = AlternativeKind::for_model(&config.problem());
    let mut out = Vec::with_capacity(config.stats.len());
    p_values(config, alternative_sample(kind, &eps, 0.0), &seed.child(Level::Bootstrap, 0), &mut out)?;
    Ok(out)
}

/// p-values of replicate `r` for every `c`, laid out `[c][stat]`.
pub fn replicate_power(config: &ExperimentConfig, prepared: &PreparedPath, r: usize) -> Result<Vec<f64>> {
    let alt = config
        .alternative
        .as_ref()
        .ok_or_else(|| Error::InvalidConfig("power experiment needs an alternative".into()))?;
    let seed = config.replicate_seed(prepared.index, r);
    let eps = replicate_errors(config, prepared, &seed)?;
    let boot_seed = seed.child(Level::Bootstrap, 0);
    let mut out = Vec::with_capacity(alt.c_grid.len() * config.stats.len());
    for &c in &alt.c_grid {
        p_values(config, alternative_sample(alt.kind, &eps, c), &boot_seed, &mut out)?;
    }
    Ok(out)
}

/// Conditional ecdfs of bootstrap p-values, one row per volatility path.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct FanChartTable {
    pub stat: Statistic,
    pub q_grid: Vec<f64>,
    pub per_path_cdf: Vec<Vec<f64>>,
    pub unconditional_cdf: Vec<f64>,
}

impl FanChartTable {
    /// `p_values[path][replicate]`.
    pub fn from_p_values(stat: Statistic, q_grid: &[f64], p_values: &[Vec<f64>]) -> Self {
        let per_path_cdf: Vec<Vec<f64>> = p_values.iter().map(|p| ecdf::ecdf_on_grid(p, q_grid)).collect();
        let unconditional_cdf = column_means(&per_path_cdf, q_grid.len());
        Self {
            stat,
            q_grid: q_grid.to_vec(),
            per_path_cdf,
            unconditional_cdf,
        }
    }

    pub fn n_paths(&self) -> usize {
        self.per_path_cdf.len()
    }

    /// Index of `q` in the grid (exact match).
    pub fn q_index(&self, q: f64) -> Option<usize> {
        self.q_grid.iter().position(|&g| g == q)
    }

    /// KS distance of every path's ecdf to `U(0,1)` on the grid.
    pub fn ks_to_uniform(&self) -> Vec<f64> {
        self.per_path_cdf
            .iter()
            .map(|row| ks_distance(row, &self.q_grid, Reference::Uniform01).unwrap_or(f64::NAN))
            .collect()
    }

    /// Standard deviation across paths of the ecdf at grid point `q`.
    pub fn dispersion_at(&self, q: f64) -> Option<f64> {
        let i = self.q_index(q)?;
        let col: Vec<f64> = self.per_path_cdf.iter().map(|r| r[i]).collect();
        Some(std_dev(&col))
    }

    pub fn validate(&self) -> Result<()> {
        for row in self.per_path_cdf.iter().chain(core::iter::once(&self.unconditional_cdf)) {
            ks_distance(row, &self.q_grid, Reference::Uniform01)?;
        }
        let mean = column_means(&self.per_path_cdf, self.q_grid.len());
        if mean.iter().zip(&self.unconditional_cdf).any(|(a, b)| (a - b).abs() > 1e-12) {
            return Err(Error::InvalidConfig("unconditional row is not the mean of the path rows".into()));
        }
        Ok(())
    }
}

/// Rejection frequencies at level `alpha`, one row per volatility path.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PowerTable {
    pub stat: Statistic,
    pub c_grid: Vec<f64>,
    pub alpha: f64,
    pub per_path_rejection: Vec<Vec<f64>>,
}

impl PowerTable {
    /// `p_values[path][c][replicate]`.
    pub fn from_p_values(stat: Statistic, c_grid: &[f64], alpha: f64, p_values: &[Vec<Vec<f64>>]) -> Self {
        let per_path_rejection = p_values
            .iter()
            .map(|per_c| {
                per_c
                    .iter()
                    .map(|ps| ps.iter().filter(|&&p| p <= alpha).count() as f64 / ps.len().max(1) as f64)
                    .collect()
            })
            .collect();
        Self {
            stat,
            c_grid: c_grid.to_vec(),
            alpha,
            per_path_rejection,
        }
    }

    pub fn n_paths(&self) -> usize {
        self.per_path_rejection.len()
    }

    pub fn mean_rejection(&self) -> Vec<f64> {
        column_means(&self.per_path_rejection, self.c_grid.len())
    }
}

fn column_means(rows: &[Vec<f64>], width: usize) -> Vec<f64> {
    let mut out = vec![0.0; width];
    for row in rows {
        out.iter_mut().zip(row).for_each(|(o, v)| *o += v);
    }
    let k = rows.len().max(1) as f64;
    out.iter_mut().for_each(|o| *o /= k);
    out
}

fn std_dev(x: &[f64]) -> f64 {
    if x.len() < 2 {
        return 0.0;
    }
    let m = x.iter().sum::<f64>() / x.len() as f64;
    libm::sqrt(x.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (x.len() - 1) as f64)
}

/// Splits `[replicate][stat]` p-values into per-statistic vectors.
pub fn split_by_stat(per_rep: &[Vec<f64>], n_stats: usize) -> Vec<Vec<f64>> {
    (0..n_stats).map(|s| per_rep.iter().map(|v| v[s]).collect()).collect()
}

/// Sequential size experiment; one table per statistic.
pub fn run_size_experiment(config: &ExperimentConfig) -> Result<Vec<FanChartTable>> {
    config.validate()?;
    if config.alternative.is_some() {
        return Err(Error::InvalidConfig("size experiment takes no alternative".into()));
    }
    let k = config.stats.len();
    let mut by_stat: Vec<Vec<Vec<f64>>> = vec![Vec::with_capacity(config.n_paths); k];
    for p in 1..=config.n_paths {
        let prepared = prepare_path(config, p)?;
        let reps = (1..=config.n_reps)
            .map(|r| replicate_size(config, &prepared, r))
            .collect::<Result<Vec<_>>>()?;
        for (s, col) in split_by_stat(&reps, k).into_iter().enumerate() {
            by_stat[s].push(col);
        }
    }
    Ok(size_tables(config, &by_stat))
}

/// Assembles tables from `p_values[stat][path][replicate]`.
pub fn size_tables(config: &ExperimentConfig, p_values: &[Vec<Vec<f64>>]) -> Vec<FanChartTable> {
    config
        .stats
        .iter()
        .zip(p_values)
        .map(|(&s, rows)| FanChartTable::from_p_values(s, &config.q_grid, rows))
        .collect()
}

/// Sequential power experiment; one table per statistic.
pub fn run_power_experiment(config: &ExperimentConfig) -> Result<Vec<PowerTable>> {
    config.validate()?;
    let mut per_path = Vec::with_capacity(config.n_paths);
    for p in 1..=config.n_paths {
        let prepared = prepare_path(config, p)?;
        let reps = (1..=config.n_reps)
            .map(|r| replicate_power(config, &prepared, r))
            .collect::<Result<Vec<_>>>()?;
        per_path.push(reps);
    }
    power_tables(config, &per_path)
}

/// Assembles tables from `p_values[path][replicate][c * n_stats + stat]`.
pub fn power_tables(config: &ExperimentConfig, p_values: &[Vec<Vec<f64>>]) -> Result<Vec<PowerTable>> {
    let alt = config
        .alternative
        .as_ref()
        .ok_or_else(|| Error::InvalidConfig("power experiment needs an alternative".into()))?;
    let k = config.stats.len();
    Ok(config
        .stats
        .iter()
        .enumerate()
        .map(|(s, &stat)| {
            let rows: Vec<Vec<Vec<f64>>> = p_values
                .iter()
                .map(|reps| {
                    (0..alt.c_grid.len())
                        .map(|ci| reps.iter().map(|v| v[ci * k + s]).collect())
                        .collect()
                })
                .collect();
            PowerTable::from_p_values(stat, &alt.c_grid, config.alpha, &rows)
        })
        .collect())
}
