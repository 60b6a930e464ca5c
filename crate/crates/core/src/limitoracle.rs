//! Euler–Maruyama simulation of the continuous-time volatility limits and
//! the functionals `V(1) = ∫σ²du` and `M(1) = ∫σ dB_z`.

use alloc::vec::Vec;

use rand::Rng;
use rand_distr::StandardNormal;

use crate::distributions::{draw_innovations, normal, InnovationLaw, Level, SeedPath};
use crate::error::{Error, Result};
use crate::volatility::{self, GarchSpec, SvSpec};

pub const MIN_STEPS: usize = 100;
/// Step doublings attempted after a non-positive variance.
pub const MAX_REFINEMENTS: u32 = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum DiffusionKind {
    /// `d log σ² = -κ(log σ² - log σ̄²)du + σ_η dB_η`.
    LogOu,
    /// `dσ² = -κ(σ² - σ̄²)du + σ_η σ² dB_η`.
    GarchDiffusion,
}

/// Sign of the drift: mean reversion `-κ(x - x̄)` or the explosive `+κ(x - x̄)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum DriftSign {
    #[default]
    MeanReverting,
    Explosive,
}

impl DriftSign {
    fn factor(self) -> f64 {
        match self {
            Self::MeanReverting => 1.0,
            Self::Explosive => -1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DiffusionSpec {
    pub kind: DiffusionKind,
    pub kappa: f64,
    pub sigma_bar: f64,
    pub sigma_eta: f64,
    /// Correlation of `B_η` and `B_z`.
    pub correlation: f64,
    pub drift_sign: DriftSign,
    /// Exact Gaussian transitions for `LogOu` instead of Euler steps.
    pub exact_ou: bool,
    /// `σ²(0)`; defaults to `σ̄²`.
    pub initial_var: Option<f64>,
}

impl DiffusionSpec {
    pub fn new(kind: DiffusionKind, kappa: f64, sigma_bar: f64, sigma_eta: f64) -> Result<Self> {
        let spec = Self {
            kind,
            kappa,
            sigma_bar,
            sigma_eta,
            correlation: 0.0,
            drift_sign: DriftSign::MeanReverting,
            exact_ou: false,
            initial_var: None,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn with_correlation(mut self, rho: f64) -> Self {
        self.correlation = rho;
        self
    }

    pub fn with_drift_sign(mut self, sign: DriftSign) -> Self {
        self.drift_sign = sign;
        self
    }

    pub fn with_exact_ou(mut self, exact: bool) -> Self {
        self.exact_ou = exact;
        self
    }

    pub fn with_initial_var(mut self, var: f64) -> Self {
        self.initial_var = Some(var);
        self
    }

    /// σ_η = 0 is accepted: the path is then deterministic.
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidSpec(m.into()));
        if !(self.sigma_bar > 0.0 && self.sigma_bar.is_finite()) {
            return bad("sigma_bar must be positive");
        }
        if !(self.sigma_eta >= 0.0 && self.sigma_eta.is_finite()) {
            return bad("sigma_eta must be nonnegative");
        }
        if !(self.kappa.is_finite() && self.kappa >= 0.0) {
            return bad("kappa must be nonnegative");
        }
        if !(-1.0..=1.0).contains(&self.correlation) {
            return bad("correlation must lie in [-1, 1]");
        }
        if let Some(v) = self.initial_var {
            if !(v > 0.0 && v.is_finite()) {
                return bad("initial variance must be positive");
            }
        }
        Ok(())
    }

    fn start(&self) -> f64 {
        self.initial_var.unwrap_or(self.sigma_bar * self.sigma_bar)
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LimitFunctionals {
    /// Left-Riemann `∫₀¹ σ²(u) du`.
    pub v1: f64,
    /// Itô sum `Σ σ(u_k) ΔB_z`.
    pub m1: f64,
    /// `σ²(u_k)` for `k = 0..=steps`.
    pub path_grid: Vec<f64>,
    /// Steps actually used (larger than requested after refinement).
    pub steps: usize,
}

/// Simulates one replicate. A non-positive variance aborts the attempt and
/// the step count is doubled, up to [`MAX_REFINEMENTS`] times.
pub fn simulate_limit(spec: &DiffusionSpec, steps: usize, seed: &SeedPath) -> Result<LimitFunctionals> {
    spec.validate()?;
    if steps < MIN_STEPS {
        return Err(Error::TooShort { min: MIN_STEPS, got: steps });
    }
    let mut attempt_steps = steps;
    let mut attempt_seed = seed.clone();
    let mut last = Error::NonPositiveVariance { step: 0, steps };
    for k in 0..=MAX_REFINEMENTS {
        let mut rng = attempt_seed.rng();
        let shocks = core::iter::repeat_with(|| (rng.sample(StandardNormal), rng.sample(StandardNormal)));
        match integrate(spec, attempt_steps, shocks) {
            Ok(f) => return Ok(f),
            Err(e @ Error::NonPositiveVariance { .. }) => {
                log::warn!("{e}; refining to {} steps", 2 * attempt_steps);
                last = e;
                attempt_steps *= 2;
                attempt_seed = seed.child(Level::Grid, u64::from(k) + 1);
            }
            Err(e) => return Err(e),
        }
    }
    Err(last)
}

/// Integrates with standard normal pairs `(ξ_η, ξ_⊥)` per step; the
/// Brownian increments are `ΔB_η = √h ξ_η` and
/// `ΔB_z = √h (ρ ξ_η + √(1-ρ²) ξ_⊥)`.
pub(crate) fn integrate(
    spec: &DiffusionSpec,
    steps: usize,
    mut shocks: impl Iterator<Item = (f64, f64)>,
) -> Result<LimitFunctionals> {
    let h = 1.0 / steps as f64;
    let sqrt_h = libm::sqrt(h);
    let rho = spec.correlation;
    let rho_perp = libm::sqrt((1.0 - rho * rho).max(0.0));
    let k = spec.drift_sign.factor() * spec.kappa;
    let mut path_grid = Vec::with_capacity(steps + 1);
    let (mut sum_var, mut m1) = (0.0, 0.0);

    let mut var = spec.start();
    let target_log = libm::log(spec.sigma_bar * spec.sigma_bar);
    let mut log_var = libm::log(var);
    // exact OU transition: mean factor e^{-kh}, sd σ_η sqrt((1 - e^{-2kh}) / 2k)
    let decay = libm::exp(-k * h);
    let exact_sd = if k == 0.0 {
        spec.sigma_eta * sqrt_h
    } else {
        spec.sigma_eta * libm::sqrt(-libm::expm1(-2.0 * k * h) / (2.0 * k))
    };

    for step in 0..steps {
        let (xi_eta, xi_perp) = shocks.next().expect("shock stream is infinite");
        path_grid.push(var);
        let sigma = libm::sqrt(var);
        sum_var += var;
        m1 += sigma * sqrt_h * (rho * xi_eta + rho_perp * xi_perp);
        let d_eta = sqrt_h * xi_eta;
        match spec.kind {
            DiffusionKind::LogOu => {
                log_var = if spec.exact_ou {
                    target_log + (log_var - target_log) * decay + exact_sd * xi_eta
                } else {
                    log_var - k * (log_var - target_log) * h + spec.sigma_eta * d_eta
                };
                var = libm::exp(log_var);
            }
            DiffusionKind::GarchDiffusion => {
                let target = spec.sigma_bar * spec.sigma_bar;
                var += -k * (var - target) * h + spec.sigma_eta * var * d_eta;
                if !(var > 0.0) {
                    return Err(Error::NonPositiveVariance { step: step + 1, steps });
                }
            }
        }
    }
    path_grid.push(var);
    Ok(LimitFunctionals {
        v1: sum_var / steps as f64,
        m1,
        path_grid,
        steps,
    })
}

/// `n⁻¹ Σ σ_t²` of the discrete recursion whose limit is `spec`: log-variance
/// stochastic volatility for `LogOu`, near-integrated GARCH with Gaussian
/// shocks for `GarchDiffusion`. The discrete recursions carry no leverage,
/// so `correlation`, `drift_sign` and `exact_ou` play no role here.
pub fn discrete_mean_variance(spec: &DiffusionSpec, n: usize, seed: &SeedPath) -> Result<f64> {
    spec.validate()?;
    let path = match spec.kind {
        DiffusionKind::LogOu => {
            let mut sv = SvSpec::new(spec.kappa, spec.sigma_bar, spec.sigma_eta)?;
            if let Some(v) = spec.initial_var {
                sv = sv.with_initial_log_var(libm::log(v));
            }
            volatility::gen_sv_path(sv, n, &seed.child(Level::Volatility, 0))?
        }
        DiffusionKind::GarchDiffusion => {
            let mut g = GarchSpec::new(spec.kappa, spec.sigma_bar, spec.sigma_eta)?;
            if let Some(v) = spec.initial_var {
                g = g.with_initial_var(v);
            }
            let z = draw_innovations(InnovationLaw::Gaussian, n, &seed.child(Level::Innovations, 0))?;
            volatility::gen_garch_path(g, n, &z)?
        }
    };
    Ok(path.mean_variance())
}

/// `Φ(Φ⁻¹(α) - c v1^{-1/2})`.
pub fn local_power_formula(alpha: f64, c: f64, v1: f64) -> f64 {
    normal::cdf(normal::quantile(alpha) - c / libm::sqrt(v1))
}
