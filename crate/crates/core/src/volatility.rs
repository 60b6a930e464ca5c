//! Volatility path generators: near-integrated log stochastic volatility,
//! near-integrated GARCH(1,1), and compound-Poisson jump volatility.
//!
//! Paths are indexed `σ_1, …, σ_n`; slice index `t - 1` holds `σ_t`.

use alloc::format;
use alloc::vec::Vec;

use rand::Rng;
use rand_distr::StandardNormal;

use crate::distributions::{InnovationDraw, InnovationLaw, Level, SeedPath};
use crate::error::{Error, Result};

fn check_positive(name: &str, value: f64) -> Result<()> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidSpec(format!("{name} must be positive and finite, got {value}")))
    }
}

fn check_kappa(kappa: f64) -> Result<()> {
    if kappa >= 0.0 && kappa.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidSpec(format!("kappa must be non-negative, got {kappa}")))
    }
}

/// Near-integrated log-volatility autoregression
/// `log σ_t² = φ log σ_{t-1}² + (1-φ) log σ̄² + n^{-1/2} η_{t-1}`, `φ = e^{-κ/n}`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SvSpec {
    pub kappa: f64,
    pub sigma_bar: f64,
    pub sigma_eta: f64,
    /// `log σ_0²`; `None` means `log σ̄²`.
    pub initial_log_var: Option<f64>,
}

impl SvSpec {
    pub fn new(kappa: f64, sigma_bar: f64, sigma_eta: f64) -> Result<Self> {
        let spec = Self {
            kappa,
            sigma_bar,
            sigma_eta,
            initial_log_var: None,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn with_initial_log_var(mut self, value: f64) -> Self {
        self.initial_log_var = Some(value);
        self
    }

    pub fn validate(&self) -> Result<()> {
        check_kappa(self.kappa)?;
        check_positive("sigma_bar", self.sigma_bar)?;
        check_positive("sigma_eta", self.sigma_eta)?;
        if let Some(v) = self.initial_log_var {
            if !v.is_finite() {
                return Err(Error::InvalidSpec(format!("initial log variance {v} is not finite")));
            }
        }
        Ok(())
    }

    pub fn log_var_bar(&self) -> f64 {
        2.0 * libm::log(self.sigma_bar)
    }
}

/// Coefficients of the GARCH(1,1) recursion at a given sample size.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GarchCoefficients {
    pub omega: f64,
    pub alpha: f64,
    pub beta: f64,
}

/// Near-integrated GARCH(1,1) with `ω_n = σ̄²κ/n`, `α_n = σ_η/sqrt(2n)` and
/// `β_n = 1 - κ/n - α_n`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GarchSpec {
    pub kappa: f64,
    pub sigma_bar: f64,
    pub sigma_eta: f64,
    /// Variance of the first observation, `σ_1²`; `None` means `σ̄²`.
    pub initial_var: Option<f64>,
}

impl GarchSpec {
    pub fn new(kappa: f64, sigma_bar: f64, sigma_eta: f64) -> Result<Self> {
        let spec = Self {
            kappa,
            sigma_bar,
            sigma_eta,
            initial_var: None,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// κ = 5, σ̄ = 1, σ_η = sqrt(10), started at the unconditional variance.
    pub fn monte_carlo_default() -> Self {
        Self {
            kappa: 5.0,
            sigma_bar: 1.0,
            sigma_eta: libm::sqrt(10.0),
            initial_var: None,
        }
    }

    pub fn with_initial_var(mut self, value: f64) -> Self {
        self.initial_var = Some(value);
        self
    }

    pub fn validate(&self) -> Result<()> {
        check_kappa(self.kappa)?;
        check_positive("sigma_bar", self.sigma_bar)?;
        check_positive("sigma_eta", self.sigma_eta)?;
        if let Some(v) = self.initial_var {
            check_positive("initial variance", v)?;
        }
        Ok(())
    }

    pub fn initial_variance(&self) -> f64 {
        self.initial_var.unwrap_or(self.sigma_bar * self.sigma_bar)
    }

    /// Fails when `β_n < 0`, i.e. `n` is too small for the given κ and σ_η.
    pub fn coefficients(&self, n: usize) -> Result<GarchCoefficients> {
        self.validate()?;
        let nf = n as f64;
        let omega = self.sigma_bar * self.sigma_bar * self.kappa / nf;
        let alpha = self.sigma_eta / libm::sqrt(2.0 * nf);
        let beta = 1.0 - self.kappa / nf - alpha;
        if beta < 0.0 {
            return Err(Error::GarchCoefficients { n, beta });
        }
        Ok(GarchCoefficients { omega, alpha, beta })
    }
}

/// Jump volatility `σ_t = exp(ω_0 + ω_1 J_t)`, `J_t = Σ_{i≤t} δ_i η_i`, with
/// `P(δ_t = 1) = λ/n`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct JumpSpec {
    pub omega0: f64,
    pub omega1: f64,
    pub lambda: f64,
    /// Law of the jump sizes `η_i`.
    pub jump_law: InnovationLaw,
}

impl JumpSpec {
    pub fn new(omega0: f64, omega1: f64, lambda: f64) -> Result<Self> {
        let spec = Self {
            omega0,
            omega1,
            lambda,
            jump_law: InnovationLaw::Gaussian,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        check_positive("lambda", self.lambda)?;
        if !self.omega0.is_finite() || !self.omega1.is_finite() {
            return Err(Error::InvalidSpec("jump log-volatility coefficients must be finite".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "model", rename_all = "lowercase"))]
pub enum VolSpec {
    Sv(SvSpec),
    Garch(GarchSpec),
    Jump(JumpSpec),
}

impl VolSpec {
    pub fn validate(&self) -> Result<()> {
        match self {
            Self::Sv(s) => s.validate(),
            Self::Garch(g) => g.validate(),
            Self::Jump(j) => j.validate(),
        }
    }

    /// Whether generating the path consumes the innovations.
    pub fn needs_z(&self) -> bool {
        matches!(self, Self::Garch(_))
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Sv(_) => "sv",
            Self::Garch(_) => "garch",
            Self::Jump(_) => "jump",
        }
    }
}

/// A strictly positive volatility sequence `σ_1, …, σ_n` and the spec that
/// produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct VolatilityPath {
    sigmas: Vec<f64>,
    spec: VolSpec,
}

impl VolatilityPath {
    pub fn new(sigmas: Vec<f64>, spec: VolSpec) -> Result<Self> {
        if sigmas.is_empty() {
            return Err(Error::TooShort { min: 1, got: 0 });
        }
        if let Some(t) = sigmas.iter().position(|s| !(*s > 0.0) || !s.is_finite()) {
            return Err(Error::InvalidSpec(format!(
                "volatility must be positive and finite, got {} at t = {}",
                sigmas[t],
                t + 1
            )));
        }
        Ok(Self { sigmas, spec })
    }

    pub fn sigmas(&self) -> &[f64] {
        &self.sigmas
    }

    pub fn spec(&self) -> &VolSpec {
        &self.spec
    }

    pub fn needs_z(&self) -> bool {
        self.spec.needs_z()
    }

    pub fn len(&self) -> usize {
        self.sigmas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sigmas.is_empty()
    }

    pub fn variances(&self) -> Vec<f64> {
        self.sigmas.iter().map(|s| s * s).collect()
    }

    /// `n^{-1} Σ σ_t²`, the finite-sample counterpart of `∫σ²(u)du`.
    pub fn mean_variance(&self) -> f64 {
        self.sigmas.iter().map(|s| s * s).sum::<f64>() / self.sigmas.len() as f64
    }

    /// Càdlàg step version `σ_n(u) = σ_{⌊nu⌋+1}` for `u ∈ [0, 1)`, with `σ_n(1) = σ_n`.
    pub fn sigma_at(&self, u: f64) -> f64 {
        let n = self.sigmas.len();
        let idx = libm::floor(u.clamp(0.0, 1.0) * n as f64) as usize;
        self.sigmas[idx.min(n - 1)]
    }
}

/// Iterates the log-variance recursion literally: the shock entering `σ_t²`
/// is `η_{t-1}`, so `σ_1²` already uses the pre-sample draw `η_0`.
pub fn gen_sv_path(spec: SvSpec, n: usize, seed: &SeedPath) -> Result<VolatilityPath> {
    spec.validate()?;
    if n == 0 {
        return Err(Error::TooShort { min: 1, got: 0 });
    }
    let nf = n as f64;
    let phi = libm::exp(-spec.kappa / nf);
    let target = spec.log_var_bar();
    let shock_scale = spec.sigma_eta / libm::sqrt(nf);
    let mut rng = seed.rng();
    let mut log_var = spec.initial_log_var.unwrap_or(target);
    let sigmas = (0..n)
        .map(|_| {
            let eta: f64 = rng.sample(StandardNormal);
            log_var = phi * log_var + (1.0 - phi) * target + shock_scale * eta;
            libm::exp(0.5 * log_var)
        })
        .collect();
    VolatilityPath::new(sigmas, VolSpec::Sv(spec))
}

/// `σ_1² = initial variance`, `σ_{t+1}² = ω + (α z_t² + β) σ_t²` for
/// `t = 1..n-1`. `z_n` is not used by the path.
pub fn gen_garch_path(spec: GarchSpec, n: usize, z: &InnovationDraw) -> Result<VolatilityPath> {
    if n == 0 {
        return Err(Error::TooShort { min: 1, got: 0 });
    }
    if z.len() < n {
        return Err(Error::TooShort { min: n, got: z.len() });
    }
    let c = spec.coefficients(n)?;
    let mut var = spec.initial_variance();
    let mut sigmas = Vec::with_capacity(n);
    sigmas.push(libm::sqrt(var));
    for &zt in &z.z()[..n - 1] {
        var = c.omega + (c.alpha * zt * zt + c.beta) * var;
        sigmas.push(libm::sqrt(var));
    }
    VolatilityPath::new(sigmas, VolSpec::Garch(spec))
}

/// Bernoulli(λ/n) jump indicators with i.i.d. jump sizes from `jump_law`.
pub fn gen_jump_path(spec: JumpSpec, n: usize, seed: &SeedPath) -> Result<VolatilityPath> {
    spec.validate()?;
    if n == 0 {
        return Err(Error::TooShort { min: 1, got: 0 });
    }
    let p = spec.lambda / n as f64;
    if p > 1.0 {
        return Err(Error::JumpProbability(p));
    }
    let mut occurrences = seed.child(Level::Jumps, 0).rng();
    let mut sizes = seed.child(Level::Jumps, 1).rng();
    let mut level = 0.0;
    let sigmas = (0..n)
        .map(|_| {
            let u: f64 = occurrences.random();
            if u < p {
                level += spec.jump_law.sample(&mut sizes);
            }
            libm::exp(spec.omega0 + spec.omega1 * level)
        })
        .collect();
    VolatilityPath::new(sigmas, VolSpec::Jump(spec))
}

/// Recovers `|z_t|` from `σ_t` and `σ_{t+1}` by inverting the GARCH recursion,
/// for `1 ≤ t ≤ n-1`.
pub fn garch_inverted_modulus(spec: &GarchSpec, path: &VolatilityPath, t: usize) -> Result<f64> {
    let n = path.len();
    if t == 0 || t + 1 > n {
        return Err(Error::IndexOutOfRange {
            index: t,
            max: n.saturating_sub(1),
        });
    }
    let c = spec.coefficients(n)?;
    let var_t = path.sigmas[t - 1] * path.sigmas[t - 1];
    let var_next = path.sigmas[t] * path.sigmas[t];
    let z2 = (var_next - c.omega - c.beta * var_t) / (c.alpha * var_t);
    if z2 < 0.0 {
        // rounding noise when z_t is essentially zero
        if z2 > -1e-9 {
            return Ok(0.0);
        }
        return Err(Error::InversionFailed { t, value: z2 });
    }
    Ok(libm::sqrt(z2))
}

/// All recoverable moduli `|z_1|, …, |z_{n-1}|` of a GARCH path.
pub fn garch_inverted_moduli(spec: &GarchSpec, path: &VolatilityPath) -> Result<Vec<f64>> {
    (1..path.len()).map(|t| garch_inverted_modulus(spec, path, t)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::draw_innovations;
    use alloc::vec;
    use proptest::prelude::*;

    #[test]
    fn sv_without_shocks_is_constant() {
        let spec = SvSpec::new(5.0, 1.3, 1e-300).unwrap();
        let path = gen_sv_path(spec, 200, &SeedPath::new(1)).unwrap();
        assert!(path.sigmas().iter().all(|&s| (s - 1.3).abs() < 1e-12));
        assert!(!path.needs_z());
    }

    #[test]
    fn sv_random_walk_variance() {
        // κ = 0: log σ_n² = log σ_0² + n^{-1/2} Σ_{t=0}^{n-1} η_t, variance σ_η²
        let spec = SvSpec::new(0.0, 1.0, 2.0).unwrap();
        let n = 50;
        let reps = 20_000;
        let finals: Vec<f64> = (0..reps)
            .map(|r| {
                let path = gen_sv_path(spec, n, &SeedPath::new(8).child(Level::Replicate, r)).unwrap();
                2.0 * path.sigmas()[n - 1].ln()
            })
            .collect();
        let mean = finals.iter().sum::<f64>() / reps as f64;
        let var = finals.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (reps - 1) as f64;
        // sd of the sample variance of a normal sample: σ² sqrt(2/(reps-1))
        let se = 4.0 * (2.0f64 / (reps - 1) as f64).sqrt();
        assert!((var - 4.0).abs() < 4.0 * se, "var {var}");
        assert!(mean.abs() < 4.0 * (4.0f64 / reps as f64).sqrt());
    }

    #[test]
    fn sv_monte_carlo_setting_is_positive() {
        let spec = SvSpec::new(5.0, 1.0, 10f64.sqrt()).unwrap();
        let path = gen_sv_path(spec, 500, &SeedPath::new(2)).unwrap();
        assert_eq!(path.len(), 500);
        assert!(path.sigmas().iter().all(|&s| s > 0.0));
    }

    #[test]
    fn sv_mean_reverts() {
        let spec = SvSpec::new(5.0, 1.0, 1.0).unwrap().with_initial_log_var(3.0);
        let reps = 2000;
        let mean_final = (0..reps)
            .map(|r| {
                let p = gen_sv_path(spec, 200, &SeedPath::new(4).child(Level::Replicate, r)).unwrap();
                2.0 * p.sigmas()[199].ln()
            })
            .sum::<f64>()
            / reps as f64;
        assert!(mean_final > 0.0 && mean_final < 3.0, "{mean_final}");
    }

    #[test]
    fn garch_coefficients_and_bounds() {
        let spec = GarchSpec::monte_carlo_default();
        let c = spec.coefficients(500).unwrap();
        assert!((c.omega - 5.0 / 500.0).abs() < 1e-15);
        assert!((c.alpha - (10.0f64 / 1000.0).sqrt()).abs() < 1e-15);
        assert!((c.omega + c.alpha + c.beta - 1.0).abs() < 1e-15);
        // 1 - 5/n - sqrt(5/n) < 0 for n < 14
        assert!(matches!(spec.coefficients(10), Err(Error::GarchCoefficients { n: 10, .. })));
        assert!(spec.coefficients(13).is_err());
        assert!(spec.coefficients(14).is_ok());
        let cli_case = GarchSpec::new(5.0, 1.0, 3.162).unwrap();
        assert!(cli_case.coefficients(10).is_err());
    }

    #[test]
    fn garch_without_vol_of_vol_is_flat() {
        let spec = GarchSpec::new(0.0, 1.0, 1e-300).unwrap();
        let z = draw_innovations(InnovationLaw::Gaussian, 300, &SeedPath::new(3)).unwrap();
        let path = gen_garch_path(spec, 300, &z).unwrap();
        assert!(path.sigmas().iter().all(|&s| (s - 1.0).abs() < 1e-12));
    }

    #[test]
    fn garch_unit_shocks_converge_to_sigma_bar() {
        let spec = GarchSpec::new(5.0, 1.5, 1.0).unwrap().with_initial_var(9.0);
        let n = 2000;
        let z = InnovationDraw::from_z(vec![1.0; n]);
        let path = gen_garch_path(spec, n, &z).unwrap();
        let c = spec.coefficients(n).unwrap();
        let v = path.variances();
        for t in 1..n {
            let expected = c.omega + (c.alpha + c.beta) * v[t - 1];
            assert!((v[t] - expected).abs() < 1e-12 * expected);
        }
        // fixed point ω/(1-α-β) = σ̄²
        assert!((c.omega / (1.0 - c.alpha - c.beta) - 2.25).abs() < 1e-12);
        assert!((v[n - 1] - 2.25).abs() < (9.0 - 2.25) * (1.0 - 5.0 / n as f64).powi(n as i32 - 1) + 1e-9);
        assert!((v[n - 1] - 2.25).abs() < (v[0] - 2.25).abs());
    }

    #[test]
    fn garch_starts_at_unconditional_variance() {
        let spec = GarchSpec::monte_carlo_default();
        let z = draw_innovations(InnovationLaw::Gaussian, 500, &SeedPath::new(3)).unwrap();
        let path = gen_garch_path(spec, 500, &z).unwrap();
        assert_eq!(path.sigmas()[0], 1.0);
        assert!(path.needs_z());
        assert!(gen_garch_path(spec, 501, &z).is_err());
    }

    #[test]
    fn inversion_round_trip() {
        for law in [InnovationLaw::Gaussian, InnovationLaw::ZeroSkewMixture, InnovationLaw::NegativeSkewMixture] {
            let spec = GarchSpec::monte_carlo_default();
            let n = 500;
            let z = draw_innovations(law, n, &SeedPath::new(17)).unwrap();
            let path = gen_garch_path(spec, n, &z).unwrap();
            for t in 1..n {
                let m = garch_inverted_modulus(&spec, &path, t).unwrap();
                let truth = z.moduli()[t - 1];
                assert!((m - truth).abs() <= 1e-10 * truth.max(1e-3), "t {t}: {m} vs {truth}");
            }
            assert!(matches!(
                garch_inverted_modulus(&spec, &path, n),
                Err(Error::IndexOutOfRange { .. })
            ));
            assert!(garch_inverted_modulus(&spec, &path, 0).is_err());
        }
    }

    #[test]
    fn inversion_of_constant_path() {
        let spec = GarchSpec::new(0.0, 1.0, 1.0).unwrap();
        let path = VolatilityPath::new(vec![1.0; 50], VolSpec::Garch(spec)).unwrap();
        for t in 1..50 {
            let m = garch_inverted_modulus(&spec, &path, t).unwrap();
            assert!((m * m - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn inversion_rejects_foreign_path() {
        let spec = GarchSpec::new(0.0, 1.0, 1.0).unwrap();
        let path = VolatilityPath::new(vec![1.0, 0.5], VolSpec::Garch(spec)).unwrap();
        assert!(matches!(
            garch_inverted_modulus(&spec, &path, 1),
            Err(Error::InversionFailed { t: 1, .. })
        ));
    }

    #[test]
    fn jump_degenerate_cases() {
        let tiny = JumpSpec::new(0.3, 1.0, 1e-12).unwrap();
        let path = gen_jump_path(tiny, 1000, &SeedPath::new(1)).unwrap();
        assert!(path.sigmas().iter().all(|&s| s == 0.3f64.exp()));

        let muted = JumpSpec::new(-0.2, 0.0, 50.0).unwrap();
        let path = gen_jump_path(muted, 100, &SeedPath::new(1)).unwrap();
        assert!(path.sigmas().iter().all(|&s| s == (-0.2f64).exp()));

        let too_many = JumpSpec::new(0.0, 1.0, 20.0).unwrap();
        assert!(matches!(gen_jump_path(too_many, 10, &SeedPath::new(1)), Err(Error::JumpProbability(_))));
        assert!(JumpSpec::new(0.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn jump_count_matches_intensity() {
        let spec = JumpSpec::new(0.0, 1.0, 2.0).unwrap();
        let n = 1000;
        let reps = 100_000u64;
        let base = SeedPath::new(99);
        let total: usize = (0..reps)
            .map(|r| {
                let p = gen_jump_path(spec, n, &base.child(Level::Replicate, r)).unwrap();
                let s = p.sigmas();
                usize::from(s[0] != 1.0) + s.windows(2).filter(|w| w[0] != w[1]).count()
            })
            .sum();
        let mean = total as f64 / reps as f64;
        assert!((1.96..2.04).contains(&mean), "mean jumps {mean}");
    }

    #[test]
    fn step_function_lookup() {
        let spec = VolSpec::Sv(SvSpec::new(1.0, 1.0, 1.0).unwrap());
        let path = VolatilityPath::new(vec![1.0, 2.0, 3.0, 4.0], spec).unwrap();
        assert_eq!(path.sigma_at(0.0), 1.0);
        assert_eq!(path.sigma_at(0.24), 1.0);
        assert_eq!(path.sigma_at(0.25), 2.0);
        assert_eq!(path.sigma_at(0.99), 4.0);
        assert_eq!(path.sigma_at(1.0), 4.0);
        assert!((path.mean_variance() - 7.5).abs() < 1e-15);
        assert!(VolatilityPath::new(vec![1.0, 0.0], spec).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn generated_paths_are_positive(seed in any::<u64>(), n in 14usize..400, kappa in 0.0f64..10.0, eta in 0.01f64..3.2) {
            let sv = gen_sv_path(SvSpec::new(kappa, 1.0, eta).unwrap(), n, &SeedPath::new(seed)).unwrap();
            prop_assert!(sv.sigmas().iter().all(|&s| s > 0.0));
            let g = GarchSpec::new(kappa, 1.0, eta).unwrap();
            if let Ok(c) = g.coefficients(n) {
                prop_assert!(c.beta >= 0.0 && c.omega >= 0.0);
                let z = draw_innovations(InnovationLaw::NegativeSkewMixture, n, &SeedPath::new(seed)).unwrap();
                let path = gen_garch_path(g, n, &z).unwrap();
                prop_assert!(path.sigmas().iter().all(|&s| s > 0.0));
                let s2 = path.variances();
                for t in 1..n {
                    let m = garch_inverted_modulus(&g, &path, t).unwrap();
                    let z0 = z.moduli()[t - 1];
                    // z² comes from a difference of O(σ²) terms divided by α σ_t²
                    let tol = 64.0 * f64::EPSILON * (1.0 + s2[t] / (c.alpha * s2[t - 1]));
                    prop_assert!((m * m - z0 * z0).abs() <= tol, "t = {}: {} vs {}", t, m, z0);
                }
            }
        }
    }
}
