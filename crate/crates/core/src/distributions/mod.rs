//! Random-number and density primitives: the innovation laws of the three
//! data-generating processes, wild-bootstrap multiplier laws, and the sign
//! redraw used to sample innovations conditionally on their moduli.

pub mod normal;
pub mod seed;

use alloc::format;
use alloc::vec::Vec;

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
pub use seed::{Level, SeedPath, StreamRng};

const MOMENT_TOL: f64 = 1e-12;

/// Two-component normal mixture `w1 N(mu1, s1^2) + w2 N(mu2, s2^2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MixtureSpec {
    weights: [f64; 2],
    means: [f64; 2],
    sds: [f64; 2],
}

impl MixtureSpec {
    /// A degenerate second weight (`w1 = 1`) is accepted and reduces the
    /// mixture to a single normal.
    pub fn new(weights: [f64; 2], means: [f64; 2], sds: [f64; 2]) -> Result<Self> {
        if weights.iter().any(|w| !(0.0..=1.0).contains(w)) {
            return Err(Error::InvalidSpec(format!("mixture weights {weights:?} outside [0, 1]")));
        }
        if (weights[0] + weights[1] - 1.0).abs() > MOMENT_TOL {
            return Err(Error::InvalidSpec(format!("mixture weights {weights:?} do not sum to 1")));
        }
        if sds.iter().any(|s| !(*s > 0.0) || !s.is_finite()) {
            return Err(Error::InvalidSpec(format!("mixture sds {sds:?} must be positive")));
        }
        if means.iter().any(|m| !m.is_finite()) {
            return Err(Error::InvalidSpec(format!("mixture means {means:?} must be finite")));
        }
        Ok(Self { weights, means, sds })
    }

    /// Zero-skewness asymmetric mixture with `a = sqrt(3/11)`.
    pub fn zero_skew() -> Self {
        let a = libm::sqrt(3.0 / 11.0);
        Self::standardized([1.0 / 3.0, 2.0 / 3.0], [-2.0 * a, a], [a, a * libm::sqrt(2.0)])
    }

    /// Negatively skewed mixture with `b = sqrt(3/10)`.
    pub fn negative_skew() -> Self {
        let b = libm::sqrt(3.0 / 10.0);
        Self::standardized([1.0 / 3.0, 2.0 / 3.0], [-2.0 * b, b], [b * libm::sqrt(2.0), b])
    }

    fn standardized(weights: [f64; 2], means: [f64; 2], sds: [f64; 2]) -> Self {
        let spec = Self::new(weights, means, sds).expect("preset mixture is valid");
        assert!(spec.mean().abs() < MOMENT_TOL, "preset mixture must have mean zero");
        assert!((spec.variance() - 1.0).abs() < MOMENT_TOL, "preset mixture must have unit variance");
        spec
    }

    pub fn weights(&self) -> [f64; 2] {
        self.weights
    }

    pub fn means(&self) -> [f64; 2] {
        self.means
    }

    pub fn sds(&self) -> [f64; 2] {
        self.sds
    }

    pub fn pdf(&self, z: f64) -> f64 {
        (0..2)
            .filter(|&k| self.weights[k] > 0.0)
            .map(|k| self.weights[k] * normal::pdf(z, self.means[k], self.sds[k]))
            .sum()
    }

    /// Log density, stable far in the tails where `pdf` underflows.
    pub fn ln_pdf(&self, z: f64) -> f64 {
        let mut terms = [f64::NEG_INFINITY; 2];
        for (k, term) in terms.iter_mut().enumerate() {
            if self.weights[k] > 0.0 {
                *term = libm::log(self.weights[k]) + normal::ln_pdf(z, self.means[k], self.sds[k]);
            }
        }
        let hi = terms[0].max(terms[1]);
        hi + libm::log(libm::exp(terms[0] - hi) + libm::exp(terms[1] - hi))
    }

    pub fn mean(&self) -> f64 {
        self.raw_moment(1)
    }

    pub fn variance(&self) -> f64 {
        let m = self.mean();
        self.raw_moment(2) - m * m
    }

    pub fn third_central_moment(&self) -> f64 {
        let m = self.mean();
        self.raw_moment(3) - 3.0 * m * self.raw_moment(2) + 2.0 * m * m * m
    }

    /// Raw moments of order 1 to 3 from the component moments.
    pub fn raw_moment(&self, order: u32) -> f64 {
        (0..2)
            .map(|k| {
                let (mu, s2) = (self.means[k], self.sds[k] * self.sds[k]);
                let component = match order {
                    0 => 1.0,
                    1 => mu,
                    2 => mu * mu + s2,
                    3 => mu * mu * mu + 3.0 * mu * s2,
                    _ => panic!("raw moments are implemented up to order 3"),
                };
                self.weights[k] * component
            })
            .sum()
    }

    /// `f(m) / (f(m) + f(-m))`, evaluated in log space.
    pub fn prob_positive(&self, modulus: f64) -> f64 {
        let diff = self.ln_pdf(-modulus) - self.ln_pdf(modulus);
        1.0 / (1.0 + libm::exp(diff))
    }

    /// Component indicator, then a normal draw.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let u: f64 = rng.random();
        let k = if u < self.weights[0] { 0 } else { 1 };
        let z: f64 = rng.sample(StandardNormal);
        self.means[k] + self.sds[k] * z
    }
}

/// Law of the standardized innovations `z_t`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum InnovationLaw {
    /// `N(0, 1)` (DGP 1).
    #[default]
    Gaussian,
    /// Asymmetric mixture with zero skewness (DGP 2).
    ZeroSkewMixture,
    /// Mixture with negative skewness (DGP 3).
    NegativeSkewMixture,
}

impl InnovationLaw {
    /// Maps the DGP number 1, 2 or 3 to its innovation law.
    pub fn from_dgp(dgp: u8) -> Option<Self> {
        match dgp {
            1 => Some(Self::Gaussian),
            2 => Some(Self::ZeroSkewMixture),
            3 => Some(Self::NegativeSkewMixture),
            _ => None,
        }
    }

    pub fn dgp(&self) -> u8 {
        match self {
            Self::Gaussian => 1,
            Self::ZeroSkewMixture => 2,
            Self::NegativeSkewMixture => 3,
        }
    }

    pub fn mixture(&self) -> Option<MixtureSpec> {
        match self {
            Self::Gaussian => None,
            Self::ZeroSkewMixture => Some(MixtureSpec::zero_skew()),
            Self::NegativeSkewMixture => Some(MixtureSpec::negative_skew()),
        }
    }

    pub fn pdf(&self, z: f64) -> f64 {
        match self.mixture() {
            None => normal::pdf(z, 0.0, 1.0),
            Some(m) => m.pdf(z),
        }
    }

    /// `P(sgn z = +1 | |z| = modulus) = f(m) / (f(m) + f(-m))`.
    pub fn prob_positive(&self, modulus: f64) -> f64 {
        match self.mixture() {
            None => 0.5,
            Some(m) => m.prob_positive(modulus),
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            Self::Gaussian => rng.sample(StandardNormal),
            Self::ZeroSkewMixture => MixtureSpec::zero_skew().sample(rng),
            Self::NegativeSkewMixture => MixtureSpec::negative_skew().sample(rng),
        }
    }

    /// Fills `out` with i.i.d. draws; the mixture is built once.
    pub fn fill<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut [f64]) {
        match self.mixture() {
            None => out.iter_mut().for_each(|z| *z = rng.sample(StandardNormal)),
            Some(m) => out.iter_mut().for_each(|z| *z = m.sample(rng)),
        }
    }
}

/// Standardized errors together with their modulus/sign decomposition.
#[derive(Debug, Clone, PartialEq)]
pub struct InnovationDraw {
    z: Vec<f64>,
    moduli: Vec<f64>,
    signs: Vec<i8>,
}

impl InnovationDraw {
    /// Decomposes `z` into `|z_t|` and `sgn(z_t)`. An exact zero gets sign +1
    /// (with a warning); it has probability zero under the continuous laws.
    pub fn from_z(z: Vec<f64>) -> Self {
        let moduli = z.iter().map(|v| v.abs()).collect();
        let signs = z
            .iter()
            .enumerate()
            .map(|(t, &v)| {
                if v < 0.0 {
                    -1
                } else {
                    if v == 0.0 {
                        log::warn!("innovation {} is exactly zero; using sign +1", t + 1);
                    }
                    1
                }
            })
            .collect();
        Self { z, moduli, signs }
    }

    /// Rebuilds `z_t = sign_t * modulus_t`.
    pub fn from_parts(moduli: Vec<f64>, signs: Vec<i8>) -> Self {
        assert_eq!(moduli.len(), signs.len(), "moduli and signs must have equal length");
        let z = moduli.iter().zip(&signs).map(|(&m, &s)| f64::from(s) * m).collect();
        Self { z, moduli, signs }
    }

    pub fn z(&self) -> &[f64] {
        &self.z
    }

    pub fn moduli(&self) -> &[f64] {
        &self.moduli
    }

    pub fn signs(&self) -> &[i8] {
        &self.signs
    }

    pub fn len(&self) -> usize {
        self.z.len()
    }

    pub fn is_empty(&self) -> bool {
        self.z.is_empty()
    }

    pub fn into_z(self) -> Vec<f64> {
        self.z
    }
}

pub fn draw_innovations(law: InnovationLaw, n: usize, seed: &SeedPath) -> Result<InnovationDraw> {
    if n == 0 {
        return Err(Error::TooShort { min: 1, got: 0 });
    }
    let mut rng = seed.rng();
    let mut z = alloc::vec![0.0; n];
    law.fill(&mut rng, &mut z);
    Ok(InnovationDraw::from_z(z))
}

/// Draws `sgn(z_t)` given `|z_t|` for each modulus independently.
pub fn conditional_sign_redraw(moduli: &[f64], law: InnovationLaw, seed: &SeedPath) -> Result<Vec<i8>> {
    if let Some(t) = moduli.iter().position(|&m| !(m > 0.0)) {
        return Err(Error::ZeroModulus(t + 1));
    }
    let mut rng = seed.rng();
    let mixture = law.mixture();
    Ok(moduli
        .iter()
        .map(|&m| {
            let u: f64 = rng.random();
            let p = mixture.map_or(0.5, |mix| mix.prob_positive(m));
            if u < p {
                1
            } else {
                -1
            }
        })
        .collect())
}

/// Law of the wild-bootstrap multipliers `w_t*`; each has mean 0 and variance 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum MultiplierLaw {
    #[default]
    Gaussian,
    Rademacher,
    /// Mammen's two-point law on `{-(sqrt5-1)/2, (sqrt5+1)/2}`.
    Mammen,
}

impl MultiplierLaw {
    pub fn mammen_support() -> (f64, f64) {
        let r5 = libm::sqrt(5.0);
        (-(r5 - 1.0) / 2.0, (r5 + 1.0) / 2.0)
    }

    /// Probability of the upper Mammen point, `(sqrt5-1)/(2 sqrt5)`.
    pub fn mammen_upper_prob() -> f64 {
        let r5 = libm::sqrt(5.0);
        (r5 - 1.0) / (2.0 * r5)
    }

    /// Closed-form `(mean, variance)` of the law.
    pub fn moments(&self) -> (f64, f64) {
        match self {
            Self::Gaussian => (0.0, 1.0),
            Self::Rademacher => (0.0, 1.0),
            Self::Mammen => {
                let (lo, hi) = Self::mammen_support();
                let p = Self::mammen_upper_prob();
                let mean = (1.0 - p) * lo + p * hi;
                let second = (1.0 - p) * lo * lo + p * hi * hi;
                (mean, second - mean * mean)
            }
        }
    }

    pub fn fill<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut [f64]) {
        match self {
            Self::Gaussian => out.iter_mut().for_each(|w| *w = rng.sample(StandardNormal)),
            Self::Rademacher => {
                let mut bits = 0u64;
                for (i, w) in out.iter_mut().enumerate() {
                    if i % 64 == 0 {
                        bits = rng.random();
                    }
                    *w = if bits & 1 == 1 { 1.0 } else { -1.0 };
                    bits >>= 1;
                }
            }
            Self::Mammen => {
                let (lo, hi) = Self::mammen_support();
                let p = Self::mammen_upper_prob();
                out.iter_mut().for_each(|w| {
                    let u: f64 = rng.random();
                    *w = if u < p { hi } else { lo };
                });
            }
        }
    }
}

pub fn draw_multipliers(law: MultiplierLaw, n: usize, seed: &SeedPath) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(Error::TooShort { min: 1, got: 0 });
    }
    let mut out = alloc::vec![0.0; n];
    law.fill(&mut seed.rng(), &mut out);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use proptest::prelude::*;

    fn sample_moments(x: &[f64]) -> (f64, f64, f64) {
        let n = x.len() as f64;
        let mean = x.iter().sum::<f64>() / n;
        let var = x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
        let m3 = x.iter().map(|v| (v - mean).powi(3)).sum::<f64>() / n;
        (mean, var, m3)
    }

    fn integrated_moment(m: &MixtureSpec, order: i32) -> f64 {
        // composite Simpson over +-12 sd of the widest component
        let half = 12.0 * m.sds()[0].max(m.sds()[1]) + m.means()[0].abs().max(m.means()[1].abs());
        let steps = 200_000;
        let h = 2.0 * half / steps as f64;
        let f = |x: f64| x.powi(order) * m.pdf(x);
        let mut acc = f(-half) + f(half);
        for i in 1..steps {
            let x = -half + i as f64 * h;
            acc += if i % 2 == 1 { 4.0 } else { 2.0 } * f(x);
        }
        acc * h / 3.0
    }

    #[test]
    fn preset_moments_closed_form() {
        let z = MixtureSpec::zero_skew();
        assert!(z.mean().abs() < 1e-12);
        assert!((z.variance() - 1.0).abs() < 1e-12);
        assert!(z.third_central_moment().abs() < 1e-12);
        let n = MixtureSpec::negative_skew();
        assert!(n.mean().abs() < 1e-12);
        assert!((n.variance() - 1.0).abs() < 1e-12);
        assert!(n.third_central_moment() < 0.0);
        // E[Z^3] = -4 b^3 with b = sqrt(3/10)
        let b = (0.3f64).sqrt();
        assert!((n.third_central_moment() + 4.0 * b * b * b).abs() < 1e-12);
    }

    #[test]
    fn preset_moments_match_quadrature() {
        for m in [MixtureSpec::zero_skew(), MixtureSpec::negative_skew()] {
            for order in 0..=3 {
                let quad = integrated_moment(&m, order);
                let closed = m.raw_moment(order as u32);
                assert!((quad - closed).abs() < 1e-8, "order {order}: {quad} vs {closed}");
            }
        }
    }

    #[test]
    fn degenerate_mixture_is_standard_normal() {
        let m = MixtureSpec::new([1.0, 0.0], [0.0, 5.0], [1.0, 1.0]).unwrap();
        assert!((m.pdf(0.0) - 0.398_942_280_401_432_7).abs() < 1e-15);
    }

    #[test]
    fn invalid_mixtures_rejected() {
        assert!(MixtureSpec::new([0.5, 0.6], [0.0, 0.0], [1.0, 1.0]).is_err());
        assert!(MixtureSpec::new([0.5, 0.5], [0.0, 0.0], [1.0, 0.0]).is_err());
        assert!(MixtureSpec::new([-0.5, 1.5], [0.0, 0.0], [1.0, 1.0]).is_err());
    }

    #[test]
    fn gaussian_draw_moments() {
        let d = draw_innovations(InnovationLaw::Gaussian, 100_000, &SeedPath::new(11)).unwrap();
        let (mean, var, _) = sample_moments(d.z());
        assert!(mean.abs() < 0.02, "mean {mean}");
        assert!((0.98..1.02).contains(&var), "var {var}");
    }

    #[test]
    fn negative_skew_draws_are_skewed() {
        let d = draw_innovations(InnovationLaw::NegativeSkewMixture, 1_000_000, &SeedPath::new(3)).unwrap();
        let (_, _, m3) = sample_moments(d.z());
        assert!(m3 < 0.0);
    }

    #[test]
    fn draws_are_reproducible() {
        let seed = SeedPath::new(5).child(Level::Path, 2);
        let a = draw_innovations(InnovationLaw::ZeroSkewMixture, 1000, &seed).unwrap();
        let b = draw_innovations(InnovationLaw::ZeroSkewMixture, 1000, &seed).unwrap();
        assert_eq!(a, b);
        assert!(draw_innovations(InnovationLaw::Gaussian, 0, &seed).is_err());
    }

    #[test]
    fn decomposition_recomposes() {
        let d = draw_innovations(InnovationLaw::NegativeSkewMixture, 500, &SeedPath::new(1)).unwrap();
        for ((z, m), s) in d.z().iter().zip(d.moduli()).zip(d.signs()) {
            assert_eq!(*z, f64::from(*s) * m);
        }
        let zero = InnovationDraw::from_z(vec![0.0, -1.0]);
        assert_eq!(zero.signs(), &[1, -1]);
    }

    #[test]
    fn sign_probability_gaussian_is_half() {
        for psi in [1e-3, 0.5, 1.0, 4.0, 40.0] {
            assert_eq!(InnovationLaw::Gaussian.prob_positive(psi), 0.5);
        }
    }

    #[test]
    fn sign_probability_matches_density_ratio() {
        let law = InnovationLaw::ZeroSkewMixture;
        let m = law.mixture().unwrap();
        let direct = m.pdf(1.0) / (m.pdf(1.0) + m.pdf(-1.0));
        assert!((law.prob_positive(1.0) - direct).abs() < 1e-14);
        // direct evaluation of both components at +-1
        let a = (3.0f64 / 11.0).sqrt();
        let phi = |x: f64, mu: f64, s: f64| (-(x - mu).powi(2) / (2.0 * s * s)).exp() / (s * (2.0 * core::f64::consts::PI).sqrt());
        let f = |x: f64| phi(x, -2.0 * a, a) / 3.0 + 2.0 * phi(x, a, a * 2f64.sqrt()) / 3.0;
        assert!((law.prob_positive(1.0) - f(1.0) / (f(1.0) + f(-1.0))).abs() < 1e-14);
        // far tails stay finite
        let p = InnovationLaw::NegativeSkewMixture.prob_positive(60.0);
        assert!((0.0..=1.0).contains(&p));
    }

    #[test]
    fn zero_modulus_rejected() {
        let err = conditional_sign_redraw(&[1.0, 0.0], InnovationLaw::Gaussian, &SeedPath::new(0));
        assert_eq!(err, Err(Error::ZeroModulus(2)));
    }

    #[test]
    fn sign_redraw_preserves_mixture_moments() {
        let n = 1_000_000;
        let law = InnovationLaw::ZeroSkewMixture;
        let original = draw_innovations(law, n, &SeedPath::new(21)).unwrap();
        let signs = conditional_sign_redraw(original.moduli(), law, &SeedPath::new(22)).unwrap();
        let rebuilt = InnovationDraw::from_parts(original.moduli().to_vec(), signs);
        let (mean, var, m3) = sample_moments(rebuilt.z());
        // asymptotic standard errors of the first three sample moments
        let m = law.mixture().unwrap();
        let mu = |k: i32| integrated_moment(&m, k);
        let nf = n as f64;
        let se1 = (mu(2) / nf).sqrt();
        let se2 = ((mu(4) - mu(2).powi(2)) / nf).sqrt();
        let se3 = ((mu(6) - mu(3).powi(2) - 6.0 * mu(4) * mu(2) + 9.0 * mu(2).powi(3)) / nf).sqrt();
        assert!(mean.abs() < 4.0 * se1, "mean {mean}");
        assert!((var - 1.0).abs() < 4.0 * se2, "var {var}");
        assert!(m3.abs() < 4.0 * se3, "m3 {m3}");
    }

    #[test]
    fn multiplier_laws() {
        let seed = SeedPath::new(9);
        let r = draw_multipliers(MultiplierLaw::Rademacher, 1000, &seed).unwrap();
        assert!(r.iter().all(|&w| w == 1.0 || w == -1.0));

        let g = draw_multipliers(MultiplierLaw::Gaussian, 100_000, &seed).unwrap();
        let (_, var, _) = sample_moments(&g);
        assert!((0.98..1.02).contains(&var));

        let (lo, hi) = MultiplierLaw::mammen_support();
        let m = draw_multipliers(MultiplierLaw::Mammen, 100_000, &seed).unwrap();
        assert!(m.iter().all(|&w| w == lo || w == hi));
        let (mean, _, _) = sample_moments(&m);
        assert!(mean.abs() < 0.02);

        for law in [MultiplierLaw::Gaussian, MultiplierLaw::Rademacher, MultiplierLaw::Mammen] {
            let (mu, v) = law.moments();
            assert!(mu.abs() < 1e-15 && (v - 1.0).abs() < 1e-14, "{law:?}");
        }
        assert!(draw_multipliers(MultiplierLaw::Gaussian, 0, &seed).is_err());
    }

    proptest! {
        #[test]
        fn prob_positive_is_a_probability(psi in 1e-6f64..30.0) {
            for law in [InnovationLaw::ZeroSkewMixture, InnovationLaw::NegativeSkewMixture] {
                let p = law.prob_positive(psi);
                prop_assert!((0.0..=1.0).contains(&p));
                let m = law.mixture().unwrap();
                let (fp, fm) = (m.pdf(psi), m.pdf(-psi));
                if fp + fm > 1e-250 {
                    prop_assert!((p - fp / (fp + fm)).abs() < 1e-10);
                }
            }
        }
    }
}
