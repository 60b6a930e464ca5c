//! Partial-sum processes and the test statistics of the location, CUSUM and
//! unit-root problems.
//!
//! Step functions live on the grid `u = t/n`, `t = 0..n`, and are
//! right-continuous: the value at `t/n` includes the `t`-th increment.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::volatility::VolatilityPath;

/// Rejection region of a test.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Tail {
    Left,
    Right,
}

/// The testing problem a sample belongs to.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Model {
    /// `y_t = θ + ε_t`, testing `θ = theta_bar`.
    Location { theta_bar: f64 },
    /// `y_t = θ_t + ε_t`, testing a constant mean.
    Cusum,
    /// `y_t = (1 + θ) y_{t-1} + ε_t` with `y_0 = 0`, testing `θ = 0`.
    UnitRoot,
}

impl Model {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Location { .. } => "location",
            Self::Cusum => "cusum",
            Self::UnitRoot => "unit-root",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Statistic {
    /// `S = sqrt(n) (ȳ - θ̄)`.
    Location,
    /// `T = S / s`, `s² = n⁻¹ Σ (y - ȳ)²`.
    LocationStudentized,
    /// `T` with the null imposed in the scale, `s² = n⁻¹ Σ (y - θ̄)²`.
    LocationStudentizedNull,
    /// `CS = n^{-1/2} max_t |Σ_{i≤t} (y_i - ȳ)|`.
    Cusum,
    /// `CT = CS / s`.
    CusumStudentized,
    /// Dickey-Fuller coefficient statistic `R = n θ̂`.
    DickeyFullerCoefficient,
    /// Dickey-Fuller t-ratio `W = θ̂ / (s² / Σ y_{t-1}²)^{1/2}`.
    DickeyFullerRatio,
}

impl Statistic {
    pub const ALL: [Statistic; 7] = [
        Self::Location,
        Self::LocationStudentized,
        Self::LocationStudentizedNull,
        Self::Cusum,
        Self::CusumStudentized,
        Self::DickeyFullerCoefficient,
        Self::DickeyFullerRatio,
    ];

    /// Left for the location and unit-root statistics, right for CUSUM.
    pub fn tail(&self) -> Tail {
        match self {
            Self::Cusum | Self::CusumStudentized => Tail::Right,
            _ => Tail::Left,
        }
    }

    /// Conventional short label (`S`, `T`, `Tnull`, `CS`, `CT`, `R`, `W`).
    pub fn short_name(&self) -> &'static str {
        match self {
            Self::Location => "S",
            Self::LocationStudentized => "T",
            Self::LocationStudentizedNull => "Tnull",
            Self::Cusum => "CS",
            Self::CusumStudentized => "CT",
            Self::DickeyFullerCoefficient => "R",
            Self::DickeyFullerRatio => "W",
        }
    }

    /// Case-insensitive inverse of [`Statistic::short_name`].
    pub fn from_short_name(name: &str) -> Option<Self> {
        Self::ALL
            .into_iter()
            .find(|s| s.short_name().eq_ignore_ascii_case(name))
    }

    /// Whether the statistic belongs to `model`'s testing problem.
    pub fn fits(&self, model: &Model) -> bool {
        matches!(
            (self, model),
            (
                Self::Location | Self::LocationStudentized | Self::LocationStudentizedNull,
                Model::Location { .. }
            ) | (Self::Cusum | Self::CusumStudentized, Model::Cusum)
                | (Self::DickeyFullerCoefficient | Self::DickeyFullerRatio, Model::UnitRoot)
        )
    }

    /// The model this statistic tests, with `θ̄ = 0` for the location problem.
    pub fn default_model(&self) -> Model {
        match self {
            Self::Location | Self::LocationStudentized | Self::LocationStudentizedNull => {
                Model::Location { theta_bar: 0.0 }
            }
            Self::Cusum | Self::CusumStudentized => Model::Cusum,
            Self::DickeyFullerCoefficient | Self::DickeyFullerRatio => Model::UnitRoot,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct StatValue {
    pub stat: Statistic,
    pub value: f64,
    pub tail: Tail,
}

impl StatValue {
    fn new(stat: Statistic, value: f64) -> Self {
        Self {
            stat,
            value,
            tail: stat.tail(),
        }
    }
}

/// Observations of one testing problem.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    y: Vec<f64>,
    model: Model,
}

impl Sample {
    pub fn new(y: Vec<f64>, model: Model) -> Result<Self> {
        if y.len() < 2 {
            return Err(Error::TooShort { min: 2, got: y.len() });
        }
        Ok(Self { y, model })
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    pub fn model(&self) -> Model {
        self.model
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    /// Computes `stat`, which must belong to this sample's problem.
    pub fn statistic(&self, stat: Statistic) -> Result<StatValue> {
        if !stat.fits(&self.model) {
            return Err(Error::ModelMismatch {
                stat,
                problem: self.model.name(),
            });
        }
        let value = match self.model {
            Model::Location { theta_bar } => location_value(&self.y, theta_bar, stat)?,
            Model::Cusum => cusum_value(&self.y, stat)?,
            Model::UnitRoot => unit_root_value(&differences(&self.y), stat)?,
        };
        Ok(StatValue::new(stat, value))
    }
}

/// `(M_n, U_n)` and optionally `V_n` on the grid `t/n`, `t = 0..n`.
#[derive(Debug, Clone, PartialEq)]
pub struct PartialSumPair {
    n: usize,
    m_grid: Vec<f64>,
    u_grid: Vec<f64>,
    v_grid: Option<Vec<f64>>,
}

impl PartialSumPair {
    pub fn n(&self) -> usize {
        self.n
    }

    /// `M_n(t/n) = n^{-1/2} Σ_{i≤t} ε_i`.
    pub fn m_grid(&self) -> &[f64] {
        &self.m_grid
    }

    /// `U_n(t/n) = n⁻¹ Σ_{i≤t} ε_i²`.
    pub fn u_grid(&self) -> &[f64] {
        &self.u_grid
    }

    /// `V_n(t/n) = n⁻¹ Σ_{i≤t} σ_i²`, when the volatility is known.
    pub fn v_grid(&self) -> Option<&[f64]> {
        self.v_grid.as_deref()
    }

    /// `M_n(1)`.
    pub fn m1(&self) -> f64 {
        self.m_grid[self.n]
    }

    /// `U_n(1)`.
    pub fn u1(&self) -> f64 {
        self.u_grid[self.n]
    }

    /// `∫_0^1 M_n(u)² du` for the right-continuous step function.
    pub fn integral_m_squared(&self) -> f64 {
        self.m_grid[..self.n].iter().map(|m| m * m).sum::<f64>() / self.n as f64
    }

    /// `∫_0^1 M_n dM_n = ½ (M_n(1)² - U_n(1))`.
    pub fn stochastic_integral(&self) -> f64 {
        0.5 * (self.m1() * self.m1() - self.u1())
    }

    /// `sup_u |M_n(u) - u M_n(1)|` evaluated on the grid.
    pub fn bridge_sup(&self) -> f64 {
        let m1 = self.m1();
        let nf = self.n as f64;
        self.m_grid
            .iter()
            .enumerate()
            .map(|(t, m)| (m - (t as f64 / nf) * m1).abs())
            .fold(0.0, f64::max)
    }

    /// `sup_t |U_n(t/n) - V_n(t/n)|`.
    pub fn sup_u_minus_v(&self) -> Option<f64> {
        self.v_grid.as_ref().map(|v| {
            self.u_grid
                .iter()
                .zip(v)
                .map(|(u, v)| (u - v).abs())
                .fold(0.0, f64::max)
        })
    }

    /// The statistic written as a functional of `(M_n, U_n)`, valid when the
    /// sample is the null-model sample built from the same innovations
    /// (`y = ε` with `θ̄ = 0`, or `y_t = Σ_{i≤t} ε_i` for the unit root).
    pub fn functional(&self, stat: Statistic) -> f64 {
        let nf = self.n as f64;
        let (m1, u1) = (self.m1(), self.u1());
        match stat {
            Statistic::Location => m1,
            Statistic::LocationStudentized => m1 / libm::sqrt(u1 - m1 * m1 / nf),
            Statistic::LocationStudentizedNull => m1 / libm::sqrt(u1),
            Statistic::Cusum => self.bridge_sup(),
            Statistic::CusumStudentized => self.bridge_sup() / libm::sqrt(u1 - m1 * m1 / nf),
            Statistic::DickeyFullerCoefficient => self.stochastic_integral() / self.integral_m_squared(),
            Statistic::DickeyFullerRatio => {
                let num = self.stochastic_integral();
                let den = self.integral_m_squared();
                num / libm::sqrt(den) / libm::sqrt(u1 - num * num / den / nf)
            }
        }
    }
}

pub fn partial_sums(eps: &[f64], sigma: Option<&VolatilityPath>) -> Result<PartialSumPair> {
    let n = eps.len();
    if n == 0 {
        return Err(Error::TooShort { min: 1, got: 0 });
    }
    if let Some(path) = sigma {
        if path.len() != n {
            return Err(Error::TooShort { min: n, got: path.len() });
        }
    }
    let nf = n as f64;
    let root_n = libm::sqrt(nf);
    let mut m_grid = Vec::with_capacity(n + 1);
    let mut u_grid = Vec::with_capacity(n + 1);
    m_grid.push(0.0);
    u_grid.push(0.0);
    let (mut sum, mut sum_sq) = (0.0, 0.0);
    for &e in eps {
        sum += e;
        sum_sq += e * e;
        m_grid.push(sum / root_n);
        u_grid.push(sum_sq / nf);
    }
    let v_grid = sigma.map(|path| {
        let mut acc = 0.0;
        core::iter::once(0.0)
            .chain(path.sigmas().iter().map(|s| {
                acc += s * s;
                acc / nf
            }))
            .collect()
    });
    Ok(PartialSumPair {
        n,
        m_grid,
        u_grid,
        v_grid,
    })
}

pub fn stat_location(sample: &Sample, studentize: bool, null_variance: bool) -> Result<StatValue> {
    let stat = match (studentize, null_variance) {
        (false, _) => Statistic::Location,
        (true, false) => Statistic::LocationStudentized,
        (true, true) => Statistic::LocationStudentizedNull,
    };
    sample.statistic(stat)
}

pub fn stat_cusum(sample: &Sample, studentize: bool) -> Result<StatValue> {
    sample.statistic(if studentize {
        Statistic::CusumStudentized
    } else {
        Statistic::Cusum
    })
}

pub fn stat_unitroot(sample: &Sample, studentize: bool) -> Result<StatValue> {
    sample.statistic(if studentize {
        Statistic::DickeyFullerRatio
    } else {
        Statistic::DickeyFullerCoefficient
    })
}

/// `Δy_t = y_t - y_{t-1}` with `y_0 = 0`.
pub fn differences(y: &[f64]) -> Vec<f64> {
    let mut prev = 0.0;
    y.iter()
        .map(|&v| {
            let d = v - prev;
            prev = v;
            d
        })
        .collect()
}

fn mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

/// Location statistics on a raw slice.
pub(crate) fn location_value(y: &[f64], theta_bar: f64, stat: Statistic) -> Result<f64> {
    let nf = y.len() as f64;
    let ybar = mean(y);
    let s = libm::sqrt(nf) * (ybar - theta_bar);
    let scale_sq = match stat {
        Statistic::Location => return Ok(s),
        Statistic::LocationStudentized => y.iter().map(|v| (v - ybar) * (v - ybar)).sum::<f64>() / nf,
        Statistic::LocationStudentizedNull => {
            y.iter().map(|v| (v - theta_bar) * (v - theta_bar)).sum::<f64>() / nf
        }
        _ => unreachable!("not a location statistic"),
    };
    if !(scale_sq > 0.0) {
        return Err(Error::Degenerate(stat));
    }
    Ok(s / libm::sqrt(scale_sq))
}

/// CUSUM statistics on a raw slice; the maximum runs over `t = 1..n`.
pub(crate) fn cusum_value(y: &[f64], stat: Statistic) -> Result<f64> {
    let nf = y.len() as f64;
    let ybar = mean(y);
    let mut partial = 0.0;
    let mut peak: f64 = 0.0;
    let mut ss = 0.0;
    for &v in y {
        let d = v - ybar;
        partial += d;
        ss += d * d;
        peak = peak.max(partial.abs());
    }
    let cs = peak / libm::sqrt(nf);
    match stat {
        Statistic::Cusum => Ok(cs),
        Statistic::CusumStudentized => {
            if !(ss > 0.0) {
                return Err(Error::Degenerate(stat));
            }
            Ok(cs / libm::sqrt(ss / nf))
        }
        _ => unreachable!("not a CUSUM statistic"),
    }
}

/// Dickey-Fuller statistics from the increments `Δy_t` (with `y_0 = 0`).
pub(crate) fn unit_root_value(dy: &[f64], stat: Statistic) -> Result<f64> {
    let n = dy.len();
    let nf = n as f64;
    let (mut level, mut num, mut den) = (0.0, 0.0, 0.0);
    for &d in dy {
        num += level * d;
        den += level * level;
        level += d;
    }
    if !(den > 0.0) {
        return Err(Error::Degenerate(stat));
    }
    let theta = num / den;
    match stat {
        Statistic::DickeyFullerCoefficient => Ok(nf * theta),
        Statistic::DickeyFullerRatio => {
            let mut level = 0.0;
            let mut rss = 0.0;
            for &d in dy {
                let r = d - theta * level;
                rss += r * r;
                level += d;
            }
            let s2 = rss / nf;
            if !(s2 > 0.0) {
                return Err(Error::Degenerate(stat));
            }
            Ok(theta * libm::sqrt(den / s2))
        }
        _ => unreachable!("not a unit-root statistic"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::{draw_innovations, InnovationLaw, Level, SeedPath};
    use alloc::vec;
    use proptest::prelude::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
    }

    fn loc(y: Vec<f64>, theta_bar: f64) -> Sample {
        Sample::new(y, Model::Location { theta_bar }).unwrap()
    }

    #[test]
    fn partial_sums_by_hand() {
        let p = partial_sums(&[1.0, -1.0, 2.0], None).unwrap();
        let r3 = 3f64.sqrt();
        let m_expected = [0.0, 1.0 / r3, 0.0, 2.0 / r3];
        let u_expected = [0.0, 1.0 / 3.0, 2.0 / 3.0, 2.0];
        for t in 0..4 {
            assert!((p.m_grid()[t] - m_expected[t]).abs() < 1e-15);
            assert!((p.u_grid()[t] - u_expected[t]).abs() < 1e-15);
        }
        assert!(p.v_grid().is_none());

        let zero = partial_sums(&[0.0; 5], None).unwrap();
        assert!(zero.m_grid().iter().chain(zero.u_grid()).all(|&v| v == 0.0));
        assert!(partial_sums(&[], None).is_err());
    }

    #[test]
    fn quadratic_variation_identity() {
        let z = draw_innovations(InnovationLaw::NegativeSkewMixture, 1000, &SeedPath::new(4)).unwrap();
        let p = partial_sums(z.z(), None).unwrap();
        for t in 1..=1000 {
            let inc = p.m_grid()[t] - p.m_grid()[t - 1];
            let du = p.u_grid()[t] - p.u_grid()[t - 1];
            assert!((du - inc * inc).abs() < 1e-12);
        }
    }

    #[test]
    fn location_by_hand() {
        let s = loc(vec![1.0, -1.0, 2.0], 0.0);
        let sv = stat_location(&s, false, false).unwrap();
        assert!((sv.value - 2.0 / 3f64.sqrt()).abs() < 1e-14);
        assert_eq!(sv.tail, Tail::Left);
        let tn = stat_location(&s, true, true).unwrap();
        assert!((tn.value - (2.0 / 3f64.sqrt()) / 2f64.sqrt()).abs() < 1e-14);
        assert!((tn.value - 0.816_496_580_927_726).abs() < 1e-12);

        let exact = loc(vec![0.5; 6], 0.5);
        assert_eq!(stat_location(&exact, false, false).unwrap().value, 0.0);
        assert!(matches!(stat_location(&exact, true, false), Err(Error::Degenerate(_))));
    }

    #[test]
    fn cusum_by_hand() {
        let s = Sample::new(vec![1.0, -1.0], Model::Cusum).unwrap();
        let cs = stat_cusum(&s, false).unwrap();
        assert!((cs.value - 1.0 / 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(cs.tail, Tail::Right);
        let flat = Sample::new(vec![0.1; 7], Model::Cusum).unwrap();
        assert!(stat_cusum(&flat, false).unwrap().value < 1e-15);
    }

    #[test]
    fn unit_root_by_hand() {
        let s = Sample::new(vec![1.0, 2.0, 3.0], Model::UnitRoot).unwrap();
        assert!((stat_unitroot(&s, false).unwrap().value - 1.8).abs() < 1e-14);
        let flat = Sample::new(vec![2.5, 2.5, 2.5, 2.5], Model::UnitRoot).unwrap();
        assert_eq!(stat_unitroot(&flat, false).unwrap().value, 0.0);
        let zeros = Sample::new(vec![0.0, 0.0], Model::UnitRoot).unwrap();
        assert!(matches!(stat_unitroot(&zeros, false), Err(Error::Degenerate(_))));
    }

    #[test]
    fn dickey_fuller_numerator_identity() {
        let z = draw_innovations(InnovationLaw::Gaussian, 400, &SeedPath::new(12)).unwrap();
        let dy = z.z();
        let (mut level, mut num, mut sq) = (0.0, 0.0, 0.0);
        for &d in dy {
            num += level * d;
            sq += d * d;
            level += d;
        }
        assert!(close(num, 0.5 * (level * level - sq), 1e-10));
    }

    #[test]
    fn model_mismatch_rejected() {
        let s = Sample::new(vec![1.0, 2.0], Model::Cusum).unwrap();
        assert!(matches!(
            s.statistic(Statistic::DickeyFullerRatio),
            Err(Error::ModelMismatch { .. })
        ));
        assert!(Sample::new(vec![1.0], Model::Cusum).is_err());
    }

    #[test]
    fn short_names_round_trip() {
        for s in Statistic::ALL {
            assert_eq!(Statistic::from_short_name(s.short_name()), Some(s));
            assert!(s.fits(&s.default_model()));
        }
        assert_eq!(Statistic::from_short_name("tnull"), Some(Statistic::LocationStudentizedNull));
    }

    #[test]
    fn lemma_one_distance_shrinks() {
        use crate::volatility::{gen_garch_path, GarchSpec};
        let spec = GarchSpec::monte_carlo_default();
        let median = |n: usize| {
            let mut d: Vec<f64> = (0..51u64)
                .map(|r| {
                    let z = draw_innovations(InnovationLaw::Gaussian, n, &SeedPath::new(r).child(Level::Replicate, n as u64)).unwrap();
                    let path = gen_garch_path(spec, n, &z).unwrap();
                    let eps: Vec<f64> = z.z().iter().zip(path.sigmas()).map(|(z, s)| z * s).collect();
                    partial_sums(&eps, Some(&path)).unwrap().sup_u_minus_v().unwrap()
                })
                .collect();
            d.sort_by(f64::total_cmp);
            d[25]
        };
        assert!(median(5000) < median(100));
    }

    fn null_samples(eps: &[f64]) -> [(Sample, Statistic); 7] {
        let y = eps.to_vec();
        let mut acc = 0.0;
        let walk: Vec<f64> = eps.iter().map(|e| { acc += e; acc }).collect();
        let l = Model::Location { theta_bar: 0.0 };
        [
            (Sample::new(y.clone(), l).unwrap(), Statistic::Location),
            (Sample::new(y.clone(), l).unwrap(), Statistic::LocationStudentized),
            (Sample::new(y.clone(), l).unwrap(), Statistic::LocationStudentizedNull),
            (Sample::new(y.clone(), Model::Cusum).unwrap(), Statistic::Cusum),
            (Sample::new(y, Model::Cusum).unwrap(), Statistic::CusumStudentized),
            (Sample::new(walk.clone(), Model::UnitRoot).unwrap(), Statistic::DickeyFullerCoefficient),
            (Sample::new(walk, Model::UnitRoot).unwrap(), Statistic::DickeyFullerRatio),
        ]
    }

    proptest! {
        #[test]
        fn direct_and_functional_forms_agree(eps in proptest::collection::vec(-5.0f64..5.0, 3..200)) {
            let p = partial_sums(&eps, None).unwrap();
            for (sample, stat) in null_samples(&eps) {
                match (sample.statistic(stat), p.functional(stat)) {
                    (Ok(direct), functional) if functional.is_finite() => {
                        prop_assert!(close(direct.value, functional, 1e-9), "{stat:?}: {} vs {functional}", direct.value);
                    }
                    _ => {}
                }
            }
        }

        #[test]
        fn scale_equivariance(eps in proptest::collection::vec(-5.0f64..5.0, 3..100), c in 0.1f64..20.0) {
            let scaled: Vec<f64> = eps.iter().map(|e| c * e).collect();
            for ((a, stat), (b, _)) in null_samples(&eps).into_iter().zip(null_samples(&scaled)) {
                if let (Ok(x), Ok(y)) = (a.statistic(stat), b.statistic(stat)) {
                    let factor = match stat {
                        Statistic::Location | Statistic::Cusum => c,
                        _ => 1.0,
                    };
                    prop_assert!(close(y.value, factor * x.value, 1e-9), "{stat:?}");
                }
            }
        }

        #[test]
        fn location_shift_invariance(y in proptest::collection::vec(-5.0f64..5.0, 3..100), c in -50.0f64..50.0) {
            let shifted: Vec<f64> = y.iter().map(|v| v + c).collect();
            for stat in [Statistic::Location, Statistic::LocationStudentized, Statistic::LocationStudentizedNull] {
                let a = loc(y.clone(), 0.3).statistic(stat);
                let b = loc(shifted.clone(), 0.3 + c).statistic(stat);
                if let (Ok(a), Ok(b)) = (a, b) {
                    prop_assert!((a.value - b.value).abs() < 1e-8 * (1.0 + a.value.abs()));
                }
            }
            let a = Sample::new(y.clone(), Model::Cusum).unwrap().statistic(Statistic::Cusum).unwrap();
            let b = Sample::new(shifted, Model::Cusum).unwrap().statistic(Statistic::Cusum).unwrap();
            prop_assert!((a.value - b.value).abs() < 1e-8 * (1.0 + a.value.abs()));
        }

        #[test]
        fn partial_sum_invariants(eps in proptest::collection::vec(-5.0f64..5.0, 1..200)) {
            let p = partial_sums(&eps, None).unwrap();
            prop_assert_eq!(p.m_grid()[0], 0.0);
            prop_assert_eq!(p.u_grid()[0], 0.0);
            prop_assert!(p.u_grid().windows(2).all(|w| w[1] >= w[0]));
        }
    }
}
