//! Empirical distribution functions and Kolmogorov–Smirnov distances.

use alloc::vec::Vec;

use crate::distributions::normal;
use crate::error::{Error, Result};

/// Reference cdf for [`ks_distance`].
#[derive(Debug, Clone, Copy)]
pub enum Reference {
    Uniform01,
    NormalStd,
    Custom(fn(f64) -> f64),
}

impl Reference {
    pub fn cdf(&self, x: f64) -> f64 {
        match self {
            Reference::Uniform01 => x.clamp(0.0, 1.0),
            Reference::NormalStd => normal::cdf(x),
            Reference::Custom(f) => f(x),
        }
    }
}

/// `F̂(g) = #{x ≤ g} / N` for every grid point `g`.
pub fn ecdf_on_grid(samples: &[f64], grid: &[f64]) -> Vec<f64> {
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len().max(1) as f64;
    grid.iter()
        .map(|&g| sorted.partition_point(|&x| x <= g) as f64 / n)
        .collect()
}

/// Sup-norm distance between ecdf values on `grid` and the reference cdf.
pub fn ks_distance(ecdf: &[f64], grid: &[f64], reference: Reference) -> Result<f64> {
    if ecdf.len() != grid.len() {
        return Err(Error::InvalidConfig(alloc::format!(
            "ecdf has {} values for a grid of {}",
            ecdf.len(),
            grid.len()
        )));
    }
    if ecdf.iter().any(|v| !(0.0..=1.0).contains(v)) || ecdf.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::InvalidConfig("ecdf values must be nondecreasing in [0, 1]".into()));
    }
    Ok(ecdf
        .iter()
        .zip(grid)
        .map(|(f, &g)| (f - reference.cdf(g)).abs())
        .fold(0.0, f64::max))
}

/// Exact one-sample KS statistic `sup_x |F̂_N(x) - F(x)|`.
pub fn ks_one_sample(samples: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in sorted.iter().enumerate() {
        let f = cdf(x);
        d = d.max((i + 1) as f64 / n - f).max(f - i as f64 / n);
    }
    d
}

/// Two-sample KS statistic `sup_x |F̂_a(x) - F̂_b(x)|`.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> f64 {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    d
}
