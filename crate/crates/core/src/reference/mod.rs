//! Reference distributions of `D(X)` under the Gibbs measure, and the
//! statistics comparing them with chain output.

mod cdf;
mod integration;
mod quadrature;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use cdf::{cdf_example1, cdf_example3, chi_t_max, example1_cdf, example3_cdf};
pub use integration::{
    closed_form_integral, error_decay_slope, mcmc_integral_estimate, mcmc_integral_estimate_log, mcmc_prefix_estimates,
};
pub use quadrature::{cdf_example2, Example2Quadrature};

use crate::error::{Error, Result};
use crate::sampler::ScalarTrace;

/// Default number of evaluation points for a KS comparison.
pub const DEFAULT_GRID_POINTS: usize = 100;

/// Riemannian metric on the manifold.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Metric {
    /// Metric induced by the Frobenius inner product.
    #[serde(rename = "E")]
    Embedded,
    #[serde(rename = "BW")]
    BuresWasserstein,
}

impl Metric {
    pub fn as_str(&self) -> &'static str {
        match self {
            Metric::Embedded => "E",
            Metric::BuresWasserstein => "BW",
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "E" | "e" | "embedded" => Ok(Metric::Embedded),
            "BW" | "bw" | "bures_wasserstein" => Ok(Metric::BuresWasserstein),
            other => Err(Error::InvalidMetric(other.to_owned())),
        }
    }
}

/// Shape of `S_+^{n,p}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifoldDims {
    pub n: usize,
    pub p: usize,
}

impl ManifoldDims {
    pub fn new(n: usize, p: usize) -> Result<Self> {
        if p == 0 || p > n {
            return Err(Error::dims("1 <= p <= n", format!("n={n}, p={p}")));
        }
        Ok(Self { n, p })
    }

    /// `N = n p - p (p - 1) / 2`.
    pub fn manifold_dim(&self) -> usize {
        self.n * self.p - self.p * (self.p - 1) / 2
    }

    /// Degrees of freedom of the radial law of `||X||_F` under a quadratic
    /// energy: `N` for the embedded metric, `N/2` for Bures–Wasserstein.
    pub fn radial_dof(&self, metric: Metric) -> f64 {
        let n = self.manifold_dim() as f64;
        match metric {
            Metric::Embedded => n,
            Metric::BuresWasserstein => n / 2.0,
        }
    }
}

/// A CDF tabulated on an ascending grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReferenceCdf {
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
}

impl ReferenceCdf {
    pub fn new(grid: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if grid.len() != values.len() {
            return Err(Error::GridMismatch);
        }
        check_ascending(&grid)?;
        if values.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::DomainError("CDF values must be nondecreasing".into()));
        }
        if values.iter().any(|v| !(-1e-12..=1.0 + 1e-9).contains(v)) {
            return Err(Error::DomainError("CDF values must lie in [0, 1]".into()));
        }
        Ok(Self { grid, values })
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    /// Pairs `(t, F(t))`.
    pub fn iter(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.grid.iter().copied().zip(self.values.iter().copied())
    }
}

pub(crate) fn check_ascending(grid: &[f64]) -> Result<()> {
    if grid.iter().any(|t| !t.is_finite()) || grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::DomainError("grid must be finite and strictly ascending".into()));
    }
    Ok(())
}

/// `points` equally spaced values on `[0, t_max]`, endpoints included.
pub fn uniform_grid(t_max: f64, points: usize) -> Vec<f64> {
    match points {
        0 => Vec::new(),
        1 => vec![t_max],
        _ => {
            let step = t_max / (points - 1) as f64;
            (0..points)
                .map(|i| if i + 1 == points { t_max } else { i as f64 * step })
                .collect()
        }
    }
}

/// `F(t) = #{D_i <= t} / m` at every grid point.
pub fn empirical_cdf(trace: &ScalarTrace, grid: &[f64]) -> Result<ReferenceCdf> {
    if trace.values.is_empty() {
        return Err(Error::EmptyTrace);
    }
    check_ascending(grid)?;
    let mut sorted = trace.values.clone();
    sorted.sort_by(f64::total_cmp);
    let m = sorted.len() as f64;
    let values = grid
        .iter()
        .map(|&t| sorted.partition_point(|&d| d <= t) as f64 / m)
        .collect();
    Ok(ReferenceCdf {
        grid: grid.to_vec(),
        values,
    })
}

/// `max_t |F(t) - G(t)|` over the shared grid.
pub fn ks_statistic(reference: &ReferenceCdf, empirical: &ReferenceCdf) -> Result<f64> {
    if reference.grid.len() != empirical.grid.len() {
        return Err(Error::GridMismatch);
    }
    let mut ks = 0.0f64;
    for ((a, fa), (b, fb)) in reference.iter().zip(empirical.iter()) {
        if (a - b).abs() > 1e-12 * a.abs().max(1.0) {
            return Err(Error::GridMismatch);
        }
        ks = ks.max((fa - fb).abs());
    }
    Ok(ks)
}
