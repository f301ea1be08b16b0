use statrs::distribution::{ChiSquared, ContinuousCDF};
use statrs::function::gamma::checked_gamma_lr;

use super::{check_ascending, ManifoldDims, Metric, ReferenceCdf};
use crate::error::{Error, Result};

/// `P(k/2, beta t^2 / 2)`, the CDF of `t` when `beta t^2 ~ chi^2(k)`.
fn chi_radial_cdf(dof: f64, beta: f64, t: f64) -> Result<f64> {
    if !(t >= 0.0) {
        return Err(Error::DomainError(format!("t must be nonnegative, got {t}")));
    }
    if !(beta > 0.0) {
        return Err(Error::DomainError(format!("beta must be positive, got {beta}")));
    }
    if t == 0.0 {
        return Ok(0.0);
    }
    let x = 0.5 * beta * t * t;
    if x.is_infinite() {
        return Ok(1.0);
    }
    checked_gamma_lr(0.5 * dof, x).map_err(|e| Error::DomainError(e.to_string()))
}

/// CDF of `||X||_F` for `E(X) = ||X||_F^2 / 2`: the normalized
/// `int_0^t exp(-beta r^2 / 2) r^(k-1) dr` with `k = N` (embedded) or `N/2`
/// (Bures–Wasserstein).
pub fn cdf_example1(dims: ManifoldDims, beta: f64, metric: Metric, t: f64) -> Result<f64> {
    chi_radial_cdf(dims.radial_dof(metric), beta, t)
}

/// CDF of `||X - A||_F` for `E(X) = ||X - A||_F^2 / 2` with `A` far from the
/// boundary. The radial law is then approximately that of the embedded
/// metric in Example I, and the same approximation is used for both metrics.
pub fn cdf_example3(dims: ManifoldDims, beta: f64, t: f64) -> Result<f64> {
    cdf_example1(dims, beta, Metric::Embedded, t)
}

pub fn example1_cdf(dims: ManifoldDims, beta: f64, metric: Metric, grid: &[f64]) -> Result<ReferenceCdf> {
    check_ascending(grid)?;
    let values = grid
        .iter()
        .map(|&t| cdf_example1(dims, beta, metric, t))
        .collect::<Result<_>>()?;
    ReferenceCdf::new(grid.to_vec(), values)
}

pub fn example3_cdf(dims: ManifoldDims, beta: f64, grid: &[f64]) -> Result<ReferenceCdf> {
    example1_cdf(dims, beta, Metric::Embedded, grid)
}

/// The `q`-quantile of `t` when `beta t^2 ~ chi^2(dof)`; used as the grid end
/// when an experiment does not fix one.
pub fn chi_t_max(dof: f64, beta: f64, q: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&q) || !(beta > 0.0) {
        return Err(Error::DomainError(format!("bad quantile request q={q}, beta={beta}")));
    }
    let chi = ChiSquared::new(dof).map_err(|e| Error::DomainError(e.to_string()))?;
    Ok((chi.inverse_cdf(q) / beta).sqrt())
}
