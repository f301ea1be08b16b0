//! Orbit entropy of the quotient `R^{n x p}_* / O_p` and its gradient.

use nalgebra::DMatrix;

use super::{CompactSvd, FactorPoint};
use crate::error::Result;

/// `S(Y) = 1/2 sum_{i<j} log(sigma_i^2 + sigma_j^2)`, the log-volume of the
/// orbit `{ Y O }`.
pub fn entropy(point: &FactorPoint) -> Result<f64> {
    let svd = point.svd()?;
    let s2: Vec<f64> = svd.sigma.iter().map(|s| s * s).collect();
    let mut total = 0.0;
    for i in 0..s2.len() {
        for j in (i + 1)..s2.len() {
            total += (s2[i] + s2[j]).ln();
        }
    }
    Ok(0.5 * total)
}

/// `grad S(Y) = Q diag(d) P^T` with `d_i = sum_{j != i} sigma_i / (sigma_i^2 + sigma_j^2)`.
pub fn grad_entropy(point: &FactorPoint) -> Result<DMatrix<f64>> {
    Ok(grad_entropy_from_svd(&point.svd()?))
}

pub fn grad_entropy_from_svd(svd: &CompactSvd) -> DMatrix<f64> {
    let sigma = &svd.sigma;
    let p = sigma.len();
    let mut q = svd.q.clone();
    for i in 0..p {
        let si = sigma[i];
        let d: f64 = (0..p)
            .filter(|&j| j != i)
            .map(|j| si / (si * si + sigma[j] * sigma[j]))
            .sum();
        q.column_mut(i).scale_mut(d);
    }
    q * svd.p.transpose()
}
