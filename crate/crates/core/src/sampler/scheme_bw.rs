//! Langevin chain for the Bures–Wasserstein metric, run on a factor `Y`
//! with `X = Y Y^T`:
//!
//! ```text
//! Y' = Y - dt * 2 grad E(Y Y^T) Y + sqrt(2 dt / beta) B - (dt / beta) grad S(Y)
//! ```
//!
//! where `S(Y) = 1/2 sum_{i<j} log(sigma_i^2 + sigma_j^2)` accounts for the
//! volume of the orthogonal orbit of `Y`. Its sign makes the pushforward of
//! the stationary law equal `exp(-beta E) dV_BW`.

use nalgebra::DMatrix;
use rand::Rng;

use super::noise::sample_noise_bw;
use super::{with_boundary_policy, ChainConfig, ChainRng, Sample, Scheme, Stepped};
use crate::energy::EnergyFn;
use crate::error::{Error, Result};
use crate::geometry::{compact_svd, grad_entropy_from_svd, FactorPoint};

/// The unvalidated next factor for a given noise draw.
pub fn scheme_bw_proposal(
    y: &FactorPoint,
    energy: &dyn EnergyFn,
    config: &ChainConfig,
    noise: Option<&DMatrix<f64>>,
) -> Result<DMatrix<f64>> {
    let grad = energy.factor_gradient(y)?;
    if grad.shape() != y.y().shape() {
        return Err(Error::dims(
            format!("{:?}", y.y().shape()),
            format!("{:?}", grad.shape()),
        ));
    }
    let mut next = y.y() - grad * config.dt;
    if let Some(b) = noise {
        if b.shape() != y.y().shape() {
            return Err(Error::dims(format!("{:?}", y.y().shape()), format!("{:?}", b.shape())));
        }
        next += b * config.noise_scale();
        let grad_s = grad_entropy_from_svd(&y.svd()?);
        next -= grad_s * config.correction_scale();
    }
    Ok(next)
}

pub fn scheme_bw_update(
    y: &FactorPoint,
    energy: &dyn EnergyFn,
    config: &ChainConfig,
    noise: Option<&DMatrix<f64>>,
) -> Result<FactorPoint> {
    let next = scheme_bw_proposal(y, energy, config, noise)?;
    compact_svd(&next)?;
    Ok(FactorPoint::from_validated(next))
}

/// One step drawing `n p` normals per attempt (none when `beta` is infinite).
pub fn step_scheme_bw<R: Rng + ?Sized>(
    y: &FactorPoint,
    energy: &dyn EnergyFn,
    config: &ChainConfig,
    rng: &mut R,
) -> Result<Stepped<FactorPoint>> {
    let (n, p) = (y.n(), y.p());
    with_boundary_policy(config, || {
        if config.is_deterministic() {
            scheme_bw_update(y, energy, config, None)
        } else {
            let b = sample_noise_bw(rng, n, p);
            scheme_bw_update(y, energy, config, Some(&b))
        }
    })
}

/// The Bures–Wasserstein chain.
#[derive(Debug, Clone, Copy, Default)]
pub struct SchemeBw;

impl Scheme for SchemeBw {
    type State = FactorPoint;

    fn name(&self) -> &'static str {
        "BW"
    }

    fn step(
        &self,
        state: &FactorPoint,
        energy: &dyn EnergyFn,
        config: &ChainConfig,
        rng: &mut ChainRng,
    ) -> Result<Stepped<FactorPoint>> {
        step_scheme_bw(state, energy, config, rng)
    }

    fn sample<'a>(&self, state: &'a FactorPoint) -> Sample<'a> {
        Sample::Factor(state)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::energy::Frobenius;
    use crate::geometry::{grad_entropy, random_orthonormal};
    use crate::test_util::{gaussian, rng};

    #[test]
    fn descent_on_frobenius_matches_closed_form() {
        // grad F = 2 Y Y^T Y, so with Y = diag(2, 1) padded the step is explicit
        let mut y = DMatrix::zeros(4, 2);
        y[(0, 0)] = 2.0;
        y[(1, 1)] = 1.0;
        let y = FactorPoint::new(y).unwrap();
        let cfg = ChainConfig::new(0.01, f64::INFINITY, 1, 0);
        let next = step_scheme_bw(&y, &Frobenius, &cfg, &mut rng(0)).unwrap().state;
        assert!((next.y()[(0, 0)] - (2.0 - 0.01 * 16.0)).abs() < 1e-14);
        assert!((next.y()[(1, 1)] - (1.0 - 0.01 * 2.0)).abs() < 1e-14);
    }

    #[test]
    fn entropy_enters_with_negative_sign() {
        let mut r = rng(4);
        let y = FactorPoint::new(gaussian(&mut r, 5, 3)).unwrap();
        let cfg = ChainConfig::new(0.01, 0.5, 1, 0);
        let b = gaussian(&mut r, 5, 3);
        let got = scheme_bw_proposal(&y, &Frobenius, &cfg, Some(&b)).unwrap();
        let want = y.y() - Frobenius.factor_gradient(&y).unwrap() * cfg.dt + &b * cfg.noise_scale()
            - grad_entropy(&y).unwrap() * cfg.correction_scale();
        assert!((got - want).amax() < 1e-13);
    }

    #[test]
    fn step_commutes_with_orthogonal_action() {
        // Y -> Y O maps the update for B to the update for B O
        let mut r = rng(8);
        let y = FactorPoint::new(gaussian(&mut r, 6, 3)).unwrap();
        let o = random_orthonormal(&mut r, 3, 3).unwrap();
        let b = gaussian(&mut r, 6, 3);
        let cfg = ChainConfig::new(0.005, 0.4, 1, 0);
        let yo = FactorPoint::new(y.y() * &o).unwrap();
        let next = scheme_bw_update(&y, &Frobenius, &cfg, Some(&b)).unwrap();
        let next_o = scheme_bw_update(&yo, &Frobenius, &cfg, Some(&(&b * &o))).unwrap();
        assert!((next.to_dense() - next_o.to_dense()).amax() < 1e-8);
    }

    #[test]
    fn noisy_step_is_reproducible() {
        let y = FactorPoint::new(gaussian(&mut rng(1), 5, 3)).unwrap();
        let cfg = ChainConfig::new(0.01, 0.4, 1, 0);
        let a = step_scheme_bw(&y, &Frobenius, &cfg, &mut rng(9)).unwrap().state;
        let b = step_scheme_bw(&y, &Frobenius, &cfg, &mut rng(9)).unwrap().state;
        assert_eq!(a, b);
    }
}
