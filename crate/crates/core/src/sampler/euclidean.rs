use nalgebra::DMatrix;
use rand::Rng;

use super::noise::sample_noise_bw;
use super::{ChainConfig, ChainRng, Sample, Scheme, Stepped};
use crate::energy::EnergyFn;
use crate::error::{Error, Result};

/// Flat Langevin step on all n×n matrices,
/// `X' = X - dt grad E(X) + sqrt(2 dt / beta) xi` with i.i.d. entries.
pub fn step_euclidean<R: Rng + ?Sized>(
    x: &DMatrix<f64>,
    energy: &dyn EnergyFn,
    config: &ChainConfig,
    rng: &mut R,
) -> Result<DMatrix<f64>> {
    let grad = energy.euclidean_grad_dense(x)?;
    if grad.shape() != x.shape() {
        return Err(Error::dims(format!("{:?}", x.shape()), format!("{:?}", grad.shape())));
    }
    let mut next = x - grad * config.dt;
    if !config.is_deterministic() {
        next += sample_noise_bw(rng, x.nrows(), x.ncols()) * config.noise_scale();
    }
    Ok(next)
}

/// Unconstrained baseline chain on `R^{n×n}`.
#[derive(Debug, Clone, Copy, Default)]
pub struct EuclideanLangevin;

impl Scheme for EuclideanLangevin {
    type State = DMatrix<f64>;

    fn name(&self) -> &'static str {
        "Euclidean"
    }

    fn step(
        &self,
        state: &DMatrix<f64>,
        energy: &dyn EnergyFn,
        config: &ChainConfig,
        rng: &mut ChainRng,
    ) -> Result<Stepped<DMatrix<f64>>> {
        Ok(Stepped {
            state: step_euclidean(state, energy, config, rng)?,
            boundary_hits: 0,
        })
    }

    fn sample<'a>(&self, state: &'a DMatrix<f64>) -> Sample<'a> {
        Sample::Dense(state)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::energy::{Frobenius, VonNeumann};
    use crate::test_util::rng;

    #[test]
    fn descent_contracts() {
        let x = DMatrix::from_element(3, 3, 1.0);
        let cfg = ChainConfig::new(0.1, f64::INFINITY, 1, 0);
        let next = step_euclidean(&x, &Frobenius, &cfg, &mut rng(0)).unwrap();
        assert!((next - x * 0.9).amax() < 1e-15);
    }

    #[test]
    fn spectral_energy_is_rejected() {
        let x = DMatrix::identity(3, 3);
        let cfg = ChainConfig::new(0.1, 1.0, 1, 0);
        let err = step_euclidean(&x, &VonNeumann, &cfg, &mut rng(0)).unwrap_err();
        assert!(matches!(err, Error::DenseUnsupported(_)));
    }
}
