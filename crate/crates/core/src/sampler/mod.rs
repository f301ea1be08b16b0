//! Euler–Maruyama Langevin chains on the fixed-rank PSD manifold.

mod chain;
mod config;
mod ensemble;
mod euclidean;
mod noise;
mod scheme_bw;
mod scheme_e;

use std::sync::Arc;

use nalgebra::DMatrix;
use rand_chacha::ChaCha8Rng;

pub use chain::{run_chain, ChainOutput, ScalarTrace, PROGRESS_INTERVAL};
pub use config::{BoundaryPolicy, ChainConfig, MAX_REDRAWS};
pub use ensemble::{run_ensemble, run_ensemble_sequential};
pub use euclidean::{step_euclidean, EuclideanLangevin};
pub use noise::{sample_noise_bw, sample_noise_e, StructuredNoiseE};
pub use scheme_bw::{scheme_bw_proposal, scheme_bw_update, step_scheme_bw, SchemeBw};
pub use scheme_e::{scheme_e_proposal, scheme_e_update, step_scheme_e, EmbeddedState, SchemeE};

use crate::energy::EnergyFn;
use crate::error::{Error, Result};
use crate::geometry::{FactorPoint, PsdPoint};

/// Random generator used by every chain; one per chain, seeded from
/// [`ChainConfig::seed`].
pub type ChainRng = ChaCha8Rng;

/// Result of one step, with the number of proposals rejected at the rank
/// boundary before it was accepted.
#[derive(Debug, Clone)]
pub struct Stepped<S> {
    pub state: S,
    pub boundary_hits: u32,
}

/// A discretized Langevin dynamics.
pub trait Scheme: Sync {
    type State: Clone + Send;

    fn name(&self) -> &'static str;

    fn step(
        &self,
        state: &Self::State,
        energy: &dyn EnergyFn,
        config: &ChainConfig,
        rng: &mut ChainRng,
    ) -> Result<Stepped<Self::State>>;

    fn sample<'a>(&self, state: &'a Self::State) -> Sample<'a>;
}

/// Read-only view of a chain state, as seen by observables.
#[derive(Debug, Clone, Copy)]
pub enum Sample<'a> {
    Embedded(&'a PsdPoint),
    Factor(&'a FactorPoint),
    Dense(&'a DMatrix<f64>),
}

impl Sample<'_> {
    /// `||X||_F`.
    pub fn frobenius_norm(&self) -> f64 {
        match self {
            Sample::Embedded(x) => x.frobenius_norm(),
            Sample::Factor(y) => y.frobenius_norm(),
            Sample::Dense(x) => x.norm(),
        }
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        match self {
            Sample::Embedded(x) => x.to_dense(),
            Sample::Factor(y) => y.to_dense(),
            Sample::Dense(x) => (*x).clone(),
        }
    }

    pub fn energy(&self, energy: &dyn EnergyFn) -> Result<f64> {
        match self {
            Sample::Embedded(x) => energy.value(x),
            Sample::Factor(y) => energy.factor_value(y),
            Sample::Dense(x) => energy.value_dense(x),
        }
    }
}

type ObservableFn = dyn Fn(&Sample<'_>) -> Result<f64> + Send + Sync;

/// A named scalar function of the state, recorded along a chain.
#[derive(Clone)]
pub struct Observable {
    name: String,
    f: Arc<ObservableFn>,
}

impl std::fmt::Debug for Observable {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Observable").field("name", &self.name).finish()
    }
}

impl Observable {
    pub fn new<F>(name: impl Into<String>, f: F) -> Self
    where
        F: Fn(&Sample<'_>) -> Result<f64> + Send + Sync + 'static,
    {
        Self {
            name: name.into(),
            f: Arc::new(f),
        }
    }

    /// `D(X) = ||X||_F`.
    pub fn frobenius_norm() -> Self {
        Self::new("frob_norm", |s| Ok(s.frobenius_norm()))
    }

    /// `D(X) = ||X - A||_F`.
    pub fn distance_to(target: DMatrix<f64>) -> Self {
        Self::new("frob_dist_to_A", move |s| {
            let x = s.to_dense();
            if x.shape() != target.shape() {
                return Err(Error::DimensionMismatch {
                    expected: format!("{:?}", target.shape()),
                    found: format!("{:?}", x.shape()),
                });
            }
            Ok((x - &target).norm())
        })
    }

    pub fn energy(energy: Arc<dyn EnergyFn>) -> Self {
        Self::new("energy", move |s| s.energy(energy.as_ref()))
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn eval(&self, sample: &Sample<'_>) -> Result<f64> {
        (self.f)(sample)
    }
}

/// Runs `attempt` until it yields a state on the manifold, following the
/// boundary policy. Each attempt is expected to draw fresh noise.
pub(crate) fn with_boundary_policy<T>(
    config: &ChainConfig,
    mut attempt: impl FnMut() -> Result<T>,
) -> Result<Stepped<T>> {
    let max_attempts = match config.boundary_policy {
        // redrawing cannot help a deterministic step
        BoundaryPolicy::Reject if !config.is_deterministic() => 1 + MAX_REDRAWS,
        _ => 1,
    };
    for tried in 1..=max_attempts {
        match attempt() {
            Ok(state) => {
                return Ok(Stepped {
                    state,
                    boundary_hits: tried - 1,
                })
            }
            Err(Error::RankDeficient { .. }) => continue,
            Err(e) => return Err(e),
        }
    }
    Err(Error::BoundaryHit { attempts: max_attempts })
}
