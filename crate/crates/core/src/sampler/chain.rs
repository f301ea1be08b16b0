use std::time::{Duration, Instant};

use rand::SeedableRng;
use serde::{Deserialize, Serialize};

use super::{ChainConfig, ChainRng, Observable, Scheme};
use crate::energy::EnergyFn;
use crate::error::{Error, Result};

/// Iterations between progress log lines.
pub const PROGRESS_INTERVAL: u64 = 100_000;

/// Recorded values of one observable along one chain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalarTrace {
    pub observable: String,
    pub seed: u64,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct ChainOutput<S> {
    /// One trace per observable, in the order given.
    pub traces: Vec<ScalarTrace>,
    /// Rejected proposals over the whole run.
    pub boundary_hits: u64,
    pub iterations: u64,
    pub wall_clock: Duration,
    pub final_state: S,
}

impl<S> ChainOutput<S> {
    pub fn trace(&self, observable: &str) -> Option<&ScalarTrace> {
        self.traces.iter().find(|t| t.observable == observable)
    }
}

/// Runs `config.total_iters` steps from `initial`, recording every observable
/// after burn-in at the configured thinning.
///
/// A step that fails is reported as [`Error::ChainAborted`] carrying the
/// 1-based iteration and the underlying error.
pub fn run_chain<S: Scheme>(
    scheme: &S,
    initial: S::State,
    energy: &dyn EnergyFn,
    config: &ChainConfig,
    observables: &[Observable],
) -> Result<ChainOutput<S::State>> {
    config.validate()?;
    let start = Instant::now();
    let mut rng = ChainRng::seed_from_u64(config.seed);
    let retained = usize::try_from(config.retained()).unwrap_or(usize::MAX);
    let mut traces: Vec<ScalarTrace> = observables
        .iter()
        .map(|o| ScalarTrace {
            observable: o.name().to_owned(),
            seed: config.seed,
            values: Vec::with_capacity(retained),
        })
        .collect();
    let abort = |iteration: u64, cause: Error| Error::ChainAborted {
        iteration,
        cause: Box::new(cause),
    };

    let mut state = initial;
    let mut boundary_hits = 0u64;
    for k in 1..=config.total_iters {
        let stepped = scheme.step(&state, energy, config, &mut rng).map_err(|e| abort(k, e))?;
        state = stepped.state;
        boundary_hits += u64::from(stepped.boundary_hits);
        if config.records(k) {
            let sample = scheme.sample(&state);
            for (trace, obs) in traces.iter_mut().zip(observables) {
                trace.values.push(obs.eval(&sample).map_err(|e| abort(k, e))?);
            }
        }
        if k % PROGRESS_INTERVAL == 0 {
            log::info!(
                "{} seed {}: {k}/{} iterations, {boundary_hits} boundary hits",
                scheme.name(),
                config.seed,
                config.total_iters
            );
        }
    }
    Ok(ChainOutput {
        traces,
        boundary_hits,
        iterations: config.total_iters,
        wall_clock: start.elapsed(),
        final_state: state,
    })
}
