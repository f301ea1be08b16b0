use std::collections::HashSet;

use super::{run_chain, ChainConfig, ChainOutput, Observable, Scheme};
use crate::energy::EnergyFn;
use crate::error::{Error, Result};

fn check_seeds(configs: &[ChainConfig]) -> Result<()> {
    let mut seen = HashSet::with_capacity(configs.len());
    for c in configs {
        if !seen.insert(c.seed) {
            return Err(Error::InvalidConfig(format!("duplicate seed {} in ensemble", c.seed)));
        }
    }
    Ok(())
}

/// Runs one independent chain per config, one after the other.
///
/// Per-chain failures are returned in place; results follow the order of
/// `configs`. Seeds must be distinct.
pub fn run_ensemble_sequential<S, F>(
    scheme: &S,
    configs: &[ChainConfig],
    initial: F,
    energy: &dyn EnergyFn,
    observables: &[Observable],
) -> Result<Vec<Result<ChainOutput<S::State>>>>
where
    S: Scheme,
    F: Fn(&ChainConfig) -> Result<S::State>,
{
    check_seeds(configs)?;
    Ok(configs
        .iter()
        .map(|c| run_chain(scheme, initial(c)?, energy, c, observables))
        .collect())
}

/// Same as [`run_ensemble_sequential`], with chains spread over the rayon
/// pool when the `parallel` feature is on. Output is identical either way.
#[cfg(feature = "parallel")]
pub fn run_ensemble<S, F>(
    scheme: &S,
    configs: &[ChainConfig],
    initial: F,
    energy: &dyn EnergyFn,
    observables: &[Observable],
) -> Result<Vec<Result<ChainOutput<S::State>>>>
where
    S: Scheme,
    F: Fn(&ChainConfig) -> Result<S::State> + Sync,
{
    use rayon::prelude::*;
    check_seeds(configs)?;
    Ok(configs
        .par_iter()
        .map(|c| run_chain(scheme, initial(c)?, energy, c, observables))
        .collect())
}

#[cfg(not(feature = "parallel"))]
pub fn run_ensemble<S, F>(
    scheme: &S,
    configs: &[ChainConfig],
    initial: F,
    energy: &dyn EnergyFn,
    observables: &[Observable],
) -> Result<Vec<Result<ChainOutput<S::State>>>>
where
    S: Scheme,
    F: Fn(&ChainConfig) -> Result<S::State> + Sync,
{
    run_ensemble_sequential(scheme, configs, initial, energy, observables)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::energy::Frobenius;
    use crate::geometry::PsdPoint;
    use crate::sampler::{EmbeddedState, SchemeE};

    fn init(_: &ChainConfig) -> Result<EmbeddedState> {
        EmbeddedState::new(PsdPoint::from_diagonal(&[1.0, 0.5], 4)?)
    }

    #[test]
    fn parallel_matches_sequential() {
        let configs: Vec<_> = (0..4).map(|s| ChainConfig::new(0.01, 0.5, 120, s)).collect();
        let obs = [Observable::frobenius_norm()];
        let par = run_ensemble(&SchemeE, &configs, init, &Frobenius, &obs).unwrap();
        let seq = run_ensemble_sequential(&SchemeE, &configs, init, &Frobenius, &obs).unwrap();
        for (a, b) in par.iter().zip(&seq) {
            let (a, b) = (a.as_ref().unwrap(), b.as_ref().unwrap());
            assert_eq!(a.traces, b.traces);
        }
        let seeds: Vec<_> = par.iter().map(|r| r.as_ref().unwrap().traces[0].seed).collect();
        assert_eq!(seeds, vec![0, 1, 2, 3]);
    }

    #[test]
    fn duplicate_seeds_rejected() {
        let configs = vec![ChainConfig::new(0.01, 0.5, 10, 1); 2];
        assert!(matches!(
            run_ensemble(&SchemeE, &configs, init, &Frobenius, &[]),
            Err(Error::InvalidConfig(_))
        ));
    }

    #[test]
    fn one_failure_does_not_sink_the_rest() {
        let configs = vec![
            ChainConfig::new(0.01, 0.5, 10, 1),
            ChainConfig::new(0.01, 0.5, 10, 2).with_thinning(0),
        ];
        let out = run_ensemble(&SchemeE, &configs, init, &Frobenius, &[]).unwrap();
        assert!(out[0].is_ok());
        assert!(out[1].is_err());
    }
}
