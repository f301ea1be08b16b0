use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Number of noise redraws allowed under [`BoundaryPolicy::Reject`] before
/// the chain gives up.
pub const MAX_REDRAWS: u32 = 10;

/// What to do when a step leaves the fixed-rank manifold.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryPolicy {
    /// Redraw the noise up to [`MAX_REDRAWS`] times, then abort.
    #[default]
    Reject,
    /// Abort on the first rank-deficient proposal.
    Abort,
}

/// Parameters of a single chain.
///
/// `beta = f64::INFINITY` turns both chains into their deterministic
/// gradient-descent limits.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainConfig {
    pub dt: f64,
    pub beta: f64,
    pub total_iters: u64,
    pub burn_in: u64,
    pub thinning: u64,
    pub seed: u64,
    pub boundary_policy: BoundaryPolicy,
}

impl ChainConfig {
    /// Defaults: burn-in of one sixth of the iterations, no thinning,
    /// reject-and-redraw at the boundary.
    pub fn new(dt: f64, beta: f64, total_iters: u64, seed: u64) -> Self {
        Self {
            dt,
            beta,
            total_iters,
            burn_in: total_iters / 6,
            thinning: 1,
            seed,
            boundary_policy: BoundaryPolicy::Reject,
        }
    }

    pub fn with_burn_in(mut self, burn_in: u64) -> Self {
        self.burn_in = burn_in;
        self
    }

    pub fn with_thinning(mut self, thinning: u64) -> Self {
        self.thinning = thinning;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_policy(mut self, policy: BoundaryPolicy) -> Self {
        self.boundary_policy = policy;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::InvalidConfig(format!("dt must be positive, got {}", self.dt)));
        }
        if !(self.beta > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "beta must be positive or infinite, got {}",
                self.beta
            )));
        }
        if self.total_iters == 0 {
            return Err(Error::InvalidConfig("total_iters must be positive".into()));
        }
        if self.burn_in >= self.total_iters {
            return Err(Error::InvalidConfig(format!(
                "burn_in ({}) must be smaller than total_iters ({})",
                self.burn_in, self.total_iters
            )));
        }
        if self.thinning == 0 {
            return Err(Error::InvalidConfig("thinning must be at least 1".into()));
        }
        Ok(())
    }

    pub fn is_deterministic(&self) -> bool {
        self.beta.is_infinite()
    }

    /// `sqrt(2 dt / beta)`.
    pub fn noise_scale(&self) -> f64 {
        (2.0 * self.dt / self.beta).sqrt()
    }

    /// `dt / beta`, the weight of the curvature/entropy drift.
    pub fn correction_scale(&self) -> f64 {
        self.dt / self.beta
    }

    /// Whether the state after iteration `k` (1-based) is recorded.
    pub fn records(&self, k: u64) -> bool {
        k > self.burn_in && (k - self.burn_in) % self.thinning == 0
    }

    /// Number of recorded samples.
    pub fn retained(&self) -> u64 {
        self.total_iters.saturating_sub(self.burn_in) / self.thinning.max(1)
    }
}
