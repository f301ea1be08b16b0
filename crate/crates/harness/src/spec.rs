//! JSON experiment description.

use std::collections::BTreeMap;
use std::path::Path;

use psd_langevin::reference::{ManifoldDims, Metric};
use psd_langevin::sampler::{BoundaryPolicy, ChainConfig};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::HarnessError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub name: String,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub description: String,
    pub scheme: Metric,
    pub energy: EnergySpec,
    pub dims: ManifoldDims,
    pub chain: ChainSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial: Option<InitialSpec>,
    pub observable: ObservableKey,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference: Option<ReferenceSpec>,
    #[serde(default)]
    pub grid: GridSpec,
    /// KS acceptance threshold per `--scale` value.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub ks_thresholds: BTreeMap<u32, f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub integration: Option<IntegrationSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub convergence: Option<ConvergenceSpec>,
    /// File stem for outputs; defaults to `name`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_prefix: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "key", rename_all = "snake_case", deny_unknown_fields)]
pub enum EnergySpec {
    Frobenius,
    VonNeumann,
    /// `1/2 ||X - A||_F^2` with the nonzero eigenvalues of `A` equally spaced
    /// in `eigen_range` on the first `p` coordinate axes.
    QuadraticTarget {
        eigen_range: [f64; 2],
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChainSpec {
    pub dt: f64,
    #[serde(serialize_with = "ser_beta", deserialize_with = "de_beta")]
    pub beta: f64,
    pub total_iters: u64,
    /// Defaults to `total_iters / 6`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub burn_in: Option<u64>,
    #[serde(default = "one")]
    pub thinning: u64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub boundary_policy: BoundaryPolicy,
}

fn one() -> u64 {
    1
}

fn ser_beta<S: Serializer>(beta: &f64, s: S) -> Result<S::Ok, S::Error> {
    if beta.is_infinite() {
        s.serialize_str("inf")
    } else {
        s.serialize_f64(*beta)
    }
}

fn de_beta<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Beta {
        Number(f64),
        Text(String),
    }
    match Beta::deserialize(d)? {
        Beta::Number(b) => Ok(b),
        Beta::Text(s) if matches!(s.as_str(), "inf" | "infinity" | "Infinity") => Ok(f64::INFINITY),
        Beta::Text(s) => Err(serde::de::Error::custom(format!(
            "beta must be a number or \"inf\", got {s:?}"
        ))),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialSpec {
    /// `diag(eigenvalues, 0, ..., 0)`.
    Diagonal { eigenvalues: Vec<f64> },
    /// Given spectrum in a Haar-random basis drawn from `seed`.
    RandomBasis { eigenvalues: Vec<f64>, seed: u64 },
    /// Start at the target matrix of a quadratic energy.
    Target,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ObservableKey {
    #[serde(rename = "frob_norm")]
    FrobNorm,
    #[serde(rename = "frob_dist_to_A")]
    FrobDistToTarget,
    #[serde(rename = "energy")]
    Energy,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "key", rename_all = "snake_case", deny_unknown_fields)]
pub enum ReferenceSpec {
    /// Chi-type law of `||X||_F` for the Frobenius energy.
    Example1,
    /// Quadrature law of `||X||_F` for the von Neumann energy.
    Example2 {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        exponent_offset: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        resolution: Option<usize>,
    },
    /// Chi-type approximation of `||X - A||_F` for a far-from-boundary target.
    Example3,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    /// Upper end of the KS grid; defaults to the 0.9999 quantile of the
    /// chi-type references.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_max: Option<f64>,
    #[serde(default = "default_points")]
    pub points: usize,
}

fn default_points() -> usize {
    psd_langevin::reference::DEFAULT_GRID_POINTS
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            t_max: None,
            points: default_points(),
        }
    }
}

/// Monte Carlo integration of `f(X) = ||X||^k exp(-alpha ||X||^m / m)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntegrationSpec {
    pub alpha: f64,
    #[serde(default)]
    pub k: f64,
    #[serde(default = "two")]
    pub m_exp: f64,
    #[serde(default = "twelve")]
    pub runs: usize,
    /// Smallest sample count at which the error is reported.
    #[serde(default = "thousand")]
    pub m_min: u64,
    #[serde(default = "four")]
    pub checkpoints_per_decade: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_final_rel_error: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub slope_range: Option<[f64; 2]>,
}

fn two() -> f64 {
    2.0
}

fn twelve() -> usize {
    12
}

fn thousand() -> u64 {
    1000
}

fn four() -> u32 {
    4
}

/// Side-by-side relaxation of the two manifold chains and the flat chain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConvergenceSpec {
    /// Iterations between recorded values.
    pub record_every: u64,
    /// Quantile levels of the equilibrium band of `||X||_F`.
    #[serde(default = "default_band")]
    pub band: [f64; 2],
}

fn default_band() -> [f64; 2] {
    [0.05, 0.95]
}

impl ExperimentSpec {
    pub fn from_json(text: &str) -> Result<Self, HarnessError> {
        let spec: Self = serde_json::from_str(text).map_err(|e| HarnessError::Spec(e.to_string()))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
        Self::from_json(&text).map_err(|e| match e {
            HarnessError::Spec(msg) => HarnessError::Spec(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn output_prefix(&self) -> &str {
        self.output_prefix.as_deref().unwrap_or(&self.name)
    }

    pub fn ks_threshold(&self, scale: u32) -> Option<f64> {
        self.ks_thresholds.get(&scale).copied()
    }

    /// Eigenvalues of the starting point (before any basis rotation).
    pub fn initial_eigenvalues(&self) -> Vec<f64> {
        match &self.initial {
            Some(InitialSpec::Diagonal { eigenvalues }) | Some(InitialSpec::RandomBasis { eigenvalues, .. }) => {
                eigenvalues.clone()
            }
            Some(InitialSpec::Target) => match self.energy {
                EnergySpec::QuadraticTarget { eigen_range } => target_eigenvalues(self.dims.p, eigen_range),
                _ => vec![1.0; self.dims.p],
            },
            None => vec![1.0; self.dims.p],
        }
    }

    /// Chain parameters with iteration counts divided by `10^scale`.
    pub fn chain_config(&self, scale: u32, seed: Option<u64>) -> Result<ChainConfig, HarnessError> {
        let div = 10u64
            .checked_pow(scale)
            .ok_or_else(|| HarnessError::Spec(format!("scale {scale} is too large")))?;
        let c = &self.chain;
        let total = c.total_iters / div;
        if total == 0 {
            return Err(HarnessError::Spec(format!(
                "{} iterations at scale {scale} leaves nothing to run",
                c.total_iters
            )));
        }
        let burn_in = c.burn_in.map_or(total / 6, |b| b / div);
        let cfg = ChainConfig::new(c.dt, c.beta, total, seed.unwrap_or(c.seed))
            .with_burn_in(burn_in)
            .with_thinning(c.thinning)
            .with_policy(c.boundary_policy);
        cfg.validate().map_err(|e| HarnessError::Spec(e.to_string()))?;
        Ok(cfg)
    }

    /// Field and cross-field checks.
    pub fn validate(&self) -> Result<(), HarnessError> {
        let bad = |msg: String| Err(HarnessError::Spec(msg));
        if self.name.trim().is_empty() {
            return bad("name must not be empty".into());
        }
        ManifoldDims::new(self.dims.n, self.dims.p).map_err(|e| HarnessError::Spec(e.to_string()))?;
        self.chain_config(0, None)?;

        match &self.initial {
            Some(InitialSpec::Diagonal { eigenvalues }) | Some(InitialSpec::RandomBasis { eigenvalues, .. }) => {
                if eigenvalues.len() != self.dims.p {
                    return bad(format!(
                        "initial spectrum has {} values, rank is {}",
                        eigenvalues.len(),
                        self.dims.p
                    ));
                }
                if eigenvalues.iter().any(|l| !(*l > 0.0 && l.is_finite())) {
                    return bad("initial eigenvalues must be positive".into());
                }
            }
            Some(InitialSpec::Target) if !matches!(self.energy, EnergySpec::QuadraticTarget { .. }) => {
                return bad("initial `target` needs the quadratic_target energy".into());
            }
            _ => {}
        }
        if let EnergySpec::QuadraticTarget { eigen_range: [lo, hi] } = self.energy {
            if !(lo > 0.0 && hi >= lo && hi.is_finite()) {
                return bad(format!("eigen_range [{lo}, {hi}] must satisfy 0 < lo <= hi"));
            }
        }
        if self.observable == ObservableKey::FrobDistToTarget
            && !matches!(self.energy, EnergySpec::QuadraticTarget { .. })
        {
            return bad("observable frob_dist_to_A needs the quadratic_target energy".into());
        }

        if let Some(reference) = &self.reference {
            let (energy_ok, observable) = match reference {
                ReferenceSpec::Example1 => (self.energy == EnergySpec::Frobenius, ObservableKey::FrobNorm),
                ReferenceSpec::Example2 { .. } => (self.energy == EnergySpec::VonNeumann, ObservableKey::FrobNorm),
                ReferenceSpec::Example3 => (
                    matches!(self.energy, EnergySpec::QuadraticTarget { .. }),
                    ObservableKey::FrobDistToTarget,
                ),
            };
            if !energy_ok {
                return bad(format!(
                    "reference {reference:?} does not match energy {:?}",
                    self.energy
                ));
            }
            if self.observable != observable {
                return bad(format!("reference {reference:?} needs observable {observable:?}"));
            }
            if let ReferenceSpec::Example2 { .. } = reference {
                if self.dims.p > 3 {
                    return bad(format!("quadrature reference supports p <= 3, got {}", self.dims.p));
                }
                if self.grid.t_max.is_none() {
                    return bad("quadrature reference needs grid.t_max".into());
                }
            }
        }
        if let Some(t) = self.grid.t_max {
            if !(t > 0.0 && t.is_finite()) {
                return bad(format!("grid.t_max must be positive, got {t}"));
            }
        }
        if self.grid.points < 2 {
            return bad("grid.points must be at least 2".into());
        }
        if let Some(i) = &self.integration {
            if self.energy != EnergySpec::Frobenius || self.observable != ObservableKey::FrobNorm {
                return bad("integration needs the frobenius energy and frob_norm observable".into());
            }
            if i.runs == 0 || i.m_min == 0 || i.checkpoints_per_decade == 0 {
                return bad("integration runs, m_min and checkpoints_per_decade must be positive".into());
            }
            if self.chain.beta.is_infinite() {
                return bad("integration needs a finite beta".into());
            }
        }
        if let Some(c) = &self.convergence {
            if self.energy != EnergySpec::Frobenius || self.observable != ObservableKey::FrobNorm {
                return bad("convergence needs the frobenius energy and frob_norm observable".into());
            }
            if c.record_every == 0 {
                return bad("convergence.record_every must be positive".into());
            }
            let [lo, hi] = c.band;
            if !(0.0 < lo && lo < hi && hi < 1.0) {
                return bad(format!("convergence band [{lo}, {hi}] must be inside (0, 1)"));
            }
        }
        Ok(())
    }
}

/// `p` values equally spaced on `[lo, hi]`, largest first.
pub fn target_eigenvalues(p: usize, [lo, hi]: [f64; 2]) -> Vec<f64> {
    if p == 1 {
        return vec![hi];
    }
    (0..p).map(|i| hi - (hi - lo) * i as f64 / (p - 1) as f64).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    const FIG1A: &str = r#"{
        "name": "fig1a",
        "scheme": "E",
        "energy": {"key": "frobenius"},
        "dims": {"n": 5, "p": 3},
        "chain": {"dt": 0.001, "beta": 0.4, "total_iters": 6000000, "burn_in": 1000000, "seed": 1},
        "observable": "frob_norm",
        "reference": {"key": "example1"},
        "grid": {"t_max": 10.0},
        "ks_thresholds": {"0": 0.02, "1": 0.05}
    }"#;

    #[test]
    fn parses_and_scales() {
        let spec = ExperimentSpec::from_json(FIG1A).unwrap();
        assert_eq!(spec.grid.points, 100);
        assert_eq!(spec.ks_threshold(1), Some(0.05));
        let cfg = spec.chain_config(1, Some(9)).unwrap();
        assert_eq!(cfg.total_iters, 600_000);
        assert_eq!(cfg.burn_in, 100_000);
        assert_eq!(cfg.seed, 9);
        assert!(spec.chain_config(7, None).is_err());
    }

    #[test]
    fn infinite_beta_round_trips() {
        let text = FIG1A.replace("\"beta\": 0.4", "\"beta\": \"inf\"");
        let spec = ExperimentSpec::from_json(&text).unwrap();
        assert!(spec.chain.beta.is_infinite());
        let back = ExperimentSpec::from_json(&serde_json::to_string(&spec).unwrap()).unwrap();
        assert_eq!(back, spec);
    }

    #[test]
    fn rejects_inconsistent_specs() {
        let cases = [
            FIG1A.replace("\"total_iters\": 6000000", "\"total_iters\": 0"),
            FIG1A.replace("{\"key\": \"example1\"}", "{\"key\": \"example3\"}"),
            FIG1A.replace("\"frob_norm\"", "\"frob_dist_to_A\""),
            FIG1A.replace("\"scheme\": \"E\"", "\"scheme\": \"Q\""),
            FIG1A.replace("\"p\": 3", "\"p\": 6"),
            FIG1A.replace("\"name\": \"fig1a\",", "\"name\": \"fig1a\", \"bogus\": 1,"),
        ];
        for text in cases {
            assert!(
                matches!(ExperimentSpec::from_json(&text), Err(HarnessError::Spec(_))),
                "{text}"
            );
        }
    }

    #[test]
    fn target_spectrum() {
        assert_eq!(target_eigenvalues(3, [1e4, 2e4]), vec![2e4, 1.5e4, 1e4]);
        assert_eq!(target_eigenvalues(1, [1.0, 2.0]), vec![2.0]);
    }
}
