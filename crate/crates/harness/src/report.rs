use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::HarnessError;
use crate::io::write_atomic;

/// Averaged estimator value after `m` retained samples.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateRecord {
    pub m: u64,
    /// Mean of the per-run estimates.
    pub estimate: f64,
    /// Mean of the per-run relative errors `|mu_m - mu| / mu`.
    pub rel_error: f64,
}

/// Summary written by every command.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub command: String,
    pub spec_name: String,
    pub scheme: String,
    pub software_version: String,
    pub seed: u64,
    pub scale: u32,
    pub iterations: u64,
    pub retained: u64,
    pub boundary_hits: u64,
    pub wall_clock_secs: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ks: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ks_threshold: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target: Option<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub estimates: Vec<EstimateRecord>,
    /// Relative error of the estimate pooled over all runs.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pooled_rel_error: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub decay_slope: Option<f64>,
    /// Chain time at which each geometry first entered its equilibrium band;
    /// `None` if it never did within the horizon.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub hitting_times: BTreeMap<String, Option<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub passed: Option<bool>,
}

impl RunReport {
    pub fn new(command: &str, spec_name: &str, scheme: &str, seed: u64, scale: u32) -> Self {
        Self {
            command: command.to_owned(),
            spec_name: spec_name.to_owned(),
            scheme: scheme.to_owned(),
            software_version: env!("CARGO_PKG_VERSION").to_owned(),
            seed,
            scale,
            iterations: 0,
            retained: 0,
            boundary_hits: 0,
            wall_clock_secs: 0.0,
            ks: None,
            ks_threshold: None,
            target: None,
            estimates: Vec::new(),
            pooled_rel_error: None,
            decay_slope: None,
            hitting_times: BTreeMap::new(),
            passed: None,
        }
    }

    pub fn save(&self, path: &Path) -> Result<(), HarnessError> {
        let mut text = serde_json::to_string_pretty(self)?;
        text.push('\n');
        write_atomic(path, text.as_bytes())
    }

    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
        Ok(serde_json::from_str(&text)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trips_through_disk() {
        let dir = tempfile::tempdir().unwrap();
        let mut report = RunReport::new("integrate", "fig5a", "E", 7, 1);
        report.wall_clock_secs = 0.1 + 0.2;
        report.target = Some((0.4f64 / 0.75).powf(9.5));
        report.estimates.push(EstimateRecord {
            m: 1000,
            estimate: 1.0 / 3.0,
            rel_error: std::f64::consts::PI * 1e-17,
        });
        report.hitting_times.insert("E".into(), None);
        report.hitting_times.insert("BW".into(), Some(0.0123));
        report.passed = Some(false);
        let path = dir.path().join("r.json");
        report.save(&path).unwrap();
        assert_eq!(RunReport::load(&path).unwrap(), report);
    }
}
