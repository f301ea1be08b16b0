//! Trace files, CSV tables and atomic writes.
//!
//! A trace is stored as two files: `<stem>.trace.bin` holding the values as
//! consecutive little-endian `f64`, and `<stem>.trace.json` with its
//! metadata.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use psd_langevin::sampler::ScalarTrace;
use serde::{Deserialize, Serialize};

use crate::error::HarnessError;

pub const TRACE_DTYPE: &str = "f64le";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceMeta {
    pub count: u64,
    pub observable: String,
    pub seed: u64,
    pub dtype: String,
}

/// Writes `bytes` to a temporary file next to `path` and renames it into
/// place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), HarnessError> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    std::fs::create_dir_all(dir).map_err(|e| HarnessError::io(dir, e))?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| HarnessError::io(dir, e))?;
    tmp.write_all(bytes).map_err(|e| HarnessError::io(path, e))?;
    tmp.persist(path).map_err(|e| HarnessError::io(path, e.error))?;
    Ok(())
}

pub fn trace_paths(dir: &Path, stem: &str) -> (PathBuf, PathBuf) {
    (
        dir.join(format!("{stem}.trace.bin")),
        dir.join(format!("{stem}.trace.json")),
    )
}

fn sidecar_for(bin: &Path) -> PathBuf {
    bin.with_extension("json")
}

/// Writes the binary trace and its sidecar; returns the path of the binary.
pub fn write_trace(dir: &Path, stem: &str, trace: &ScalarTrace) -> Result<PathBuf, HarnessError> {
    let (bin, meta_path) = trace_paths(dir, stem);
    let bytes: Vec<u8> = trace.values.iter().flat_map(|v| v.to_le_bytes()).collect();
    write_atomic(&bin, &bytes)?;
    let meta = TraceMeta {
        count: trace.values.len() as u64,
        observable: trace.observable.clone(),
        seed: trace.seed,
        dtype: TRACE_DTYPE.into(),
    };
    let mut text = serde_json::to_string_pretty(&meta)?;
    text.push('\n');
    write_atomic(&meta_path, text.as_bytes())?;
    Ok(bin)
}

pub fn read_trace(bin: &Path) -> Result<ScalarTrace, HarnessError> {
    let meta_path = sidecar_for(bin);
    if !bin.exists() || !meta_path.exists() {
        return Err(HarnessError::MissingTrace(bin.to_owned()));
    }
    let bad = |reason: String| HarnessError::BadTrace {
        path: bin.to_owned(),
        reason,
    };
    let meta_text = std::fs::read_to_string(&meta_path).map_err(|e| HarnessError::io(&meta_path, e))?;
    let meta: TraceMeta = serde_json::from_str(&meta_text)?;
    if meta.dtype != TRACE_DTYPE {
        return Err(bad(format!("unsupported dtype {}", meta.dtype)));
    }
    let bytes = std::fs::read(bin).map_err(|e| HarnessError::io(bin, e))?;
    if bytes.len() as u64 != meta.count * 8 {
        return Err(bad(format!("{} bytes for {} values", bytes.len(), meta.count)));
    }
    let values = bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8")))
        .collect();
    Ok(ScalarTrace {
        observable: meta.observable,
        seed: meta.seed,
        values,
    })
}

/// CSV with the given header and one row per entry of `rows`.
pub fn write_csv(path: &Path, header: &[&str], rows: impl IntoIterator<Item = Vec<f64>>) -> Result<(), HarnessError> {
    let mut out = header.join(",");
    out.push('\n');
    for row in rows {
        let mut first = true;
        for v in row {
            if !first {
                out.push(',');
            }
            first = false;
            write!(out, "{v}").expect("write to String");
        }
        out.push('\n');
    }
    write_atomic(path, out.as_bytes())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trace_round_trip_is_exact() {
        let dir = tempfile::tempdir().unwrap();
        let trace = ScalarTrace {
            observable: "frob_norm".into(),
            seed: 42,
            values: vec![0.1, 1.0 / 3.0, f64::MIN_POSITIVE, 1e300, -0.0],
        };
        let bin = write_trace(dir.path(), "x", &trace).unwrap();
        let back = read_trace(&bin).unwrap();
        assert_eq!(back.observable, trace.observable);
        assert_eq!(back.seed, 42);
        let bits = |v: &[f64]| v.iter().map(|x| x.to_bits()).collect::<Vec<_>>();
        assert_eq!(bits(&back.values), bits(&trace.values));
    }

    #[test]
    fn missing_and_truncated_traces() {
        let dir = tempfile::tempdir().unwrap();
        let (bin, _) = trace_paths(dir.path(), "nope");
        assert!(matches!(read_trace(&bin), Err(HarnessError::MissingTrace(_))));

        let trace = ScalarTrace {
            observable: "d".into(),
            seed: 0,
            values: vec![1.0, 2.0],
        };
        let bin = write_trace(dir.path(), "t", &trace).unwrap();
        std::fs::write(&bin, [0u8; 12]).unwrap();
        assert!(matches!(read_trace(&bin), Err(HarnessError::BadTrace { .. })));
    }

    #[test]
    fn csv_layout() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("a.csv");
        write_csv(
            &path,
            &["t", "F_ref", "F_emp"],
            vec![vec![0.0, 0.0, 0.0], vec![0.5, 0.25, 1.0 / 3.0]],
        )
        .unwrap();
        let text = std::fs::read_to_string(path).unwrap();
        assert_eq!(text, "t,F_ref,F_emp\n0,0,0\n0.5,0.25,0.3333333333333333\n");
    }
}
