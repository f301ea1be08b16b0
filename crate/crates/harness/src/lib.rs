//! Experiment runner for the PSD Langevin samplers: JSON specs, trace files,
//! validation against reference laws, and the command implementations behind
//! the `psd-langevin` binary.

pub mod commands;
pub mod error;
pub mod io;
pub mod plot;
pub mod report;
pub mod spec;

pub use error::HarnessError;
pub use spec::ExperimentSpec;
