use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use psd_langevin_harness::commands::{cmd_convergence, cmd_integrate, cmd_sample, cmd_validate, RunOptions};
use psd_langevin_harness::{ExperimentSpec, HarnessError};

#[derive(Parser)]
#[command(
    name = "psd-langevin",
    version,
    about = "Langevin sampling on fixed-rank PSD matrices"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a chain and store the trace of its observable.
    Sample(Common),
    /// Compare a stored trace with the reference distribution.
    Validate {
        #[command(flatten)]
        common: Common,
        /// Trace file; defaults to `<out>/<prefix>.trace.bin`.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Monte Carlo integration error against the closed form.
    Integrate(Common),
    /// Relaxation of `||X||_F` under both metrics and in flat space.
    Convergence(Common),
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    spec: PathBuf,
    /// Overrides the seed in the spec.
    #[arg(long)]
    seed: Option<u64>,
    /// Divides iteration counts by 10^scale.
    #[arg(long, default_value_t = 0)]
    scale: u32,
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Also write SVG charts.
    #[arg(long)]
    plots: bool,
    /// Exit non-zero when the acceptance threshold is exceeded.
    #[arg(long)]
    assert: bool,
}

impl Common {
    fn options(&self) -> RunOptions {
        RunOptions {
            out: self.out.clone(),
            seed: self.seed,
            scale: self.scale,
            plots: self.plots,
            assert: self.assert,
        }
    }
}

fn run(cli: Cli) -> Result<(), HarnessError> {
    let report = match &cli.command {
        Command::Sample(c) => cmd_sample(&ExperimentSpec::load(&c.spec)?, &c.options())?,
        Command::Validate { common, trace } => cmd_validate(
            &ExperimentSpec::load(&common.spec)?,
            trace.as_deref(),
            &common.options(),
        )?,
        Command::Integrate(c) => cmd_integrate(&ExperimentSpec::load(&c.spec)?, &c.options())?,
        Command::Convergence(c) => cmd_convergence(&ExperimentSpec::load(&c.spec)?, &c.options())?,
    };
    println!("{}", serde_json::to_string_pretty(&report)?);
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
