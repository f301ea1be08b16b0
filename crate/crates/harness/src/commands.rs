use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::{Duration, Instant};

use nalgebra::DMatrix;
use psd_langevin::energy::{equally_spaced_target, EnergyFn, Frobenius, QuadraticTarget, TargetMatrix, VonNeumann};
use psd_langevin::geometry::PsdPoint;
use psd_langevin::reference::{
    chi_t_max, closed_form_integral, empirical_cdf, error_decay_slope, example1_cdf, example3_cdf, ks_statistic,
    mcmc_prefix_estimates, uniform_grid, Example2Quadrature, ManifoldDims, Metric, ReferenceCdf,
};
use psd_langevin::sampler::{
    run_chain, run_ensemble, ChainConfig, ChainOutput, EmbeddedState, EuclideanLangevin, Observable, ScalarTrace,
    SchemeBw, SchemeE,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::HarnessError;
use crate::io::{read_trace, trace_paths, write_atomic, write_csv, write_trace};
use crate::plot::{line_chart, Axes, Series};
use crate::report::{EstimateRecord, RunReport};
use crate::spec::{EnergySpec, ExperimentSpec, InitialSpec, ObservableKey, ReferenceSpec};

/// Quantile used for the grid end when a chi-type spec leaves it open.
const DEFAULT_T_MAX_QUANTILE: f64 = 0.9999;

/// Flags shared by all commands.
#[derive(Debug, Clone)]
pub struct RunOptions {
    pub out: PathBuf,
    pub seed: Option<u64>,
    pub scale: u32,
    pub plots: bool,
    pub assert: bool,
}

impl RunOptions {
    pub fn new(out: impl Into<PathBuf>) -> Self {
        Self {
            out: out.into(),
            seed: None,
            scale: 0,
            plots: false,
            assert: false,
        }
    }

    fn path(&self, spec: &ExperimentSpec, suffix: &str) -> PathBuf {
        self.out.join(format!("{}.{suffix}", spec.output_prefix()))
    }
}

/// Energy, target, starting point and recorded observable of a spec.
pub struct Setup {
    pub energy: Arc<dyn EnergyFn>,
    pub target: Option<TargetMatrix>,
    pub initial: PsdPoint,
    pub observable: Observable,
}

pub fn build_setup(spec: &ExperimentSpec) -> Result<Setup, HarnessError> {
    let (n, p) = (spec.dims.n, spec.dims.p);
    let (energy, target): (Arc<dyn EnergyFn>, _) = match spec.energy {
        EnergySpec::Frobenius => (Arc::new(Frobenius), None),
        EnergySpec::VonNeumann => (Arc::new(VonNeumann), None),
        EnergySpec::QuadraticTarget { eigen_range: [lo, hi] } => {
            let target = equally_spaced_target(DMatrix::identity(n, p), lo, hi)?;
            (Arc::new(QuadraticTarget::new(&target)), Some(target))
        }
    };
    let initial = match &spec.initial {
        Some(InitialSpec::Diagonal { eigenvalues }) => PsdPoint::from_diagonal(eigenvalues, n)?,
        Some(InitialSpec::RandomBasis { eigenvalues, seed }) => {
            PsdPoint::with_random_basis(&mut ChaCha8Rng::seed_from_u64(*seed), n, eigenvalues)?
        }
        Some(InitialSpec::Target) => target
            .as_ref()
            .map(|t| t.point().clone())
            .ok_or_else(|| HarnessError::Spec("initial `target` needs a target matrix".into()))?,
        None => PsdPoint::from_diagonal(&vec![1.0; p], n)?,
    };
    let observable = match spec.observable {
        ObservableKey::FrobNorm => Observable::frobenius_norm(),
        ObservableKey::FrobDistToTarget => Observable::distance_to(
            target
                .as_ref()
                .map(|t| t.dense().clone())
                .ok_or_else(|| HarnessError::Spec("frob_dist_to_A needs a target matrix".into()))?,
        ),
        ObservableKey::Energy => Observable::energy(energy.clone()),
    };
    Ok(Setup {
        energy,
        target,
        initial,
        observable,
    })
}

/// Scalar output of one chain.
#[derive(Debug, Clone)]
pub struct ChainRun {
    pub trace: ScalarTrace,
    pub boundary_hits: u64,
    pub iterations: u64,
    pub wall_clock: Duration,
}

fn into_run<S>(mut out: ChainOutput<S>) -> ChainRun {
    ChainRun {
        trace: out.traces.swap_remove(0),
        boundary_hits: out.boundary_hits,
        iterations: out.iterations,
        wall_clock: out.wall_clock,
    }
}

pub fn run_spec_chain(spec: &ExperimentSpec, setup: &Setup, config: &ChainConfig) -> Result<ChainRun, HarnessError> {
    let obs = std::slice::from_ref(&setup.observable);
    let energy = setup.energy.as_ref();
    let out = match spec.scheme {
        Metric::Embedded => into_run(run_chain(
            &SchemeE,
            EmbeddedState::new(setup.initial.clone())?,
            energy,
            config,
            obs,
        )?),
        Metric::BuresWasserstein => into_run(run_chain(&SchemeBw, setup.initial.to_factor()?, energy, config, obs)?),
    };
    Ok(out)
}

/// Independent chains, one per config, run on the ensemble runner. The first
/// failing chain (in config order) fails the whole call.
pub fn run_spec_ensemble(
    spec: &ExperimentSpec,
    setup: &Setup,
    configs: &[ChainConfig],
) -> Result<Vec<ChainRun>, HarnessError> {
    let obs = std::slice::from_ref(&setup.observable);
    let energy = setup.energy.as_ref();
    let results: Vec<Result<ChainRun, psd_langevin::Error>> = match spec.scheme {
        Metric::Embedded => run_ensemble(
            &SchemeE,
            configs,
            |_| EmbeddedState::new(setup.initial.clone()),
            energy,
            obs,
        )?
        .into_iter()
        .map(|r| r.map(into_run))
        .collect(),
        Metric::BuresWasserstein => run_ensemble(&SchemeBw, configs, |_| setup.initial.to_factor(), energy, obs)?
            .into_iter()
            .map(|r| r.map(into_run))
            .collect(),
    };
    results.into_iter().map(|r| r.map_err(HarnessError::from)).collect()
}

/// KS evaluation grid of a spec.
pub fn spec_grid(spec: &ExperimentSpec) -> Result<Vec<f64>, HarnessError> {
    let t_max = match (spec.grid.t_max, &spec.reference) {
        (Some(t), _) => t,
        (None, Some(ReferenceSpec::Example1)) => chi_t_max(
            spec.dims.radial_dof(spec.scheme),
            spec.chain.beta,
            DEFAULT_T_MAX_QUANTILE,
        )?,
        (None, Some(ReferenceSpec::Example3)) => chi_t_max(
            spec.dims.radial_dof(Metric::Embedded),
            spec.chain.beta,
            DEFAULT_T_MAX_QUANTILE,
        )?,
        _ => return Err(HarnessError::Spec("grid.t_max is required for this reference".into())),
    };
    Ok(uniform_grid(t_max, spec.grid.points))
}

pub fn reference_cdf(spec: &ExperimentSpec, grid: &[f64]) -> Result<ReferenceCdf, HarnessError> {
    let reference = spec
        .reference
        .as_ref()
        .ok_or_else(|| HarnessError::Spec("spec has no reference distribution".into()))?;
    let dims = ManifoldDims::new(spec.dims.n, spec.dims.p)?;
    let beta = spec.chain.beta;
    let cdf = match reference {
        ReferenceSpec::Example1 => example1_cdf(dims, beta, spec.scheme, grid)?,
        ReferenceSpec::Example3 => example3_cdf(dims, beta, grid)?,
        ReferenceSpec::Example2 {
            exponent_offset,
            resolution,
        } => {
            let t_max = *grid.last().ok_or_else(|| HarnessError::Spec("empty grid".into()))?;
            let mut q = Example2Quadrature::new(dims, beta, spec.scheme, t_max)?;
            if let Some(a) = exponent_offset {
                q = q.with_exponent_offset(*a)?;
            }
            if let Some(r) = resolution {
                q = q.with_resolution(*r)?;
            }
            q.cdf(grid)?
        }
    };
    Ok(cdf)
}

/// Reference and empirical CDFs of `trace` on the spec grid, and their KS
/// distance.
pub fn ks_for_trace(
    spec: &ExperimentSpec,
    trace: &ScalarTrace,
) -> Result<(ReferenceCdf, ReferenceCdf, f64), HarnessError> {
    let grid = spec_grid(spec)?;
    let reference = reference_cdf(spec, &grid)?;
    let empirical = empirical_cdf(trace, &grid)?;
    let ks = ks_statistic(&reference, &empirical)?;
    Ok((reference, empirical, ks))
}

fn require_threshold(spec: &ExperimentSpec, opts: &RunOptions) -> Result<Option<f64>, HarnessError> {
    let threshold = spec.ks_threshold(opts.scale);
    if opts.assert && threshold.is_none() {
        return Err(HarnessError::Spec(format!("no KS threshold for scale {}", opts.scale)));
    }
    Ok(threshold)
}

/// Runs the chain and writes its trace and report.
pub fn cmd_sample(spec: &ExperimentSpec, opts: &RunOptions) -> Result<RunReport, HarnessError> {
    let config = spec.chain_config(opts.scale, opts.seed)?;
    let setup = build_setup(spec)?;
    log::info!(
        "{}: {} iterations of scheme {}",
        spec.name,
        config.total_iters,
        spec.scheme
    );
    let run = run_spec_chain(spec, &setup, &config)?;
    write_trace(&opts.out, spec.output_prefix(), &run.trace)?;

    let mut report = RunReport::new("sample", &spec.name, spec.scheme.as_str(), config.seed, opts.scale);
    report.iterations = run.iterations;
    report.retained = run.trace.values.len() as u64;
    report.boundary_hits = run.boundary_hits;
    report.wall_clock_secs = run.wall_clock.as_secs_f64();
    report.save(&opts.path(spec, "sample.json"))?;
    Ok(report)
}

/// Compares a stored trace with the reference distribution.
pub fn cmd_validate(
    spec: &ExperimentSpec,
    trace_path: Option<&Path>,
    opts: &RunOptions,
) -> Result<RunReport, HarnessError> {
    let threshold = require_threshold(spec, opts)?;
    let start = Instant::now();
    let default_path = trace_paths(&opts.out, spec.output_prefix()).0;
    let trace = read_trace(trace_path.unwrap_or(&default_path))?;
    let (reference, empirical, ks) = ks_for_trace(spec, &trace)?;

    write_csv(
        &opts.path(spec, "cdf.csv"),
        &["t", "F_ref", "F_emp"],
        reference
            .iter()
            .zip(&empirical.values)
            .map(|((t, f), &g)| vec![t, f, g]),
    )?;
    if opts.plots {
        let svg = line_chart(
            &format!("{}: KS = {ks:.4}", spec.name),
            "t",
            "CDF",
            &[
                Series {
                    label: "reference",
                    points: reference.iter().collect(),
                },
                Series {
                    label: "empirical",
                    points: empirical.iter().collect(),
                },
            ],
            Axes::Linear,
        );
        write_atomic(&opts.path(spec, "cdf.svg"), svg.as_bytes())?;
    }

    let mut report = RunReport::new("validate", &spec.name, spec.scheme.as_str(), trace.seed, opts.scale);
    report.retained = trace.values.len() as u64;
    report.wall_clock_secs = start.elapsed().as_secs_f64();
    report.ks = Some(ks);
    report.ks_threshold = threshold;
    report.passed = threshold.map(|t| ks <= t);
    report.save(&opts.path(spec, "validate.json"))?;
    if let (true, Some(t)) = (opts.assert, threshold) {
        if ks > t {
            return Err(HarnessError::ThresholdExceeded {
                what: "KS".into(),
                value: ks,
                threshold: t,
            });
        }
    }
    Ok(report)
}

/// `m_min * 10^(j / per_decade)` up to `len`, always ending at `len`.
pub fn log_checkpoints(m_min: u64, per_decade: u32, len: usize) -> Vec<usize> {
    let mut out: Vec<usize> = Vec::new();
    for j in 0.. {
        let m = (m_min as f64 * 10f64.powf(j as f64 / per_decade as f64)).round() as usize;
        if m > len {
            break;
        }
        if out.last() != Some(&m) {
            out.push(m);
        }
    }
    if out.last() != Some(&len) && len > 0 {
        out.push(len);
    }
    out
}

/// Monte Carlo integration against the closed form, averaged over runs.
pub fn cmd_integrate(spec: &ExperimentSpec, opts: &RunOptions) -> Result<RunReport, HarnessError> {
    let integ = spec
        .integration
        .as_ref()
        .ok_or_else(|| HarnessError::Spec("spec has no `integration` section".into()))?;
    let base = spec.chain_config(opts.scale, opts.seed)?;
    let beta = base.beta;
    let dims = ManifoldDims::new(spec.dims.n, spec.dims.p)?;
    let target = closed_form_integral(
        integ.k,
        integ.m_exp,
        integ.alpha,
        beta,
        dims.manifold_dim(),
        spec.scheme,
    )?;
    let configs: Vec<ChainConfig> = (0..integ.runs as u64)
        .map(|i| base.clone().with_seed(base.seed.wrapping_add(i)))
        .collect();
    let setup = build_setup(spec)?;
    log::info!(
        "{}: {} runs of {} iterations",
        spec.name,
        configs.len(),
        base.total_iters
    );
    let runs = run_spec_ensemble(spec, &setup, &configs)?;

    let retained = runs[0].trace.values.len();
    let checkpoints = log_checkpoints(integ.m_min, integ.checkpoints_per_decade, retained);
    if checkpoints.len() < 4 {
        return Err(HarnessError::Spec(format!(
            "{retained} retained samples give only {} checkpoints from m_min = {}",
            checkpoints.len(),
            integ.m_min
        )));
    }
    let mut mean_est = vec![0.0; checkpoints.len()];
    let mut mean_err = vec![0.0; checkpoints.len()];
    let scale = 1.0 / runs.len() as f64;
    for run in &runs {
        let d = &run.trace.values;
        let energy = ScalarTrace {
            observable: "energy".into(),
            seed: run.trace.seed,
            values: d.iter().map(|x| 0.5 * x * x).collect(),
        };
        let log_f = ScalarTrace {
            observable: "log_f".into(),
            seed: run.trace.seed,
            values: d
                .iter()
                .map(|&x| {
                    let power = if integ.k == 0.0 { 0.0 } else { integ.k * x.ln() };
                    power - integ.alpha * x.powf(integ.m_exp) / integ.m_exp
                })
                .collect(),
        };
        let est = mcmc_prefix_estimates(&energy, &log_f, beta, &checkpoints)?;
        for (j, e) in est.iter().enumerate() {
            mean_est[j] += e * scale;
            mean_err[j] += ((e - target) / target).abs() * scale;
        }
    }
    let points: Vec<(f64, f64)> = checkpoints
        .iter()
        .map(|&m| m as f64)
        .zip(mean_err.iter().copied())
        .collect();
    let slope = error_decay_slope(&points)?;
    let pooled = *mean_est.last().expect("checkpoints nonempty");

    write_csv(
        &opts.path(spec, "integrate.csv"),
        &["m", "rel_error"],
        points.iter().map(|&(m, e)| vec![m, e]),
    )?;
    if opts.plots {
        let svg = line_chart(
            &format!("{}: slope {slope:.3}", spec.name),
            "m",
            "relative error",
            &[Series {
                label: "mean |rel error|",
                points: points.clone(),
            }],
            Axes::LogLog,
        );
        write_atomic(&opts.path(spec, "integrate.svg"), svg.as_bytes())?;
    }

    let mut report = RunReport::new("integrate", &spec.name, spec.scheme.as_str(), base.seed, opts.scale);
    report.iterations = runs.iter().map(|r| r.iterations).sum();
    report.retained = retained as u64;
    report.boundary_hits = runs.iter().map(|r| r.boundary_hits).sum();
    report.wall_clock_secs = runs.iter().map(|r| r.wall_clock.as_secs_f64()).sum();
    report.target = Some(target);
    report.estimates = checkpoints
        .iter()
        .zip(mean_est.iter().zip(&mean_err))
        .map(|(&m, (&estimate, &rel_error))| EstimateRecord {
            m: m as u64,
            estimate,
            rel_error,
        })
        .collect();
    report.pooled_rel_error = Some(((pooled - target) / target).abs());
    report.decay_slope = Some(slope);

    let final_err = *mean_err.last().expect("checkpoints nonempty");
    let mut failure = None;
    if let Some(t) = integ.max_final_rel_error {
        if final_err > t {
            failure = Some(HarnessError::ThresholdExceeded {
                what: "final relative error".into(),
                value: final_err,
                threshold: t,
            });
        }
    }
    if let Some([lo, hi]) = integ.slope_range {
        if !(lo..=hi).contains(&slope) {
            failure.get_or_insert(HarnessError::ThresholdExceeded {
                what: format!("decay slope outside [{lo}, {hi}]"),
                value: slope,
                threshold: if slope < lo { lo } else { hi },
            });
        }
    }
    if integ.max_final_rel_error.is_some() || integ.slope_range.is_some() {
        report.passed = Some(failure.is_none());
    }
    report.save(&opts.path(spec, "integrate.json"))?;
    match failure {
        Some(e) if opts.assert => Err(e),
        _ => Ok(report),
    }
}

/// Labels of the geometries compared by [`cmd_convergence`].
pub const GEOMETRIES: [&str; 3] = ["E", "BW", "Euclidean"];

/// Relaxation of `||X||_F` from a common start under both metrics and in
/// flat space.
pub fn cmd_convergence(spec: &ExperimentSpec, opts: &RunOptions) -> Result<RunReport, HarnessError> {
    let conv = spec
        .convergence
        .as_ref()
        .ok_or_else(|| HarnessError::Spec("spec has no `convergence` section".into()))?;
    let config = spec
        .chain_config(opts.scale, opts.seed)?
        .with_burn_in(0)
        .with_thinning(conv.record_every);
    config.validate()?;
    let setup = build_setup(spec)?;
    let energy = setup.energy.as_ref();
    let obs = std::slice::from_ref(&setup.observable);
    let dims = ManifoldDims::new(spec.dims.n, spec.dims.p)?;

    let runs = [
        into_run(run_chain(
            &SchemeE,
            EmbeddedState::new(setup.initial.clone())?,
            energy,
            &config,
            obs,
        )?),
        into_run(run_chain(&SchemeBw, setup.initial.to_factor()?, energy, &config, obs)?),
        into_run(run_chain(
            &EuclideanLangevin,
            setup.initial.to_dense(),
            energy,
            &config,
            obs,
        )?),
    ];
    let dofs = [
        dims.radial_dof(Metric::Embedded),
        dims.radial_dof(Metric::BuresWasserstein),
        (dims.n * dims.n) as f64,
    ];
    let times: Vec<f64> = (1..=runs[0].trace.values.len() as u64)
        .map(|i| (i * conv.record_every) as f64 * config.dt)
        .collect();

    let mut report = RunReport::new("convergence", &spec.name, "E,BW,Euclidean", config.seed, opts.scale);
    for ((name, run), dof) in GEOMETRIES.iter().zip(&runs).zip(dofs) {
        let lo = chi_t_max(dof, config.beta, conv.band[0])?;
        let hi = chi_t_max(dof, config.beta, conv.band[1])?;
        let hit = run
            .trace
            .values
            .iter()
            .zip(&times)
            .find(|(d, _)| (lo..=hi).contains(*d))
            .map(|(_, &t)| t);
        report.hitting_times.insert((*name).to_owned(), hit);
    }
    write_csv(
        &opts.path(spec, "convergence.csv"),
        &["time", "E", "BW", "Euclidean"],
        times.iter().enumerate().map(|(i, &t)| {
            vec![
                t,
                runs[0].trace.values[i],
                runs[1].trace.values[i],
                runs[2].trace.values[i],
            ]
        }),
    )?;
    if opts.plots {
        let series: Vec<Series> = GEOMETRIES
            .iter()
            .zip(&runs)
            .map(|(name, run)| Series {
                label: name,
                points: times.iter().copied().zip(run.trace.values.iter().copied()).collect(),
            })
            .collect();
        let svg = line_chart(&spec.name, "time", "||X||_F", &series, Axes::LogLog);
        write_atomic(&opts.path(spec, "convergence.svg"), svg.as_bytes())?;
    }

    let bw_first = match (report.hitting_times["BW"], report.hitting_times["E"]) {
        (Some(bw), Some(e)) => bw < e,
        (Some(_), None) => true,
        _ => false,
    };
    report.iterations = config.total_iters;
    report.retained = times.len() as u64;
    report.boundary_hits = runs.iter().map(|r| r.boundary_hits).sum();
    report.wall_clock_secs = runs.iter().map(|r| r.wall_clock.as_secs_f64()).sum();
    report.passed = Some(bw_first);
    report.save(&opts.path(spec, "convergence.json"))?;
    if opts.assert && !bw_first {
        return Err(HarnessError::ThresholdExceeded {
            what: "BW hitting time minus E hitting time".into(),
            value: report.hitting_times["BW"].unwrap_or(f64::INFINITY)
                - report.hitting_times["E"].unwrap_or(f64::INFINITY),
            threshold: 0.0,
        });
    }
    Ok(report)
}
