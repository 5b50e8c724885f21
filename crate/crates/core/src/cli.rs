//! Command-line front end for the `chaosfit` binary.
//!
//! Every option can come from a flag, from a JSON config file (`--config`,
//! one flat object whose keys are the flag names), or from a built-in
//! default, in that order of precedence. The seed additionally falls back
//! to `CHAOSFIT_SEED` before its default.
//!
//! Exit status is 0 on success, [`EXIT_CONFIG`] for bad options or config
//! files, [`EXIT_DATA`] for unreadable or inconsistent input data and
//! [`EXIT_SOLVER`] when a solve fails.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::cross_validation::{log_grid, select_lambda, CvProfile};
use crate::error::Error;
use crate::experiments::{
    convergence_sweep, phase_diagram,
    sweep::{sweep_instance, CV_STREAM, INSTANCE_STREAM},
    CaseSpec, ConvergenceSweep, Ensemble, GeneratorTag, PhaseDiagramSpec, PhaseMetric,
    TestInstance,
};
use crate::io::{fmt_f64, write_csv_file};
use crate::pce::{
    assemble_regression_system, design_matrix, BasisSpec, Family, IndexSet, MultiIndex, SampleSet,
};
use crate::sampling::RandomStream;
use crate::solvers::{LinearSystem, Method, SolverConfig};
use crate::stop_sampling::StopParams;

pub const EXIT_OTHER: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_DATA: i32 = 3;
pub const EXIT_SOLVER: i32 = 4;

/// Seed fallback used when neither `--seed` nor the config file sets one.
pub const SEED_ENV: &str = "CHAOSFIT_SEED";

const DEFAULT_DEGREE: usize = 3;

#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub error: Error,
}

impl CliError {
    fn config(error: impl Into<Error>) -> Self {
        Self {
            code: EXIT_CONFIG,
            error: error.into(),
        }
    }

    fn data(error: impl Into<Error>) -> Self {
        Self {
            code: EXIT_DATA,
            error: error.into(),
        }
    }

    /// Classifies an error raised while computing.
    fn run(error: Error) -> Self {
        let code = if error.is_solver_failure() {
            EXIT_SOLVER
        } else if matches!(
            error,
            Error::InvalidArgument(_) | Error::BasisOverflow { .. }
        ) {
            EXIT_CONFIG
        } else {
            EXIT_OTHER
        };
        Self { code, error }
    }
}

fn bad_config(msg: impl Into<String>) -> CliError {
    CliError::config(Error::Config(msg.into()))
}

#[derive(Parser, Debug)]
#[command(
    name = "chaosfit",
    version,
    about = "Sparse PCE fitting with cross-validated LASSO"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Fit a sparse PCE to a sample CSV.
    Fit(FitArgs),
    /// CV and training error over the lambda grid.
    CvScan(CvScanArgs),
    /// Errors versus sample size with the stop-sampling annotation.
    Converge(ConvergeArgs),
    /// Success rates over Halton (delta, rho) nodes.
    Phase(PhaseArgs),
}

fn parse_from_str<T: FromStr<Err = Error>>(s: &str) -> Result<T, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

#[derive(Args, Clone, Debug, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct CommonArgs {
    /// Root seed (falls back to CHAOSFIT_SEED, then 0).
    #[arg(long)]
    pub seed: Option<u64>,
    /// admm, prox-bb, cd or ols.
    #[arg(long, value_parser = parse_from_str::<Method>)]
    pub solver: Option<Method>,
    /// CV folds (default 20).
    #[arg(long)]
    pub k_folds: Option<usize>,
    /// Smallest lambda of the log grid (default 1e-4).
    #[arg(long)]
    pub lambda_min: Option<f64>,
    /// Largest lambda of the log grid (default 1e4).
    #[arg(long)]
    pub lambda_max: Option<f64>,
    /// Grid points (default 15).
    #[arg(long)]
    pub lambda_count: Option<usize>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// JSON file with defaults for any of these options.
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    /// Worker threads; results do not depend on this.
    #[arg(long)]
    pub threads: Option<usize>,
}

#[derive(Args, Clone, Debug, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct BasisArgs {
    /// Germ dimension.
    #[arg(long)]
    pub dims: Option<usize>,
    /// Comma-separated polynomial families, one per dimension or one for all.
    #[arg(long, value_delimiter = ',', value_parser = parse_from_str::<Family>)]
    pub families: Option<Vec<Family>>,
    /// Total polynomial degree.
    #[arg(long)]
    pub degree: Option<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CaseKind {
    Gaussian,
    RandomPce,
    Genz,
}

#[derive(Args, Clone, Debug, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct CaseArgs {
    /// Synthetic case used when no --data is given.
    #[arg(long, value_enum)]
    pub case: Option<CaseKind>,
    /// Columns of the Gaussian case.
    #[arg(long)]
    pub n: Option<usize>,
    /// Nonzeros of the Gaussian and random PCE cases.
    #[arg(long)]
    pub s: Option<usize>,
    /// Comma-separated Genz coefficients (default a_j = 1/j).
    #[arg(long, value_delimiter = ',')]
    pub coefficients: Option<Vec<f64>>,
    /// Validation rows for synthetic cases (default max(1000, 2n)).
    #[arg(long)]
    pub m_validation: Option<usize>,
}

#[derive(Args, Clone, Debug, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct FitArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub common: CommonArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub basis: BasisArgs,
    /// Sample CSV with header xi_1,...,xi_d,y.
    #[arg(long)]
    pub data: Option<PathBuf>,
}

#[derive(Args, Clone, Debug, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct CvScanArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub common: CommonArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub basis: BasisArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub case: CaseArgs,
    /// Sample CSV; overrides the synthetic case.
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// Rows of the synthetic instance.
    #[arg(long)]
    pub m: Option<usize>,
}

#[derive(Args, Clone, Debug, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct ConvergeArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub common: CommonArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub basis: BasisArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub case: CaseArgs,
    /// Sample CSV; overrides the synthetic case.
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// Initial sample size (default max(2, ceil(0.05 n))).
    #[arg(long)]
    pub m0: Option<usize>,
    /// Batch size (default max(2, ceil(0.05 n))).
    #[arg(long)]
    pub delta_m: Option<usize>,
    /// Sample budget (default n, or the rows of --data).
    #[arg(long)]
    pub m_max: Option<usize>,
    /// Window length for the slope (default 4).
    #[arg(long)]
    pub q: Option<usize>,
    /// Steepest-slope threshold (default 0.1).
    #[arg(long)]
    pub eta: Option<f64>,
    /// Rebound ratio (default 0.5).
    #[arg(long)]
    pub r: Option<f64>,
    /// Absolute CV error tolerance (default 1e-4).
    #[arg(long)]
    pub abs_tol: Option<f64>,
}

#[derive(Args, Clone, Debug, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct PhaseArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub common: CommonArgs,
    /// gaussian or random-pce.
    #[arg(long, value_enum)]
    pub ensemble: Option<CaseKind>,
    /// Columns of the Gaussian ensemble (default 200).
    #[arg(long)]
    pub n: Option<usize>,
    /// Halton (delta, rho) nodes (default 40).
    #[arg(long)]
    pub nodes: Option<usize>,
    /// Trials per node (default 5).
    #[arg(long)]
    pub trials: Option<usize>,
    /// Success threshold on the metric (default 0.1).
    #[arg(long)]
    pub threshold: Option<f64>,
    /// cv, validation or solution (default solution).
    #[arg(long, value_parser = parse_from_str::<PhaseMetric>)]
    pub metric: Option<PhaseMetric>,
    /// Germ dimension of the random-pce ensemble (default 5).
    #[arg(long)]
    pub dims: Option<usize>,
    /// Total degree of the random-pce ensemble (default 5).
    #[arg(long)]
    pub degree: Option<usize>,
    /// Validation rows (default max(1000, 2n)).
    #[arg(long)]
    pub m_validation: Option<usize>,
}

/// Overlays `flags` on the config file. Keys the command does not know are
/// rejected.
fn layered<T: Serialize + DeserializeOwned>(
    flags: &T,
    config: Option<&Path>,
) -> Result<T, CliError> {
    let Some(path) = config else {
        return serde_json::from_value(serde_json::to_value(flags).map_err(CliError::config)?)
            .map_err(CliError::config);
    };
    let Value::Object(mut merged) = serde_json::to_value(flags).map_err(CliError::config)? else {
        unreachable!("argument structs serialize to objects")
    };
    let text = fs::read_to_string(path).map_err(|e| {
        CliError::config(Error::Input {
            path: path.to_path_buf(),
            message: e.to_string(),
        })
    })?;
    let file: Value = serde_json::from_str(&text).map_err(|e| {
        CliError::config(Error::Input {
            path: path.to_path_buf(),
            message: e.to_string(),
        })
    })?;
    let Value::Object(file) = file else {
        return Err(bad_config(format!(
            "{}: expected a JSON object",
            path.display()
        )));
    };
    for (key, value) in file {
        match merged.get_mut(&key) {
            None => {
                return Err(bad_config(format!(
                    "{}: unknown key '{key}'",
                    path.display()
                )))
            }
            Some(slot) if slot.is_null() => *slot = value,
            Some(_) => {}
        }
    }
    serde_json::from_value(Value::Object(merged))
        .map_err(|e| bad_config(format!("{}: {e}", path.display())))
}

/// Shared settings after defaults are applied.
#[derive(Clone, Debug)]
struct Resolved {
    seed: u64,
    config: SolverConfig,
    k: usize,
    grid: Vec<f64>,
    out: PathBuf,
    threads: Option<usize>,
}

fn resolve_common(c: &CommonArgs) -> Result<Resolved, CliError> {
    let seed = match c.seed {
        Some(s) => s,
        None => match std::env::var(SEED_ENV) {
            Ok(v) => v
                .trim()
                .parse()
                .map_err(|_| bad_config(format!("{SEED_ENV}='{v}' is not an unsigned integer")))?,
            Err(_) => 0,
        },
    };
    let k = c.k_folds.unwrap_or(20);
    if k < 2 {
        return Err(bad_config("--k-folds must be at least 2"));
    }
    let lo = c.lambda_min.unwrap_or(1e-4);
    let hi = c.lambda_max.unwrap_or(1e4);
    let count = c.lambda_count.unwrap_or(15);
    if !(lo > 0.0 && hi >= lo && hi.is_finite()) || count == 0 {
        return Err(bad_config(format!(
            "lambda grid needs 0 < lambda-min <= lambda-max and a positive count (got {lo}, {hi}, {count})"
        )));
    }
    let grid = log_grid(lo, hi, count);
    let config = SolverConfig::for_method(c.solver.unwrap_or(Method::Admm));
    config.validate().map_err(CliError::config)?;
    if c.threads == Some(0) {
        return Err(bad_config("--threads must be positive"));
    }
    Ok(Resolved {
        seed,
        config,
        k,
        grid,
        out: c
            .out
            .clone()
            .unwrap_or_else(|| PathBuf::from("chaosfit-out")),
        threads: c.threads,
    })
}

fn resolve_basis(b: &BasisArgs, data_dims: usize) -> Result<BasisSpec, CliError> {
    let dims = b.dims.unwrap_or(data_dims);
    if dims != data_dims {
        return Err(CliError::data(Error::DimensionMismatch {
            what: "--dims versus germ columns in the data",
            expected: dims,
            actual: data_dims,
        }));
    }
    let families = match b.families.as_deref() {
        None => vec![Family::HermiteGaussian; dims],
        Some([one]) => vec![*one; dims],
        Some(list) if list.len() == dims => list.to_vec(),
        Some(list) => {
            return Err(CliError::data(Error::DimensionMismatch {
                what: "--families entries versus germ columns in the data",
                expected: dims,
                actual: list.len(),
            }))
        }
    };
    BasisSpec::new(families, b.degree.unwrap_or(DEFAULT_DEGREE)).map_err(CliError::config)
}

/// Reads a sample file and assembles the centered system without the
/// constant column.
fn load_data(
    path: &Path,
    basis: &BasisArgs,
) -> Result<(SampleSet, BasisSpec, IndexSet, LinearSystem), CliError> {
    let samples = SampleSet::read_csv(path).map_err(CliError::data)?;
    let spec = resolve_basis(basis, samples.dims())?;
    let idx = spec.total_order_index_set().map_err(CliError::config)?;
    if idx.len() < 3 {
        return Err(bad_config(format!(
            "the basis has {} non-constant terms; at least 2 are needed",
            idx.len().saturating_sub(1)
        )));
    }
    let system = assemble_regression_system(&spec, &idx, &samples, true).map_err(CliError::data)?;
    Ok((samples, spec, idx, system))
}

fn case_spec(case: &CaseArgs, basis: &BasisArgs) -> Result<CaseSpec, CliError> {
    let dims = basis.dims.unwrap_or(5);
    let degree = basis.degree.unwrap_or(5);
    Ok(match case.case.unwrap_or(CaseKind::Gaussian) {
        CaseKind::Gaussian => CaseSpec::Gaussian {
            n: case.n.unwrap_or(500),
            s: case.s.unwrap_or(25),
        },
        CaseKind::RandomPce => CaseSpec::RandomPce {
            dims,
            degree,
            s: case.s.unwrap_or(20),
        },
        CaseKind::Genz => match &case.coefficients {
            Some(a) => CaseSpec::Genz {
                dims: a.len(),
                degree,
                coefficients: a.clone(),
            },
            None => CaseSpec::genz_harmonic(dims, degree),
        },
    })
}

fn default_validation_rows(case: &CaseArgs, n: usize) -> usize {
    case.m_validation.unwrap_or((2 * n).max(1000))
}

fn prepare_out(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| {
        CliError::config(Error::Input {
            path: dir.to_path_buf(),
            message: e.to_string(),
        })
    })
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    fs::write(path, contents).map_err(|e| CliError::run(e.into()))
}

fn write_profile(out: &Path, profile: &CvProfile) -> Result<(), CliError> {
    let file = fs::File::create(out.join("cv_scan.csv")).map_err(|e| CliError::run(e.into()))?;
    profile
        .write_csv(std::io::BufWriter::new(file))
        .map_err(CliError::run)
}

#[derive(Serialize)]
struct FitArtifact<'a> {
    basis: &'a BasisSpec,
    index_set: &'a [MultiIndex],
    offset: f64,
    coefficients: &'a [f64],
    lambda_star: f64,
    cv_error: f64,
    solver: Method,
    k_folds: usize,
    seed: u64,
    samples: usize,
}

fn cmd_fit(args: FitArgs) -> Result<(), CliError> {
    let args = layered(&args, args.common.config.as_deref())?;
    let common = resolve_common(&args.common)?;
    let path = args
        .data
        .as_deref()
        .ok_or_else(|| bad_config("fit needs --data"))?;
    let (samples, spec, idx, system) = load_data(path, &args.basis)?;
    with_threads(common.threads, || {
        let m = samples.len();
        let mut folds = RandomStream::new(common.seed, 0)
            .substream(CV_STREAM)
            .substream(m as u64);
        let profile = select_lambda(&system, &common.grid, common.k, &common.config, &mut folds)
            .map_err(CliError::run)?;
        let x = &profile.solution_at_star.x;
        let artifact = FitArtifact {
            basis: &spec,
            index_set: idx.as_slice(),
            offset: system.y_offset(),
            coefficients: x,
            lambda_star: profile.lambda_star,
            cv_error: profile.cv_error_star(),
            solver: common.config.method,
            k_folds: common.k,
            seed: common.seed,
            samples: m,
        };
        prepare_out(&common.out)?;
        let json = serde_json::to_string_pretty(&artifact).map_err(|e| CliError::run(e.into()))?;
        write_file(&common.out.join("fit.json"), &(json + "\n"))?;

        let mut rows = vec![vec![
            "0".to_string(),
            idx.as_slice()[0].to_string(),
            fmt_f64(system.y_offset()),
        ]];
        for (j, (beta, c)) in idx.iter().skip(1).zip(x).enumerate() {
            rows.push(vec![(j + 1).to_string(), beta.to_string(), fmt_f64(*c)]);
        }
        write_csv_file(
            &common.out.join("coefficients.csv"),
            &["rank", "index", "coefficient"],
            &rows,
        )
        .map_err(CliError::run)?;
        write_profile(&common.out, &profile)?;

        let nonzero = x.iter().filter(|v| **v != 0.0).count();
        println!("samples          {m}");
        println!("basis terms      {} (plus constant)", x.len());
        println!("lambda*          {}", fmt_f64(profile.lambda_star));
        println!("cv error         {}", fmt_f64(profile.cv_error_star()));
        println!("nonzeros         {nonzero}");
        println!("wrote            {}", common.out.display());
        Ok(())
    })
}

fn cmd_cv_scan(args: CvScanArgs) -> Result<(), CliError> {
    let args = layered(&args, args.common.config.as_deref())?;
    let common = resolve_common(&args.common)?;
    let root = RandomStream::new(common.seed, 0);
    let system = match &args.data {
        Some(path) => load_data(path, &args.basis)?.3,
        None => {
            let case = case_spec(&args.case, &args.basis)?;
            let m = args.m.unwrap_or(150);
            case.generate(m, 0, &mut root.substream(INSTANCE_STREAM))
                .map_err(CliError::run)?
                .system
        }
    };
    with_threads(common.threads, || {
        let m = system.rows() as u64;
        let profile = select_lambda(
            &system,
            &common.grid,
            common.k,
            &common.config,
            &mut root.substream(CV_STREAM).substream(m),
        )
        .map_err(CliError::run)?;
        prepare_out(&common.out)?;
        write_profile(&common.out, &profile)?;
        write_file(
            &common.out.join("cv_profile.json"),
            &(profile.to_json().map_err(CliError::run)? + "\n"),
        )?;
        println!("lambda*          {}", fmt_f64(profile.lambda_star));
        println!("cv error         {}", fmt_f64(profile.cv_error_star()));
        println!("wrote            {}", common.out.display());
        Ok(())
    })
}

fn stop_params(args: &ConvergeArgs, n: usize, rows: Option<usize>) -> Result<StopParams, CliError> {
    let d = StopParams::for_columns(n);
    let params = StopParams {
        m0: args.m0.unwrap_or(d.m0),
        delta_m: args.delta_m.unwrap_or(d.delta_m),
        q: args.q.unwrap_or(d.q),
        eta: args.eta.unwrap_or(d.eta),
        r: args.r.unwrap_or(d.r),
        a: args.abs_tol.unwrap_or(d.a),
        m_max: args.m_max.or(rows).unwrap_or(d.m_max),
    };
    params.validate().map_err(CliError::config)?;
    if let Some(rows) = rows {
        if params.m_max > rows {
            return Err(CliError::data(Error::Exhausted {
                needed: params.m_max,
                available: rows,
            }));
        }
    }
    Ok(params)
}

fn cmd_converge(args: ConvergeArgs) -> Result<(), CliError> {
    let args = layered(&args, args.common.config.as_deref())?;
    let common = resolve_common(&args.common)?;
    let root = RandomStream::new(common.seed, 0);
    let sweep: ConvergenceSweep = match &args.data {
        Some(path) => {
            let (samples, spec, idx, _) = load_data(path, &args.basis)?;
            let columns = idx.without_constant();
            let params = stop_params(&args, columns.len(), Some(samples.len()))?;
            let a = design_matrix(&spec, &columns, samples.points()).map_err(CliError::data)?;
            let full = TestInstance::centered_from_raw(
                a,
                samples.observations().clone(),
                None,
                None,
                GeneratorTag::External,
                Some(columns.iter().map(ToString::to_string).collect()),
            )
            .map_err(CliError::data)?;
            let schedule: Vec<usize> = (params.m0..=params.m_max).step_by(params.delta_m).collect();
            with_threads(common.threads, || {
                sweep_instance(
                    &full,
                    &schedule,
                    &common.grid,
                    common.k,
                    &common.config,
                    &params,
                    &root,
                )
                .map_err(CliError::run)
            })?
        }
        None => {
            let case = case_spec(&args.case, &args.basis)?;
            let n = case.columns().map_err(CliError::config)?;
            let params = stop_params(&args, n, None)?;
            let schedule: Vec<usize> = (params.m0..=params.m_max).step_by(params.delta_m).collect();
            let m_validation = default_validation_rows(&args.case, n);
            with_threads(common.threads, || {
                convergence_sweep(
                    &case,
                    &schedule,
                    &common.grid,
                    common.k,
                    &common.config,
                    &params,
                    m_validation,
                    &root,
                )
                .map_err(CliError::run)
            })?
        }
    };
    prepare_out(&common.out)?;
    let file = fs::File::create(common.out.join("convergence.csv"))
        .map_err(|e| CliError::run(e.into()))?;
    sweep
        .write_csv(std::io::BufWriter::new(file))
        .map_err(CliError::run)?;
    let file =
        fs::File::create(common.out.join("history.csv")).map_err(|e| CliError::run(e.into()))?;
    sweep
        .history
        .write_csv(std::io::BufWriter::new(file))
        .map_err(CliError::run)?;
    println!("{:>6} {:>24} {:>24}", "m", "cv_error", "lambda_star");
    for r in &sweep.records {
        println!(
            "{:>6} {:>24} {:>24}{}",
            r.m,
            fmt_f64(r.cv_error),
            fmt_f64(r.lambda_star),
            if r.stop_flag { "  stop" } else { "" }
        );
    }
    match sweep.stop() {
        Some((m, reason)) => println!("stop at m = {m} ({reason})"),
        None => println!("no stop within the schedule"),
    }
    println!("wrote {}", common.out.display());
    Ok(())
}

fn cmd_phase(args: PhaseArgs) -> Result<(), CliError> {
    let args = layered(&args, args.common.config.as_deref())?;
    let common = resolve_common(&args.common)?;
    let metric = args.metric.unwrap_or(PhaseMetric::SolutionError);
    let n = args.n.unwrap_or(200);
    let mut spec = PhaseDiagramSpec::gaussian(
        n,
        args.nodes.unwrap_or(40),
        args.trials.unwrap_or(5),
        metric,
    );
    spec.ensemble = match args.ensemble.unwrap_or(CaseKind::Gaussian) {
        CaseKind::Gaussian => Ensemble::Gaussian,
        CaseKind::RandomPce => Ensemble::RandomPce {
            dims: args.dims.unwrap_or(5),
            degree: args.degree.unwrap_or(5),
        },
        CaseKind::Genz => {
            return Err(bad_config(
                "the phase diagram supports gaussian and random-pce ensembles",
            ))
        }
    };
    spec.success_threshold = args.threshold.unwrap_or(0.1);
    spec.k = common.k;
    spec.lambda_grid = common.grid.clone();
    let columns = spec.columns().map_err(CliError::config)?;
    spec.m_validation = args.m_validation.unwrap_or((2 * columns).max(1000));
    let result = with_threads(common.threads, || {
        phase_diagram(&spec, &common.config, &RandomStream::new(common.seed, 0))
            .map_err(CliError::run)
    })?;
    prepare_out(&common.out)?;
    let file =
        fs::File::create(common.out.join("phase.csv")).map_err(|e| CliError::run(e.into()))?;
    result
        .write_csv(std::io::BufWriter::new(file))
        .map_err(CliError::run)?;
    let mean = result.nodes.iter().map(|p| p.success_rate).sum::<f64>() / result.nodes.len() as f64;
    println!("nodes            {}", result.nodes.len());
    println!("mean success     {}", fmt_f64(mean));
    println!("wrote            {}", common.out.display());
    Ok(())
}

fn with_threads<T>(
    threads: Option<usize>,
    f: impl FnOnce() -> Result<T, CliError> + Send,
) -> Result<T, CliError>
where
    T: Send,
{
    match threads {
        None => f(),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| bad_config(format!("cannot start {n} threads: {e}")))?
            .install(f),
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn try_run<I, T>(args: I) -> Result<(), CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = Cli::try_parse_from(args).map_err(|e| {
        if matches!(
            e.kind(),
            clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion
        ) {
            let _ = e.print();
            return None;
        }
        Some(bad_config(e.to_string()))
    });
    let cli = match cli {
        Ok(cli) => cli,
        Err(None) => return Ok(()),
        Err(Some(e)) => return Err(e),
    };
    match cli.command {
        Command::Fit(a) => cmd_fit(a),
        Command::CvScan(a) => cmd_cv_scan(a),
        Command::Converge(a) => cmd_converge(a),
        Command::Phase(a) => cmd_phase(a),
    }
}

/// Runs the command line and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    match try_run(args) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("chaosfit: {}", e.error);
            e.code
        }
    }
}
