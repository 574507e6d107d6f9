//! `sqlr` — association testing with sieve quasi-likelihood ratio tests.
//!
//! Subcommands:
//! - `test`      joint test of a named feature set on CSV data
//! - `scan`      per-feature association scan ranked by p-value
//! - `adjust`    replace the response by covariate-adjusted residuals
//! - `simulate`  Monte Carlo type-I error / power study on the benchmark model
//!
//! Exit codes: 0 success, 1 usage error, 2 data error, 3 numeric degeneracy.

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};
use sha2::{Digest, Sha256};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use sqlr_core::nn_sieve::TrainConfig;
use sqlr_core::pipeline::{
    adjust_covariates, load_csv, scale_dataset, scan, write_adjusted_csv, FeatureResult,
    ScanConfig, ScanResult,
};
use sqlr_core::report::{scan_to_json, scan_to_text, Manifest};
use sqlr_core::simulation::{
    reports_to_json, run_mc, run_mc_serial, table_report, McConfig, SIM_DIM,
};
use sqlr_core::sqlr::{sqlr_test, HypothesisSpec, SieveShape};
use sqlr_core::{Dataset, Error};

#[derive(Parser)]
#[command(
    name = "sqlr",
    version,
    about = "Sieve quasi-likelihood ratio association tests"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Test a feature set jointly for association with the response.
    Test(TestArgs),
    /// Test every feature one at a time and rank by SQLR p-value.
    Scan(ScanArgs),
    /// Regress the response on covariates and write residuals as the new
    /// response.
    Adjust(AdjustArgs),
    /// Monte Carlo study of empirical type-I error and power.
    Simulate(SimulateArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Text,
}

#[derive(Args)]
struct FitArgs {
    /// Hidden width r (default: floor(sqrt(n))).
    #[arg(long)]
    width: Option<usize>,
    /// Output-layer l1 budget V.
    #[arg(long, default_value_t = 1000.0)]
    v_budget: f64,
    /// Hidden-layer l1 budget M.
    #[arg(long, default_value_t = 1000.0)]
    m_budget: f64,
    /// Iterations for the null fit.
    #[arg(long, default_value_t = 3000)]
    null_iters: usize,
    /// Iterations for the alternative fit.
    #[arg(long, default_value_t = 3000)]
    alt_iters: usize,
    /// Step-size base c for the null fit (step c / ln(e + k)).
    #[arg(long, default_value_t = 0.1)]
    null_step: f64,
    /// Step-size base c for the alternative fit.
    #[arg(long, default_value_t = 0.1 / 300.0)]
    alt_step: f64,
    /// Half-width of the uniform weight initialization.
    #[arg(long, default_value_t = 0.5)]
    init_scale: f64,
    /// Nominal significance level.
    #[arg(long, default_value_t = 0.05)]
    level: f64,
}

#[derive(Args)]
struct DataArgs {
    /// Input CSV file (RFC 4180, header row required).
    #[arg(long)]
    input: PathBuf,
    /// Response column name.
    #[arg(long)]
    response: String,
    /// Covariate column names to residualize out (comma separated).
    #[arg(long, value_delimiter = ',')]
    covariates: Vec<String>,
    /// Skip min-max scaling of features onto [-1, 1].
    #[arg(long)]
    no_scale: bool,
}

#[derive(Args)]
struct TestArgs {
    #[command(flatten)]
    data: DataArgs,
    /// Feature column names to test jointly (comma separated).
    #[arg(long, value_delimiter = ',', required = true)]
    features: Vec<String>,
    #[arg(long)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    #[command(flatten)]
    fit: FitArgs,
}

#[derive(Args)]
struct ScanArgs {
    #[command(flatten)]
    data: DataArgs,
    /// Restrict the scan to these feature columns (default: all columns
    /// except the response and covariates).
    #[arg(long, value_delimiter = ',')]
    features: Vec<String>,
    #[arg(long)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Run features serially instead of in parallel (output is identical).
    #[arg(long)]
    serial: bool,
    #[command(flatten)]
    fit: FitArgs,
}

#[derive(Args)]
struct AdjustArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    response: String,
    #[arg(long, value_delimiter = ',', required = true)]
    covariates: Vec<String>,
    /// Output CSV path.
    #[arg(long)]
    output: PathBuf,
}

#[derive(Args)]
struct SimulateArgs {
    /// Sample size per replication.
    #[arg(long)]
    n: usize,
    /// Number of Monte Carlo replications.
    #[arg(long)]
    reps: usize,
    #[arg(long)]
    seed: u64,
    /// Tested features, 1-based (default: 1,2,3,4,5,6).
    #[arg(long, value_delimiter = ',')]
    features: Vec<usize>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Run replications serially instead of in parallel (output is
    /// identical).
    #[arg(long)]
    serial: bool,
    #[command(flatten)]
    fit: FitArgs,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // --help / --version are not usage errors.
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return ExitCode::SUCCESS;
            }
            eprint!("{e}");
            return ExitCode::from(1);
        }
    };
    let result = match cli.command {
        Command::Test(args) => cmd_test(args),
        Command::Scan(args) => cmd_scan(args),
        Command::Adjust(args) => cmd_adjust(args),
        Command::Simulate(args) => cmd_simulate(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code_for(&e))
        }
    }
}

fn exit_code_for(e: &Error) -> u8 {
    match e {
        Error::InvalidConfig(_) => 1,
        Error::DimensionMismatch(_)
        | Error::EmptyDataset
        | Error::MissingColumn(_)
        | Error::BadCell { .. }
        | Error::Io(_)
        | Error::Csv(_) => 2,
        Error::NonFinite(_) | Error::Degenerate(_) | Error::RankDeficient => 3,
    }
}

fn command_line() -> String {
    std::env::args().collect::<Vec<_>>().join(" ")
}

fn sha256_hex(path: &Path) -> Result<String, Error> {
    let bytes = std::fs::read(path)?;
    let digest = Sha256::digest(&bytes);
    Ok(digest.iter().map(|b| format!("{b:02x}")).collect())
}

fn manifest_for(
    seed: u64,
    inputs: &[&Path],
    params: Vec<(String, String)>,
) -> Result<Manifest, Error> {
    let mut manifest = Manifest {
        command: command_line(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        seed,
        inputs: Vec::new(),
        params,
    };
    for path in inputs {
        manifest
            .inputs
            .push((path.display().to_string(), sha256_hex(path)?));
    }
    Ok(manifest)
}

fn fit_params(fit: &FitArgs, seed: u64) -> Vec<(String, String)> {
    let mut params = vec![("seed".to_string(), seed.to_string())];
    if let Some(w) = fit.width {
        params.push(("width".into(), w.to_string()));
    } else {
        params.push(("width".into(), "floor(sqrt(n))".into()));
    }
    params.push(("v_budget".into(), fit.v_budget.to_string()));
    params.push(("m_budget".into(), fit.m_budget.to_string()));
    params.push(("null_iters".into(), fit.null_iters.to_string()));
    params.push(("alt_iters".into(), fit.alt_iters.to_string()));
    params.push(("null_step".into(), fit.null_step.to_string()));
    params.push(("alt_step".into(), fit.alt_step.to_string()));
    params.push(("init_scale".into(), fit.init_scale.to_string()));
    params.push(("level".into(), fit.level.to_string()));
    params
}

/// Load, residualize, scale, and warn; shared by `test` and `scan`.
fn prepare_dataset(data_args: &DataArgs, features: &[String]) -> Result<Dataset, Error> {
    let loaded = load_csv(
        &data_args.input,
        &data_args.response,
        features,
        &data_args.covariates,
    )?;
    if loaded.dropped_rows > 0 {
        eprintln!(
            "warning: dropped {} row(s) with missing values",
            loaded.dropped_rows
        );
    }
    let dataset = loaded.dataset;
    let n = dataset.n();
    let c = loaded.covariate_names.len();
    let y = if c > 0 {
        adjust_covariates(dataset.y(), &loaded.covariates, n, c)?
    } else {
        dataset.y().to_vec()
    };
    let mut dataset = Dataset::new(dataset.x().to_vec(), y, dataset.d())?
        .with_names(dataset.feature_names().unwrap().to_vec())?;

    warn_few_level_columns(&dataset);
    if !data_args.no_scale {
        let (scaled, scales) = scale_dataset(&dataset)?;
        for (j, s) in scales.iter().enumerate() {
            if s.constant {
                eprintln!(
                    "warning: column {} is constant; scaled to 0",
                    dataset.feature_label(j)
                );
            }
        }
        dataset = scaled;
    }
    Ok(dataset)
}

/// Categorical predictors (e.g. SNP genotypes 0/1/2) are treated as numeric;
/// flag them so the user knows the scaling applied.
fn warn_few_level_columns(data: &Dataset) {
    for j in 0..data.d() {
        let mut levels: Vec<u64> = (0..data.n()).map(|i| data.row(i)[j].to_bits()).collect();
        levels.sort_unstable();
        levels.dedup();
        if levels.len() <= 3 && data.n() > 3 {
            eprintln!(
                "warning: column {} has {} distinct value(s); treating as numeric",
                data.feature_label(j),
                levels.len()
            );
        }
    }
}

fn scan_config(fit: &FitArgs, seed: u64, parallel: bool) -> ScanConfig {
    ScanConfig {
        seed,
        level: fit.level,
        width: fit.width,
        v_budget: fit.v_budget,
        m_budget: fit.m_budget,
        null_iterations: fit.null_iters,
        alt_iterations: fit.alt_iters,
        null_step: fit.null_step,
        alt_step: fit.alt_step,
        init_scale: fit.init_scale,
        parallel,
    }
}

fn emit_scan(result: &ScanResult, manifest: &Manifest, format: Format) -> Result<(), Error> {
    match format {
        Format::Json => println!("{}", scan_to_json(manifest, result)),
        Format::Text => print!("{}", scan_to_text(result)?),
    }
    Ok(())
}

fn cmd_test(args: TestArgs) -> Result<(), Error> {
    let dataset = prepare_dataset(&args.data, &args.features)?;
    let d = dataset.d();
    let spec = HypothesisSpec::new((0..d).collect(), d)
        .map_err(|_| Error::InvalidConfig("no features to test".into()))?;
    // The loaded dataset contains exactly the requested features, so the
    // joint test covers all of its columns.
    let shape = SieveShape {
        width: args
            .fit
            .width
            .unwrap_or_else(|| ((dataset.n() as f64).sqrt().floor() as usize).max(1)),
        v_budget: args.fit.v_budget,
        m_budget: args.fit.m_budget,
    };
    let null_config = TrainConfig {
        iterations: args.fit.null_iters,
        step_base: args.fit.null_step,
        seed: args.seed,
        init_scale: args.fit.init_scale,
        track_best: true,
    };
    let alt_config = TrainConfig {
        iterations: args.fit.alt_iters,
        step_base: args.fit.alt_step,
        seed: args.seed,
        init_scale: args.fit.init_scale,
        track_best: true,
    };
    let outcome = sqlr_test(&dataset, &spec, &shape, &null_config, &alt_config)?;
    // The single-coefficient baseline only exists for single-feature tests;
    // a collinear design leaves it undefined rather than failing the run.
    let (p_ftest, f_degenerate) = if d == 1 {
        match sqlr_core::ftest::f_test_feature(&dataset, 0) {
            Ok(baseline) => (Some(baseline.p_value.value()), baseline.degenerate),
            Err(Error::RankDeficient) => (None, false),
            Err(e) => return Err(e),
        }
    } else {
        (None, false)
    };
    let result = ScanResult {
        results: vec![FeatureResult {
            feature_index: 0,
            feature: args.features.join(","),
            lr_stat: outcome.lr_stat,
            sigma_hat_sq: outcome.sigma_hat_sq,
            scaled_stat: outcome.scaled_stat,
            p_sqlr: outcome.p_value.value(),
            p_ftest,
            f_degenerate,
            clamped: outcome.clamped,
        }],
        n: dataset.n(),
        d,
    };
    let manifest = manifest_for(
        args.seed,
        &[args.data.input.as_path()],
        fit_params(&args.fit, args.seed),
    )?;
    emit_scan(&result, &manifest, args.format)
}

fn cmd_scan(args: ScanArgs) -> Result<(), Error> {
    let dataset = prepare_dataset(&args.data, &args.features)?;
    let config = scan_config(&args.fit, args.seed, !args.serial);
    let result = scan(&dataset, &config)?;
    let manifest = manifest_for(
        args.seed,
        &[args.data.input.as_path()],
        fit_params(&args.fit, args.seed),
    )?;
    emit_scan(&result, &manifest, args.format)
}

fn cmd_adjust(args: AdjustArgs) -> Result<(), Error> {
    let loaded = load_csv(&args.input, &args.response, &[], &args.covariates)?;
    if loaded.dropped_rows > 0 {
        eprintln!(
            "warning: dropped {} row(s) with missing values",
            loaded.dropped_rows
        );
    }
    let data = &loaded.dataset;
    let n = data.n();
    let c = loaded.covariate_names.len();
    let residuals = adjust_covariates(data.y(), &loaded.covariates, n, c)?;
    write_adjusted_csv(&args.output, &args.response, &residuals, data)?;
    eprintln!(
        "wrote {} rows ({} covariate(s) regressed out) to {}",
        n,
        c,
        args.output.display()
    );
    Ok(())
}

fn cmd_simulate(args: SimulateArgs) -> Result<(), Error> {
    let features: Vec<usize> = if args.features.is_empty() {
        (0..SIM_DIM).collect()
    } else {
        args.features
            .iter()
            .map(|&f| {
                if f == 0 || f > SIM_DIM {
                    Err(Error::InvalidConfig(format!(
                        "feature {f} out of range 1..{SIM_DIM}"
                    )))
                } else {
                    Ok(f - 1)
                }
            })
            .collect::<Result<_, _>>()?
    };
    let mut config = McConfig::new(args.n, args.reps, args.seed);
    config.level = args.fit.level;
    config.features = features;
    config.train.null_iterations = args.fit.null_iters;
    config.train.alt_iterations = args.fit.alt_iters;
    config.train.null_step = args.fit.null_step;
    config.train.alt_step = args.fit.alt_step;
    config.train.width = args.fit.width;
    config.train.v_budget = args.fit.v_budget;
    config.train.m_budget = args.fit.m_budget;
    config.train.init_scale = args.fit.init_scale;

    let report = if args.serial {
        run_mc_serial(&config)?
    } else {
        run_mc(&config)?
    };
    match args.format {
        Format::Json => {
            let manifest = manifest_for(args.seed, &[], fit_params(&args.fit, args.seed))?;
            let mut params = manifest.params.clone();
            params.push(("n".into(), args.n.to_string()));
            params.push(("reps".into(), args.reps.to_string()));
            let manifest = Manifest { params, ..manifest };
            println!(
                "{{\"manifest\":{},\"table\":{}}}",
                manifest.to_json(),
                reports_to_json(&[report])?
            );
        }
        Format::Text => print!("{}", table_report(&[report])?),
    }
    Ok(())
}
