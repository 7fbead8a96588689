//! `mixpreserve`: structure-preserving mixup from the command line.
//!
//! Every command prints its machine-readable JSON result to stdout (or the
//! `--out` file) and a short human summary to stderr. Exit codes: 0 on
//! success, 1 for usage and parse errors, 2 when the request is infeasible.

mod output;
mod weight_arg;

use std::fs::{self, File};
use std::io::BufReader;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use mixpreserve::harness::{self, DriftOptions, NamedWeight, QuadraticColumns};
use mixpreserve::solver::{decile_grid, parameter_table, solve};
use mixpreserve::stats::{describe, relative_bias};
use mixpreserve::synthesis::{synthesize, Scheme};
use mixpreserve::{Dataset, EpBetaParams, Error, MixupConfig, Schema, SolverRequest, WeightDistribution};

use output::{emit, write_atomic};
use weight_arg::{parse_delta, WeightArgs};

const THREADS_ENV: &str = "MIXPRESERVE_THREADS";
const INFEASIBLE_REASON: &str = "no structure-preserving parameters";

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Core(Error),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Core(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Core(Error::Io(e))
    }
}

type CliResult<T = ()> = Result<T, CliError>;

#[derive(Parser, Debug)]
#[command(name = "mixpreserve", version, about = "Structure-preserving mixup for tabular data")]
#[command(after_help = "Examples:
  mixpreserve solve --eps0 0.3 --eps1 0.3 --delta 0.005
  mixpreserve table --delta 0.01 --format grid
  mixpreserve synthesize --input data.csv --schema schema.json --epsilon0 0.3 --epsilon1 0.3 --delta 0.05 --output synth.csv
  mixpreserve evaluate --original data.csv --synthetic synth.csv --schema schema.json
  mixpreserve drift --generations 25 --weight uniform
  mixpreserve demo --experiment gaussian --weight uniform")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum TableFormat {
    Json,
    Csv,
    Grid,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum Experiment {
    Gaussian,
    Quadratic,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Solve for variance-preserving EpBeta parameters
    Solve {
        #[arg(long = "eps0", visible_alias = "epsilon0")]
        eps0: f64,
        #[arg(long = "eps1", visible_alias = "epsilon1")]
        eps1: f64,
        /// Gap tolerance in [0, 1]
        #[arg(long, value_parser = parse_delta)]
        delta: f64,
        /// Cut point for the categorical label
        #[arg(long, default_value_t = 0.5)]
        tau: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },

    /// Parameter table over eps0, eps1 in {0.0, 0.1, ..., 0.9}
    Table {
        #[arg(long, value_parser = parse_delta)]
        delta: f64,
        #[arg(long, value_enum, default_value_t = TableFormat::Json)]
        format: TableFormat,
        #[arg(long)]
        out: Option<PathBuf>,
    },

    /// Generate synthetic rows from a CSV dataset
    Synthesize {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        schema: PathBuf,
        /// Full mixup configuration as JSON (instead of weight flags)
        #[arg(long)]
        config: Option<PathBuf>,
        #[command(flatten)]
        weight: WeightArgs,
        /// Number of synthetic rows (default: input row count)
        #[arg(long)]
        m: Option<usize>,
        #[arg(long)]
        tau: Option<f64>,
        #[arg(long)]
        seed: Option<u64>,
        /// Synthetic CSV destination
        #[arg(long)]
        output: PathBuf,
        /// Report destination (default: stdout)
        #[arg(long)]
        report: Option<PathBuf>,
    },

    /// Relative bias of a synthetic dataset against the original
    Evaluate {
        #[arg(long)]
        original: PathBuf,
        #[arg(long)]
        synthetic: PathBuf,
        #[arg(long)]
        schema: PathBuf,
        /// JSON report destination (default: stdout)
        #[arg(long)]
        out: Option<PathBuf>,
        /// Tidy CSV report destination
        #[arg(long)]
        csv: Option<PathBuf>,
    },

    /// Repeated resynthesis and moment drift
    Drift {
        /// Input CSV (default: a standard-normal column of --n rows)
        #[arg(long, requires = "schema")]
        input: Option<PathBuf>,
        #[arg(long)]
        schema: Option<PathBuf>,
        #[arg(long, default_value_t = 50_000)]
        n: usize,
        #[arg(long)]
        generations: usize,
        #[command(flatten)]
        weight: WeightArgs,
        /// Rows per generation (default: input row count)
        #[arg(long)]
        m: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Track `TARGET = b*REGRESSOR^2` across generations, as REGRESSOR,TARGET
        #[arg(long)]
        quadratic: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        csv: Option<PathBuf>,
    },

    /// Built-in experiments
    Demo {
        #[arg(long, value_enum)]
        experiment: Experiment,
        #[command(flatten)]
        weight: WeightArgs,
        #[arg(long, default_value_t = 1000)]
        n: usize,
        /// Synthetic rows for the gaussian experiment
        #[arg(long, default_value_t = 100_000)]
        m: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Number of seeds for the quadratic experiment
        #[arg(long, default_value_t = 20)]
        seeds: u64,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion | ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand => {
                    ExitCode::SUCCESS
                }
                _ => ExitCode::from(1),
            };
        }
    };
    if let Err(e) = configure_threads() {
        eprintln!("error: {e}");
        return ExitCode::from(1);
    }
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(CliError::Core(e)) if e.is_infeasibility() => {
            let reason = match e {
                Error::NoPreservingParams | Error::Infeasible { .. } | Error::InfeasibleRatio { .. } | Error::EmptyRatioInterval { .. } => INFEASIBLE_REASON.to_string(),
                _ => e.to_string(),
            };
            let diag = json!({ "status": "infeasible", "reason": reason, "detail": e.to_string() });
            println!("{}", serde_json::to_string_pretty(&diag).expect("static json"));
            eprintln!("infeasible: {e}");
            ExitCode::from(2)
        }
        Err(CliError::Core(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

fn configure_threads() -> Result<(), String> {
    let Ok(value) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = value.trim().parse().map_err(|_| format!("{THREADS_ENV} must be a positive integer, got {value:?}"))?;
    if n == 0 {
        return Err(format!("{THREADS_ENV} must be positive"));
    }
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| e.to_string())
}

fn run(cmd: Command) -> CliResult {
    match cmd {
        Command::Solve { eps0, eps1, delta, tau, out } => cmd_solve(eps0, eps1, delta, tau, out.as_deref()),
        Command::Table { delta, format, out } => cmd_table(delta, format, out.as_deref()),
        Command::Synthesize { input, schema, config, weight, m, tau, seed, output, report } => {
            cmd_synthesize(&input, &schema, config.as_deref(), &weight, m, tau, seed, &output, report.as_deref())
        }
        Command::Evaluate { original, synthetic, schema, out, csv } => {
            cmd_evaluate(&original, &synthetic, &schema, out.as_deref(), csv.as_deref())
        }
        Command::Drift { input, schema, n, generations, weight, m, seed, quadratic, out, csv } => {
            let data = match (&input, &schema) {
                (Some(i), Some(s)) => read_dataset(i, &read_schema(s)?)?,
                _ => harness::gaussian_column(n, seed)?,
            };
            cmd_drift(&data, generations, &weight, m, seed, quadratic.as_deref(), out.as_deref(), csv.as_deref())
        }
        Command::Demo { experiment, weight, n, m, seed, seeds, out, csv } => match experiment {
            Experiment::Gaussian => cmd_demo_gaussian(&weight, n, m, seed, out.as_deref(), csv.as_deref()),
            Experiment::Quadratic => cmd_demo_quadratic(&weight, n, seed, seeds, out.as_deref(), csv.as_deref()),
        },
    }
}

fn to_json<S: Serialize>(value: &S) -> CliResult<String> {
    serde_json::to_string_pretty(value).map_err(|e| CliError::Core(e.into()))
}

fn read_schema(path: &Path) -> CliResult<Schema> {
    let text = fs::read_to_string(path)?;
    Schema::from_json(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}

fn read_dataset(path: &Path, schema: &Schema) -> CliResult<Dataset> {
    let file = File::open(path).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
    Ok(Dataset::read_csv(BufReader::new(file), schema)?)
}

fn cmd_solve(eps0: f64, eps1: f64, delta: f64, tau: f64, out: Option<&Path>) -> CliResult {
    let req = SolverRequest { tau, ..SolverRequest::new(eps0, eps1, delta) };
    let params = solve(&req)?;
    emit(out, &to_json(&params)?)?;
    eprintln!(
        "EpBeta({:.4}, {:.4}; {}, {}) with u(W, {}) = {:.3e}",
        params.alpha, params.beta, eps0, eps1, tau, params.u_at_half
    );
    if let Some(alt) = params.min_alpha_alternative {
        eprintln!("note: feasible pair with smaller alpha: ({:.4}, {:.4}), u = {:.3e}", alt.alpha, alt.beta, alt.u);
    }
    Ok(())
}

fn cmd_table(delta: f64, format: TableFormat, out: Option<&Path>) -> CliResult {
    let table = parameter_table(&decile_grid::<f64>(), delta);
    let text = match format {
        TableFormat::Json => to_json(&table)?,
        TableFormat::Csv => table.to_csv(),
        TableFormat::Grid => table.render_grid(),
    };
    emit(out, &text)?;
    if format != TableFormat::Grid {
        eprint!("{}", table.render_grid());
    }
    Ok(())
}

#[derive(Serialize)]
struct Dictionary<'a> {
    column: &'a str,
    categories: &'a [String],
}

#[allow(clippy::too_many_arguments)]
fn cmd_synthesize(
    input: &Path,
    schema_path: &Path,
    config: Option<&Path>,
    weight: &WeightArgs,
    m: Option<usize>,
    tau: Option<f64>,
    seed: Option<u64>,
    output: &Path,
    report: Option<&Path>,
) -> CliResult {
    let schema = read_schema(schema_path)?;
    let data = read_dataset(input, &schema)?;
    let (mut cfg, solved): (MixupConfig, Option<EpBetaParams>) = match config {
        Some(path) => {
            if !weight.is_empty() {
                return Err(CliError::Usage("give either --config or weight flags, not both".into()));
            }
            let text = fs::read_to_string(path)?;
            let cfg = serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
            (cfg, None)
        }
        None => {
            let resolved = weight.resolve()?;
            (MixupConfig::standard(resolved.weight, data.n_rows(), 0), resolved.solved)
        }
    };
    if let Some(m) = m {
        cfg.m = m;
    }
    if let Some(tau) = tau {
        cfg.tau = tau;
    }
    if let Some(seed) = seed {
        cfg.seed = seed;
    }

    let synthetic = synthesize(&data, &cfg)?;
    write_atomic(output, synthetic.to_csv_string()?.as_bytes())?;

    let dictionaries: Vec<Dictionary> = synthetic
        .schema()
        .columns
        .iter()
        .filter(|c| !c.categories.is_empty())
        .map(|c| Dictionary { column: &c.name, categories: &c.categories })
        .collect();
    let standard = match &cfg.scheme {
        Scheme::Standard { weight } => Some(weight),
        Scheme::General { .. } => None,
    };
    let summary = json!({
        "input": input.display().to_string(),
        "output": output.display().to_string(),
        "rows_in": data.n_rows(),
        "rows_out": synthetic.n_rows(),
        "config": cfg,
        "solved": solved,
        "variance_scale": standard.map(|w| w.variance_scale()),
        "u_at_tau": standard.map(|w| w.u_value(cfg.tau)),
        "dictionaries": dictionaries,
    });
    emit(report, &to_json(&summary)?)?;
    eprintln!("wrote {} synthetic rows to {}", synthetic.n_rows(), output.display());
    if let Some(p) = solved {
        eprintln!("solved weight: EpBeta({:.4}, {:.4}; {}, {})", p.alpha, p.beta, p.eps0, p.eps1);
    }
    Ok(())
}

fn cmd_evaluate(original: &Path, synthetic: &Path, schema_path: &Path, out: Option<&Path>, csv: Option<&Path>) -> CliResult {
    let schema = read_schema(schema_path)?;
    let reference = describe(&read_dataset(original, &schema)?)?;
    let synth = describe(&read_dataset(synthetic, &schema)?)?;
    let report = relative_bias(&reference, &synth)?;
    emit(out, &report.to_json()?)?;
    if let Some(path) = csv {
        write_atomic(path, report.to_csv()?.as_bytes())?;
    }
    let worst = report
        .entries
        .iter()
        .max_by(|a, b| a.bias.abs().total_cmp(&b.bias.abs()));
    match worst {
        Some(e) => eprintln!(
            "{} statistics compared; largest |bias| {:.4} ({} {})",
            report.entries.len(),
            e.bias.abs(),
            e.statistic.as_str(),
            e.columns.join(";")
        ),
        None => eprintln!("no statistics compared"),
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_drift(
    data: &Dataset,
    generations: usize,
    weight: &WeightArgs,
    m: Option<usize>,
    seed: u64,
    quadratic: Option<&str>,
    out: Option<&Path>,
    csv: Option<&Path>,
) -> CliResult {
    let resolved = weight.resolve()?;
    let cfg = MixupConfig::standard(resolved.weight, m.unwrap_or(data.n_rows()), seed);
    let options = DriftOptions {
        quadratic: match quadratic {
            Some(spec) => {
                let (regressor, target) = spec
                    .split_once(',')
                    .ok_or_else(|| CliError::Usage("--quadratic takes REGRESSOR,TARGET".into()))?;
                Some(QuadraticColumns { regressor: regressor.trim().into(), target: target.trim().into() })
            }
            None => None,
        },
    };
    let trace = harness::drift_study(data, &cfg, generations, seed, &options)?;
    emit(out, &trace.to_json()?)?;
    if let Some(path) = csv {
        write_atomic(path, trace.to_csv()?.as_bytes())?;
    }
    for c in &trace.last().columns {
        eprintln!(
            "generation {}: {} variance ratio {:.4e} (predicted {:.4e}, envelope [{:.4e}, {:.4e}])",
            trace.last().generation,
            c.column,
            c.ratio,
            c.predicted,
            c.envelope.0,
            c.envelope.1
        );
    }
    Ok(())
}

fn cmd_demo_gaussian(weight: &WeightArgs, n: usize, m: usize, seed: u64, out: Option<&Path>, csv: Option<&Path>) -> CliResult {
    let resolved = weight.resolve()?;
    let report = harness::gaussian_demo(n, m, &resolved.weight, seed)?;
    let result = json!({
        "experiment": "gaussian",
        "n": n,
        "m": m,
        "seed": seed,
        "weight": resolved.weight,
        "variance_scale": resolved.weight.variance_scale(),
        "bias": report,
    });
    emit(out, &to_json(&result)?)?;
    if let Some(path) = csv {
        write_atomic(path, report.to_csv()?.as_bytes())?;
    }
    for e in report.entries.iter().filter(|e| matches!(e.statistic.as_str(), "variance" | "covariance")) {
        eprintln!("{} {}: relative bias {:+.4}", e.statistic.as_str(), e.columns.join(";"), e.bias);
    }
    Ok(())
}

const SWEEP_DELTAS: [f64; 4] = [0.001, 0.005, 0.01, 0.05];
const SWEEP_EPS: f64 = 0.3;

fn quadratic_weights(weight: &WeightArgs) -> CliResult<Vec<NamedWeight<f64>>> {
    if !weight.is_empty() {
        let resolved = weight.resolve()?;
        let name = match (&weight.weight, resolved.solved) {
            (Some(text), _) => text.clone(),
            (None, Some(p)) => format!("epbeta(delta={})", p.delta),
            (None, None) => "weight".into(),
        };
        return Ok(vec![NamedWeight { name, weight: resolved.weight }]);
    }
    let mut weights = Vec::new();
    for delta in SWEEP_DELTAS {
        let p = solve(&SolverRequest::new(SWEEP_EPS, SWEEP_EPS, delta))?;
        weights.push(NamedWeight { name: format!("epbeta(delta={delta})"), weight: p.weight() });
    }
    weights.push(NamedWeight { name: "beta(0.1,0.1)".into(), weight: WeightDistribution::beta(0.1, 0.1)? });
    weights.push(NamedWeight { name: "uniform".into(), weight: WeightDistribution::Uniform });
    Ok(weights)
}

fn cmd_demo_quadratic(weight: &WeightArgs, n: usize, seed: u64, seeds: u64, out: Option<&Path>, csv: Option<&Path>) -> CliResult {
    if seeds == 0 {
        return Err(CliError::Usage("--seeds must be positive".into()));
    }
    let weights = quadratic_weights(weight)?;
    let seed_list: Vec<u64> = (0..seeds).map(|k| seed + k).collect();
    let study = harness::quadratic_study(n, &weights, &seed_list)?;
    let summary: Vec<_> = weights
        .iter()
        .map(|w| {
            let runs: Vec<_> = study.runs_for(&w.name).collect();
            let mean_gap = runs.iter().map(|r| r.gap()).sum::<f64>() / runs.len() as f64;
            json!({
                "weight": w.name,
                "u_at_half": w.weight.u_value(0.5),
                "coverage": study.coverage(&w.name),
                "mean_abs_gap": mean_gap,
            })
        })
        .collect();
    let result = json!({ "experiment": "quadratic", "n": n, "seeds": seed_list, "summary": summary, "runs": study.runs });
    emit(out, &to_json(&result)?)?;
    if let Some(path) = csv {
        write_atomic(path, study.to_csv()?.as_bytes())?;
    }
    for s in &summary {
        eprintln!(
            "{:<24} u(W,0.5)={:.3e}  coverage={}  mean |gap|={:.3e}",
            s["weight"].as_str().unwrap_or(""),
            s["u_at_half"].as_f64().unwrap_or(f64::NAN),
            s["coverage"],
            s["mean_abs_gap"].as_f64().unwrap_or(f64::NAN)
        );
    }
    Ok(())
}
