use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde_json::{json, Value};

use relaxls::io::{self, TraceFormat};
use relaxls::regression::{ie_check_ct, ie_check_dt};
use relaxls::scenarios::{self, EstimatorTrace, ScenarioConfig};
use relaxls::Error;

#[derive(Parser)]
#[command(name = "relaxls", version, about = "Interlaced LS + DREM parameter estimation scenarios")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

impl From<FormatArg> for TraceFormat {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Csv => TraceFormat::Csv,
            FormatArg::Json => TraceFormat::Json,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario and write one trace per estimator.
    Run {
        /// Built-in scenario name or path to a JSON configuration.
        #[arg(long)]
        scenario: String,
        /// Override a configuration key, e.g. `--set gains.gamma=2`.
        #[arg(long = "set", value_name = "KEY=VALUE")]
        set: Vec<String>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum)]
        format: Option<FormatArg>,
    },
    /// Run a property suite: identities, monotonicity, excitation, robustness, equivalence.
    Check { suite: String },
    /// Report interval excitation of a scenario's regressor.
    Excite {
        #[arg(long)]
        scenario: String,
        #[arg(long = "set", value_name = "KEY=VALUE")]
        set: Vec<String>,
        #[arg(long = "t-c", conflicts_with = "k_c")]
        t_c: Option<f64>,
        #[arg(long = "k-c")]
        k_c: Option<usize>,
    },
    /// Run a scenario over a grid of overrides.
    Sweep {
        #[arg(long)]
        scenario: String,
        /// JSON object mapping configuration keys to lists of values.
        #[arg(long)]
        grid: PathBuf,
        #[arg(long = "set", value_name = "KEY=VALUE")]
        set: Vec<String>,
        #[arg(long, default_value = "sweep")]
        out: PathBuf,
        #[arg(long, value_enum)]
        format: Option<FormatArg>,
    },
}

enum Failure {
    Usage(String),
    Violation(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::IntegrationBlowup { .. }
            | Error::LostDefiniteness { .. }
            | Error::Normalization(_)
            | Error::NonFinite(_) => Failure::Violation(e.to_string()),
            other => Failure::Usage(other.to_string()),
        }
    }
}

fn load(scenario: &str, set: &[String]) -> Result<ScenarioConfig, Failure> {
    let overrides = set.iter().map(|s| io::split_override(s)).collect::<Result<Vec<_>, _>>()?;
    let mut cfg = io::load_config(scenario, &overrides)?;
    if let Ok(seed) = std::env::var("RELAXLS_SEED") {
        cfg.disturbance.seed = seed
            .trim()
            .parse()
            .map_err(|_| Failure::Usage(format!("RELAXLS_SEED must be an unsigned integer, got `{seed}`")))?;
    }
    Ok(cfg)
}

fn trace_path(base: &Path, estimator: &str, multiple: bool) -> PathBuf {
    if !multiple {
        return base.to_path_buf();
    }
    let stem = base.file_stem().and_then(|s| s.to_str()).unwrap_or("trace");
    let name = match base.extension().and_then(|e| e.to_str()) {
        Some(ext) => format!("{stem}_{estimator}.{ext}"),
        None => format!("{stem}_{estimator}"),
    };
    base.with_file_name(name)
}

fn report_failures(traces: &[EstimatorTrace]) -> Result<(), Failure> {
    let failed: Vec<String> =
        traces.iter().filter_map(|t| t.failure.as_ref().map(|f| format!("{}: {f}", t.estimator.name()))).collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Failure::Violation(failed.join("; ")))
    }
}

fn run(scenario: &str, set: &[String], out: Option<PathBuf>, format: Option<FormatArg>) -> Result<(), Failure> {
    let cfg = load(scenario, set)?;
    let format = format.map(TraceFormat::from).unwrap_or(cfg.format);
    let traces = scenarios::run_scenario(&cfg)?;
    let out = out.or_else(|| cfg.output.as_ref().map(PathBuf::from));
    let multiple = traces.len() > 1;
    for t in &traces {
        match &out {
            Some(base) => io::write_trace(&t.records, format, &trace_path(base, t.estimator.name(), multiple))?,
            None => {
                if multiple {
                    println!("# {}", t.estimator.name());
                }
                match format {
                    TraceFormat::Csv => print!("{}", io::trace_to_csv(&t.records)?),
                    TraceFormat::Json => println!(
                        "{}",
                        serde_json::to_string_pretty(&io::trace_to_json(&t.records)?).map_err(Error::from)?
                    ),
                }
            }
        }
    }
    report_failures(&traces)
}

fn check(suite: &str) -> Result<(), Failure> {
    let suite: io::Suite = suite.parse()?;
    let report = io::run_check(suite)?;
    println!("{}", serde_json::to_string_pretty(&report).map_err(Error::from)?);
    if report.passed {
        Ok(())
    } else {
        Err(Failure::Violation(format!("suite `{}` reported violations", report.suite)))
    }
}

fn excite(scenario: &str, set: &[String], t_c: Option<f64>, k_c: Option<usize>) -> Result<(), Failure> {
    let cfg = load(scenario, set)?;
    let (phis, h) = scenarios::regressor_trajectory(&cfg)?;
    let report = if cfg.scenario.is_continuous() {
        if k_c.is_some() {
            return Err(Failure::Usage("--k-c applies to discrete-time scenarios; use --t-c".into()));
        }
        ie_check_ct(&phis, h, t_c.unwrap_or((phis.len() - 1) as f64 * h))?
    } else {
        if t_c.is_some() {
            return Err(Failure::Usage("--t-c applies to continuous-time scenarios; use --k-c".into()));
        }
        ie_check_dt(&phis, k_c.unwrap_or(phis.len().saturating_sub(1)))?
    };
    let out = json!({
        "scenario": cfg.name,
        "excited": report.excited,
        "level": report.level,
        "window_end": report.window_end,
    });
    println!("{}", serde_json::to_string_pretty(&out).map_err(Error::from)?);
    Ok(())
}

fn grid_points(grid: &Value) -> Result<Vec<Vec<(String, String)>>, Failure> {
    let Value::Object(axes) = grid else {
        return Err(Failure::Usage("grid must be a JSON object of key -> list".into()));
    };
    let mut points: Vec<Vec<(String, String)>> = vec![vec![]];
    for (key, values) in axes {
        let Value::Array(values) = values else {
            return Err(Failure::Usage(format!("grid entry `{key}` must be a list")));
        };
        points = points
            .into_iter()
            .flat_map(|p| {
                values.iter().map(move |v| {
                    let mut q = p.clone();
                    q.push((key.clone(), v.to_string()));
                    q
                })
            })
            .collect();
    }
    Ok(points)
}

fn sweep(scenario: &str, grid: &Path, set: &[String], out: &Path, format: Option<FormatArg>) -> Result<(), Failure> {
    let text = std::fs::read_to_string(grid).map_err(Error::from)?;
    let grid: Value = serde_json::from_str(&text).map_err(Error::from)?;
    let points = grid_points(&grid)?;
    load(scenario, set)?;
    std::fs::create_dir_all(out).map_err(Error::from)?;

    let mut configs = Vec::with_capacity(points.len());
    for overrides in &points {
        let mut all = set.iter().map(|s| io::split_override(s)).collect::<Result<Vec<_>, _>>()?;
        all.extend(overrides.iter().cloned());
        configs.push(load(scenario, &all.iter().map(|(k, v)| format!("{k}={v}")).collect::<Vec<_>>())?);
    }

    let results: Vec<Result<Vec<EstimatorTrace>, Error>> = configs.par_iter().map(scenarios::run_scenario).collect();
    let mut manifest = Vec::with_capacity(points.len());
    let mut failures = Vec::new();
    for (i, ((cfg, overrides), result)) in configs.iter().zip(&points).zip(results).enumerate() {
        let traces = result?;
        let format = format.map(TraceFormat::from).unwrap_or(cfg.format);
        let mut files = Vec::new();
        for t in &traces {
            let name = format!("{}_{i:04}_{}.{}", cfg.name, t.estimator.name(), format.extension());
            io::write_trace(&t.records, format, &out.join(&name))?;
            files.push(name);
            if let Some(f) = &t.failure {
                failures.push(format!("run {i} {}: {f}", t.estimator.name()));
            }
        }
        let params: serde_json::Map<String, Value> = overrides
            .iter()
            .map(|(k, v)| (k.clone(), serde_json::from_str(v).unwrap_or(Value::String(v.clone()))))
            .collect();
        manifest.push(json!({ "run": i, "overrides": params, "files": files }));
    }
    let manifest = serde_json::to_string_pretty(&manifest).map_err(Error::from)?;
    std::fs::write(out.join("manifest.json"), manifest + "\n").map_err(Error::from)?;
    if failures.is_empty() {
        Ok(())
    } else {
        Err(Failure::Violation(failures.join("; ")))
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run { scenario, set, out, format } => run(&scenario, &set, out, format),
        Command::Check { suite } => check(&suite),
        Command::Excite { scenario, set, t_c, k_c } => excite(&scenario, &set, t_c, k_c),
        Command::Sweep { scenario, grid, set, out, format } => sweep(&scenario, &grid, &set, &out, format),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Violation(msg)) => {
            eprintln!("relaxls: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("relaxls: {msg}");
            ExitCode::from(2)
        }
    }
}
