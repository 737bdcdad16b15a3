//! Scenario runner behind the `jchsim` binary.

pub mod output;

use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use jchsim::invariants::run_invariant_suite;
use jchsim::scenario::{merge_sweep, run_resolved, sweep, OutputFormat, ScenarioConfig, ScenarioId, SWEEP_AXES};
use serde::Serialize;

use output::{to_json_bytes, write_scenario, OutputDir, RunManifest};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Default output directory when neither `--out` nor the config names one.
pub const OUT_DIR_ENV: &str = "JCHSIM_OUT_DIR";

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] jchsim::Error),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("invalid {field}: {message}")]
    Usage { field: String, message: String },
    #[error("invariant checks failed: {0}")]
    Invariants(String),
}

impl CliError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io { path: path.to_path_buf(), source }
    }

    fn usage(field: &str, message: impl Into<String>) -> Self {
        CliError::Usage { field: field.into(), message: message.into() }
    }

    /// 1 for bad input or I/O, 2 for numerical failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(e) if e.is_numerical() => 2,
            CliError::Invariants(_) => 2,
            _ => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;

#[derive(Parser, Debug)]
#[command(name = "jchsim", version, about = "Photon-polariton scattering in a coupled-cavity array")]
pub struct Cli {
    /// Worker threads for parallel sweeps and scans (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum FormatArg {
    Csv,
    Json,
}

impl From<FormatArg> for OutputFormat {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Csv => OutputFormat::Csv,
            FormatArg::Json => OutputFormat::Json,
        }
    }
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Run one scenario and write its tables and manifest.
    Simulate {
        /// kicked_fig4, collision_fig5, gamma_scan_fig6, longtime_fig7,
        /// raman_fig8 or photon_train.
        scenario_id: String,
        /// JSON config; `scenario_id` may be omitted from it.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Output directory [default: config out_dir, then $JCHSIM_OUT_DIR, then ./out].
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum)]
        format: Option<FormatArg>,
    },
    /// Run the invariant suite and write `suite_report.json`.
    Suite {
        /// Output directory [default: config out_dir, then $JCHSIM_OUT_DIR, then ./out].
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a config template once per value of one parameter.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        /// One of: lambda, kappa, hubbard_u, half_length, k0, alpha, center,
        /// u0, tau, width, l0, t_max, sample_dt.
        #[arg(long)]
        axis: String,
        /// Comma-separated values; may be empty.
        #[arg(long, allow_hyphen_values = true)]
        values: String,
        /// Output directory [default: config out_dir, then $JCHSIM_OUT_DIR, then ./out].
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum)]
        format: Option<FormatArg>,
    },
}

fn resolve_out_dir(flag: Option<PathBuf>, config: Option<&str>) -> PathBuf {
    flag.or_else(|| config.map(PathBuf::from))
        .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("out"))
}

/// Reads a config file, filling in `scenario_id` when the file leaves it out.
pub fn load_config(path: &Path, scenario_id: Option<&str>) -> Result<(ScenarioConfig, serde_json::Value)> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let mut value: serde_json::Value = serde_json::from_str(&text)
        .map_err(|e| jchsim::Error::validation("config", format!("{}: {e}", path.display())))?;
    let obj = value.as_object_mut().ok_or_else(|| jchsim::Error::validation("config", "expected a JSON object"))?;
    if let Some(id) = scenario_id {
        match obj.get("scenario_id") {
            None => {
                obj.insert("scenario_id".into(), id.into());
            }
            Some(v) if v.as_str() == Some(id) => {}
            Some(v) => {
                return Err(jchsim::Error::validation(
                    "scenario_id",
                    format!("config says {v}, command line says {id}"),
                )
                .into())
            }
        }
    }
    let config = ScenarioConfig::from_json(&value.to_string())?;
    Ok((config, value))
}

pub fn parse_values(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(str::trim)
        .filter(|v| !v.is_empty())
        .map(|v| {
            v.parse::<f64>()
                .ok()
                .filter(|x| x.is_finite())
                .ok_or_else(|| CliError::usage("values", format!("not a finite number: {v:?}")))
        })
        .collect()
}

fn with_threads<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match threads {
        None => Ok(f()),
        Some(0) => Err(CliError::usage("threads", "must be at least 1")),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| CliError::usage("threads", e.to_string()))?;
            Ok(pool.install(f))
        }
    }
}

/// Runs one scenario and writes its outputs into `out`.
pub fn simulate(
    config: &ScenarioConfig,
    echo: serde_json::Value,
    out: &Path,
    format: OutputFormat,
) -> Result<RunManifest> {
    let resolved = config.resolve()?;
    log::info!("{}: {}", config.scenario_id.as_str(), resolved.length_note);
    let start = Instant::now();
    let result = run_resolved(&resolved)?;
    let wall = start.elapsed().as_secs_f64();
    let mut dir = OutputDir::new(out)?;
    let manifest = write_scenario(&mut dir, &result, echo, format, wall)?;
    if !manifest.invariants_passed {
        let failed: Vec<&str> = manifest.invariants.iter().filter(|c| !c.passed).map(|c| c.name.as_str()).collect();
        return Err(CliError::Invariants(failed.join(", ")));
    }
    Ok(manifest)
}

#[derive(Serialize)]
struct SweepManifest {
    axis: String,
    values: Vec<f64>,
    version: &'static str,
    template: serde_json::Value,
    wall_time_s: f64,
    deterministic: bool,
    points: Vec<String>,
    merged: output::FileEntry,
}

pub fn run_sweep(
    template: &ScenarioConfig,
    echo: serde_json::Value,
    axis: &str,
    values: &[f64],
    out: &Path,
    format: OutputFormat,
) -> Result<Vec<RunManifest>> {
    if !SWEEP_AXES.contains(&axis) {
        return Err(jchsim::Error::validation(
            "axis",
            format!("unknown axis {axis:?}; expected one of {SWEEP_AXES:?}"),
        )
        .into());
    }
    let start = Instant::now();
    let points = sweep(template, axis, values)?;
    let wall = start.elapsed().as_secs_f64();
    let mut manifests = vec![];
    let mut names = vec![];
    for (i, p) in points.iter().enumerate() {
        let name = format!("point_{i:03}");
        let mut dir = OutputDir::new(out.join(&name))?;
        let echo = serde_json::to_value(&p.config)?;
        manifests.push(write_scenario(&mut dir, &p.output, echo, format, wall / points.len() as f64)?);
        names.push(name);
    }
    let mut root = OutputDir::new(out)?;
    root.write_table(&merge_sweep(axis, &points), format)?;
    let merged = root.files()[0].clone();
    let m = SweepManifest {
        axis: axis.into(),
        values: values.to_vec(),
        version: VERSION,
        template: echo,
        wall_time_s: wall,
        deterministic: true,
        points: names,
        merged,
    };
    output::write_atomic(&out.join("manifest.json"), &to_json_bytes(&m)?)?;
    if let Some(bad) = manifests.iter().position(|m| !m.invariants_passed) {
        return Err(CliError::Invariants(format!("sweep point {bad}")));
    }
    Ok(manifests)
}

pub fn run(cli: Cli) -> Result<()> {
    let threads = cli.threads;
    match cli.command {
        Command::Simulate { scenario_id, config, out, format } => {
            let id = ScenarioId::parse(&scenario_id)?;
            let (cfg, echo) = match config {
                Some(path) => load_config(&path, Some(id.as_str()))?,
                None => {
                    let c = ScenarioConfig::new(id);
                    let v = serde_json::to_value(&c)?;
                    (c, v)
                }
            };
            let out = resolve_out_dir(out, cfg.out_dir.as_deref());
            let format = format.map(Into::into).or(cfg.format).unwrap_or(OutputFormat::Csv);
            let m = with_threads(threads, || simulate(&cfg, echo, &out, format))??;
            log::info!("wrote {} files to {} in {:.1} s", m.files.len(), out.display(), m.wall_time_s);
            println!("{}", out.join("manifest.json").display());
        }
        Command::Suite { out } => {
            let out = resolve_out_dir(out, None);
            let report = with_threads(threads, run_invariant_suite)??;
            let mut dir = OutputDir::new(&out)?;
            dir.write("suite_report.json", &to_json_bytes(&report)?)?;
            println!(
                "{}: {} checks, {}",
                out.join("suite_report.json").display(),
                report.checks.len(),
                if report.passed { "all passed" } else { "FAILED" }
            );
            if !report.passed {
                return Err(CliError::Invariants(report.failures.join(", ")));
            }
        }
        Command::Sweep { config, axis, values, out, format } => {
            let (cfg, echo) = load_config(&config, None)?;
            let values = parse_values(&values)?;
            let out = resolve_out_dir(out, cfg.out_dir.as_deref());
            let format = format.map(Into::into).or(cfg.format).unwrap_or(OutputFormat::Csv);
            let ms = with_threads(threads, || run_sweep(&cfg, echo, &axis, &values, &out, format))??;
            println!("{}: {} points", out.join("manifest.json").display(), ms.len());
        }
    }
    Ok(())
}
