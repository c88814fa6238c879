//! Drivers behind the `junk-bubbles` binary.
//!
//! Each subcommand resolves its configuration (JSON config file first, then
//! flags on top), computes every output in memory and only then writes the
//! files, so a failed command leaves no partial outputs behind. Every output
//! directory also receives a `manifest.json` with the resolved configuration.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::arena::run;
use crate::empirical::{self, ChannelDataset, EmpiricalError};
use crate::metrics::{summarize, MetricsError};
use crate::params::{default_burn_in_for, ModelParams, ParamError};
use crate::sweep::{self, SeedSpec, SweepError, SweepGrid};
use crate::trace_io;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Param(#[from] ParamError),
    #[error("config {path}: {message}")]
    Config { path: PathBuf, message: String },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{0} already exists (pass --overwrite to replace it)")]
    Exists(PathBuf),
    #[error("mode mismatch: config file is for `{found}`, command is `{expected}`")]
    ModeMismatch {
        expected: &'static str,
        found: &'static str,
    },
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error(transparent)]
    Sweep(#[from] SweepError),
    #[error(transparent)]
    Empirical(#[from] EmpiricalError),
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "junk-bubbles",
    version,
    about = "Trend-boosted attention dynamics: simulate, sweep, analyze"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one simulation and write its trace, events and metrics summary.
    Simulate(SimulateArgs),
    /// Run a parameter grid over seeds and write the aggregate table.
    Sweep(SweepArgs),
    /// Analyze an hourly view-count CSV per channel.
    Empirical(EmpiricalArgs),
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// JSON run configuration; flags override its values.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, short)]
    pub out: Option<PathBuf>,
    /// Replace existing output files.
    #[arg(long)]
    pub overwrite: bool,
}

#[derive(Debug, Clone, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub common: Common,
    /// Trendiness boost [default: 1]
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Number of competing items [default: 20]
    #[arg(long)]
    pub n: Option<usize>,
    /// Noise-size parameter; larger means quieter [default: 12]
    #[arg(long)]
    pub c: Option<f64>,
    /// Trace rows, initialization included [default: 10000]
    #[arg(long)]
    pub iterations: Option<usize>,
    /// RNG seed [default: 0]
    #[arg(long)]
    pub seed: Option<u64>,
    /// Rows excluded from metrics [default: 100, clipped to iterations - 2]
    #[arg(long)]
    pub burn_in: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum GridPreset {
    /// 13 boosts in 0..=3, n in {10, 20, 50}, c = 12, 10 000 iterations, 20 seeds.
    Default,
    /// Boosts {0, 1, 2, 3} at n = 20, c = 12.
    Regimes,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub common: Common,
    /// Grid JSON document (alphas, ns, cs, iterations, burn_in, seeds).
    #[arg(long, conflicts_with = "preset")]
    pub grid: Option<PathBuf>,
    /// Built-in grid; takes precedence over a config grid. Without --grid, --preset or a config grid the default preset is used
    #[arg(long, value_enum)]
    pub preset: Option<GridPreset>,
    /// Override the grid's iterations per run.
    #[arg(long)]
    pub iterations: Option<usize>,
    /// Override the grid's burn-in.
    #[arg(long)]
    pub burn_in: Option<usize>,
    /// Use seeds 0..COUNT.
    #[arg(long)]
    pub seeds: Option<usize>,
    /// Also write the first MAX_T iterations of each cell's first-seed run.
    #[arg(long, value_name = "MAX_T")]
    pub emit_stackplots: Option<usize>,
}

#[derive(Debug, Clone, Args)]
pub struct EmpiricalArgs {
    #[command(flatten)]
    pub common: Common,
    /// Input CSV: channel_id,video_id,published_at,t_hour,views
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Skip channels with fewer videos than this.
    #[arg(long)]
    pub min_videos: Option<usize>,
}

/// Resolved configuration of one command; also the JSON config-file format.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    #[serde(flatten)]
    pub mode: ModeConfig,
    pub output_dir: PathBuf,
    /// Not recorded in manifests: it does not affect the outputs.
    #[serde(default, skip_serializing)]
    pub overwrite: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "lowercase")]
pub enum ModeConfig {
    Simulate {
        params: ModelParams,
    },
    Sweep {
        grid: SweepGrid,
        #[serde(default)]
        emit_stackplots: Option<usize>,
    },
    Empirical {
        input: PathBuf,
        #[serde(default = "default_min_videos")]
        min_videos: usize,
    },
}

fn default_min_videos() -> usize {
    1
}

impl ModeConfig {
    pub fn name(&self) -> &'static str {
        match self {
            ModeConfig::Simulate { .. } => "simulate",
            ModeConfig::Sweep { .. } => "sweep",
            ModeConfig::Empirical { .. } => "empirical",
        }
    }
}

/// Partially specified config file: any block may be incomplete, flags fill the rest.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    mode: Option<String>,
    params: Option<serde_json::Value>,
    grid: Option<serde_json::Value>,
    emit_stackplots: Option<usize>,
    input: Option<PathBuf>,
    min_videos: Option<usize>,
    output_dir: Option<PathBuf>,
    #[serde(default)]
    overwrite: bool,
}

fn read_config(path: &Path, expected: &'static str) -> Result<ConfigFile, CliError> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    let cfg: ConfigFile = serde_json::from_str(&text).map_err(|e| CliError::Config {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    if let Some(mode) = &cfg.mode {
        if mode != expected {
            let found = match mode.as_str() {
                "simulate" => "simulate",
                "sweep" => "sweep",
                "empirical" => "empirical",
                _ => {
                    return Err(CliError::Config {
                        path: path.to_path_buf(),
                        message: format!("field `mode`: unknown mode {mode:?}"),
                    })
                }
            };
            return Err(CliError::ModeMismatch { expected, found });
        }
    }
    Ok(cfg)
}

fn json_field<T: serde::de::DeserializeOwned>(
    block: &Option<serde_json::Value>,
    key: &str,
    path: &Option<PathBuf>,
) -> Result<Option<T>, CliError> {
    let Some(v) = block.as_ref().and_then(|b| b.get(key)) else {
        return Ok(None);
    };
    serde_json::from_value(v.clone())
        .map(Some)
        .map_err(|e| CliError::Config {
            path: path.clone().unwrap_or_default(),
            message: format!("field `{key}`: {e}"),
        })
}

fn load_config(common: &Common, mode: &'static str) -> Result<ConfigFile, CliError> {
    match &common.config {
        Some(p) => read_config(p, mode),
        None => Ok(ConfigFile::default()),
    }
}

fn output_dir(common: &Common, file: &ConfigFile) -> PathBuf {
    common
        .out
        .clone()
        .or_else(|| file.output_dir.clone())
        .unwrap_or_else(|| PathBuf::from("out"))
}

impl SimulateArgs {
    pub fn resolve(&self) -> Result<RunConfig, CliError> {
        let file = load_config(&self.common, "simulate")?;
        let cp = &self.common.config;
        let iterations = self
            .iterations
            .or(json_field(&file.params, "iterations", cp)?)
            .unwrap_or(10_000);
        let burn_in = self
            .burn_in
            .or(json_field(&file.params, "burn_in", cp)?)
            .unwrap_or_else(|| default_burn_in_for(iterations));
        let params = ModelParams::with_burn_in(
            self.alpha.or(json_field(&file.params, "alpha", cp)?).unwrap_or(1.0),
            self.n.or(json_field(&file.params, "n", cp)?).unwrap_or(20),
            self.c.or(json_field(&file.params, "c", cp)?).unwrap_or(12.0),
            iterations,
            self.seed.or(json_field(&file.params, "seed", cp)?).unwrap_or(0),
            burn_in,
        )?;
        Ok(RunConfig {
            mode: ModeConfig::Simulate { params },
            output_dir: output_dir(&self.common, &file),
            overwrite: self.common.overwrite || file.overwrite,
        })
    }
}

impl SweepArgs {
    pub fn resolve(&self) -> Result<RunConfig, CliError> {
        let file = load_config(&self.common, "sweep")?;
        let mut grid = if let Some(path) = &self.grid {
            let text = fs::read_to_string(path).map_err(io_err(path))?;
            SweepGrid::from_json(&text).map_err(|message| CliError::Config {
                path: path.clone(),
                message,
            })?
        } else if let Some(preset) = self.preset {
            match preset {
                GridPreset::Default => SweepGrid::default(),
                GridPreset::Regimes => SweepGrid::four_regimes(),
            }
        } else if let Some(block) = &file.grid {
            SweepGrid::from_json(&block.to_string()).map_err(|message| CliError::Config {
                path: self.common.config.clone().unwrap_or_default(),
                message,
            })?
        } else {
            SweepGrid::default()
        };
        if let Some(it) = self.iterations {
            grid.iterations = it;
        }
        if let Some(b) = self.burn_in {
            grid.burn_in = b;
        }
        if let Some(count) = self.seeds {
            grid.seeds = SeedSpec::Range { base: 0, count };
        }
        grid.validate()?;
        let emit_stackplots = self.emit_stackplots.or(file.emit_stackplots);
        if let Some(max_t) = emit_stackplots {
            if max_t == 0 || max_t > grid.iterations {
                return Err(ParamError::new(
                    "emit_stackplots",
                    format!("must be in 1..={}, got {max_t}", grid.iterations),
                )
                .into());
            }
        }
        Ok(RunConfig {
            mode: ModeConfig::Sweep { grid, emit_stackplots },
            output_dir: output_dir(&self.common, &file),
            overwrite: self.common.overwrite || file.overwrite,
        })
    }
}

impl EmpiricalArgs {
    pub fn resolve(&self) -> Result<RunConfig, CliError> {
        let file = load_config(&self.common, "empirical")?;
        let input = self
            .input
            .clone()
            .or(file.input.clone())
            .ok_or_else(|| ParamError::new("input", "an input CSV is required"))?;
        Ok(RunConfig {
            mode: ModeConfig::Empirical {
                input,
                min_videos: self.min_videos.or(file.min_videos).unwrap_or(1),
            },
            output_dir: output_dir(&self.common, &file),
            overwrite: self.common.overwrite || file.overwrite,
        })
    }
}

/// Named file contents destined for the output directory.
pub type Outputs = Vec<(String, Vec<u8>)>;

#[derive(Serialize)]
struct Manifest<'a> {
    tool: &'static str,
    version: &'static str,
    config: &'a RunConfig,
    seeds: Vec<u64>,
    files: Vec<&'a str>,
}

fn manifest(config: &RunConfig, outputs: &Outputs) -> Vec<u8> {
    let seeds = match &config.mode {
        ModeConfig::Simulate { params } => vec![params.seed],
        ModeConfig::Sweep { grid, .. } => grid.seeds.resolve(),
        ModeConfig::Empirical { .. } => Vec::new(),
    };
    let m = Manifest {
        tool: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        config,
        seeds,
        files: outputs.iter().map(|(name, _)| name.as_str()).collect(),
    };
    let mut bytes = serde_json::to_vec_pretty(&m).expect("manifest serialization cannot fail");
    bytes.push(b'\n');
    bytes
}

/// Writes all outputs plus the manifest. Existing targets are an error
/// unless `overwrite` is set; each file is written to a temporary name and
/// renamed into place.
pub fn write_outputs(config: &RunConfig, mut outputs: Outputs) -> Result<Vec<PathBuf>, CliError> {
    let dir = &config.output_dir;
    let manifest = manifest(config, &outputs);
    outputs.push(("manifest.json".to_string(), manifest));
    if !config.overwrite {
        for (name, _) in &outputs {
            let target = dir.join(name);
            if target.exists() {
                return Err(CliError::Exists(target));
            }
        }
    }
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let mut written = Vec::with_capacity(outputs.len());
    for (name, bytes) in &outputs {
        let target = dir.join(name);
        let tmp = dir.join(format!(".{name}.tmp"));
        fs::write(&tmp, bytes).map_err(io_err(&tmp))?;
        fs::rename(&tmp, &target).map_err(io_err(&target))?;
        written.push(target);
    }
    Ok(written)
}

/// Trace, events and summary of one run.
pub fn simulate_outputs(params: &ModelParams) -> Result<Outputs, CliError> {
    let trace = run(params);
    let summary = summarize(&trace)?;
    let mut json = summary.to_json(params).into_bytes();
    json.push(b'\n');
    Ok(vec![
        ("trace.csv".into(), trace_io::trace_csv_bytes(&trace)),
        ("events.csv".into(), trace_io::events_csv_bytes(&trace)),
        ("summary.json".into(), json),
    ])
}

pub fn stackplot_file_name(params: &ModelParams) -> String {
    format!(
        "stackplot_n{}_c{}_alpha{}_seed{}.csv",
        params.n, params.c, params.alpha, params.seed
    )
}

pub fn sweep_outputs(grid: &SweepGrid, emit_stackplots: Option<usize>) -> Result<Outputs, CliError> {
    let rows = sweep::run_sweep(grid)?;
    let mut aggregate = Vec::new();
    sweep::write_aggregate_csv(&rows, &mut aggregate).expect("writing to a Vec cannot fail");
    let mut outputs = vec![("aggregate.csv".to_string(), aggregate)];
    if let Some(max_t) = emit_stackplots {
        let first_seed = grid.seeds.resolve()[0];
        for cell in grid.cells() {
            let params = cell.params(grid.iterations, grid.burn_in, first_seed)?;
            let rows = sweep::emit_stackplot(&run(&params), max_t)?;
            let mut buf = Vec::new();
            sweep::write_stackplot_csv(&rows, &mut buf).expect("writing to a Vec cannot fail");
            outputs.push((stackplot_file_name(&params), buf));
        }
    }
    Ok(outputs)
}

pub fn empirical_outputs(channels: &[ChannelDataset], min_videos: usize) -> Result<Outputs, CliError> {
    let mut videos = Vec::new();
    let mut summaries = Vec::new();
    let mut profiles = Vec::new();
    for ch in channels {
        if ch.videos.len() < min_videos {
            log::info!(
                "skipping channel `{}`: {} videos < --min-videos {min_videos}",
                ch.channel_id,
                ch.videos.len()
            );
            continue;
        }
        let metrics = empirical::channel_video_metrics(ch);
        summaries.push(empirical::summarize_video_metrics(ch, &metrics));
        videos.extend(metrics);
        match empirical::average_temporal_profile(ch) {
            Ok(p) => profiles.push(p),
            Err(EmpiricalError::EmptyChannel(id)) => {
                log::info!("no profile for channel `{id}`: no video has first-week views")
            }
            Err(e) => return Err(e.into()),
        }
    }
    let mut v = Vec::new();
    empirical::write_video_metrics_csv(&videos, &mut v)?;
    let mut c = Vec::new();
    empirical::write_channel_summary_csv(&summaries, &mut c)?;
    let mut p = Vec::new();
    empirical::write_profiles_csv(&profiles, &mut p)?;
    Ok(vec![
        ("videos.csv".into(), v),
        ("channels.csv".into(), c),
        ("profiles.csv".into(), p),
    ])
}

/// Computes and writes every output of a resolved configuration.
pub fn execute_config(config: &RunConfig) -> Result<Vec<PathBuf>, CliError> {
    let outputs = match &config.mode {
        ModeConfig::Simulate { params } => simulate_outputs(params)?,
        ModeConfig::Sweep { grid, emit_stackplots } => sweep_outputs(grid, *emit_stackplots)?,
        ModeConfig::Empirical { input, min_videos } => {
            let file = fs::File::open(input).map_err(io_err(input))?;
            let channels = empirical::load_dataset(std::io::BufReader::new(file))?;
            empirical_outputs(&channels, *min_videos)?
        }
    };
    write_outputs(config, outputs)
}

pub fn cmd_simulate(args: &SimulateArgs) -> Result<Vec<PathBuf>, CliError> {
    execute_config(&args.resolve()?)
}

pub fn cmd_sweep(args: &SweepArgs) -> Result<Vec<PathBuf>, CliError> {
    execute_config(&args.resolve()?)
}

pub fn cmd_empirical(args: &EmpiricalArgs) -> Result<Vec<PathBuf>, CliError> {
    execute_config(&args.resolve()?)
}

pub fn execute(cli: &Cli) -> Result<Vec<PathBuf>, CliError> {
    match &cli.command {
        Command::Simulate(a) => cmd_simulate(a),
        Command::Sweep(a) => cmd_sweep(a),
        Command::Empirical(a) => cmd_empirical(a),
    }
}
