//! Command-line front end: load a scenario, run one or both protocols, write CSVs.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::Parser;
use thiserror::Error;

use crate::config::{validate_config, ConfigError, SimConfig};
use crate::metrics::{export_csv, fmt_opt, write_rows, ExportError, RunSummary};
use crate::sim::{simulate, ProtocolKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProtocolChoice {
    Mleach,
    Dsdv,
    Both,
}

impl ProtocolChoice {
    pub fn kinds(self) -> Vec<ProtocolKind> {
        match self {
            ProtocolChoice::Mleach => vec![ProtocolKind::Mleach],
            ProtocolChoice::Dsdv => vec![ProtocolKind::Dsdv],
            ProtocolChoice::Both => vec![ProtocolKind::Mleach, ProtocolKind::Dsdv],
        }
    }
}

impl FromStr for ProtocolChoice {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "both" => Ok(ProtocolChoice::Both),
            other => other.parse::<ProtocolKind>().map(|k| match k {
                ProtocolKind::Mleach => ProtocolChoice::Mleach,
                ProtocolKind::Dsdv => ProtocolChoice::Dsdv,
            }),
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "mleach-sim", version, about = "Simulate MLEACH and DSDV on a mobile sensor field")]
pub struct Args {
    /// Scenario file (`key = value` lines).
    #[arg(long, default_value = "table1.cfg")]
    pub config: PathBuf,
    /// mleach, dsdv or both.
    #[arg(long, default_value = "both")]
    pub protocol: ProtocolChoice,
    /// Output directory.
    #[arg(long, env = "MLEACH_SIM_OUT", default_value = "out")]
    pub out: PathBuf,
    /// Overrides `rng_seed` from the config.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Number of runs with consecutive seeds.
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u32).range(1..))]
    pub repeat: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunRequest {
    pub config_path: PathBuf,
    pub protocol: ProtocolChoice,
    pub output_dir: PathBuf,
    pub seed_override: Option<u64>,
    pub repeat: u32,
}

impl From<Args> for RunRequest {
    fn from(a: Args) -> Self {
        Self { config_path: a.config, protocol: a.protocol, output_dir: a.out, seed_override: a.seed, repeat: a.repeat }
    }
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Export(#[from] ExportError),
    #[error("repeat must be at least 1")]
    BadRepeat,
}

/// MLEACH relative to DSDV for one seed.
#[derive(Debug, Clone, PartialEq)]
pub struct Comparison {
    pub seed: u64,
    pub throughput_ratio: Option<f64>,
    pub energy_ratio: Option<f64>,
    pub first_death_mleach_s: Option<f64>,
    pub first_death_dsdv_s: Option<f64>,
}

impl Comparison {
    pub const HEADER: [&'static str; 5] =
        ["seed", "throughput_ratio", "max_energy_ratio", "first_death_mleach_s", "first_death_dsdv_s"];

    pub fn new(seed: u64, mleach: &RunSummary, dsdv: &RunSummary) -> Self {
        Self {
            seed,
            throughput_ratio: ratio(mleach.steady_throughput_pps, dsdv.steady_throughput_pps),
            energy_ratio: ratio(mleach.max_energy_per_node_j, dsdv.max_energy_per_node_j),
            first_death_mleach_s: mleach.first_death_s,
            first_death_dsdv_s: dsdv.first_death_s,
        }
    }

    fn record(&self) -> Vec<String> {
        vec![
            self.seed.to_string(),
            fmt_opt(self.throughput_ratio),
            fmt_opt(self.energy_ratio),
            fmt_opt(self.first_death_mleach_s),
            fmt_opt(self.first_death_dsdv_s),
        ]
    }
}

/// `a / b`, or `None` when `b` is zero.
fn ratio(a: f64, b: f64) -> Option<f64> {
    (b != 0.0).then(|| a / b)
}

/// Results of one seed.
#[derive(Debug, Clone, PartialEq)]
pub struct SeedRun {
    pub seed: u64,
    pub dir: PathBuf,
    pub summaries: Vec<RunSummary>,
    pub comparison: Option<Comparison>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunReport {
    pub runs: Vec<SeedRun>,
}

pub fn load_config(path: &Path, seed_override: Option<u64>) -> Result<SimConfig, ConfigError> {
    let mut cfg = SimConfig::from_file(path)?;
    if let Some(seed) = seed_override {
        cfg.rng_seed = seed;
    }
    validate_config(cfg)
}

fn run_seed(raw: &SimConfig, choice: ProtocolChoice, dir: &Path) -> Result<SeedRun, CliError> {
    let cfg = validate_config(raw.clone())?;
    let mut summaries = Vec::new();
    for kind in choice.kinds() {
        let (log, _) = simulate(&cfg, kind);
        summaries.push(export_csv(&log, kind.name(), &dir.join(kind.name()))?);
    }
    let comparison = match summaries.as_slice() {
        [m, d] => {
            let c = Comparison::new(cfg.rng_seed, m, d);
            write_rows(&dir.join("comparison.csv"), &Comparison::HEADER, std::iter::once(c.record()))?;
            Some(c)
        }
        _ => None,
    };
    Ok(SeedRun { seed: cfg.rng_seed, dir: dir.to_path_buf(), summaries, comparison })
}

/// Runs the request. With `repeat > 1` the seeds `seed, seed+1, ...` run in
/// parallel, each in its own `seed-<n>` directory, and `batch_summary.csv`
/// gets the mean and standard deviation of every headline number.
pub fn run(req: &RunRequest) -> Result<RunReport, CliError> {
    if req.repeat == 0 {
        return Err(CliError::BadRepeat);
    }
    let mut raw = SimConfig::from_file(&req.config_path)?;
    if let Some(seed) = req.seed_override {
        raw.rng_seed = seed;
    }
    // Reject a bad config before any thread starts.
    validate_config(raw.clone())?;

    if req.repeat == 1 {
        let run = run_seed(&raw, req.protocol, &req.output_dir)?;
        return Ok(RunReport { runs: vec![run] });
    }

    let base = raw.rng_seed;
    let results: Vec<Result<SeedRun, CliError>> = std::thread::scope(|s| {
        let handles: Vec<_> = (0..req.repeat as u64)
            .map(|k| {
                let mut cfg = raw.clone();
                cfg.rng_seed = base.wrapping_add(k);
                let dir = req.output_dir.join(format!("seed-{}", cfg.rng_seed));
                s.spawn(move || run_seed(&cfg, req.protocol, &dir))
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("simulation thread panicked")).collect()
    });
    let runs = results.into_iter().collect::<Result<Vec<_>, _>>()?;
    write_batch_summary(&req.output_dir.join("batch_summary.csv"), &runs)?;
    Ok(RunReport { runs })
}

fn mean_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = if xs.len() > 1 { xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0) } else { 0.0 };
    (mean, var.sqrt())
}

fn write_batch_summary(path: &Path, runs: &[SeedRun]) -> Result<(), ExportError> {
    type Metric = (&'static str, fn(&RunSummary) -> f64);
    const METRICS: [Metric; 5] = [
        ("avg_energy_per_node_j", |s| s.avg_energy_per_node_j),
        ("max_energy_per_node_j", |s| s.max_energy_per_node_j),
        ("steady_throughput_pps", |s| s.steady_throughput_pps),
        ("packets_at_bs", |s| s.packets_at_bs as f64),
        ("drops", |s| (s.dropped_filtered + s.dropped_unreachable + s.dropped_dead) as f64),
    ];
    let mut rows = Vec::new();
    for (i, first) in runs[0].summaries.iter().enumerate() {
        for (name, get) in METRICS {
            let xs: Vec<f64> = runs.iter().map(|r| get(&r.summaries[i])).collect();
            let (mean, std) = mean_std(&xs);
            rows.push([first.protocol.clone(), name.to_string(), xs.len().to_string(), mean.to_string(), std.to_string()]);
        }
    }
    write_rows(path, &["protocol", "metric", "runs", "mean", "stddev"], rows)
}

/// One-screen table of the headline numbers, plus ratios when both protocols ran.
pub fn print_summary(report: &RunReport) -> String {
    let mut out = String::new();
    for run in &report.runs {
        let _ = writeln!(out, "seed {} -> {}", run.seed, run.dir.display());
        let _ = writeln!(
            out,
            "  {:<8} {:>14} {:>14} {:>12} {:>10} {:>10} {:>12} {:>10}",
            "protocol", "avg J/node", "max J/node", "thru (pps)", "at BS", "filtered", "unreachable", "dead"
        );
        for s in &run.summaries {
            let _ = writeln!(
                out,
                "  {:<8} {:>14.6} {:>14.6} {:>12.2} {:>10} {:>10} {:>12} {:>10}",
                s.protocol,
                s.avg_energy_per_node_j,
                s.max_energy_per_node_j,
                s.steady_throughput_pps,
                s.packets_at_bs,
                s.dropped_filtered,
                s.dropped_unreachable,
                s.dropped_dead
            );
        }
        if let Some(c) = &run.comparison {
            let show = |v: Option<f64>| v.map_or_else(|| "n/a".to_string(), |v| format!("{v:.3}"));
            let _ = writeln!(
                out,
                "  mleach/dsdv: throughput {}, max energy {}",
                show(c.throughput_ratio),
                show(c.energy_ratio)
            );
        }
    }
    out
}
