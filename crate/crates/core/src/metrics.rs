//! Measurement: energy and throughput series, drop counters, CSV export.

use std::fs;
use std::path::Path;

use thiserror::Error;

use crate::engine::SimTime;
use crate::model::{Packet, PacketKind};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergySample {
    pub t_s: f64,
    pub total_j: f64,
    /// Largest per-node consumption at this instant.
    pub max_node_j: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RoundSample {
    pub round: u64,
    pub t_s: f64,
    pub alive: usize,
    pub cluster_heads: usize,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct MetricsLog {
    pub node_count: usize,
    pub energy_series: Vec<EnergySample>,
    /// Packets received by the base station per one-second bucket `[t, t+1)`.
    pub bs_rx: Vec<u64>,
    pub rounds: Vec<RoundSample>,
    pub packets_at_bs: u64,
    pub dropped_filtered: u64,
    pub dropped_unreachable: u64,
    pub dropped_dead: u64,
    /// Data packets put on the air (one per reading, at send time).
    pub data_packets_generated: u64,
    /// Readings produced by the traffic generators. Protocol independent.
    pub readings_generated: u64,
    pub first_death_s: Option<f64>,
}

#[derive(Debug, Error, PartialEq)]
pub enum MetricsError {
    #[error("throughput window starting at {t_start}s is empty (log covers {len}s)")]
    EmptyWindow { t_start: f64, len: usize },
}

impl MetricsLog {
    pub fn new(node_count: usize) -> Self {
        Self { node_count, ..Default::default() }
    }

    /// Makes sure buckets exist for every second before `t_s`.
    pub fn extend_buckets(&mut self, seconds: usize) {
        if self.bs_rx.len() < seconds {
            self.bs_rx.resize(seconds, 0);
        }
    }

    pub fn record_bs_rx(&mut self, at: SimTime, packet: &Packet) {
        debug_assert_eq!(packet.kind, PacketKind::Data);
        let bucket = at.second_bucket();
        self.extend_buckets(bucket + 1);
        self.bs_rx[bucket] += 1;
        self.packets_at_bs += 1;
    }

    pub fn record_death(&mut self, at: SimTime) {
        if self.first_death_s.is_none() {
            self.first_death_s = Some(at.as_secs_f64());
        }
    }

    pub fn drops(&self) -> u64 {
        self.dropped_filtered + self.dropped_unreachable + self.dropped_dead
    }

    pub fn final_total_j(&self) -> f64 {
        self.energy_series.last().map_or(0.0, |s| s.total_j)
    }

    pub fn final_max_node_j(&self) -> f64 {
        self.energy_series.last().map_or(0.0, |s| s.max_node_j)
    }

    pub fn avg_energy_per_node_j(&self) -> f64 {
        if self.node_count == 0 {
            0.0
        } else {
            self.final_total_j() / self.node_count as f64
        }
    }
}

/// Mean of the throughput buckets over `[t_start, end)`.
pub fn steady_state_throughput(log: &MetricsLog, t_start: f64) -> Result<f64, MetricsError> {
    let first = t_start.max(0.0).ceil() as usize;
    let window = log.bs_rx.get(first..).unwrap_or(&[]);
    if window.is_empty() {
        return Err(MetricsError::EmptyWindow { t_start, len: log.bs_rx.len() });
    }
    Ok(window.iter().sum::<u64>() as f64 / window.len() as f64)
}

/// Least-squares fit `y = a + b t`; returns `(a, b, r_squared)`.
pub fn linear_fit(points: &[(f64, f64)]) -> (f64, f64, f64) {
    let n = points.len() as f64;
    if points.len() < 2 {
        return (points.first().map_or(0.0, |p| p.1), 0.0, 1.0);
    }
    let mean_t = points.iter().map(|p| p.0).sum::<f64>() / n;
    let mean_y = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mean_t).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mean_t) * (p.1 - mean_y)).sum();
    let syy: f64 = points.iter().map(|p| (p.1 - mean_y).powi(2)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let intercept = mean_y - slope * mean_t;
    let ss_res: f64 = points.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).sum();
    let r2 = if syy > 0.0 { 1.0 - ss_res / syy } else { 1.0 };
    (intercept, slope, r2)
}

/// R² of total energy against time over samples with `t_from <= t <= t_to`.
pub fn energy_linearity(log: &MetricsLog, t_from: f64, t_to: f64) -> f64 {
    let pts: Vec<(f64, f64)> = log
        .energy_series
        .iter()
        .filter(|s| s.t_s >= t_from && s.t_s <= t_to)
        .map(|s| (s.t_s, s.total_j))
        .collect();
    linear_fit(&pts).2
}

/// Headline numbers of one run, as written to `summary.csv`.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub protocol: String,
    pub node_count: usize,
    pub avg_energy_per_node_j: f64,
    pub max_energy_per_node_j: f64,
    pub steady_throughput_pps: f64,
    pub first_death_s: Option<f64>,
    pub packets_at_bs: u64,
    pub dropped_filtered: u64,
    pub dropped_unreachable: u64,
    pub dropped_dead: u64,
    pub data_packets_generated: u64,
    pub readings_generated: u64,
}

/// Default start of the steady-state window, in seconds.
pub const STEADY_STATE_START_S: f64 = 20.0;

impl RunSummary {
    pub fn from_log(protocol: &str, log: &MetricsLog, steady_from_s: f64) -> Self {
        Self {
            protocol: protocol.to_string(),
            node_count: log.node_count,
            avg_energy_per_node_j: log.avg_energy_per_node_j(),
            max_energy_per_node_j: log.final_max_node_j(),
            steady_throughput_pps: steady_state_throughput(log, steady_from_s).unwrap_or(0.0),
            first_death_s: log.first_death_s,
            packets_at_bs: log.packets_at_bs,
            dropped_filtered: log.dropped_filtered,
            dropped_unreachable: log.dropped_unreachable,
            dropped_dead: log.dropped_dead,
            data_packets_generated: log.data_packets_generated,
            readings_generated: log.readings_generated,
        }
    }

    pub const HEADER: [&'static str; 12] = [
        "protocol",
        "node_count",
        "avg_energy_per_node_j",
        "max_energy_per_node_j",
        "steady_throughput_pps",
        "first_death_s",
        "packets_at_bs",
        "dropped_filtered",
        "dropped_unreachable",
        "dropped_dead",
        "data_packets_generated",
        "readings_generated",
    ];

    pub fn record(&self) -> Vec<String> {
        vec![
            self.protocol.clone(),
            self.node_count.to_string(),
            self.avg_energy_per_node_j.to_string(),
            self.max_energy_per_node_j.to_string(),
            self.steady_throughput_pps.to_string(),
            fmt_opt(self.first_death_s),
            self.packets_at_bs.to_string(),
            self.dropped_filtered.to_string(),
            self.dropped_unreachable.to_string(),
            self.dropped_dead.to_string(),
            self.data_packets_generated.to_string(),
            self.readings_generated.to_string(),
        ]
    }
}

pub(crate) fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "none".to_string(), |v| v.to_string())
}

#[derive(Debug, Error)]
pub enum ExportError {
    #[error("cannot write to {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("cannot write to {path}: {source}")]
    Csv {
        path: String,
        #[source]
        source: csv::Error,
    },
}

pub(crate) fn write_rows<I, R>(path: &Path, header: &[&str], rows: I) -> Result<(), ExportError>
where
    I: IntoIterator<Item = R>,
    R: IntoIterator,
    R::Item: AsRef<[u8]>,
{
    let csv_err = |source| ExportError::Csv { path: path.display().to_string(), source };
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_path(path).map_err(csv_err)?;
    w.write_record(header).map_err(csv_err)?;
    for row in rows {
        w.write_record(row).map_err(csv_err)?;
    }
    w.flush().map_err(|source| ExportError::Io { path: path.display().to_string(), source })
}

/// Writes `energy.csv`, `throughput.csv`, `rounds.csv` and `summary.csv` into `dir`.
pub fn export_csv(log: &MetricsLog, protocol: &str, dir: &Path) -> Result<RunSummary, ExportError> {
    fs::create_dir_all(dir).map_err(|source| ExportError::Io { path: dir.display().to_string(), source })?;

    write_rows(
        &dir.join("energy.csv"),
        &["t_s", "total_j", "max_node_j"],
        log.energy_series.iter().map(|s| [s.t_s.to_string(), s.total_j.to_string(), s.max_node_j.to_string()]),
    )?;
    write_rows(
        &dir.join("throughput.csv"),
        &["t_s", "packets"],
        log.bs_rx.iter().enumerate().map(|(t, n)| [t.to_string(), n.to_string()]),
    )?;
    write_rows(
        &dir.join("rounds.csv"),
        &["round", "t_s", "alive", "cluster_heads"],
        log.rounds.iter().map(|r| [r.round.to_string(), r.t_s.to_string(), r.alive.to_string(), r.cluster_heads.to_string()]),
    )?;

    let summary = RunSummary::from_log(protocol, log, STEADY_STATE_START_S);
    write_rows(&dir.join("summary.csv"), &RunSummary::HEADER, std::iter::once(summary.record()))?;
    Ok(summary)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Address, NodeId};

    fn pkt() -> Packet {
        Packet::data(NodeId(0), Address::BaseStation, 8, 1.0, 0.0)
    }

    #[test]
    fn bs_rx_buckets() {
        let mut log = MetricsLog::new(1);
        log.record_bs_rx(SimTime::from_secs_f64(4.2), &pkt());
        log.record_bs_rx(SimTime::from_secs_f64(4.9), &pkt());
        log.record_bs_rx(SimTime::from_secs_f64(5.0), &pkt());
        assert_eq!(log.bs_rx[4], 2);
        assert_eq!(log.bs_rx[5], 1);
        assert_eq!(log.bs_rx.iter().sum::<u64>(), log.packets_at_bs);
    }

    #[test]
    fn no_deliveries_means_zero_buckets() {
        let mut log = MetricsLog::new(1);
        log.extend_buckets(10);
        assert!(log.bs_rx.iter().all(|&b| b == 0));
        assert_eq!(steady_state_throughput(&log, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn steady_state_mean() {
        let log = MetricsLog { bs_rx: vec![0, 0, 10, 10], ..Default::default() };
        assert_eq!(steady_state_throughput(&log, 2.0).unwrap(), 10.0);
        assert!(matches!(steady_state_throughput(&log, 4.0), Err(MetricsError::EmptyWindow { .. })));
    }

    #[test]
    fn fit_of_a_line_is_perfect() {
        let pts: Vec<(f64, f64)> = (0..10).map(|t| (t as f64, 3.0 + 2.0 * t as f64)).collect();
        let (a, b, r2) = linear_fit(&pts);
        assert!((a - 3.0).abs() < 1e-12 && (b - 2.0).abs() < 1e-12 && (r2 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn empty_log_exports_headers_only() {
        let dir = tempfile::tempdir().unwrap();
        export_csv(&MetricsLog::new(0), "mleach", dir.path()).unwrap();
        assert_eq!(fs::read_to_string(dir.path().join("energy.csv")).unwrap(), "t_s,total_j,max_node_j\n");
        assert_eq!(fs::read_to_string(dir.path().join("throughput.csv")).unwrap(), "t_s,packets\n");
        let summary = fs::read_to_string(dir.path().join("summary.csv")).unwrap();
        assert_eq!(summary.lines().count(), 2);
    }

    #[test]
    fn unwritable_path_is_reported() {
        let dir = tempfile::tempdir().unwrap();
        let blocker = dir.path().join("file");
        fs::write(&blocker, "x").unwrap();
        let err = export_csv(&MetricsLog::new(0), "dsdv", &blocker.join("sub")).unwrap_err();
        assert!(err.to_string().contains("cannot write"));
    }
}
