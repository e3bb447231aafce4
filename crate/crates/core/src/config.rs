//! Scenario configuration, its flat `key = value` file format, and validation.
//!
//! Defaults reproduce the 512-node flood-field scenario. Quantities the
//! original scenario leaves open (round length, election fraction, radii,
//! mobility, traffic, control-packet sizes) carry documented defaults that
//! can be overridden from a config file.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use rand::Rng;
use thiserror::Error;

use crate::engine::{RngStreams, StreamId, MICROS_PER_SECOND};
use crate::model::Position;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BsPosition {
    /// Drawn uniformly inside the field from the `bs-placement` stream.
    Random,
    Fixed(Position),
}

/// Initial node placement.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Placement {
    Uniform,
    /// Gaussian blobs around uniformly drawn centers, clamped to the field.
    Clustered,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub field_width_m: f64,
    pub field_height_m: f64,
    pub node_count: usize,
    pub bs_position: BsPosition,
    pub placement: Placement,
    pub packet_size_bits: u64,
    pub initial_energy_j: f64,
    pub sim_duration_s: f64,
    pub round_duration_s: f64,
    pub p_ch_fraction: f64,
    pub cluster_radius_rc_m: f64,
    pub radio_range_rr_m: f64,
    pub e_elec_j_per_bit: f64,
    pub eps_amp_j_per_bit_m2: f64,
    pub filter_threshold: f64,
    pub ch_exclusion_rounds: u32,
    pub speed_min_mps: f64,
    pub speed_max_mps: f64,
    pub pause_s: f64,
    pub on_s: f64,
    pub off_s: f64,
    pub rate_pps: f64,
    pub hello_bits: u64,
    pub schedule_bits_per_cm: u64,
    pub heartbeat_bits: u64,
    pub dsdv_entry_bits: u64,
    pub dsdv_update_interval_s: f64,
    pub rng_seed: u64,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            field_width_m: 7500.0,
            field_height_m: 7500.0,
            node_count: 512,
            bs_position: BsPosition::Random,
            placement: Placement::Uniform,
            packet_size_bits: 512 * 8,
            initial_energy_j: 172_800.0,
            sim_duration_s: 120.0,
            round_duration_s: 2.0,
            p_ch_fraction: 0.05,
            cluster_radius_rc_m: 500.0,
            radio_range_rr_m: 1500.0,
            e_elec_j_per_bit: 50e-9,
            eps_amp_j_per_bit_m2: 120e-12,
            filter_threshold: 0.5,
            ch_exclusion_rounds: default_exclusion_rounds(0.05),
            speed_min_mps: 0.5,
            speed_max_mps: 2.0,
            pause_s: 5.0,
            on_s: 10.0,
            off_s: 10.0,
            rate_pps: 13.5,
            hello_bits: 256,
            schedule_bits_per_cm: 16,
            heartbeat_bits: 256,
            dsdv_entry_bits: 96,
            dsdv_update_interval_s: 1.0,
            rng_seed: 1,
        }
    }
}

/// Number of rounds in one election epoch, `ceil(1/p)`.
pub fn epoch_length(p: f64) -> u32 {
    let inv = 1.0 / p;
    let nearest = inv.round();
    if (inv - nearest).abs() < 1e-9 {
        nearest as u32
    } else {
        inv.ceil() as u32
    }
}

pub fn default_exclusion_rounds(p: f64) -> u32 {
    epoch_length(p).saturating_sub(1)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub field: &'static str,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.message)
    }
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("config not found: {0}")]
    NotFound(String),
    #[error("failed to read config {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("line {line}: unknown key `{key}`")]
    UnknownKey { line: usize, key: String },
    #[error("invalid config: {}", join_violations(.0))]
    Invalid(Vec<Violation>),
}

fn join_violations(v: &[Violation]) -> String {
    v.iter().map(|v| v.message.as_str()).collect::<Vec<_>>().join("; ")
}

impl ConfigError {
    /// Field names of every violated invariant, if this is a validation error.
    pub fn fields(&self) -> Vec<&'static str> {
        match self {
            ConfigError::Invalid(v) => v.iter().map(|v| v.field).collect(),
            _ => Vec::new(),
        }
    }
}

impl SimConfig {
    pub fn round_us(&self) -> u64 {
        seconds_to_micros(self.round_duration_s)
    }

    pub fn duration_us(&self) -> u64 {
        seconds_to_micros(self.sim_duration_s)
    }

    pub fn round_count(&self) -> u64 {
        self.duration_us() / self.round_us().max(1)
    }

    pub fn epoch_length(&self) -> u32 {
        epoch_length(self.p_ch_fraction)
    }

    pub fn field_contains(&self, p: Position) -> bool {
        p.x >= 0.0 && p.y >= 0.0 && p.x <= self.field_width_m && p.y <= self.field_height_m
    }

    /// Resolved base-station position. Panics on an unresolved config; call
    /// [`validate_config`] first.
    pub fn bs(&self) -> Position {
        match self.bs_position {
            BsPosition::Fixed(p) => p,
            BsPosition::Random => panic!("base station position not resolved; validate the config first"),
        }
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self, ConfigError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| {
            if e.kind() == std::io::ErrorKind::NotFound {
                ConfigError::NotFound(path.display().to_string())
            } else {
                ConfigError::Io { path: path.display().to_string(), source: e }
            }
        })?;
        text.parse()
    }

    /// Renders the config in the file format accepted by [`FromStr`].
    pub fn to_config_string(&self) -> String {
        self.to_string()
    }
}

pub(crate) fn seconds_to_micros(s: f64) -> u64 {
    (s * MICROS_PER_SECOND as f64).round() as u64
}

/// Checks every invariant and resolves a random base-station position.
pub fn validate_config(raw: SimConfig) -> Result<SimConfig, ConfigError> {
    let mut v = Vec::new();
    let mut bad = |field: &'static str, message: String| v.push(Violation { field, message });

    let positive: [(&'static str, f64); 11] = [
        ("field_width_m", raw.field_width_m),
        ("field_height_m", raw.field_height_m),
        ("initial_energy_j", raw.initial_energy_j),
        ("sim_duration_s", raw.sim_duration_s),
        ("round_duration_s", raw.round_duration_s),
        ("cluster_radius_rc_m", raw.cluster_radius_rc_m),
        ("radio_range_rr_m", raw.radio_range_rr_m),
        ("e_elec_j_per_bit", raw.e_elec_j_per_bit),
        ("eps_amp_j_per_bit_m2", raw.eps_amp_j_per_bit_m2),
        ("speed_min_mps", raw.speed_min_mps),
        ("dsdv_update_interval_s", raw.dsdv_update_interval_s),
    ];
    for (field, value) in positive {
        if !(value.is_finite() && value > 0.0) {
            bad(field, format!("{field} must be positive and finite"));
        }
    }
    let non_negative: [(&'static str, f64); 5] = [
        ("filter_threshold", raw.filter_threshold),
        ("pause_s", raw.pause_s),
        ("on_s", raw.on_s),
        ("off_s", raw.off_s),
        ("rate_pps", raw.rate_pps),
    ];
    for (field, value) in non_negative {
        if !(value.is_finite() && value >= 0.0) {
            bad(field, format!("{field} must be non-negative and finite"));
        }
    }
    if raw.on_s + raw.off_s <= 0.0 {
        bad("on_s", "on_s + off_s must be positive".into());
    }
    if raw.node_count == 0 {
        bad("node_count", "node_count must be positive".into());
    }
    let bits: [(&'static str, u64); 5] = [
        ("packet_size_bits", raw.packet_size_bits),
        ("hello_bits", raw.hello_bits),
        ("schedule_bits_per_cm", raw.schedule_bits_per_cm),
        ("heartbeat_bits", raw.heartbeat_bits),
        ("dsdv_entry_bits", raw.dsdv_entry_bits),
    ];
    for (field, value) in bits {
        if value == 0 {
            bad(field, format!("{field} must be positive"));
        }
    }
    if !(raw.p_ch_fraction > 0.0 && raw.p_ch_fraction < 1.0) {
        bad("p_ch_fraction", "p_ch_fraction must lie in (0,1)".into());
    }
    if raw.cluster_radius_rc_m > raw.radio_range_rr_m {
        bad("cluster_radius_rc_m", "Rc must not exceed Rr".into());
    }
    if !(raw.speed_max_mps.is_finite() && raw.speed_max_mps >= raw.speed_min_mps) {
        bad("speed_max_mps", "speed_max_mps must be finite and at least speed_min_mps".into());
    }
    let round_us = seconds_to_micros(raw.round_duration_s);
    let duration_us = seconds_to_micros(raw.sim_duration_s);
    if round_us > 0 && !duration_us.is_multiple_of(round_us) {
        bad("sim_duration_s", "sim_duration_s must be an integer multiple of round_duration_s".into());
    }
    if duration_us > 0 && !duration_us.is_multiple_of(MICROS_PER_SECOND) {
        bad("sim_duration_s", "sim_duration_s must be a whole number of seconds".into());
    }
    if let BsPosition::Fixed(p) = raw.bs_position {
        if !(p.x.is_finite() && p.y.is_finite()) || !raw.field_contains(p) {
            bad("bs_position", "bs_position must lie inside the field".into());
        }
    }

    if !v.is_empty() {
        return Err(ConfigError::Invalid(v));
    }

    let mut cfg = raw;
    if cfg.bs_position == BsPosition::Random {
        let mut rng = RngStreams::new(cfg.rng_seed).stream(StreamId::BsPlacement);
        let x = rng.random_range(0.0..=cfg.field_width_m);
        let y = rng.random_range(0.0..=cfg.field_height_m);
        cfg.bs_position = BsPosition::Fixed(Position::new(x, y));
    }
    Ok(cfg)
}

fn parse_value<T: FromStr>(line: usize, key: &str, value: &str) -> Result<T, ConfigError>
where
    T::Err: fmt::Display,
{
    value.parse::<T>().map_err(|e| ConfigError::Parse {
        line,
        message: format!("bad value `{value}` for {key}: {e}"),
    })
}

impl FromStr for SimConfig {
    type Err = ConfigError;

    fn from_str(text: &str) -> Result<Self, Self::Err> {
        let mut cfg = SimConfig::default();
        let mut exclusion_set = false;
        let mut seen: Vec<String> = Vec::new();

        for (idx, raw_line) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw_line.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let Some((key, value)) = content.split_once('=') else {
                return Err(ConfigError::Parse { line, message: format!("expected `key = value`, got `{content}`") });
            };
            let key = key.trim();
            let value = value.trim();
            if seen.iter().any(|k| k == key) {
                return Err(ConfigError::Parse { line, message: format!("duplicate key `{key}`") });
            }
            seen.push(key.to_string());

            macro_rules! set {
                ($field:ident) => {
                    cfg.$field = parse_value(line, key, value)?
                };
            }
            match key {
                "field_width_m" => set!(field_width_m),
                "field_height_m" => set!(field_height_m),
                "node_count" => set!(node_count),
                "bs_position" => cfg.bs_position = parse_bs(line, value)?,
                "placement" => {
                    cfg.placement = match value {
                        "uniform" => Placement::Uniform,
                        "clustered" => Placement::Clustered,
                        _ => {
                            return Err(ConfigError::Parse {
                                line,
                                message: format!("placement must be `uniform` or `clustered`, got `{value}`"),
                            })
                        }
                    }
                }
                "packet_size_bits" => set!(packet_size_bits),
                "initial_energy_j" => set!(initial_energy_j),
                "sim_duration_s" => set!(sim_duration_s),
                "round_duration_s" => set!(round_duration_s),
                "p_ch_fraction" => set!(p_ch_fraction),
                "cluster_radius_rc_m" => set!(cluster_radius_rc_m),
                "radio_range_rr_m" => set!(radio_range_rr_m),
                "e_elec_j_per_bit" => set!(e_elec_j_per_bit),
                "eps_amp_j_per_bit_m2" => set!(eps_amp_j_per_bit_m2),
                "filter_threshold" => set!(filter_threshold),
                "ch_exclusion_rounds" => {
                    set!(ch_exclusion_rounds);
                    exclusion_set = true;
                }
                "speed_min_mps" => set!(speed_min_mps),
                "speed_max_mps" => set!(speed_max_mps),
                "pause_s" => set!(pause_s),
                "on_s" => set!(on_s),
                "off_s" => set!(off_s),
                "rate_pps" => set!(rate_pps),
                "hello_bits" => set!(hello_bits),
                "schedule_bits_per_cm" => set!(schedule_bits_per_cm),
                "heartbeat_bits" => set!(heartbeat_bits),
                "dsdv_entry_bits" => set!(dsdv_entry_bits),
                "dsdv_update_interval_s" => set!(dsdv_update_interval_s),
                "rng_seed" => set!(rng_seed),
                _ => return Err(ConfigError::UnknownKey { line, key: key.to_string() }),
            }
        }

        if !exclusion_set && cfg.p_ch_fraction > 0.0 && cfg.p_ch_fraction < 1.0 {
            cfg.ch_exclusion_rounds = default_exclusion_rounds(cfg.p_ch_fraction);
        }
        Ok(cfg)
    }
}

fn parse_bs(line: usize, value: &str) -> Result<BsPosition, ConfigError> {
    if value == "random" {
        return Ok(BsPosition::Random);
    }
    let err = || ConfigError::Parse { line, message: format!("bs_position must be `random` or `x,y`, got `{value}`") };
    let (x, y) = value.split_once(',').ok_or_else(err)?;
    let x = x.trim().parse::<f64>().map_err(|_| err())?;
    let y = y.trim().parse::<f64>().map_err(|_| err())?;
    Ok(BsPosition::Fixed(Position::new(x, y)))
}

impl fmt::Display for SimConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "field_width_m = {}", self.field_width_m)?;
        writeln!(f, "field_height_m = {}", self.field_height_m)?;
        writeln!(f, "node_count = {}", self.node_count)?;
        match self.bs_position {
            BsPosition::Random => writeln!(f, "bs_position = random")?,
            BsPosition::Fixed(p) => writeln!(f, "bs_position = {},{}", p.x, p.y)?,
        }
        let placement = match self.placement {
            Placement::Uniform => "uniform",
            Placement::Clustered => "clustered",
        };
        writeln!(f, "placement = {placement}")?;
        writeln!(f, "packet_size_bits = {}", self.packet_size_bits)?;
        writeln!(f, "initial_energy_j = {}", self.initial_energy_j)?;
        writeln!(f, "sim_duration_s = {}", self.sim_duration_s)?;
        writeln!(f, "round_duration_s = {}", self.round_duration_s)?;
        writeln!(f, "p_ch_fraction = {}", self.p_ch_fraction)?;
        writeln!(f, "cluster_radius_rc_m = {}", self.cluster_radius_rc_m)?;
        writeln!(f, "radio_range_rr_m = {}", self.radio_range_rr_m)?;
        writeln!(f, "e_elec_j_per_bit = {:e}", self.e_elec_j_per_bit)?;
        writeln!(f, "eps_amp_j_per_bit_m2 = {:e}", self.eps_amp_j_per_bit_m2)?;
        writeln!(f, "filter_threshold = {}", self.filter_threshold)?;
        writeln!(f, "ch_exclusion_rounds = {}", self.ch_exclusion_rounds)?;
        writeln!(f, "speed_min_mps = {}", self.speed_min_mps)?;
        writeln!(f, "speed_max_mps = {}", self.speed_max_mps)?;
        writeln!(f, "pause_s = {}", self.pause_s)?;
        writeln!(f, "on_s = {}", self.on_s)?;
        writeln!(f, "off_s = {}", self.off_s)?;
        writeln!(f, "rate_pps = {}", self.rate_pps)?;
        writeln!(f, "hello_bits = {}", self.hello_bits)?;
        writeln!(f, "schedule_bits_per_cm = {}", self.schedule_bits_per_cm)?;
        writeln!(f, "heartbeat_bits = {}", self.heartbeat_bits)?;
        writeln!(f, "dsdv_entry_bits = {}", self.dsdv_entry_bits)?;
        writeln!(f, "dsdv_update_interval_s = {}", self.dsdv_update_interval_s)?;
        writeln!(f, "rng_seed = {}", self.rng_seed)
    }
}
