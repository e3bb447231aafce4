//! C ABI over `mleach_sim`.
//!
//! Handles are opaque and owned by the caller once returned; release them with
//! the matching `*_free`. Every fallible call returns an [`MsStatus`]; on
//! failure [`ms_last_error`] describes what went wrong on the calling thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use mleach_sim::audit::Audit;
use mleach_sim::config::ConfigError;
use mleach_sim::metrics::{export_csv, MetricsLog, RunSummary, STEADY_STATE_START_S};
use mleach_sim::{simulate, validate_config, ProtocolKind, SimConfig};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MsStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    ConfigNotFound = 3,
    ConfigIo = 4,
    ConfigParse = 5,
    ConfigInvalid = 6,
    UnknownProtocol = 7,
    Export = 8,
    OutOfRange = 9,
    Panic = 10,
}

/// Values accepted by the `protocol` argument of [`ms_run`].
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MsProtocol {
    Mleach = 0,
    Dsdv = 1,
}

/// Headline numbers of a finished run. `first_death_s` is NaN when no node died.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct MsSummary {
    pub node_count: usize,
    pub avg_energy_per_node_j: f64,
    pub max_energy_per_node_j: f64,
    pub steady_throughput_pps: f64,
    pub first_death_s: f64,
    pub packets_at_bs: u64,
    pub dropped_filtered: u64,
    pub dropped_unreachable: u64,
    pub dropped_dead: u64,
    pub data_packets_generated: u64,
    pub readings_generated: u64,
    pub audit_violations: u64,
}

/// A scenario. Validation (and random base-station placement) happens at run time.
pub struct MsConfig {
    cfg: SimConfig,
}

/// Metrics and audit counters of one finished run.
pub struct MsRun {
    kind: ProtocolKind,
    log: MetricsLog,
    audit: Audit,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

struct Failure(MsStatus, String);

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        let status = match e {
            ConfigError::NotFound(_) => MsStatus::ConfigNotFound,
            ConfigError::Io { .. } => MsStatus::ConfigIo,
            ConfigError::Parse { .. } | ConfigError::UnknownKey { .. } => MsStatus::ConfigParse,
            ConfigError::Invalid(_) => MsStatus::ConfigInvalid,
        };
        Failure(status, e.to_string())
    }
}

fn set_error(msg: String) {
    let msg = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(msg));
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> MsStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => MsStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(format!("internal panic: {msg}"));
            MsStatus::Panic
        }
    }
}

unsafe fn deref<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| Failure(MsStatus::NullPointer, format!("{what} is null")))
}

unsafe fn c_str<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(Failure(MsStatus::NullPointer, format!("{what} is null")));
    }
    CStr::from_ptr(p).to_str().map_err(|_| Failure(MsStatus::InvalidUtf8, format!("{what} is not valid UTF-8")))
}

unsafe fn put<T>(out: *mut *mut T, value: T) -> Result<(), Failure> {
    if out.is_null() {
        return Err(Failure(MsStatus::NullPointer, "out is null".into()));
    }
    *out = Box::into_raw(Box::new(value));
    Ok(())
}

/// Message for the last failed call on this thread, or NULL. The pointer stays
/// valid until the next `ms_*` call on the same thread.
#[no_mangle]
pub extern "C" fn ms_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Built-in default scenario. Never NULL.
#[no_mangle]
pub extern "C" fn ms_config_default() -> *mut MsConfig {
    Box::into_raw(Box::new(MsConfig { cfg: SimConfig::default() }))
}

/// Parses `key = value` config text.
///
/// # Safety
/// `text` must be NUL-terminated; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ms_config_parse(text: *const c_char, out: *mut *mut MsConfig) -> MsStatus {
    guard(|| {
        let cfg: SimConfig = c_str(text, "text")?.parse()?;
        put(out, MsConfig { cfg })
    })
}

/// Reads and parses a config file.
///
/// # Safety
/// `path` must be NUL-terminated; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ms_config_load(path: *const c_char, out: *mut *mut MsConfig) -> MsStatus {
    guard(|| {
        let cfg = SimConfig::from_file(c_str(path, "path")?)?;
        put(out, MsConfig { cfg })
    })
}

/// # Safety
/// `cfg` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn ms_config_set_seed(cfg: *mut MsConfig, seed: u64) -> MsStatus {
    guard(|| {
        let cfg = cfg.as_mut().ok_or_else(|| Failure(MsStatus::NullPointer, "cfg is null".into()))?;
        cfg.cfg.rng_seed = seed;
        Ok(())
    })
}

/// Checks every invariant without running anything.
///
/// # Safety
/// `cfg` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn ms_config_validate(cfg: *const MsConfig) -> MsStatus {
    guard(|| {
        validate_config(deref(cfg, "cfg")?.cfg.clone())?;
        Ok(())
    })
}

/// # Safety
/// `cfg` must be NULL or come from this library; it is invalid afterwards.
#[no_mangle]
pub unsafe extern "C" fn ms_config_free(cfg: *mut MsConfig) {
    if !cfg.is_null() {
        drop(Box::from_raw(cfg));
    }
}

/// Validates `cfg` and runs one full simulation with `protocol` (an [`MsProtocol`]).
///
/// # Safety
/// `cfg` must come from this library; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ms_run(cfg: *const MsConfig, protocol: u32, out: *mut *mut MsRun) -> MsStatus {
    guard(|| {
        let kind = match protocol {
            p if p == MsProtocol::Mleach as u32 => ProtocolKind::Mleach,
            p if p == MsProtocol::Dsdv as u32 => ProtocolKind::Dsdv,
            p => return Err(Failure(MsStatus::UnknownProtocol, format!("unknown protocol {p}"))),
        };
        let cfg = validate_config(deref(cfg, "cfg")?.cfg.clone())?;
        if out.is_null() {
            return Err(Failure(MsStatus::NullPointer, "out is null".into()));
        }
        let (log, audit) = simulate(&cfg, kind);
        put(out, MsRun { kind, log, audit })
    })
}

/// # Safety
/// `run` must come from [`ms_run`]; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ms_run_summary(run: *const MsRun, out: *mut MsSummary) -> MsStatus {
    guard(|| {
        let run = deref(run, "run")?;
        let out = out.as_mut().ok_or_else(|| Failure(MsStatus::NullPointer, "out is null".into()))?;
        let s = RunSummary::from_log(run.kind.name(), &run.log, STEADY_STATE_START_S);
        *out = MsSummary {
            node_count: s.node_count,
            avg_energy_per_node_j: s.avg_energy_per_node_j,
            max_energy_per_node_j: s.max_energy_per_node_j,
            steady_throughput_pps: s.steady_throughput_pps,
            first_death_s: s.first_death_s.unwrap_or(f64::NAN),
            packets_at_bs: s.packets_at_bs,
            dropped_filtered: s.dropped_filtered,
            dropped_unreachable: s.dropped_unreachable,
            dropped_dead: s.dropped_dead,
            data_packets_generated: s.data_packets_generated,
            readings_generated: s.readings_generated,
            audit_violations: run.audit.violations(),
        };
        Ok(())
    })
}

/// Number of once-per-second energy samples; 0 for a NULL handle.
///
/// # Safety
/// `run` must be NULL or come from [`ms_run`].
#[no_mangle]
pub unsafe extern "C" fn ms_run_energy_len(run: *const MsRun) -> usize {
    run.as_ref().map_or(0, |r| r.log.energy_series.len())
}

/// Sample `i` of the cumulative network energy series.
///
/// # Safety
/// `run` must come from [`ms_run`]; `t_s` and `total_j` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ms_run_energy_at(run: *const MsRun, i: usize, t_s: *mut f64, total_j: *mut f64) -> MsStatus {
    guard(|| {
        let run = deref(run, "run")?;
        if t_s.is_null() || total_j.is_null() {
            return Err(Failure(MsStatus::NullPointer, "output pointer is null".into()));
        }
        let s = run.log.energy_series.get(i).ok_or_else(|| {
            Failure(MsStatus::OutOfRange, format!("energy sample {i} out of range ({})", run.log.energy_series.len()))
        })?;
        *t_s = s.t_s;
        *total_j = s.total_j;
        Ok(())
    })
}

/// Number of one-second throughput buckets; 0 for a NULL handle.
///
/// # Safety
/// `run` must be NULL or come from [`ms_run`].
#[no_mangle]
pub unsafe extern "C" fn ms_run_throughput_len(run: *const MsRun) -> usize {
    run.as_ref().map_or(0, |r| r.log.bs_rx.len())
}

/// Packets received by the base station during second `i`.
///
/// # Safety
/// `run` must come from [`ms_run`]; `packets` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ms_run_throughput_at(run: *const MsRun, i: usize, packets: *mut u64) -> MsStatus {
    guard(|| {
        let run = deref(run, "run")?;
        let out = packets.as_mut().ok_or_else(|| Failure(MsStatus::NullPointer, "packets is null".into()))?;
        *out = *run.log.bs_rx.get(i).ok_or_else(|| {
            Failure(MsStatus::OutOfRange, format!("throughput bucket {i} out of range ({})", run.log.bs_rx.len()))
        })?;
        Ok(())
    })
}

/// Writes the run's CSV files into `dir`, creating it if needed.
///
/// # Safety
/// `run` must come from [`ms_run`]; `dir` must be NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn ms_run_export_csv(run: *const MsRun, dir: *const c_char) -> MsStatus {
    guard(|| {
        let run = deref(run, "run")?;
        let dir = c_str(dir, "dir")?;
        export_csv(&run.log, run.kind.name(), Path::new(dir)).map_err(|e| Failure(MsStatus::Export, e.to_string()))?;
        Ok(())
    })
}

/// # Safety
/// `run` must be NULL or come from [`ms_run`]; it is invalid afterwards.
#[no_mangle]
pub unsafe extern "C" fn ms_run_free(run: *mut MsRun) {
    if !run.is_null() {
        drop(Box::from_raw(run));
    }
}
