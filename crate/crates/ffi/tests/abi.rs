use std::ffi::{CStr, CString};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::ptr;

use mleach_sim::{simulate, validate_config, ProtocolKind, SimConfig};
use mleach_sim_ffi::*;

const SMALL: &str = "\
field_width_m = 2000
field_height_m = 2000
node_count = 30
bs_position = 1000,1000
sim_duration_s = 24
initial_energy_j = 5000
rate_pps = 2
";

fn last_error() -> String {
    let p = ms_last_error();
    assert!(!p.is_null(), "expected an error message");
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn parse(text: &str) -> Result<*mut MsConfig, MsStatus> {
    let text = CString::new(text).unwrap();
    let mut cfg = ptr::null_mut();
    match unsafe { ms_config_parse(text.as_ptr(), &mut cfg) } {
        MsStatus::Ok => Ok(cfg),
        s => Err(s),
    }
}

fn run(cfg: *const MsConfig, protocol: MsProtocol) -> *mut MsRun {
    let mut run = ptr::null_mut();
    assert_eq!(unsafe { ms_run(cfg, protocol as u32, &mut run) }, MsStatus::Ok);
    run
}

fn summary(run: *const MsRun) -> MsSummary {
    let mut s = MsSummary::default();
    assert_eq!(unsafe { ms_run_summary(run, &mut s) }, MsStatus::Ok);
    s
}

#[test]
fn results_match_the_library() {
    let cfg = parse(SMALL).unwrap();
    unsafe { ms_config_set_seed(cfg, 11) };
    let mut native: SimConfig = SMALL.parse().unwrap();
    native.rng_seed = 11;
    let native = validate_config(native).unwrap();

    for (proto, kind) in [(MsProtocol::Mleach, ProtocolKind::Mleach), (MsProtocol::Dsdv, ProtocolKind::Dsdv)] {
        let r = run(cfg, proto);
        let s = summary(r);
        let (log, audit) = simulate(&native, kind);
        assert_eq!(s.node_count, 30);
        assert_eq!(s.packets_at_bs, log.packets_at_bs);
        assert_eq!(s.readings_generated, log.readings_generated);
        assert_eq!(s.max_energy_per_node_j, log.final_max_node_j());
        assert_eq!(s.audit_violations, audit.violations());
        assert_eq!(s.audit_violations, 0);

        assert_eq!(unsafe { ms_run_energy_len(r) }, log.energy_series.len());
        for (i, e) in log.energy_series.iter().enumerate() {
            let (mut t, mut j) = (0.0, 0.0);
            assert_eq!(unsafe { ms_run_energy_at(r, i, &mut t, &mut j) }, MsStatus::Ok);
            assert_eq!((t, j), (e.t_s, e.total_j));
        }
        assert_eq!(unsafe { ms_run_throughput_len(r) }, log.bs_rx.len());
        let total: u64 = (0..log.bs_rx.len())
            .map(|i| {
                let mut n = 0;
                assert_eq!(unsafe { ms_run_throughput_at(r, i, &mut n) }, MsStatus::Ok);
                n
            })
            .sum();
        assert_eq!(total, s.packets_at_bs);
        unsafe { ms_run_free(r) };
    }
    unsafe { ms_config_free(cfg) };
}

#[test]
fn no_deaths_reports_nan() {
    let cfg = parse(SMALL).unwrap();
    let r = run(cfg, MsProtocol::Mleach);
    assert!(summary(r).first_death_s.is_nan());
    unsafe {
        ms_run_free(r);
        ms_config_free(cfg);
    }
}

#[test]
fn config_errors_map_to_status_codes() {
    assert_eq!(parse("node_count = lots\n").unwrap_err(), MsStatus::ConfigParse);
    assert!(last_error().contains("line 1"));
    assert_eq!(parse("warp_drive = 9\n").unwrap_err(), MsStatus::ConfigParse);
    assert!(last_error().contains("warp_drive"));

    let missing = CString::new("/nonexistent/scenario.cfg").unwrap();
    let mut cfg = ptr::null_mut();
    assert_eq!(unsafe { ms_config_load(missing.as_ptr(), &mut cfg) }, MsStatus::ConfigNotFound);
    assert!(cfg.is_null());

    // Parses, but fails validation only when run or validated.
    let cfg = parse(&SMALL.replace("node_count = 30", "node_count = 0")).unwrap();
    assert_eq!(unsafe { ms_config_validate(cfg) }, MsStatus::ConfigInvalid);
    assert!(last_error().contains("node_count"));
    let mut r = ptr::null_mut();
    assert_eq!(unsafe { ms_run(cfg, MsProtocol::Dsdv as u32, &mut r) }, MsStatus::ConfigInvalid);
    assert!(r.is_null());
    unsafe { ms_config_free(cfg) };
}

#[test]
fn bad_arguments_are_rejected() {
    let mut cfg = ptr::null_mut();
    assert_eq!(unsafe { ms_config_parse(ptr::null(), &mut cfg) }, MsStatus::NullPointer);
    assert_eq!(unsafe { ms_config_set_seed(ptr::null_mut(), 1) }, MsStatus::NullPointer);
    assert_eq!(unsafe { ms_run_summary(ptr::null(), &mut MsSummary::default()) }, MsStatus::NullPointer);
    assert_eq!(unsafe { ms_run_energy_len(ptr::null()) }, 0);

    let bad = [b'x', 0xff, 0];
    assert_eq!(unsafe { ms_config_parse(bad.as_ptr().cast(), &mut cfg) }, MsStatus::InvalidUtf8);

    let cfg = ms_config_default();
    let mut r = ptr::null_mut();
    assert_eq!(unsafe { ms_run(cfg, 7, &mut r) }, MsStatus::UnknownProtocol);
    assert_eq!(unsafe { ms_run(cfg, 0, ptr::null_mut()) }, MsStatus::NullPointer);
    unsafe { ms_config_free(cfg) };

    let cfg = parse(SMALL).unwrap();
    let r = run(cfg, MsProtocol::Dsdv);
    let mut n = 0;
    assert_eq!(unsafe { ms_run_throughput_at(r, 10_000, &mut n) }, MsStatus::OutOfRange);
    assert!(last_error().contains("out of range"));
    let (mut t, mut j) = (0.0, 0.0);
    assert_eq!(unsafe { ms_run_energy_at(r, usize::MAX, &mut t, &mut j) }, MsStatus::OutOfRange);
    unsafe {
        ms_run_free(r);
        ms_config_free(cfg);
        ms_run_free(ptr::null_mut());
        ms_config_free(ptr::null_mut());
    }
}

#[test]
fn success_clears_the_last_error() {
    assert!(parse("bogus").is_err());
    assert!(!ms_last_error().is_null());
    let cfg = parse(SMALL).unwrap();
    assert!(ms_last_error().is_null());
    unsafe { ms_config_free(cfg) };
}

#[test]
fn export_writes_csv_files() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = parse(SMALL).unwrap();
    let r = run(cfg, MsProtocol::Mleach);
    let dir = CString::new(tmp.path().join("m").to_str().unwrap()).unwrap();
    assert_eq!(unsafe { ms_run_export_csv(r, dir.as_ptr()) }, MsStatus::Ok);
    for f in ["energy.csv", "throughput.csv", "rounds.csv", "summary.csv"] {
        assert!(tmp.path().join("m").join(f).is_file(), "{f}");
    }

    let blocker = tmp.path().join("blocker");
    std::fs::write(&blocker, "").unwrap();
    let dir = CString::new(blocker.to_str().unwrap()).unwrap();
    assert_eq!(unsafe { ms_run_export_csv(r, dir.as_ptr()) }, MsStatus::Export);
    assert!(last_error().contains("cannot write"));
    unsafe {
        ms_run_free(r);
        ms_config_free(cfg);
    }
}

fn crate_dir() -> &'static Path {
    Path::new(env!("CARGO_MANIFEST_DIR"))
}

/// `target/<profile>`, where cargo also drops the staticlib.
fn profile_dir() -> PathBuf {
    let exe = std::env::current_exe().unwrap();
    exe.parent().and_then(Path::parent).unwrap().to_path_buf()
}

#[test]
fn header_declares_every_export() {
    let header = std::fs::read_to_string(crate_dir().join("include/mleach_sim.h")).unwrap();
    let src = std::fs::read_to_string(crate_dir().join("src/lib.rs")).unwrap();
    let exports: Vec<&str> = src
        .lines()
        .filter_map(|l| l.split("extern \"C\" fn ").nth(1))
        .map(|rest| rest.split('(').next().unwrap())
        .collect();
    assert!(exports.len() >= 10);
    for f in exports {
        assert!(header.contains(&format!("{f}(")), "{f} missing from header");
    }
}

#[test]
fn c_program_links_and_runs() {
    let lib = profile_dir().join("libmleach_sim_ffi.a");
    assert!(lib.is_file(), "{} not built", lib.display());
    let exe = Path::new(env!("CARGO_TARGET_TMPDIR")).join("ffi_smoke");
    let status = Command::new(std::env::var("CC").unwrap_or_else(|_| "cc".into()))
        .arg("-std=c99")
        .arg("-Wall")
        .arg("-Werror")
        .arg("-I")
        .arg(crate_dir().join("include"))
        .arg(crate_dir().join("tests/c/smoke.c"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&exe)
        .status()
        .expect("C compiler available");
    assert!(status.success());

    let out = Command::new(&exe).output().unwrap();
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(out.status.success(), "exit {:?}: {}", out.status.code(), String::from_utf8_lossy(&out.stderr));
    assert!(stdout.contains("nodes=30") && stdout.contains("violations=0"), "{stdout}");
}
