use std::fs;
use std::path::Path;
use std::process::Command as Process;

use demon_core::cli::{run, Command, RunConfig};
use demon_core::greens::PoleReport;

fn small(dir: &Path) -> RunConfig {
    RunConfig {
        half_sites: 12,
        tau_max: 500.0,
        tau_steps: 51,
        output_dir: dir.to_path_buf(),
        ..RunConfig::default()
    }
}

fn demon() -> Process {
    Process::new(env!("CARGO_BIN_EXE_demon"))
}

fn csv_column(text: &str, name: &str) -> Vec<String> {
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let col = header.iter().position(|h| *h == name).unwrap_or_else(|| panic!("no column {name}"));
    lines.map(|l| l.split(',').nth(col).unwrap().to_string()).collect()
}

#[test]
fn evolve_is_deterministic() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    run(Command::Evolve, &small(a.path())).unwrap();
    run(Command::Evolve, &small(b.path())).unwrap();
    for f in ["observables.csv", "density.csv"] {
        assert_eq!(fs::read(a.path().join(f)).unwrap(), fs::read(b.path().join(f)).unwrap(), "{f}");
    }
}

#[test]
fn manifest_reproduces_run() {
    let first = tempfile::tempdir().unwrap();
    let mut cfg = small(first.path());
    cfg.beta = demon_core::cli::InitialKind::Uniform;
    cfg.kappa_r = std::f64::consts::PI / 8.0;
    run(Command::Evolve, &cfg).unwrap();
    let manifest = fs::read_to_string(first.path().join("evolve.manifest")).unwrap();
    assert!(manifest.contains("# command = evolve"));
    assert!(manifest.contains(env!("CARGO_PKG_VERSION")));

    let second = tempfile::tempdir().unwrap();
    let status = demon()
        .arg("--config")
        .arg(first.path().join("evolve.manifest"))
        .arg("--output-dir")
        .arg(second.path())
        .arg("evolve")
        .output()
        .unwrap();
    assert!(status.status.success(), "{}", String::from_utf8_lossy(&status.stderr));
    assert_eq!(
        fs::read(first.path().join("observables.csv")).unwrap(),
        fs::read(second.path().join("observables.csv")).unwrap()
    );
}

#[test]
fn single_value_sweep_matches_evolve() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = small(dir.path());
    cfg.sweep_betas = vec![cfg.beta];
    run(Command::Evolve, &cfg).unwrap();
    run(Command::Sweep, &cfg).unwrap();
    let obs = fs::read_to_string(dir.path().join("observables.csv")).unwrap();
    let sweep = fs::read_to_string(dir.path().join("sweep.csv")).unwrap();
    assert_eq!(csv_column(&obs, "tau"), csv_column(&sweep, "tau"));
    assert_eq!(csv_column(&obs, "display_time"), csv_column(&sweep, "display_time"));
    assert_eq!(csv_column(&obs, "entropy"), csv_column(&sweep, "entropy_beta_0.01"));
}

#[test]
fn sweep_isolates_failed_jobs() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = small(dir.path());
    cfg.apply("sweep_betas", "1/2, -1, uniform").unwrap();
    let out = run(Command::Sweep, &cfg).unwrap();
    assert!(out.summary.contains("failed beta = -1.0"));
    let sweep = fs::read_to_string(dir.path().join("sweep.csv")).unwrap();
    assert_eq!(
        sweep.lines().next().unwrap(),
        "tau,display_time,entropy_beta_0.5,entropy_beta_uniform"
    );
    let manifest = fs::read_to_string(dir.path().join("sweep.manifest")).unwrap();
    assert!(manifest.contains("# partial = true"));
    assert!(manifest.contains("# failed beta = -1.0"));
}

#[test]
fn sweep_reuses_saved_eigensystem() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = small(dir.path());
    run(Command::Evolve, &cfg).unwrap();
    let fresh = fs::read(dir.path().join("observables.csv")).unwrap();
    cfg.write_eigensystem = true;
    run(Command::Sweep, &cfg).unwrap();
    cfg.write_eigensystem = false;
    cfg.eigensystem_input = Some(dir.path().join("eigensystem.bin"));
    run(Command::Evolve, &cfg).unwrap();
    assert_eq!(fresh, fs::read(dir.path().join("observables.csv")).unwrap());
}

#[test]
fn free_evolution_keeps_entropy() {
    let dir = tempfile::tempdir().unwrap();
    let out = demon()
        .args(["--upsilon0", "0", "--half-sites", "20", "--set", "tau_max=2000", "--set", "tau_steps=101"])
        .arg("--output-dir")
        .arg(dir.path())
        .arg("evolve")
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let obs = fs::read_to_string(dir.path().join("observables.csv")).unwrap();
    let s: Vec<f64> = csv_column(&obs, "entropy").iter().map(|v| v.parse().unwrap()).collect();
    assert_eq!(s.len(), 101);
    assert!(s.iter().all(|x| (x - s[0]).abs() < 1e-10));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.cfg");
    fs::write(&cfg, "beta = 0.1\n\nkappa_r = pi/x\n").unwrap();
    let out = demon().arg("--config").arg(&cfg).arg("dispersion").output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("bad.cfg:3"));

    let out = demon().args(["--set", "nonsense=1", "dispersion"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));

    // a/π = 2 sits on a band edge
    let out = demon()
        .args(["--set", "p_ref=4", "poles"])
        .arg("--output-dir")
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));

    let out = demon().args(["--beta", "uniform", "dispersion"]).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).contains("kappa_max"));
}

#[test]
fn pole_report_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = small(dir.path());
    run(Command::Poles, &cfg).unwrap();
    let text = fs::read_to_string(dir.path().join("poles.txt")).unwrap();
    let report = PoleReport::parse_verified(&text).unwrap();
    assert!(!report.roots.is_empty());
    assert!(report.roots.iter().all(|r| (r.energy - 8.0).abs() > 1e-6));

    // below the first level with a vanishing interaction nothing is found
    cfg.strength = 1e-9;
    cfg.pole_e_lo = 0.01;
    cfg.pole_e_hi = 0.45;
    let out = run(Command::Poles, &cfg).unwrap();
    assert!(out.summary.starts_with("0 roots"));
}

#[test]
fn greens_table_shape() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = small(dir.path());
    cfg.greens_points = 7;
    cfg.greens_energies = vec![0.7, 3.3, 13.0];
    run(Command::Greens, &cfg).unwrap();
    let text = fs::read_to_string(dir.path().join("greens.csv")).unwrap();
    assert_eq!(text.lines().count(), 1 + 21);
    let num = |name: &str| -> Vec<f64> { csv_column(&text, name).iter().map(|v| v.parse().unwrap()).collect() };
    let (gp, sym, anti) = (num("g_p_re"), num("sym_re"), num("antisym_re"));
    for i in 0..gp.len() {
        assert!((gp[i] - sym[i] - anti[i]).abs() <= 1e-12 * gp[i].abs().max(1.0));
    }
}
