//! End-to-end tests driving the compiled binary: run, sweep, oracle,
//! validate and plot on a tiny scenario.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_isac-sim")
}

fn tiny_config(dir: &Path) -> PathBuf {
    let text = r#"
name = "tiny"

[[shells]]
id = "ka"
altitude_m = 550e3
inclination_deg = 53.0
plane_count = 8
sats_per_plane = 8
carrier_hz = 19.95e9
bandwidth_hz = 500e6
antenna_gain_dbi = 30.5
tx_power_w = 75.0
rain_power_law = { mu = 0.0751, omega = 1.099 }

[ground]
active_fraction = 0.001
min_elevation_deg = 25.0
n_beams = 4
synth = { mean_users = 5000.0, dispersion = 1.0, zero_fraction = 0.0 }

[ground.region]
lat_min_deg = 46.0
lat_max_deg = 48.0
lon_min_deg = 8.0
lon_max_deg = 10.0
cell_step_deg = 1.0

[rain]
lambda_per_km2 = 8.4e-4
mean_radius_km = 22.6
mean_rate_mm_h = 8.77
mean_on_h = 1.886
mean_off_h = 5.376
rain_height_km = 6.0

[noise]
noise_spectral_density_dbm_hz = -176.31
pointing_loss_db = 0.3
user_gain_dbi = 0.0

[frame]
t_s = 0.01
t_frame_s = 0.25
t_ho_s = 0.05
n_rtt = 2

[sensing]
pilot_len = 256
feedback_len = 64

[run]
frames = 3
seed = 7
"#;
    let path = dir.join("tiny.toml");
    std::fs::write(&path, text).unwrap();
    path
}

fn run_ok(args: &[&str]) -> Output {
    let out = Command::new(bin()).args(args).output().unwrap();
    assert!(
        out.status.success(),
        "command {:?} failed:\nstdout: {}\nstderr: {}",
        args,
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

#[test]
fn validate_reports_derived_quantities() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = tiny_config(dir.path());
    let out = run_ok(&["validate", "--config", cfg.to_str().unwrap()]);
    let text = String::from_utf8_lossy(&out.stdout).to_string();
    assert!(text.contains("config ok"), "stdout: {text}");
    assert!(text.contains("satellites: 64"), "stdout: {text}");
}

#[test]
fn validate_rejects_broken_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = tiny_config(dir.path());
    let broken = std::fs::read_to_string(&cfg)
        .unwrap()
        .replace("active_fraction = 0.001", "active_fraction = 2.0");
    let path = dir.path().join("broken.toml");
    std::fs::write(&path, broken).unwrap();
    let out = Command::new(bin())
        .args(["validate", "--config", path.to_str().unwrap()])
        .output()
        .unwrap();
    assert!(!out.status.success());
}

#[test]
fn run_writes_kpis_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = tiny_config(dir.path());
    let out_dir = dir.path().join("out");
    run_ok(&[
        "run",
        "--config",
        cfg.to_str().unwrap(),
        "--seed",
        "1",
        "--frames",
        "3",
        "--out",
        out_dir.to_str().unwrap(),
        "--framework",
        "jmra",
        "--csi",
        "perfect",
        "--pilot-len",
        "256",
    ]);

    let kpis = std::fs::read_to_string(out_dir.join("kpis.csv")).unwrap();
    let mut lines = kpis.lines();
    assert_eq!(
        lines.next().unwrap(),
        "frame,framework,csi,pilot_len,throughput_bps,jain,handovers,nmse_gamma,nmse_att,solver_ms,ts_ms"
    );
    assert_eq!(lines.count(), 3);

    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out_dir.join("manifest.json")).unwrap())
            .unwrap();
    assert_eq!(manifest["seed"], 1);
    assert!(manifest["summary"]["mean_jain"].as_f64().unwrap() > 0.0);
    assert!(manifest["ra_deadline"]["budget_s"].as_f64().unwrap() > 0.0);
}

#[test]
fn repeated_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = tiny_config(dir.path());
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for out in [&a, &b] {
        run_ok(&[
            "run",
            "--config",
            cfg.to_str().unwrap(),
            "--seed",
            "5",
            "--frames",
            "3",
            "--out",
            out.to_str().unwrap(),
        ]);
    }
    assert_eq!(
        std::fs::read(a.join("kpis.csv")).unwrap(),
        std::fs::read(b.join("kpis.csv")).unwrap()
    );
}

#[test]
fn sweep_writes_combined_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = tiny_config(dir.path());
    let out_dir = dir.path().join("sweep");
    run_ok(&[
        "sweep",
        "--config",
        cfg.to_str().unwrap(),
        "--param",
        "pilot_len",
        "--values",
        "256,1024",
        "--frames",
        "2",
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    let summary = std::fs::read_to_string(out_dir.join("summary.csv")).unwrap();
    assert_eq!(summary.lines().count(), 3); // header + one row per value
    assert!(out_dir.join("sweep.csv").exists());

    // Non-power-of-two pilot lengths are rejected.
    let bad = Command::new(bin())
        .args([
            "sweep",
            "--config",
            cfg.to_str().unwrap(),
            "--param",
            "pilot-len",
            "--values",
            "300",
            "--out",
            dir.path().join("bad").to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert!(!bad.status.success());
}

#[test]
fn plot_emits_svg() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = tiny_config(dir.path());
    let out_dir = dir.path().join("out");
    run_ok(&[
        "run",
        "--config",
        cfg.to_str().unwrap(),
        "--frames",
        "3",
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    let plot_dir = dir.path().join("plots");
    run_ok(&[
        "plot",
        "--csv",
        out_dir.join("kpis.csv").to_str().unwrap(),
        "--out",
        plot_dir.to_str().unwrap(),
    ]);
    let svg = std::fs::read_to_string(plot_dir.join("jain_box.svg")).unwrap();
    assert!(svg.starts_with("<svg"), "not an svg: {}", &svg[..svg.len().min(80)]);
    assert!(svg.trim_end().ends_with("</svg>"));
}

#[test]
fn oracle_compares_against_enumeration() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = tiny_config(dir.path());
    let out = run_ok(&["oracle", "--config", cfg.to_str().unwrap()]);
    let text = String::from_utf8_lossy(&out.stdout).to_string();
    assert!(text.contains("ratio"), "stdout: {text}");
}
