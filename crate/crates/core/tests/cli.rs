//! End-to-end checks of the `sqg-decay` binary.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use clap::ValueEnum;
use sqg_decay::cli_io::{parse_config, read_snapshot, Experiment};

const SIMULATE: &str = r#"
[grid]
n = 32
box_length_pi = 8

[sim]
alpha = 0.75
dt = 0.02
t_end = 0.4
record_times = [0.0, 0.2, 0.4]

[profile]
kind = "ring_spectrum_random"
length_scale = 1.0
seed = 7
"#;

const DECAY_FIT: &str = r#"
[grid]
n = 32
box_length_pi = 8

[sim]
alpha = 0.8
dt = 0.02
t_end = 4.0
record_times = [0.5, 0.75, 1.0, 1.25, 1.5, 1.75, 2.0, 2.25, 2.5, 2.75, 3.0, 3.25, 3.5, 3.75, 4.0]

[profile]
kind = "gaussian"
length_scale = 1.0
aspect = 2.0

[analysis]
fits = [{ q = 2.0, theorem = "THM_13", p = 1.0 }, { q = 4.0, theorem = "THM_15" }]
"#;

fn sqg(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sqg-decay"))
        .args(args)
        .env("SQG_THREADS", "2")
        .output()
        .expect("binary runs")
}

fn run_with(exp: &str, config: &str, out: &Path, extra: &[&str]) -> Output {
    let cfg = out.with_extension("toml");
    fs::write(&cfg, config).unwrap();
    let mut args = vec![
        exp,
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ];
    args.extend_from_slice(extra);
    sqg(&args)
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn rate_catalog_writes_full_table() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("cat");
    let o = run_with("rate-catalog", "", &out, &[]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let text = fs::read_to_string(out.join("rate_catalog.csv")).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "theorem,alpha,pq,exponent,base,squared");
    assert_eq!(lines.len(), 1 + 32);
    assert!(out.join("manifest.json").exists());
}

#[test]
fn subcritical_alpha_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = run_with(
        "simulate",
        &SIMULATE.replace("alpha = 0.75", "alpha = 0.4"),
        &dir.path().join("a"),
        &[],
    );
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("alpha"));
}

#[test]
fn unknown_key_is_named_in_the_error() {
    let dir = tempfile::tempdir().unwrap();
    let text = SIMULATE.replace("dt = 0.02", "dt = 0.02\nviscosity = 1.0");
    let o = run_with("simulate", &text, &dir.path().join("u"), &[]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("viscosity"));
}

#[test]
fn missing_config_file_and_bad_usage_exit_one() {
    assert_eq!(
        sqg(&["simulate", "--config", "/nonexistent/x.toml"])
            .status
            .code(),
        Some(1)
    );
    assert_eq!(
        sqg(&["no-such-experiment", "--config", "x"]).status.code(),
        Some(1)
    );
}

#[test]
fn invalid_thread_count_exits_one() {
    let o = Command::new(env!("CARGO_BIN_EXE_sqg-decay"))
        .args([
            "rate-catalog",
            "--config",
            "/dev/null",
            "--out",
            "/tmp/unused",
        ])
        .env("SQG_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn unreachable_waiting_time_is_a_numerical_failure() {
    let dir = tempfile::tempdir().unwrap();
    let text = DECAY_FIT.replace("[analysis]", "[analysis]\nkappa = 1e-30");
    let o = run_with("decay-fit", &text, &dir.path().join("k"), &[]);
    assert_eq!(
        o.status.code(),
        Some(2),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
}

#[test]
fn decay_fit_prints_one_line_per_fit() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("d");
    let o = run_with("decay-fit", DECAY_FIT, &out, &[]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 2);
    for l in lines {
        let parts: Vec<f64> = l.split(", ").map(|x| x.parse().unwrap()).collect();
        assert_eq!(parts.len(), 3);
        assert!(parts[0] < 0.0 && parts[1] < 0.0 && parts[2] >= 0.0, "{l}");
    }
    let ts = fs::read_to_string(out.join("timeseries.csv")).unwrap();
    assert_eq!(ts.lines().next().unwrap(), "t,fluct_norm_l2,fluct_norm_l4");
    assert_eq!(ts.lines().count(), 1 + 15);
}

#[test]
fn identical_runs_write_identical_csv() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    assert_eq!(
        run_with("simulate", SIMULATE, &a, &[]).status.code(),
        Some(0)
    );
    assert_eq!(
        run_with("simulate", SIMULATE, &b, &[]).status.code(),
        Some(0)
    );
    for name in ["timeseries.csv", "energy.csv", "snapshots/snap_0002.sqgd"] {
        assert_eq!(
            fs::read(a.join(name)).unwrap(),
            fs::read(b.join(name)).unwrap(),
            "{name}"
        );
    }
}

#[test]
fn seed_flag_overrides_profile_seed() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    assert_eq!(
        run_with("simulate", SIMULATE, &a, &[]).status.code(),
        Some(0)
    );
    assert_eq!(
        run_with("simulate", SIMULATE, &b, &["--seed", "8"])
            .status
            .code(),
        Some(0)
    );
    let snap = "snapshots/snap_0000.sqgd";
    assert_ne!(
        fs::read(a.join(snap)).unwrap(),
        fs::read(b.join(snap)).unwrap()
    );
}

#[test]
fn snapshots_record_time_and_grid() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("s");
    assert_eq!(
        run_with("simulate", SIMULATE, &out, &[]).status.code(),
        Some(0)
    );
    let bytes = fs::read(out.join("snapshots/snap_0001.sqgd")).unwrap();
    let (header, field) = read_snapshot(bytes.as_slice()).unwrap();
    assert_eq!(field.grid().n(), 32);
    assert!((header.time - 0.2).abs() < 1e-12);
    assert!((header.alpha - 0.75).abs() < 1e-15);
    assert!(field.energy() > 0.0);
}

#[test]
fn experiment_mismatch_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let text = format!("experiment = \"picard\"\n{SIMULATE}");
    assert_eq!(
        run_with("simulate", &text, &dir.path().join("m"), &[])
            .status
            .code(),
        Some(1)
    );
}

fn configs_dir() -> std::path::PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

#[test]
fn shipped_configs_parse_for_their_experiment() {
    for exp in Experiment::value_variants() {
        let path = configs_dir().join(format!("{exp}.toml"));
        let text = fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        parse_config(&text, *exp).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    }
}

#[test]
fn cheap_shipped_configs_run() {
    let dir = tempfile::tempdir().unwrap();
    for exp in ["rate-catalog", "linear-oracle", "kernel-probe", "picard"] {
        let cfg = configs_dir().join(format!("{exp}.toml"));
        let out = dir.path().join(exp);
        let o = sqg(&[
            exp,
            "--config",
            cfg.to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
        ]);
        assert_eq!(
            o.status.code(),
            Some(0),
            "{exp}: {}",
            String::from_utf8_lossy(&o.stderr)
        );
        assert!(!stdout(&o).is_empty() || exp == "rate-catalog");
    }
}
