use std::path::Path;
use std::process::{Command, Output};

use a2i_cli::{Experiment, ExperimentConfig};

fn a2i(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_a2i"))
        .args(args)
        .current_dir(dir)
        .env_remove("A2I_THREADS")
        .output()
        .unwrap()
}

fn write(dir: &Path, name: &str, body: &str) -> String {
    std::fs::write(dir.join(name), body).unwrap();
    name.to_string()
}

const SMALL_PHASE: &str = "n = 128\nsub_bands = [[24, 32], [80, 88]]\ngamma = 16\nm_grid = [4, 8, 12, 16, 20]\nk_grid = [0, 2, 4, 8]\ntrials = 20\nmaster_seed = 5\n";

#[test]
fn config_round_trips_through_toml() {
    let cfg = ExperimentConfig {
        experiment: Some(Experiment::PhaseTransition),
        n: Some(128),
        sub_bands: Some(vec![[24, 32], [80, 88]]),
        gamma: Some(16),
        tau: Some(3.5),
        m_grid: Some(vec![4, 8]),
        k_grid: Some(vec![0, 1]),
        trials: Some(7),
        snr_db: Some(20.0),
        master_seed: Some(u64::MAX),
        output: Some("out/x".into()),
        offsets: Some(vec![0.25, 1.5]),
        f_s_hz: Some(1e9),
        bw_ratio_range: Some([10.0, 0.1]),
        ..Default::default()
    };
    assert_eq!(ExperimentConfig::parse(&cfg.emit()).unwrap(), cfg);
    let resolved = cfg.resolve(Experiment::PhaseTransition).unwrap().config;
    assert_eq!(ExperimentConfig::parse(&resolved.emit()).unwrap(), resolved);
    let defaults = ExperimentConfig::default()
        .resolve(Experiment::RejectionSweep)
        .unwrap()
        .config;
    assert_eq!(ExperimentConfig::parse(&defaults.emit()).unwrap(), defaults);
}

#[test]
fn phase_run_writes_grid_reference_and_metadata() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "p.toml", SMALL_PHASE);
    let out = a2i(
        &[
            "phase-transition",
            "--config",
            &cfg,
            "--out",
            "res/p",
            "--threads",
            "2",
        ],
        dir.path(),
    );
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let grid = std::fs::read_to_string(dir.path().join("res/p.csv")).unwrap();
    assert!(grid.starts_with("m_ratio,k_ratio,success_rate,trials\n"));
    assert_eq!(grid.lines().count(), 1 + 5 * 4);
    assert!(
        grid.lines().any(|l| l.ends_with(",NaN,20")),
        "M = 20 exceeds 16 slots"
    );
    let dt = std::fs::read_to_string(dir.path().join("res/p.dt.csv")).unwrap();
    assert!(dt.starts_with("delta,rho,k_ratio\n"));
    let meta: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("res/p.meta.json")).unwrap())
            .unwrap();
    assert_eq!(meta["master_seed"], 5);
    assert_eq!(meta["threads"], 2);
    assert_eq!(meta["results"]["infeasible_m"], serde_json::json!([20]));
    assert_eq!(meta["config"]["trials"], 20);
}

#[test]
fn reruns_are_byte_identical_across_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "p.toml", SMALL_PHASE);
    let a = a2i(
        &[
            "phase-transition",
            "--config",
            &cfg,
            "--out",
            "a",
            "--threads",
            "1",
        ],
        dir.path(),
    );
    let b = a2i(
        &[
            "phase-transition",
            "--config",
            &cfg,
            "--out",
            "b",
            "--threads",
            "3",
        ],
        dir.path(),
    );
    assert!(a.status.success() && b.status.success());
    for suffix in [".csv", ".dt.csv"] {
        let fa = std::fs::read(dir.path().join(format!("a{suffix}"))).unwrap();
        let fb = std::fs::read(dir.path().join(format!("b{suffix}"))).unwrap();
        assert_eq!(fa, fb, "{suffix}");
    }
    let c = a2i(
        &[
            "phase-transition",
            "--config",
            &cfg,
            "--out",
            "c",
            "--seed",
            "6",
        ],
        dir.path(),
    );
    assert!(c.status.success());
    let fa = std::fs::read(dir.path().join("a.csv")).unwrap();
    let fc = std::fs::read(dir.path().join("c.csv")).unwrap();
    assert_ne!(fa, fc, "seed override must change the draws");
}

#[test]
fn thread_count_can_come_from_the_environment() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "c.toml",
        "experiment = \"coherence-sweep\"\npoints = 3\n",
    );
    let out = Command::new(env!("CARGO_BIN_EXE_a2i"))
        .args(["coherence-sweep", "--config", &cfg])
        .current_dir(dir.path())
        .env("A2I_THREADS", "3")
        .output()
        .unwrap();
    assert!(out.status.success());
    let meta: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(dir.path().join("coherence-sweep.meta.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(meta["threads"], 3);
    let csv = std::fs::read_to_string(dir.path().join("coherence-sweep.csv")).unwrap();
    assert_eq!(csv.lines().count(), 4);
}

#[test]
fn rejection_offsets_are_labelled_in_hz() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "r.toml", "f_s_hz = 1e9\noffsets = [0.5, 3.5]\n");
    let out = a2i(
        &["rejection-sweep", "--config", &cfg, "--out", "r"],
        dir.path(),
    );
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let csv = std::fs::read_to_string(dir.path().join("r.csv")).unwrap();
    let offsets: Vec<f64> = csv
        .lines()
        .skip(1)
        .map(|l| l.split(',').next().unwrap().parse().unwrap())
        .collect();
    assert_eq!(offsets.len(), 2);
    assert!((offsets[0] - 0.5e9).abs() < 1.0 && (offsets[1] - 3.5e9).abs() < 1.0);
}

#[test]
fn measure_recover_reports_the_support() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "m.toml", "k = 3\nmaster_seed = 11\n");
    let out = a2i(
        &["measure-recover", "--config", &cfg, "--out", "m"],
        dir.path(),
    );
    assert!(out.status.success());
    let meta: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("m.meta.json")).unwrap())
            .unwrap();
    assert_eq!(meta["results"]["support_success"], true);
    let csv = std::fs::read_to_string(dir.path().join("m.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 32);
}

fn assert_failure(out: &Output, code: i32, kind: &str) {
    assert_eq!(
        out.status.code(),
        Some(code),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let stderr = String::from_utf8(out.stderr.clone()).unwrap();
    assert_eq!(stderr.trim_end().lines().count(), 1);
    let err: serde_json::Value = serde_json::from_str(stderr.trim_end()).unwrap();
    assert_eq!(err["error"], kind);
    assert!(err["message"].as_str().is_some_and(|m| !m.is_empty()));
}

#[test]
fn config_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let unknown = write(dir.path(), "u.toml", "trails = 10\n");
    assert_failure(
        &a2i(&["phase-transition", "--config", &unknown], dir.path()),
        2,
        "config",
    );
    let bad = write(dir.path(), "b.toml", "k_grid = [99]\n");
    assert_failure(
        &a2i(&["phase-transition", "--config", &bad], dir.path()),
        2,
        "config",
    );
    let other = write(dir.path(), "o.toml", "experiment = \"rejection-sweep\"\n");
    assert_failure(
        &a2i(&["phase-transition", "--config", &other], dir.path()),
        2,
        "config",
    );
    assert_failure(
        &a2i(
            &["phase-transition", "--config", "missing.toml"],
            dir.path(),
        ),
        2,
        "config",
    );
    assert_failure(
        &a2i(&["no-such-experiment", "--config", &bad], dir.path()),
        2,
        "config",
    );
    assert!(!dir.path().join("phase-transition.csv").exists());
}

#[test]
fn infeasible_experiments_exit_with_three() {
    let dir = tempfile::tempdir().unwrap();
    let wide = write(dir.path(), "w.toml", "gamma = 8\ntau = 4\n");
    assert_failure(
        &a2i(&["measure-recover", "--config", &wide], dir.path()),
        3,
        "infeasible",
    );
    assert_failure(
        &a2i(&["phase-transition", "--config", &wide], dir.path()),
        3,
        "infeasible",
    );
    let overlap = write(dir.path(), "o.toml", "kappa = 16\ntau = 5\n");
    assert_failure(
        &a2i(&["rejection-sweep", "--config", &overlap], dir.path()),
        3,
        "infeasible",
    );
}
