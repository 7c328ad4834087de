//! End-to-end runs of the command-line front end and the run orchestration.

use std::fs;
use std::path::Path;
use std::process::Command as Process;

use fractunnel::checkpoint;
use fractunnel::cli::{self, compute_sweep, read_rate_table, slopes_from_tables, Command, PointStatus, Protocol, RunConfig};
use fractunnel::model::{FractionalOrder, SoftCore, SystemSpec};
use fractunnel::prop::energy_expectation;

const BIN: &str = env!("CARGO_BIN_EXE_fractunnel");

/// Small, fast configuration: a coarse box and strong fields.
fn small_config() -> RunConfig {
    RunConfig::from_json_str(
        r#"{
            "grid": {"half_width": 50.0, "points": 512},
            "system": {"alphas": [1.5, 2.0]},
            "field": {"f0": [0.08, 0.09, 0.1], "f_ref": 0.09},
            "propagation": {"dt": 0.02, "total_time": 300.0, "observer_stride": 25},
            "ground_state": {"tol": 1e-9}
        }"#,
    )
    .unwrap()
}

fn csv_files(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<(String, Vec<u8>)> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "csv"))
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), fs::read(&p).unwrap()))
        .collect();
    files.sort();
    files
}

#[test]
fn repeated_runs_give_identical_tables() {
    let cfg = small_config();
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    let ra = cli::run(&cfg, Command::Sweep(Protocol::A), &a).unwrap();
    let rb = cli::run(&cfg, Command::Sweep(Protocol::A), &b).unwrap();
    assert!(ra.succeeded(), "{:?}", ra.failures);
    assert_eq!(ra.config_hash, rb.config_hash);
    let (fa, fb) = (csv_files(&a), csv_files(&b));
    assert!(fa.iter().any(|(n, _)| n == "rates.csv"));
    assert!(fa.iter().any(|(n, _)| n == "slopes.csv"));
    assert!(fa.iter().any(|(n, _)| n == "comparison.csv"));
    assert_eq!(fa, fb);

    for (_, bytes) in &fa {
        let first = String::from_utf8_lossy(bytes).lines().next().unwrap().to_string();
        assert!(first.ends_with(&format!("config={}", ra.config_hash)), "{first}");
    }
    let table = read_rate_table(&a.join("rates.csv")).unwrap();
    assert_eq!(table.rows.len(), 6);
    assert!(table.rows.iter().all(|r| r.status == PointStatus::Ok));
    assert_eq!(slopes_from_tables(&[&a.join("rates.csv")]).unwrap().len(), 2);
}

#[test]
fn results_do_not_depend_on_thread_count() {
    let cfg = small_config();
    let alphas = [FractionalOrder::new(1.5).unwrap(), FractionalOrder::STANDARD];
    let run = |threads| {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        pool.install(|| compute_sweep(&cfg, Protocol::A, &alphas, true).unwrap())
    };
    let (one, three) = (run(1), run(3));
    let gammas = |s: &cli::SweepResult| s.points.iter().map(|p| (p.alpha, p.f0, p.gamma())).collect::<Vec<_>>();
    assert_eq!(gammas(&one), gammas(&three));
    assert_eq!(one.slopes, three.slopes);
}

#[test]
fn mixed_configurations_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = small_config();
    cfg.system.alphas = Some(vec![2.0]);
    cli::run(&cfg, Command::Propagate, &dir.path().join("a")).unwrap();
    cfg.field.f0 = vec![0.085];
    cli::run(&cfg, Command::Propagate, &dir.path().join("b")).unwrap();
    let a = dir.path().join("a/rates.csv");
    let b = dir.path().join("b/rates.csv");
    assert!(matches!(
        slopes_from_tables(&[&a, &b]),
        Err(fractunnel::Error::ConfigMismatch(..))
    ));
}

#[test]
fn ground_state_command_writes_checkpoint_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let cfg_path = dir.path().join("cfg.json");
    fs::write(&cfg_path, r#"{"grid": {"half_width": 40.0, "points": 512}}"#).unwrap();
    let out = dir.path().join("gs");
    let status = Process::new(BIN)
        .args(["ground-state", "--alpha", "1.5", "--config"])
        .arg(&cfg_path)
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());

    let summary: serde_json::Value = serde_json::from_slice(&fs::read(out.join("ground_state_alpha1.5.json")).unwrap()).unwrap();
    let e0 = summary["e0"].as_f64().unwrap();
    assert_eq!(summary["alpha"].as_f64(), Some(1.5));
    assert!(summary["config_hash"].as_str().unwrap().len() == 64);

    let (header, psi) = checkpoint::read(&out.join("psi0_alpha1.5.wf")).unwrap();
    assert_eq!((header.n, header.half_width, header.alpha), (512, 40.0, 1.5));
    let alpha = FractionalOrder::new(1.5).unwrap();
    let e = energy_expectation(&psi, &SystemSpec::field_free(alpha, SoftCore::new(1.0, 1.0).unwrap())).unwrap();
    assert!((e - e0).abs() < 1e-12);

    let provenance: serde_json::Value = serde_json::from_slice(&fs::read(out.join("provenance.json")).unwrap()).unwrap();
    assert_eq!(provenance["command"], "ground-state");
    assert!(provenance["started_unix"].as_f64().unwrap() > 0.0);
}

#[test]
fn over_barrier_fields_fail_without_override() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("ob");
    let status = Process::new(BIN)
        .args([
            "propagate", "--half-width", "50", "--points", "512", "--dt", "0.02", "--total-time", "200", "--f0", "0.09,0.2",
        ])
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(1));
    let table = read_rate_table(&out.join("rates.csv")).unwrap();
    let statuses: Vec<PointStatus> = table.rows.iter().map(|r| r.status).collect();
    assert_eq!(statuses, [PointStatus::Ok, PointStatus::Rejected]);

    let mut cfg = small_config();
    cfg.system.alphas = Some(vec![2.0]);
    cfg.field.f0 = vec![0.2];
    cfg.field.allow_over_barrier = true;
    let sweep = compute_sweep(&cfg, Protocol::A, &[FractionalOrder::STANDARD], false).unwrap();
    assert_ne!(sweep.points[0].status, PointStatus::Rejected);
    assert!(sweep.points[0].trace.is_some());
}

#[test]
fn invalid_configuration_exits_with_error() {
    let dir = tempfile::tempdir().unwrap();
    let status = Process::new(BIN)
        .args(["calibrate", "--points", "512"])
        .arg("--out")
        .arg(dir.path())
        .status()
        .unwrap();
    // no ip_target
    assert_eq!(status.code(), Some(2));
    let status = Process::new(BIN)
        .args(["fadk-curves", "--points", "1000"])
        .arg("--out")
        .arg(dir.path())
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(2));
}

#[test]
fn fadk_curves_command() {
    let dir = tempfile::tempdir().unwrap();
    let status = Process::new(BIN)
        .args(["fadk-curves", "--f0", "0.025,0.05,0.1"])
        .arg("--out")
        .arg(dir.path())
        .status()
        .unwrap();
    assert!(status.success());
    let text = fs::read_to_string(dir.path().join("fadk_curves.csv")).unwrap();
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("# fractunnel schema=fadk_curves/v1 config="));
    assert_eq!(lines.next(), Some("alpha,Ip,C_alpha,inv_F0,minus_ln_gamma"));
    assert_eq!(lines.count(), 9);
}

#[test]
fn calibrate_command_hits_target() {
    let dir = tempfile::tempdir().unwrap();
    let status = Process::new(BIN)
        .args(["calibrate", "--alpha", "1.4", "--ip-target", "0.67", "--half-width", "60", "--points", "1024"])
        .arg("--out")
        .arg(dir.path())
        .status()
        .unwrap();
    assert!(status.success());
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_path(dir.path().join("calibration.csv"))
        .unwrap();
    let rows: Vec<cli::CalibrationRow> = reader.deserialize().collect::<Result<_, _>>().unwrap();
    assert_eq!(rows.len(), 1);
    assert!((rows[0].achieved_ip - 0.67).abs() < 1e-4);
    assert!(dir.path().join("psi0_alpha1.4.wf").exists());
}
