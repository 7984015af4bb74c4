use osdrb::experiment::oracle::{run_suite, run_suites, ORACLE_TOL, SUITES};
use osdrb::experiment::*;
use osdrb::Error;
use std::path::Path;

fn oscillator_config() -> ExperimentConfig {
    ExperimentConfig::from_path(Path::new(concat!(env!("CARGO_MANIFEST_DIR"), "/../../configs/oscillator_min.toml"))).unwrap()
}

fn config_error(text: &str) -> String {
    match ExperimentConfig::from_toml(text) {
        Err(Error::Config(msg)) => msg,
        other => panic!("expected a config error, got {other:?}"),
    }
}

const BASE: &str = r#"
[model]
name = "oscillator"
m = 8

[parameters]
ranges = [[-0.5, 0.5], [2.0, 8.0]]
samples = [2, 2]

[reduction]
sizes = [2]

[time]
dt = 0.1
final_time = 1.0
"#;

#[test]
fn shipped_configs_validate() {
    let desk = ExperimentConfig::from_path(Path::new(concat!(env!("CARGO_MANIFEST_DIR"), "/../../configs/swe_desk.toml"))).unwrap();
    assert_eq!(desk.reduction.sizes, vec![6, 8, 10, 12]);
    assert_eq!(desk.parameter_grid().unwrap().len(), 16);
    oscillator_config().validate().unwrap();
}

#[test]
fn toml_roundtrip() {
    let cfg = oscillator_config();
    assert_eq!(ExperimentConfig::from_toml(&cfg.to_toml()).unwrap(), cfg);
}

#[test]
fn syntax_errors_report_the_line() {
    let msg = config_error("[model]\nname = \"swe\"\ngrid_points = \n");
    assert!(msg.contains("line 3"), "{msg}");
    let msg = config_error(&BASE.replace("m = 8", "m = \"eight\""));
    assert!(msg.contains("line"), "{msg}");
}

#[test]
fn unknown_fields_are_rejected() {
    let msg = config_error(&format!("{BASE}\n[extra]\nx = 1\n"));
    assert!(msg.contains("extra"), "{msg}");
    let msg = config_error(&BASE.replace("m = 8", "m = 8\ncolour = 1"));
    assert!(msg.contains("colour"), "{msg}");
}

#[test]
fn semantic_errors_name_the_field() {
    for (from, to, key) in [
        ("sizes = [2]", "sizes = [3]", "reduction.sizes"),
        ("sizes = [2]", "sizes = [18]", "reduction.sizes"),
        ("dt = 0.1", "dt = -0.1", "time.dt"),
        ("final_time = 1.0", "final_time = 1.05", "time.final_time"),
        ("name = \"oscillator\"", "name = \"kdv\"", "model.name"),
        ("samples = [2, 2]", "samples = [0, 2]", "parameters"),
        ("sizes = [2]", "sizes = [2]\nbasis_method = \"qr\"", "reduction.basis_method"),
        ("sizes = [2]", "sizes = [2]\ntableau = \"rk9\"", "reduction.tableau"),
    ] {
        let msg = config_error(&BASE.replace(from, to));
        assert!(msg.contains(key), "{key}: {msg}");
    }
    ExperimentConfig::from_toml(BASE).unwrap();
}

#[test]
fn scale_presets() {
    let mut cfg = ExperimentConfig::from_path(Path::new(concat!(env!("CARGO_MANIFEST_DIR"), "/../../configs/swe_desk.toml"))).unwrap();
    cfg.apply_scale(Scale::Paper);
    assert_eq!(cfg.model.grid_points, 1000);
    assert_eq!(cfg.parameter_grid().unwrap().len(), 100);
    assert_eq!(cfg.time.final_time, 7.0);
    cfg.validate().unwrap();
    cfg.apply_scale(Scale::Desk);
    assert_eq!(cfg.model.grid_points, 256);
}

#[test]
fn gauge_is_symmetric_and_structured() {
    let g = gauge(3, 0.5).unwrap();
    let s = g.matrix();
    assert_eq!(s, &s.transpose());
    assert_eq!(s[(0, 0)], 0.5);
    assert_eq!(s[(3, 3)], -0.5);
}

#[test]
fn oscillator_run_produces_artifacts() {
    let cfg = oscillator_config();
    let summary = run_experiment(&cfg).unwrap();
    assert_eq!(summary.errors.len(), 4);
    for two_k in [4, 6] {
        assert!(summary.error_of("dynamical-rkmk-cay", two_k).is_some());
        assert!(summary.error_of("global", two_k).is_some());
    }
    assert!(summary.manifold_gate_passed);
    let dir = tempfile::tempdir().unwrap();
    write_artifacts(&cfg, &summary, dir.path()).unwrap();
    let errors = std::fs::read_to_string(dir.path().join("errors.csv")).unwrap();
    assert_eq!(errors.lines().next().unwrap(), "method,2k,runtime_seconds,frobenius_error_at_T");
    assert_eq!(errors.lines().count(), 5);
    let drift = std::fs::read_to_string(dir.path().join("hamiltonian_drift.csv")).unwrap();
    assert_eq!(drift.lines().next().unwrap(), "method,2k,time,drift,per_parameter_drift");
    let steps = std::fs::read_to_string(dir.path().join("steps.csv")).unwrap();
    assert!(steps.starts_with("method,2k,step,time,dt,orth_defect,sympl_defect"));
    // 50 steps for each of two sizes
    assert_eq!(steps.lines().count(), 1 + 100);
    let meta: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("meta.json")).unwrap()).unwrap();
    assert_eq!(meta["seed"], 7);
    assert!(meta["conventions"]["drift"].is_string());
    assert!(meta["summary"]["max_manifold_defect"].as_f64().unwrap() <= 1e-10);
    assert!(meta["config"]["model"]["name"] == "oscillator");
    let leftovers: Vec<_> = std::fs::read_dir(dir.path()).unwrap().map(|e| e.unwrap().file_name()).collect();
    assert_eq!(leftovers.len(), 4, "{leftovers:?}");
}

#[test]
fn reruns_are_bitwise_identical() {
    let cfg = oscillator_config();
    let a = run_experiment(&cfg).unwrap();
    let b = run_experiment(&cfg).unwrap();
    assert_eq!(csv_bytes(&a.drift, &DRIFT_HEADER).unwrap(), csv_bytes(&b.drift, &DRIFT_HEADER).unwrap());
    assert_eq!(csv_bytes(&a.steps, &STEPS_HEADER).unwrap(), csv_bytes(&b.steps, &STEPS_HEADER).unwrap());
    // runtimes differ; the error column must not
    let errs = |s: &RunSummary| s.errors.iter().map(|e| (e.method.clone(), e.two_k, e.frobenius_error_at_t.to_bits())).collect::<Vec<_>>();
    assert_eq!(errs(&a), errs(&b));
}

#[test]
fn atomic_writes_replace_whole_files() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("x.csv");
    write_atomic(&path, b"first").unwrap();
    write_atomic(&path, b"second").unwrap();
    assert_eq!(std::fs::read(&path).unwrap(), b"second");
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
}

#[test]
fn scaling_bench_single_m_gives_one_row_per_method() {
    let mut cfg = oscillator_config();
    cfg.scaling.m_values = vec![64];
    let r = run_scaling_bench(&cfg).unwrap();
    assert_eq!(r.rows.len(), 2);
    assert!(r.rows.iter().all(|row| row.median_ns > 0.0 && row.iqr_ns >= 0.0));
    assert!(r.slopes.iter().all(|(_, s)| s.is_nan()));
    let dir = tempfile::tempdir().unwrap();
    write_scaling(&r, dir.path()).unwrap();
    let text = std::fs::read_to_string(dir.path().join("scaling.csv")).unwrap();
    assert_eq!(text.lines().next().unwrap(), "m,method,median_ns,iqr_ns");
}

#[test]
fn oracle_suites_pass_on_a_small_sample() {
    let out = run_suites("all", 20, 3).unwrap();
    assert_eq!(out.len(), SUITES.len());
    for o in &out {
        assert!(o.pass && o.max_rel_error <= ORACLE_TOL, "{o:?}");
    }
    assert!(run_suite("nope", 1, 0).is_err());
}
