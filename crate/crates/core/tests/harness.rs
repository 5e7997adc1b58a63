mod common;

use std::path::Path;

use common::{configs_dir, CASE_FORMULA};
use tlswitch::harness::{run_case, ExperimentConfig, HarnessError, RunOptions};

fn small_config(extra: &str) -> ExperimentConfig {
    let text = format!(
        r#"{{"name":"small","grid":"grid8x8.json","formula":"{CASE_FORMULA}",
            "pr_des":0.7,"epsilon_agent":0.2,"episodes":60,"runs":2,"seed":9,
            "window":10,"mc_trials":2000,"report_cells":["1:1","1:5"]{extra}}}"#
    );
    ExperimentConfig::from_json(&text, &configs_dir()).unwrap()
}

fn quick() -> RunOptions {
    RunOptions {
        gnuplot: false,
        skip_timing: true,
    }
}

fn manifest(dir: &Path) -> String {
    std::fs::read_to_string(dir.join("MANIFEST")).unwrap()
}

#[test]
fn bundled_configs_load() {
    for entry in std::fs::read_dir(configs_dir()).unwrap() {
        let path = entry.unwrap().path();
        let name = path.file_name().unwrap().to_string_lossy().to_string();
        if name.starts_with("grid") {
            continue;
        }
        let cfg = ExperimentConfig::load(&path).unwrap_or_else(|e| panic!("{name}: {e}"));
        cfg.check_files().unwrap();
    }
}

#[test]
fn small_case_writes_artifacts_and_validates() {
    let dir = tempfile::tempdir().unwrap();
    let report = run_case(&small_config(""), dir.path(), quick()).unwrap();
    assert_eq!(report.horizon, 62);
    assert_eq!(report.assumption_violations, 0);
    let training = report.training.as_ref().unwrap();
    assert_eq!(training.runs, 2);
    assert!(!report.mc_validation.is_empty());
    assert!(report.mc_validation.iter().all(|r| r.valid));
    for f in ["bounds.csv", "curves.csv", "mc_validation.csv", "report.json", "run_00/episodes.csv", "run_01/qtable.json"] {
        assert!(dir.path().join(f).is_file(), "{f}");
    }
    let m = manifest(dir.path());
    assert!(m.starts_with("status: ok\n"));
    assert!(m.contains("  bounds.csv\n"));
    assert!(!m.contains("timing.csv"));
}

#[test]
fn reruns_are_byte_identical() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    run_case(&small_config(""), a.path(), quick()).unwrap();
    run_case(&small_config(""), b.path(), quick()).unwrap();
    assert_eq!(manifest(a.path()), manifest(b.path()));
}

#[test]
fn failed_stage_is_recorded() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = small_config(r#","bound_method":"closed""#);
    cfg.pr_des = 0.99999;
    let err = run_case(&cfg, dir.path(), quick()).unwrap_err();
    match &err {
        HarnessError::Stage { stage, .. } => assert_eq!(stage, "train"),
        other => panic!("{other}"),
    }
    let m = manifest(dir.path());
    assert!(m.starts_with("status: failed at train:"), "{m}");
    assert!(m.contains("  bounds.csv\n"));
}

#[test]
fn unknown_config_fields_are_rejected() {
    let text = r#"{"name":"x","grid":"grid8x8.json","formula":"H^0 P","pr_des":0.5,"epsilon_agent":0.1,"bogus":1}"#;
    assert!(ExperimentConfig::from_json(text, &configs_dir()).is_err());
}
