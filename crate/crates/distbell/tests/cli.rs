use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use distbell::experiments::run_at;
use distbell::{ExperimentConfig, ExperimentName, ExperimentReport};
use serde_json::Value;

fn distbell(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_distbell")).args(args).env_remove("DISTBELL_OUT").output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn read_report(dir: &Path, e: &str) -> Value {
    serde_json::from_str(&fs::read_to_string(dir.join(e).join("report.json")).unwrap()).unwrap()
}

fn schema(name: &str) -> jsonschema::JSONSchema {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("schema").join(name);
    let v: Value = serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap();
    jsonschema::JSONSchema::compile(&v).unwrap()
}

/// Configs small enough for a debug-profile test run.
fn quick(e: ExperimentName) -> ExperimentConfig {
    let mut c = ExperimentConfig::new(e);
    let p = &mut c.params;
    p.instances = 10;
    p.cases = 200;
    p.gradient_cases = 50;
    p.atoms = vec![2, 5];
    p.seeds = 2;
    p.sweeps = 20;
    p.sampled_sweeps = Some(20);
    p.eval_every = 10;
    p.rollouts = Some(200);
    p.horizon = Some(200);
    c
}

#[test]
fn list_prints_every_experiment() {
    let o = distbell(&["list"]);
    assert_eq!(code(&o), 0);
    let text = String::from_utf8(o.stdout).unwrap();
    assert_eq!(text.lines().count(), 7);
    for e in ExperimentName::ALL {
        assert!(text.lines().any(|l| l.starts_with(e.as_str())), "{e} missing");
    }
}

#[test]
fn noncontraction_run_reports_the_numbers() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = distbell(&["run", "--experiment", "noncontraction_demo", "--epsilon", "0.1", "--out", out]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let r = read_report(dir.path(), "noncontraction_demo");
    let res = &r["results"]["noncontraction"];
    assert!((res["d1_before"].as_f64().unwrap() - 0.2).abs() <= 1e-12);
    assert!((res["d1_after"].as_f64().unwrap() - 1.0).abs() <= 1e-12);
    assert_eq!(r["passed"], Value::Bool(true));
}

#[test]
fn usage_and_config_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    assert_eq!(code(&distbell(&["run", "--experiment", "cliffwalk_atoms", "--atoms", "1", "--out", out])), 2);
    assert_eq!(code(&distbell(&["run", "--experiment", "nope", "--out", out])), 2);
    assert_eq!(code(&distbell(&["run", "--out", out])), 2);
    assert_eq!(code(&distbell(&["frobnicate"])), 2);
    assert_eq!(code(&distbell(&["run", "--experiment", "noncontraction_demo", "--epsilon", "2", "--out", out])), 2);

    let bad = dir.path().join("bad.json");
    fs::write(&bad, "{ not json").unwrap();
    assert_eq!(code(&distbell(&["run", "--config", bad.to_str().unwrap()])), 2);
    assert_eq!(code(&distbell(&["validate", "--config", bad.to_str().unwrap()])), 2);
    assert_eq!(code(&distbell(&["validate", "--config", "/nonexistent/config.json"])), 2);

    // a regular file where the output directory should be
    let blocker = dir.path().join("file");
    fs::write(&blocker, "").unwrap();
    let o = distbell(&["run", "--experiment", "noncontraction_demo", "--out", blocker.to_str().unwrap()]);
    assert_eq!(code(&o), 2);
}

#[test]
fn validate_accepts_a_good_config() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("c.json");
    fs::write(&path, r#"{"experiment": "cliffwalk_atoms", "seed": 3, "params": {"atoms": [2, 51], "jobs": 2}}"#).unwrap();
    let o = distbell(&["validate", "--config", path.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    assert!(String::from_utf8(o.stdout).unwrap().contains("cliffwalk_atoms"));
    fs::write(&path, r#"{"experiment": "cliffwalk_atoms", "params": {"atoms": [1]}}"#).unwrap();
    assert_eq!(code(&distbell(&["validate", "--config", path.to_str().unwrap()])), 2);
}

#[test]
fn failed_expectation_exits_one() {
    // The variance bound does not hold on the random battery.
    let dir = tempfile::tempdir().unwrap();
    let mut c = quick(ExperimentName::ContractionSuite);
    c.out = Some(dir.path().to_path_buf());
    let path = dir.path().join("c.json");
    fs::write(&path, serde_json::to_string(&c).unwrap()).unwrap();
    let o = distbell(&["run", "--config", path.to_str().unwrap()]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8(o.stdout).unwrap().contains("FAIL contraction.variance"));
}

#[test]
fn flags_override_the_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("c.json");
    fs::write(&path, r#"{"experiment": "noncontraction_demo", "seed": 5, "params": {"epsilon": 0.3}}"#).unwrap();
    let out = dir.path().to_str().unwrap();
    let o = distbell(&["run", "--config", path.to_str().unwrap(), "--epsilon", "0.25", "--out", out]);
    assert_eq!(code(&o), 0);
    let r = read_report(dir.path(), "noncontraction_demo");
    assert_eq!(r["config"]["params"]["epsilon"].as_f64(), Some(0.25));
    assert_eq!(r["config"]["seed"].as_u64(), Some(5));
    assert!((r["results"]["noncontraction"]["d1_before"].as_f64().unwrap() - 0.5).abs() < 1e-12);
}

#[test]
fn output_directory_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_distbell"))
        .args(["run", "--experiment", "oscillation_demo"])
        .env("DISTBELL_OUT", dir.path())
        .output()
        .unwrap();
    assert_eq!(code(&o), 0);
    assert!(dir.path().join("oscillation_demo/report.json").exists());
}

fn files_of(dir: &Path, report: &ExperimentReport) -> Vec<(String, Vec<u8>)> {
    report.files.iter().map(|f| (f.clone(), fs::read(dir.join(f)).unwrap())).collect()
}

#[test]
fn reports_are_reproducible_and_valid() {
    let report_schema = schema("report.schema.json");
    let config_schema = schema("config.schema.json");
    for e in ExperimentName::ALL {
        let config = quick(e);
        let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
        let ra = run_at(&config, a.path()).unwrap();
        let rb = run_at(&config, b.path()).unwrap();
        assert_eq!(ra.reproducible_json(), rb.reproducible_json(), "{e}: reports differ");
        let da = a.path().join(e.as_str());
        let db = b.path().join(e.as_str());
        assert_eq!(files_of(&da, &ra), files_of(&db, &rb), "{e}: artifacts differ");

        let on_disk: Value = serde_json::from_str(&fs::read_to_string(da.join("report.json")).unwrap()).unwrap();
        if let Err(errors) = report_schema.validate(&on_disk) {
            let msgs: Vec<String> = errors.map(|x| format!("{x} at {}", x.instance_path)).collect();
            panic!("{e}: report violates schema: {msgs:?}");
        }
        assert!(config_schema.is_valid(&on_disk["config"]), "{e}: config echo violates schema");
        assert_eq!(ra.expectations.iter().all(|x| x.passed), ra.passed);
    }
}

#[test]
fn jobs_do_not_change_results() {
    let mut c = quick(ExperimentName::CliffwalkAtoms);
    let one = run_at(&c, tempfile::tempdir().unwrap().path()).unwrap();
    c.params.jobs = 3;
    let three = run_at(&c, tempfile::tempdir().unwrap().path()).unwrap();
    let strip = |r: &ExperimentReport| {
        let mut v = r.reproducible_json();
        v["config"]["params"]["jobs"] = Value::Null;
        v
    };
    assert_eq!(strip(&one), strip(&three));
}

#[test]
fn config_schema_agrees_with_the_parser() {
    let s = schema("config.schema.json");
    let cases = [
        (r#"{"experiment": "cliffwalk_atoms"}"#, true),
        (r#"{"experiment": "fixed_point_check", "seed": 1, "out": "x", "params": {"tol": 1e-8, "rollouts": null}}"#, true),
        (r#"{"experiment": "cliffwalk_atoms", "extra": 1}"#, false),
        (r#"{"experiment": "unknown"}"#, false),
        (r#"{"seed": 1}"#, false),
        (r#"{"experiment": "cliffwalk_atoms", "params": {"atoms": [1]}}"#, false),
        (r#"{"experiment": "cliffwalk_atoms", "params": {"jobs": 0}}"#, false),
        (r#"{"experiment": "cliffwalk_atoms", "params": {"bogus": 0}}"#, false),
    ];
    for (text, ok) in cases {
        let v: Value = serde_json::from_str(text).unwrap();
        assert_eq!(s.is_valid(&v), ok, "schema on {text}");
        let parsed = ExperimentConfig::from_json(text).and_then(|c| c.validate());
        assert_eq!(parsed.is_ok(), ok, "parser on {text}");
    }
}

#[test]
fn report_files_use_documented_headers() {
    let dir = tempfile::tempdir().unwrap();
    let r = run_at(&quick(ExperimentName::CliffwalkAtoms), dir.path()).unwrap();
    let base = dir.path().join("cliffwalk_atoms");
    let curve = r.files.iter().find(|f| f.starts_with("curves/")).unwrap();
    let text = fs::read_to_string(base.join(curve)).unwrap();
    assert_eq!(text.lines().next(), Some("sweep,mean_d1,max_d1,loss"));
    let cdf = r.files.iter().find(|f| f.starts_with("cdf/")).unwrap();
    let text = fs::read_to_string(base.join(cdf)).unwrap();
    assert_eq!(text.lines().next(), Some("atom,prob"));
    let states = r.results["cliffwalk_atoms"]["dumped_states"].as_array().unwrap();
    assert_eq!(states.len(), 5);
    let logits = r.files.iter().find(|f| f.starts_with("logits/")).unwrap();
    let v: Value = serde_json::from_str(&fs::read_to_string(base.join(logits)).unwrap()).unwrap();
    assert!(v.is_object());
}
