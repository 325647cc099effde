use std::path::PathBuf;

use einflow::runner::{run_checks, Check, RunConfig};
use einflow::scenarios::load_scenario_file;
use einflow::{Error, Status};

fn write(name: &str, text: &str) -> PathBuf {
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("scenario-files");
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path
}

#[test]
fn user_fields_are_checked_like_builtins() {
    let path = write(
        "mink_user.json",
        r#"{"name": "minkowski", "params": {},
            "killing_fields": [
              {"name": "screw", "components": ["0", "-y", "x", "1"]}
            ]}"#,
    );
    let s = load_scenario_file(&path).unwrap();
    assert!(s.field_names().contains(&"screw".to_string()));
    let mut cfg = RunConfig::new("minkowski", "screw", vec![Check::Killing, Check::Lemmas, Check::Fluid]);
    cfg.scenario_file = Some(path.clone());
    cfg.sample.count = 12;
    assert_eq!(run_checks(&cfg).unwrap().exit_code, 0);

    // declared fields must be Killing
    let shear = write("mink_shear.json", r#"{"name": "minkowski", "killing_fields": [{"name": "shear", "components": ["0", "y", "0", "0"]}]}"#);
    assert!(matches!(load_scenario_file(&shear), Err(Error::InvalidScenario { .. })));
}

#[test]
fn malformed_files_are_rejected() {
    let bad_expr = write("bad_expr.json", r#"{"name": "minkowski", "killing_fields": [{"name": "k", "components": ["sin(x)", "0", "0", "0"]}]}"#);
    assert!(matches!(load_scenario_file(&bad_expr), Err(Error::Expression { .. })));
    let short = write("short.json", r#"{"name": "minkowski", "killing_fields": [{"name": "k", "components": ["1", "0"]}]}"#);
    assert!(matches!(load_scenario_file(&short), Err(Error::InvalidScenario { .. })));
    let unknown = write("unknown.json", r#"{"name": "kerr"}"#);
    assert!(matches!(load_scenario_file(&unknown), Err(Error::UnknownScenario(_))));
    let junk = write("junk.json", "{ not json");
    assert!(matches!(load_scenario_file(&junk), Err(Error::Json(_))));
    assert!(matches!(load_scenario_file(std::path::Path::new("/nonexistent/x.json")), Err(Error::Io(_))));
}

#[test]
fn declared_coframe_drives_the_teleparallel_check() {
    // a rotated orthonormal coframe of Minkowski space
    let path = write(
        "coframe.json",
        r#"{"name": "minkowski",
            "coframe": [["1","0","0","0"], ["0","0.6","0.8","0"], ["0","-0.8","0.6","0"], ["0","0","0","1"]]}"#,
    );
    let mut cfg = RunConfig::new("minkowski", "phi", vec![Check::Teleparallel]);
    cfg.scenario_file = Some(path);
    cfg.sample.count = 8;
    let out = run_checks(&cfg).unwrap();
    assert_eq!(out.exit_code, 0);
    assert!(out.reports.iter().all(|r| r.status == Status::Pass));

    let skew = write(
        "skew.json",
        r#"{"name": "minkowski", "coframe": [["1","0","0","0"], ["0","2","0","0"], ["0","0","1","0"], ["0","0","0","1"]]}"#,
    );
    cfg.scenario_file = Some(skew);
    let out = run_checks(&cfg).unwrap();
    assert_eq!(out.exit_code, 1);
    assert!(out.reports[0].notes.iter().any(|n| n.contains("orthonormal")), "{:?}", out.reports[0].notes);
}

#[test]
fn spherical_teleparallel_frame_is_gauge_violated_not_failed() {
    let mut cfg = RunConfig::new("schwarzschild", "t", vec![Check::Teleparallel]);
    cfg.sample.count = 8;
    let out = run_checks(&cfg).unwrap();
    assert_eq!(out.exit_code, 0);
    assert!(out.reports.iter().any(|r| r.status == Status::GaugeViolated));
}

#[test]
fn komar_energy_report_carries_the_extrapolation_table() {
    let cfg = RunConfig::new("schwarzschild", "t", vec![Check::KomarEnergy]);
    let out = run_checks(&cfg).unwrap();
    let r = &out.reports[0];
    assert_eq!(r.check_id, "komar.energy");
    assert!((r.value.unwrap() - 1.0).abs() < 1e-6);
    assert_eq!(r.extrapolation.as_ref().unwrap().len(), 3);
    let json = einflow::report::reports_to_json(&out.reports).unwrap();
    assert!(json.contains("\"extrapolation\"") && json.contains("\"estimate\""));
}
