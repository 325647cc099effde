use std::process::Command;

fn einflow(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_einflow")).args(args).output().expect("binary runs")
}

#[test]
fn schwarzschild_time_translation_passes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = einflow(&[
        "verify", "--scenario", "schwarzschild", "--killing", "t",
        "--checks", "killing,lemmas,maxwell", "--seed", "7", "--out", out,
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let json = std::fs::read_to_string(dir.path().join("report.json")).unwrap();
    assert!(json.contains("\"check_id\": \"maxwell.dirac\""));
    let csv = std::fs::read_to_string(dir.path().join("report.csv")).unwrap();
    assert!(csv.starts_with("check_id,x0,x1,x2,x3,residual,tolerance,pass\n"));
}

#[test]
fn non_killing_field_fails_with_exit_one() {
    let o = einflow(&["verify", "--scenario", "schwarzschild", "--killing", "r_dr", "--checks", "killing"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stdout).contains("FAIL"));
}

#[test]
fn setup_errors_exit_two() {
    let o = einflow(&["verify", "--scenario", "kerr", "--killing", "t"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("unknown scenario"));
    let o = einflow(&["verify", "--scenario", "minkowski", "--killing", "t", "--checks", "nonsense"]);
    assert_eq!(o.status.code(), Some(2));
    let o = einflow(&["verify", "--scenario", "minkowski", "--killing", "t", "--tol", "killing=-1"]);
    assert_eq!(o.status.code(), Some(2));
    let o = einflow(&["verify", "--scenario", "schwarzschild", "--killing", "t", "--checks", "fluid"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn reports_are_byte_identical_across_runs() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for d in [&a, &b] {
        let o = einflow(&[
            "verify", "--scenario", "de_sitter", "--killing", "t", "--checks", "wave,komar-current",
            "--seed", "42", "--samples", "20", "--out", d.path().to_str().unwrap(),
        ]);
        assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stdout));
    }
    for f in ["report.json", "report.csv"] {
        assert_eq!(std::fs::read(a.path().join(f)).unwrap(), std::fs::read(b.path().join(f)).unwrap());
    }
}

#[test]
fn config_file_drives_a_run() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    let json_out = dir.path().join("nested/out.json");
    std::fs::write(
        &cfg,
        format!(
            r#"{{"scenario":"minkowski","killing":"phi","checks":["fluid","navier-stokes"],
               "sample":{{"count":8,"seed":3}},"output":{{"json":{:?}}}}}"#,
            json_out
        ),
    )
    .unwrap();
    let o = einflow(&["verify", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(json_out.exists());
}

#[test]
fn komar_recovers_mass_parameter() {
    let o = einflow(&["komar", "--scenario", "schwarzschild", "--killing", "t", "--param", "m=2"]);
    assert_eq!(o.status.code(), Some(0));
    let text = String::from_utf8_lossy(&o.stdout);
    let last = text.lines().last().unwrap();
    let value: f64 = last.split_whitespace().last().unwrap().parse().unwrap();
    assert!((value - 2.0).abs() < 1e-6, "{text}");
}

#[test]
fn list_scenarios_names_builtins() {
    let o = einflow(&["list-scenarios"]);
    let text = String::from_utf8_lossy(&o.stdout);
    for name in ["minkowski", "schwarzschild", "de_sitter"] {
        assert!(text.contains(name));
    }
}
