//! Batch execution of check suites from a run configuration.

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::komar::{komar_current, komar_energy_report, SphereOrientation, SphereQuadrature};
use crate::report::{export_report, reports_to_csv, reports_to_json, ResidualReport, Status};
use crate::scenarios::{load_scenario, load_scenario_file, KillingField, Scenario};
use crate::{bimetric, fluid, killing};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Check {
    Killing,
    Lemmas,
    Wave,
    Maxwell,
    Teleparallel,
    KomarCurrent,
    KomarEnergy,
    Fluid,
    Helmholtz,
    NavierStokes,
    FRelation,
    Bimetric,
    ConstraintLast,
}

impl Check {
    pub const ALL: [Check; 13] = [
        Check::Killing,
        Check::Lemmas,
        Check::Wave,
        Check::Maxwell,
        Check::Teleparallel,
        Check::KomarCurrent,
        Check::KomarEnergy,
        Check::Fluid,
        Check::Helmholtz,
        Check::NavierStokes,
        Check::FRelation,
        Check::Bimetric,
        Check::ConstraintLast,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Check::Killing => "killing",
            Check::Lemmas => "lemmas",
            Check::Wave => "wave",
            Check::Maxwell => "maxwell",
            Check::Teleparallel => "teleparallel",
            Check::KomarCurrent => "komar-current",
            Check::KomarEnergy => "komar-energy",
            Check::Fluid => "fluid",
            Check::Helmholtz => "helmholtz",
            Check::NavierStokes => "navier-stokes",
            Check::FRelation => "f-relation",
            Check::Bimetric => "bimetric",
            Check::ConstraintLast => "constraint-last",
        }
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Check {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().replace('_', "-");
        Check::ALL
            .into_iter()
            .find(|c| c.name() == key)
            .ok_or_else(|| Error::Config(format!("unknown check `{s}`")))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SampleConfig {
    pub count: usize,
    pub seed: u64,
    /// Overrides the scenario's radial range.
    pub r: Option<(f64, f64)>,
    pub t: Option<(f64, f64)>,
}

impl Default for SampleConfig {
    fn default() -> Self {
        SampleConfig {
            count: 100,
            seed: 0,
            r: None,
            t: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct KomarConfig {
    pub radii: Vec<f64>,
    pub n_theta: usize,
    pub n_phi: usize,
    pub orientation: SphereOrientation,
}

impl Default for KomarConfig {
    fn default() -> Self {
        KomarConfig {
            radii: vec![50.0, 100.0, 200.0],
            n_theta: 32,
            n_phi: 64,
            orientation: SphereOrientation::default(),
        }
    }
}

impl KomarConfig {
    pub fn quadrature(&self) -> SphereQuadrature {
        let mut q = SphereQuadrature::new(self.radii.clone(), self.n_theta, self.n_phi);
        q.orientation = self.orientation;
        q
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OutputConfig {
    pub json: Option<PathBuf>,
    pub csv: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub scenario: String,
    #[serde(default)]
    pub params: BTreeMap<String, f64>,
    /// User scenario JSON; takes precedence over `scenario`.
    #[serde(default)]
    pub scenario_file: Option<PathBuf>,
    pub killing: String,
    pub checks: Vec<Check>,
    #[serde(default)]
    pub sample: SampleConfig,
    /// Overrides keyed by check id or check id prefix.
    #[serde(default)]
    pub tolerances: BTreeMap<String, f64>,
    #[serde(default)]
    pub komar: KomarConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

impl RunConfig {
    pub fn new(scenario: &str, killing: &str, checks: Vec<Check>) -> Self {
        RunConfig {
            scenario: scenario.into(),
            params: BTreeMap::new(),
            scenario_file: None,
            killing: killing.into(),
            checks,
            sample: SampleConfig::default(),
            tolerances: BTreeMap::new(),
            komar: KomarConfig::default(),
            output: OutputConfig::default(),
        }
    }

    pub fn from_file(path: &std::path::Path) -> Result<Self> {
        Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
    }

    pub fn validate(&self) -> Result<()> {
        if self.checks.is_empty() {
            return Err(Error::Config("the checks list is empty".into()));
        }
        if self.sample.count == 0 {
            return Err(Error::Config("sample count must be positive".into()));
        }
        if let Some((k, v)) = self.tolerances.iter().find(|(_, v)| !(v.is_finite() && **v > 0.0)) {
            return Err(Error::Config(format!("tolerance for `{k}` must be positive, got {v}")));
        }
        if let Some((lo, hi)) = self.sample.r {
            if !(lo > 0.0 && hi > lo) {
                return Err(Error::Config(format!("invalid radial range ({lo}, {hi})")));
            }
        }
        Ok(())
    }
}

/// Reports of a run and the process exit code they imply.
#[derive(Clone, Debug)]
pub struct RunOutcome {
    pub reports: Vec<ResidualReport>,
    /// 0 if every report passes, 1 otherwise.
    pub exit_code: i32,
}

/// Errors that stop a run before any check executes (exit code 2).
fn is_setup_error(e: &Error) -> bool {
    matches!(
        e,
        Error::Config(_)
            | Error::UnknownScenario(_)
            | Error::UnknownField { .. }
            | Error::InvalidScenario { .. }
            | Error::Expression { .. }
            | Error::MissingEnergyMomentum(_)
            | Error::ChartMismatch(_)
            | Error::Io(_)
            | Error::Json(_)
    )
}

fn failed_report(check: Check, s: &Scenario, k: &KillingField, e: &Error) -> ResidualReport {
    let mut r = ResidualReport::from_points(check.name(), &s.name, &k.name, 0.0, Vec::new());
    r.max_residual = f64::NAN;
    r.mean_residual = f64::NAN;
    r.pass = false;
    r.status = Status::Fail;
    r.with_note(e.to_string())
}

fn run_one(check: Check, s: &Scenario, k: &KillingField, cfg: &RunConfig, points: &[crate::geometry::Point]) -> Result<Vec<ResidualReport>> {
    Ok(match check {
        Check::Killing => vec![killing::killing_residual(s, k, points)?],
        Check::Lemmas => killing::lemma_residuals(s, k, points)?,
        Check::Wave => killing::wave_equation_residual(s, k, points)?,
        Check::Maxwell => killing::maxwell_like_residuals(s, k, points)?.reports,
        Check::Teleparallel => {
            let coframe = s
                .coframe
                .as_ref()
                .ok_or_else(|| Error::Config(format!("scenario `{}` declares no coframe", s.name)))?;
            killing::teleparallel_split(s, k, coframe, points)?
        }
        Check::KomarCurrent => komar_current(s, k, points)?,
        Check::KomarEnergy => vec![komar_energy_report(s, k, &cfg.komar.quadrature())?],
        Check::Fluid => fluid::fluid_fields(s, k, points)?.1,
        Check::Helmholtz => fluid::helmholtz_residual(&fluid::decompose_potential(s, k)?, points)?,
        Check::NavierStokes => {
            let (state, _) = fluid::fluid_fields(s, k, points)?;
            vec![fluid::navier_stokes_residual(&state, points)?]
        }
        Check::FRelation => fluid::f_ring_relation(s, k, points)?,
        Check::Bimetric => bimetric::bimetric_reports(s, k, points)?,
        Check::ConstraintLast => bimetric::constraint_last_residual(s, k, points)?,
    })
}

fn tolerance_for<'a>(id: &str, overrides: &'a BTreeMap<String, f64>) -> Option<&'a f64> {
    overrides.get(id).or_else(|| {
        overrides
            .iter()
            .filter(|(k, _)| id.starts_with(&format!("{k}.")))
            .max_by_key(|(k, _)| k.len())
            .map(|(_, v)| v)
    })
}

pub fn load_config_scenario(cfg: &RunConfig) -> Result<Scenario> {
    let mut s = match &cfg.scenario_file {
        Some(path) => load_scenario_file(path)?,
        None => load_scenario(&cfg.scenario, &cfg.params)?,
    };
    if let Some(r) = cfg.sample.r {
        s.sample_box.r = r;
    }
    if let Some(t) = cfg.sample.t {
        s.sample_box.t = t;
    }
    Ok(s)
}

/// Runs every requested check; setup errors are returned as `Err`.
pub fn run_checks(cfg: &RunConfig) -> Result<RunOutcome> {
    cfg.validate()?;
    let s = load_config_scenario(cfg)?;
    let k = s.killing_field(&cfg.killing)?;
    let points = s.sample(cfg.sample.count, cfg.sample.seed);
    let mut reports = Vec::new();
    for &check in &cfg.checks {
        match run_one(check, &s, &k, cfg, &points) {
            Ok(rs) => reports.extend(rs),
            Err(e) if is_setup_error(&e) => return Err(e),
            Err(e) => reports.push(failed_report(check, &s, &k, &e)),
        }
    }
    for r in &mut reports {
        if let Some(&tol) = tolerance_for(&r.check_id, &cfg.tolerances) {
            *r = r.clone().with_tolerance(tol);
        }
    }
    let exit_code = if reports.iter().any(|r| r.status.is_failure()) { 1 } else { 0 };
    Ok(RunOutcome { reports, exit_code })
}

/// Writes the configured outputs.
pub fn write_outputs(cfg: &OutputConfig, reports: &[ResidualReport]) -> Result<()> {
    if let Some(path) = &cfg.json {
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir)?;
        }
        std::fs::write(path, reports_to_json(reports)?)?;
    }
    if let Some(path) = &cfg.csv {
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir)?;
        }
        std::fs::write(path, reports_to_csv(reports)?)?;
    }
    Ok(())
}

/// Writes `report.json` and `report.csv` into `dir`.
pub fn write_to_dir(dir: &std::path::Path, reports: &[ResidualReport]) -> Result<()> {
    export_report(reports, dir).map(|_| ())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(scenario: &str, field: &str, checks: &[Check]) -> RunConfig {
        let mut c = RunConfig::new(scenario, field, checks.to_vec());
        c.sample.count = 10;
        c
    }

    #[test]
    fn check_names_round_trip() {
        for c in Check::ALL {
            assert_eq!(c.name().parse::<Check>().unwrap(), c);
            let json = serde_json::to_string(&c).unwrap();
            assert_eq!(json, format!("\"{}\"", c.name()));
        }
        assert!("nope".parse::<Check>().is_err());
    }

    #[test]
    fn exit_codes() {
        let ok = run_checks(&cfg("schwarzschild", "t", &[Check::Killing, Check::Lemmas, Check::Maxwell])).unwrap();
        assert_eq!(ok.exit_code, 0);
        let bad = run_checks(&cfg("schwarzschild", "r_dr", &[Check::Killing])).unwrap();
        assert_eq!(bad.exit_code, 1);
        assert!(matches!(run_checks(&cfg("kerr", "t", &[Check::Killing])), Err(Error::UnknownScenario(_))));
        assert!(run_checks(&cfg("minkowski", "t", &[])).is_err());
    }

    #[test]
    fn tolerance_overrides_apply_by_prefix() {
        let mut c = cfg("schwarzschild", "r_dr", &[Check::Killing]);
        c.tolerances.insert("killing".into(), 1e3);
        assert_eq!(run_checks(&c).unwrap().exit_code, 0);
        let mut c = cfg("schwarzschild", "t", &[Check::Lemmas]);
        c.tolerances.insert("lemmas".into(), 1e-300);
        let out = run_checks(&c).unwrap();
        assert!(out.reports.iter().all(|r| r.tolerance == 1e-300));
        c.tolerances.insert("lemmas".into(), -1.0);
        assert!(matches!(run_checks(&c), Err(Error::Config(_))));
    }

    #[test]
    fn inapplicable_checks_are_setup_errors() {
        assert!(matches!(
            run_checks(&cfg("schwarzschild", "phi", &[Check::Fluid])),
            Err(Error::ChartMismatch(_))
        ));
        assert!(matches!(
            run_checks(&cfg("schwarzschild_cartesian", "t", &[Check::Teleparallel])),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn rigid_rotation_passes_fluid_checks() {
        let out = run_checks(&cfg("minkowski", "phi", &[Check::Fluid, Check::Helmholtz, Check::NavierStokes])).unwrap();
        assert_eq!(out.exit_code, 0, "{:?}", out.reports.iter().map(|r| (&r.check_id, r.max_residual)).collect::<Vec<_>>());
    }

    #[test]
    fn config_json_round_trips() {
        let c = cfg("de_sitter", "t", &[Check::Wave, Check::KomarCurrent]);
        let text = serde_json::to_string(&c).unwrap();
        let back: RunConfig = serde_json::from_str(&text).unwrap();
        assert_eq!(back, c);
        let minimal: RunConfig = serde_json::from_str(r#"{"scenario":"minkowski","killing":"t","checks":["killing"]}"#).unwrap();
        assert_eq!(minimal.sample.count, 100);
        assert_eq!(minimal.komar.radii, vec![50.0, 100.0, 200.0]);
    }
}
