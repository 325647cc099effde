//! Residual reports and their JSON/CSV serialization.

use std::io::Write;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::geometry::Point;

/// Sign and unit conventions attached to every report.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Conventions {
    pub signature: String,
    pub orientation: String,
    pub units: String,
    pub curvature: String,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub sphere_orientation: Option<String>,
}

impl Default for Conventions {
    fn default() -> Self {
        Conventions {
            signature: "(+,-,-,-)".into(),
            orientation: "+dx0^dx1^dx2^dx3".into(),
            units: "geometric: Ricci - (1/2) R g = T".into(),
            curvature: "R_{sn} = R^r_{snr}; de Sitter R = +4 Lambda".into(),
            sphere_orientation: None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
    /// Two sides of an identity disagree beyond tolerance where the identity
    /// itself is in doubt; reported, not counted as a failure.
    IdentityGap,
    /// A precondition (Lorenz gauge of a coframe) does not hold; the residual
    /// was skipped.
    GaugeViolated,
}

impl Status {
    pub fn is_failure(&self) -> bool {
        matches!(self, Status::Fail)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointResidual {
    pub coords: [f64; 4],
    pub residual: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExtrapolationRow {
    pub radius: f64,
    pub estimate: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResidualReport {
    pub check_id: String,
    pub scenario: String,
    pub killing_field: String,
    pub conventions: Conventions,
    pub max_residual: f64,
    pub mean_residual: f64,
    pub tolerance: f64,
    pub pass: bool,
    pub status: Status,
    pub per_point: Vec<PointResidual>,
    /// Scalar result for integral checks (Komar energies).
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub value: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub extrapolation: Option<Vec<ExtrapolationRow>>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub notes: Vec<String>,
}

impl ResidualReport {
    /// Builds a report from per-point residuals; `pass ⇔ max ≤ tolerance`.
    pub fn from_points(check_id: &str, scenario: &str, field: &str, tolerance: f64, per_point: Vec<PointResidual>) -> Self {
        let n = per_point.len();
        let max = per_point.iter().fold(0.0f64, |m, p| if p.residual.is_nan() { f64::NAN } else { m.max(p.residual) });
        let sum: f64 = per_point.iter().map(|p| p.residual).sum();
        let mean = if n == 0 { 0.0 } else { sum / n as f64 };
        let pass = max <= tolerance;
        ResidualReport {
            check_id: check_id.into(),
            scenario: scenario.into(),
            killing_field: field.into(),
            conventions: Conventions::default(),
            max_residual: max,
            mean_residual: mean,
            tolerance,
            pass,
            status: if pass { Status::Pass } else { Status::Fail },
            per_point,
            value: None,
            extrapolation: None,
            notes: Vec::new(),
        }
    }

    /// A gap beyond tolerance is reported as [`Status::IdentityGap`].
    pub fn as_identity_gap(mut self) -> Self {
        if !self.pass {
            self.status = Status::IdentityGap;
        }
        self
    }

    /// Re-judges the report against `tolerance`, keeping skipped or gap statuses.
    pub fn with_tolerance(mut self, tolerance: f64) -> Self {
        self.tolerance = tolerance;
        self.pass = self.max_residual <= tolerance;
        if matches!(self.status, Status::Pass | Status::Fail) {
            self.status = if self.pass { Status::Pass } else { Status::Fail };
        } else if self.status == Status::IdentityGap && self.pass {
            self.status = Status::Pass;
        }
        self
    }

    pub fn with_value(mut self, value: f64) -> Self {
        self.value = Some(value);
        self
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.notes.push(note.into());
        self
    }
}

/// Evaluates `f` at every point in parallel, keeping point order.
pub fn evaluate_points<F>(points: &[Point], f: F) -> Result<Vec<PointResidual>>
where
    F: Fn(&Point) -> Result<f64> + Sync,
{
    points
        .par_iter()
        .map(|p| f(p).map(|r| PointResidual { coords: p.0, residual: r }))
        .collect()
}

/// As [`evaluate_points`] but for several residuals per point.
pub fn evaluate_points_multi<const N: usize, F>(points: &[Point], f: F) -> Result<[Vec<PointResidual>; N]>
where
    F: Fn(&Point) -> Result<[f64; N]> + Sync,
{
    let rows: Vec<[f64; N]> = points.par_iter().map(&f).collect::<Result<_>>()?;
    Ok(std::array::from_fn(|k| {
        rows.iter()
            .zip(points)
            .map(|(r, p)| PointResidual { coords: p.0, residual: r[k] })
            .collect()
    }))
}

/// JSON formatter printing every float with 17 significant digits.
struct SeventeenDigits(serde_json::ser::PrettyFormatter<'static>);

impl serde_json::ser::Formatter for SeventeenDigits {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> std::io::Result<()> {
        write!(writer, "{}", format_f64(value))
    }
    fn begin_array<W: ?Sized + Write>(&mut self, w: &mut W) -> std::io::Result<()> {
        self.0.begin_array(w)
    }
    fn end_array<W: ?Sized + Write>(&mut self, w: &mut W) -> std::io::Result<()> {
        self.0.end_array(w)
    }
    fn begin_array_value<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> std::io::Result<()> {
        self.0.begin_array_value(w, first)
    }
    fn end_array_value<W: ?Sized + Write>(&mut self, w: &mut W) -> std::io::Result<()> {
        self.0.end_array_value(w)
    }
    fn begin_object<W: ?Sized + Write>(&mut self, w: &mut W) -> std::io::Result<()> {
        self.0.begin_object(w)
    }
    fn end_object<W: ?Sized + Write>(&mut self, w: &mut W) -> std::io::Result<()> {
        self.0.end_object(w)
    }
    fn begin_object_key<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> std::io::Result<()> {
        self.0.begin_object_key(w, first)
    }
    fn begin_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> std::io::Result<()> {
        self.0.begin_object_value(w)
    }
    fn end_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> std::io::Result<()> {
        self.0.end_object_value(w)
    }
}

/// 17 significant digits in scientific notation; non-finite values as strings
/// are not valid JSON numbers, so they are written as `null`.
pub fn format_f64(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        "null".into()
    }
}

pub fn reports_to_json(reports: &[ResidualReport]) -> Result<String> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, SeventeenDigits(serde_json::ser::PrettyFormatter::new()));
    reports.serialize(&mut ser)?;
    buf.push(b'\n');
    Ok(String::from_utf8(buf).expect("serde_json writes UTF-8"))
}

pub fn reports_to_csv(reports: &[ResidualReport]) -> Result<String> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    w.write_record(["check_id", "x0", "x1", "x2", "x3", "residual", "tolerance", "pass"])
        .map_err(csv_err)?;
    for r in reports {
        for p in &r.per_point {
            let pass = p.residual <= r.tolerance;
            let mut row = vec![r.check_id.clone()];
            row.extend(p.coords.iter().map(|c| format_csv(*c)));
            row.push(format_csv(p.residual));
            row.push(format_csv(r.tolerance));
            row.push(pass.to_string());
            w.write_record(&row).map_err(csv_err)?;
        }
    }
    let bytes = w.into_inner().map_err(|e| std::io::Error::other(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("CSV rows are UTF-8"))
}

fn format_csv(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        v.to_string()
    }
}

fn csv_err(e: csv::Error) -> crate::error::Error {
    std::io::Error::other(e.to_string()).into()
}

/// Writes `report.json` and `report.csv` into `dir`.
pub fn export_report(reports: &[ResidualReport], dir: &Path) -> Result<(std::path::PathBuf, std::path::PathBuf)> {
    std::fs::create_dir_all(dir)?;
    let json = dir.join("report.json");
    let csv = dir.join("report.csv");
    std::fs::write(&json, reports_to_json(reports)?)?;
    std::fs::write(&csv, reports_to_csv(reports)?)?;
    Ok((json, csv))
}
