//! Built-in spacetimes and user-declared scenarios.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::algebra::Multivector;
use crate::calculus::{exterior_derivative, lie_derivative_metric, lower_vector, FnField, FnVector, SharedField, SharedVector};
use crate::curvature::{einstein_residual, EnergyMomentum};
use crate::error::{Error, Result};
use crate::expr::{parse, Expr};
use crate::geometry::{Chart, ChartKind, Minkowski, Point, SharedMetric, StaticSpherical};
use crate::jet::Jet;
use crate::sampling::{sample_points, SampleBox};

/// Tolerance on `max|G − T|` enforced when a scenario is loaded.
pub const EINSTEIN_GATE: f64 = 1e-8;
/// Tolerance on `max|£_X g|` for declared Killing fields at load.
pub const KILLING_GATE: f64 = 1e-10;
/// Number of points used by the load-time gates.
pub const GATE_POINTS: usize = 50;

pub const BUILTIN_NAMES: [&str; 5] = ["minkowski", "schwarzschild", "schwarzschild_cartesian", "de_sitter", "de_sitter_cartesian"];

/// A named vector field of a scenario.
#[derive(Clone)]
pub struct NamedField {
    pub name: String,
    pub vector: SharedVector,
    /// Declared Killing; `false` marks negative controls.
    pub killing: bool,
}

/// A Killing (or control) field with its derived forms.
#[derive(Clone)]
pub struct KillingField {
    pub name: String,
    pub vector: SharedVector,
    pub killing: bool,
    /// `A = g(X, ·)`
    pub a: SharedField,
    /// `Å = g̊(X, ·)`
    pub a_ring: SharedField,
    /// `F = dA`
    pub f: SharedField,
    /// `F̊ = dÅ`
    pub f_ring: SharedField,
}

/// A spacetime with its chart, metric, matter content and declared fields.
#[derive(Clone)]
pub struct Scenario {
    pub name: String,
    pub params: BTreeMap<String, f64>,
    pub metric: SharedMetric,
    /// Minkowski metric in the same chart.
    pub background: SharedMetric,
    pub energy_momentum: Option<EnergyMomentum>,
    pub fields: Vec<NamedField>,
    /// Orthonormal coframe `𝔤ᵃ` with `g = η_ab 𝔤ᵃ⊗𝔤ᵇ`.
    pub coframe: Option<[SharedField; 4]>,
    /// User-declared scalar `f` with `A = fÅ`.
    pub f_expression: Option<SharedField>,
    pub sample_box: SampleBox,
}

impl std::fmt::Debug for Scenario {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Scenario")
            .field("name", &self.name)
            .field("params", &self.params)
            .field("chart", &self.chart().name)
            .field("fields", &self.fields.iter().map(|x| &x.name).collect::<Vec<_>>())
            .finish()
    }
}

impl Scenario {
    pub fn chart(&self) -> &Chart {
        self.metric.chart()
    }

    pub fn field_names(&self) -> Vec<String> {
        self.fields.iter().map(|f| f.name.clone()).collect()
    }

    pub fn killing_field(&self, name: &str) -> Result<KillingField> {
        let nf = self
            .fields
            .iter()
            .find(|f| f.name == name)
            .ok_or_else(|| Error::UnknownField {
                scenario: self.name.clone(),
                field: name.into(),
            })?;
        let a = lower_vector(nf.vector.clone(), self.metric.clone());
        let a_ring = lower_vector(nf.vector.clone(), self.background.clone());
        Ok(KillingField {
            name: nf.name.clone(),
            vector: nf.vector.clone(),
            killing: nf.killing,
            f: exterior_derivative(a.clone()),
            f_ring: exterior_derivative(a_ring.clone()),
            a,
            a_ring,
        })
    }

    pub fn sample(&self, count: usize, seed: u64) -> Vec<Point> {
        sample_points(&self.sample_box, self.chart().kind, count, seed)
    }

    pub fn require_energy_momentum(&self) -> Result<EnergyMomentum> {
        self.energy_momentum.ok_or_else(|| Error::MissingEnergyMomentum(self.name.clone()))
    }

    /// Load-time gates: Einstein residual and declared Killing fields.
    pub fn validate(&self) -> Result<()> {
        let points = sample_points(&self.sample_box, self.chart().kind, GATE_POINTS, 0x5eed);
        let invalid = |reason: String| Error::InvalidScenario {
            scenario: self.name.clone(),
            reason,
        };
        for p in &points {
            self.metric.metric_at(p, 0)?.values().validate_lorentzian()?;
            if let Some(t) = &self.energy_momentum {
                let r = einstein_residual(self.metric.as_ref(), t, p)?;
                if !(r < EINSTEIN_GATE) {
                    return Err(invalid(format!("Einstein residual {r:e} at {p}")));
                }
            }
            for f in self.fields.iter().filter(|f| f.killing) {
                let l = lie_derivative_metric(f.vector.as_ref(), self.metric.as_ref(), p)?;
                let worst = l.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()));
                if !(worst < KILLING_GATE) {
                    return Err(invalid(format!("field `{}` is not Killing: |£g| = {worst:e} at {p}", f.name)));
                }
            }
        }
        Ok(())
    }
}

fn zero() -> Jet {
    Jet::zero()
}

fn one() -> Jet {
    Jet::constant(1.0)
}

fn named(name: &str, killing: bool, vector: SharedVector) -> NamedField {
    NamedField {
        name: name.into(),
        vector,
        killing,
    }
}

/// Poincaré generators plus the dilation control in Cartesian coordinates.
fn cartesian_fields(poincare: bool) -> Vec<NamedField> {
    let mut v = vec![named("t", true, FnVector::shared(|_| [one(), zero(), zero(), zero()]))];
    if poincare {
        v.push(named("x", true, FnVector::shared(|_| [zero(), one(), zero(), zero()])));
        v.push(named("y", true, FnVector::shared(|_| [zero(), zero(), one(), zero()])));
        v.push(named("z", true, FnVector::shared(|_| [zero(), zero(), zero(), one()])));
    }
    v.push(named("phi", true, FnVector::shared(|x| [zero(), -&x[2], x[1].clone(), zero()])));
    v.push(named("rot_x", true, FnVector::shared(|x| [zero(), zero(), -&x[3], x[2].clone()])));
    v.push(named("rot_y", true, FnVector::shared(|x| [zero(), x[3].clone(), zero(), -&x[1]])));
    if poincare {
        v.push(named("boost_x", true, FnVector::shared(|x| [x[1].clone(), x[0].clone(), zero(), zero()])));
        v.push(named("boost_y", true, FnVector::shared(|x| [x[2].clone(), zero(), x[0].clone(), zero()])));
        v.push(named("boost_z", true, FnVector::shared(|x| [x[3].clone(), zero(), zero(), x[0].clone()])));
    }
    v.push(named("r_dr", false, FnVector::shared(|x| [zero(), x[1].clone(), x[2].clone(), x[3].clone()])));
    v
}

/// Time translation, rotations and the radial control in spherical coordinates.
fn spherical_fields() -> Vec<NamedField> {
    vec![
        named("t", true, FnVector::shared(|_| [one(), zero(), zero(), zero()])),
        named("phi", true, FnVector::shared(|_| [zero(), zero(), zero(), one()])),
        named(
            "rot_x",
            true,
            FnVector::shared(|x| {
                let cot = x[2].cos() * x[2].sin().recip();
                [zero(), zero(), -x[3].sin(), -(cot * x[3].cos())]
            }),
        ),
        named(
            "rot_y",
            true,
            FnVector::shared(|x| {
                let cot = x[2].cos() * x[2].sin().recip();
                [zero(), zero(), x[3].cos(), -(cot * x[3].sin())]
            }),
        ),
        named("r_dr", false, FnVector::shared(|x| [zero(), x[1].clone(), zero(), zero()])),
    ]
}

fn constant_coframe() -> [SharedField; 4] {
    std::array::from_fn(|a| FnField::shared(move |_| Multivector::blade(1 << a, one())))
}

/// Diagonal coframe of `f dt² − dr²/f − r² dΩ²`.
fn static_spherical_coframe(profile: impl Fn(&Jet) -> Jet + Clone + Send + Sync + 'static) -> [SharedField; 4] {
    let p0 = profile.clone();
    let p1 = profile;
    [
        FnField::shared(move |x| Multivector::blade(1, p0(&x[1]).sqrt())),
        FnField::shared(move |x| Multivector::blade(2, p1(&x[1]).sqrt().recip())),
        FnField::shared(|x| Multivector::blade(4, x[1].clone())),
        FnField::shared(|x| Multivector::blade(8, &x[1] * &x[2].sin())),
    ]
}

fn param(params: &BTreeMap<String, f64>, key: &str, default: f64, scenario: &str) -> Result<f64> {
    let v = params.get(key).copied().unwrap_or(default);
    if !(v.is_finite() && v > 0.0) {
        return Err(Error::InvalidScenario {
            scenario: scenario.into(),
            reason: format!("parameter `{key}` must be positive, got {v}"),
        });
    }
    Ok(v)
}

/// Builds a built-in scenario without running the load-time gates.
fn builtin(name: &str, params: &BTreeMap<String, f64>) -> Result<Scenario> {
    let mut used = BTreeMap::new();
    let scenario = match name {
        "minkowski" => Scenario {
            name: name.into(),
            params: used.clone(),
            metric: Arc::new(Minkowski::new(ChartKind::Cartesian)),
            background: Arc::new(Minkowski::new(ChartKind::Cartesian)),
            energy_momentum: Some(EnergyMomentum::Vacuum),
            fields: cartesian_fields(true),
            coframe: Some(constant_coframe()),
            f_expression: None,
            sample_box: SampleBox::new(0.5, 10.0),
        },
        "schwarzschild" | "schwarzschild_cartesian" => {
            let m = param(params, "m", 1.0, name)?;
            used.insert("m".to_string(), m);
            let cart = name.ends_with("cartesian");
            let kind = if cart { ChartKind::Cartesian } else { ChartKind::Spherical };
            Scenario {
                name: name.into(),
                params: used.clone(),
                metric: Arc::new(StaticSpherical::schwarzschild(m, kind)),
                background: Arc::new(Minkowski::new(kind)),
                energy_momentum: Some(EnergyMomentum::Vacuum),
                fields: if cart { cartesian_fields(false) } else { spherical_fields() },
                coframe: (!cart).then(|| static_spherical_coframe(move |r: &Jet| 1.0 - (2.0 * m) * &r.recip())),
                f_expression: None,
                sample_box: SampleBox::new(3.0 * m, 20.0 * m),
            }
        }
        "de_sitter" | "de_sitter_cartesian" => {
            let lambda = param(params, "lambda", 0.03, name)?;
            used.insert("lambda".to_string(), lambda);
            let cart = name.ends_with("cartesian");
            let kind = if cart { ChartKind::Cartesian } else { ChartKind::Spherical };
            let horizon = (3.0 / lambda).sqrt();
            Scenario {
                name: name.into(),
                params: used.clone(),
                metric: Arc::new(StaticSpherical::de_sitter(lambda, kind)),
                background: Arc::new(Minkowski::new(kind)),
                energy_momentum: Some(EnergyMomentum::Cosmological { lambda }),
                fields: if cart { cartesian_fields(false) } else { spherical_fields() },
                coframe: (!cart).then(|| static_spherical_coframe(move |r: &Jet| 1.0 - (lambda / 3.0) * &(r * r))),
                f_expression: None,
                sample_box: SampleBox::new(0.05 * horizon, 0.8 * horizon),
            }
        }
        other => return Err(Error::UnknownScenario(other.into())),
    };
    if let Some(k) = params.keys().find(|k| !used.contains_key(*k)) {
        return Err(Error::InvalidScenario {
            scenario: name.into(),
            reason: format!("unknown parameter `{k}`"),
        });
    }
    Ok(scenario)
}

/// Loads and validates a built-in scenario.
pub fn load_scenario(name: &str, params: &BTreeMap<String, f64>) -> Result<Scenario> {
    let s = builtin(name, params)?;
    s.validate()?;
    Ok(s)
}

/// User scenario file: a built-in spacetime plus declared fields.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ScenarioSpec {
    pub name: String,
    #[serde(default)]
    pub params: BTreeMap<String, f64>,
    #[serde(default)]
    pub killing_fields: Vec<FieldSpec>,
    #[serde(default)]
    pub f_expression: Option<String>,
    /// Rows `𝔤ᵃ = h^a_μ dx^μ`, each with four component expressions.
    #[serde(default)]
    pub coframe: Option<Vec<Vec<String>>>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FieldSpec {
    pub name: String,
    pub components: Vec<String>,
}

fn parse_row(row: &[String], labels: [&str; 4], params: &BTreeMap<String, f64>, scenario: &str) -> Result<[Expr; 4]> {
    if row.len() != 4 {
        return Err(Error::InvalidScenario {
            scenario: scenario.into(),
            reason: format!("expected 4 components, got {}", row.len()),
        });
    }
    let parsed: Vec<Expr> = row.iter().map(|s| parse(s, labels, params)).collect::<Result<_>>()?;
    Ok(parsed.try_into().expect("length checked"))
}

/// Builds a scenario from a user specification and validates it.
pub fn scenario_from_spec(spec: &ScenarioSpec) -> Result<Scenario> {
    let mut s = builtin(&spec.name, &spec.params)?;
    let labels = s.chart().labels;
    let params = s.params.clone();
    for f in &spec.killing_fields {
        if s.fields.iter().any(|x| x.name == f.name) {
            s.fields.retain(|x| x.name != f.name);
        }
        let e = parse_row(&f.components, labels, &params, &spec.name)?;
        let vector = FnVector::shared(move |x| std::array::from_fn(|i| e[i].eval(x)));
        s.fields.push(named(&f.name, true, vector));
    }
    if let Some(src) = &spec.f_expression {
        let e = parse(src, labels, &params)?;
        s.f_expression = Some(FnField::shared(move |x| Multivector::scalar(e.eval(x))));
    }
    if let Some(rows) = &spec.coframe {
        if rows.len() != 4 {
            return Err(Error::InvalidScenario {
                scenario: spec.name.clone(),
                reason: format!("coframe needs 4 rows, got {}", rows.len()),
            });
        }
        let parsed: Vec<[Expr; 4]> = rows.iter().map(|r| parse_row(r, labels, &params, &spec.name)).collect::<Result<_>>()?;
        s.coframe = Some(std::array::from_fn(|a| {
            let row = parsed[a].clone();
            FnField::shared(move |x| Multivector::one_form(std::array::from_fn(|mu| row[mu].eval(x))))
        }));
    }
    s.validate()?;
    Ok(s)
}

pub fn load_scenario_file(path: &std::path::Path) -> Result<Scenario> {
    let text = std::fs::read_to_string(path)?;
    let spec: ScenarioSpec = serde_json::from_str(&text)?;
    scenario_from_spec(&spec)
}

/// One-line descriptions for `list-scenarios`.
pub fn describe_builtins() -> Vec<String> {
    BUILTIN_NAMES
        .iter()
        .map(|n| {
            let s = builtin(n, &BTreeMap::new()).expect("built-in scenario");
            let params: Vec<String> = s.params.iter().map(|(k, v)| format!("{k}={v}")).collect();
            format!("{n} [{}] chart={} fields={}", params.join(","), s.chart().name, s.field_names().join(","))
        })
        .collect()
}
