//! Charts, points, analytic metric fields and chart transitions.
//!
//! Metric fields are written once over [`Jet`] arithmetic; evaluating them on
//! seeded coordinates gives exact derivatives to any order up to
//! [`crate::jet::MAX_ORDER`].

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::algebra::{MetricAtPoint, Scalar};
use crate::error::{Error, Result};
use crate::jet::Jet;

/// Coordinates `x⁰..x³`, with `x⁰` the time coordinate.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Point(pub [f64; 4]);

impl Point {
    pub fn new(x0: f64, x1: f64, x2: f64, x3: f64) -> Self {
        Point([x0, x1, x2, x3])
    }

    pub fn coords(&self) -> &[f64; 4] {
        &self.0
    }

    pub fn seed(&self, order: usize) -> [Jet; 4] {
        Jet::seed(&self.0, order)
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {}, {})", self.0[0], self.0[1], self.0[2], self.0[3])
    }
}

/// Coordinate system family.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChartKind {
    /// `(t, x, y, z)`, the canonical chart.
    Cartesian,
    /// `(t, r, θ, φ)`.
    Spherical,
}

/// Spherical charts exclude the polar axis where `sin θ` falls below this.
pub const AXIS_GUARD: f64 = 1e-8;

#[derive(Clone, Debug, PartialEq)]
pub struct Chart {
    pub name: String,
    pub kind: ChartKind,
    pub labels: [&'static str; 4],
}

impl Chart {
    pub fn cartesian() -> Self {
        Chart {
            name: "cartesian".into(),
            kind: ChartKind::Cartesian,
            labels: ["t", "x", "y", "z"],
        }
    }

    pub fn spherical() -> Self {
        Chart {
            name: "spherical".into(),
            kind: ChartKind::Spherical,
            labels: ["t", "r", "theta", "phi"],
        }
    }

    /// Chart-level domain predicate (metric fields add their own guards).
    pub fn check(&self, p: &Point) -> Result<()> {
        if p.0.iter().any(|c| !c.is_finite()) {
            return Err(self.outside(p, "non-finite coordinate"));
        }
        if self.kind == ChartKind::Spherical {
            let [_, r, th, _] = p.0;
            if r <= 0.0 {
                return Err(self.outside(p, "r must be positive"));
            }
            if !(0.0..=PI).contains(&th) || th.sin() < AXIS_GUARD {
                return Err(self.outside(p, "polar axis excluded"));
            }
        }
        Ok(())
    }

    pub(crate) fn outside(&self, p: &Point, reason: &str) -> Error {
        Error::OutsideDomain {
            chart: self.name.clone(),
            point: p.0,
            reason: reason.into(),
        }
    }
}

/// Spherical → Cartesian map evaluated on jets.
pub fn spherical_to_cartesian<T: Trig>(x: &[T; 4]) -> [T; 4] {
    let [t, r, th, ph] = x;
    let (st, ct) = (th.sin_(), th.cos_());
    let (sp, cp) = (ph.sin_(), ph.cos_());
    [
        t.clone(),
        r.clone() * st.clone() * cp,
        r.clone() * st * sp,
        r.clone() * ct,
    ]
}

/// Cartesian → spherical map evaluated on jets (φ ∈ (−π, π]).
pub fn cartesian_to_spherical<T: Trig>(x: &[T; 4]) -> [T; 4] {
    let [t, a, b, c] = x;
    let rho2 = a.clone() * a.clone() + b.clone() * b.clone();
    let r = (rho2.clone() + c.clone() * c.clone()).sqrt();
    let th = rho2.sqrt().atan2_(c);
    let ph = b.atan2_(a);
    [t.clone(), r, th, ph]
}

/// Elementary functions needed by chart maps and metrics.
pub trait Trig: Scalar {
    fn sin_(&self) -> Self;
    fn cos_(&self) -> Self;
    fn atan2_(&self, x: &Self) -> Self;
}

impl Trig for f64 {
    fn sin_(&self) -> Self {
        self.sin()
    }
    fn cos_(&self) -> Self {
        self.cos()
    }
    fn atan2_(&self, x: &Self) -> Self {
        self.atan2(*x)
    }
}

impl Trig for Jet {
    fn sin_(&self) -> Self {
        self.sin()
    }
    fn cos_(&self) -> Self {
        self.cos()
    }
    fn atan2_(&self, x: &Self) -> Self {
        self.atan2(x)
    }
}

/// Jacobian `∂y^a/∂x^b` of a chart map at a point (order-1 jets).
pub fn jacobian(map: impl Fn(&[Jet; 4]) -> [Jet; 4], p: &Point) -> [[f64; 4]; 4] {
    let y = map(&p.seed(1));
    std::array::from_fn(|a| std::array::from_fn(|b| y[a].gradient(b)))
}

type ChartMap = fn(&[Jet; 4]) -> [Jet; 4];

fn transition(from: ChartKind, to: ChartKind) -> Option<ChartMap> {
    match (from, to) {
        (ChartKind::Spherical, ChartKind::Cartesian) => Some(spherical_to_cartesian::<Jet>),
        (ChartKind::Cartesian, ChartKind::Spherical) => Some(cartesian_to_spherical::<Jet>),
        _ => None,
    }
}

/// Maps a point between charts.
pub fn transform_point(p: &Point, from: &Chart, to: &Chart) -> Result<Point> {
    from.check(p)?;
    let q = match transition(from.kind, to.kind) {
        None => *p,
        Some(map) => {
            let y = map(&p.seed(0));
            Point(std::array::from_fn(|i| y[i].value()))
        }
    };
    to.check(&q)?;
    Ok(q)
}

/// Transforms 1-form components `ω_μ` at `p` (given in `from`) into `to`:
/// `ω'_ν = ω_μ ∂x^μ/∂x'^ν`, evaluated at the image point.
pub fn transform_one_form(omega: [f64; 4], p: &Point, from: &Chart, to: &Chart) -> Result<[f64; 4]> {
    let q = transform_point(p, from, to)?;
    let Some(inverse) = transition(to.kind, from.kind) else {
        return Ok(omega);
    };
    let j = jacobian(inverse, &q); // ∂x^μ/∂x'^ν
    Ok(std::array::from_fn(|nu| (0..4).map(|mu| omega[mu] * j[mu][nu]).sum()))
}

/// Transforms vector components `X^μ` at `p`: `X'^ν = ∂x'^ν/∂x^μ X^μ`.
pub fn transform_vector(x: [f64; 4], p: &Point, from: &Chart, to: &Chart) -> Result<[f64; 4]> {
    transform_point(p, from, to)?;
    let Some(forward) = transition(from.kind, to.kind) else {
        return Ok(x);
    };
    let j = jacobian(forward, p);
    Ok(std::array::from_fn(|nu| (0..4).map(|mu| j[nu][mu] * x[mu]).sum()))
}

/// A metric tensor field on a chart.
pub trait MetricField: Send + Sync {
    fn name(&self) -> &str;
    fn chart(&self) -> &Chart;
    /// Field-specific guards beyond the chart's own.
    fn check_domain(&self, p: &Point) -> Result<()> {
        self.chart().check(p)
    }
    /// Covariant components `g_{μν}` on (possibly seeded) coordinates.
    fn components(&self, x: &[Jet; 4]) -> [[Jet; 4]; 4];

    /// Metric with inverse and determinant as order-`order` jets at `p`.
    fn metric_at(&self, p: &Point, order: usize) -> Result<MetricAtPoint<Jet>> {
        self.check_domain(p)?;
        let g = self.components(&p.seed(order));
        if g.iter().flatten().any(|c| !c.is_finite()) {
            return Err(Error::NonFinite(format!("metric `{}` at {p}", self.name())));
        }
        MetricAtPoint::new(g)
    }
}

pub type SharedMetric = Arc<dyn MetricField>;

/// Metric components with first and second partial derivatives at a point.
#[derive(Clone, Debug)]
pub struct MetricJet {
    pub g: MetricAtPoint<f64>,
    /// `dg[σ][μ][ν] = ∂_σ g_{μν}`
    pub dg: [[[f64; 4]; 4]; 4],
    /// `ddg[ρ][σ][μ][ν] = ∂_ρ∂_σ g_{μν}`
    pub ddg: [[[[f64; 4]; 4]; 4]; 4],
}

pub fn evaluate_metric_jet(metric: &dyn MetricField, p: &Point) -> Result<MetricJet> {
    let m = metric.metric_at(p, 2)?;
    let dg = std::array::from_fn(|s| std::array::from_fn(|mu| std::array::from_fn(|nu| m.g[mu][nu].gradient(s))));
    let ddg = std::array::from_fn(|r| {
        std::array::from_fn(|s| std::array::from_fn(|mu| std::array::from_fn(|nu| m.g[mu][nu].hessian(r, s))))
    });
    Ok(MetricJet { g: m.values(), dg, ddg })
}

fn diag(entries: [Jet; 4]) -> [[Jet; 4]; 4] {
    let mut g: [[Jet; 4]; 4] = Default::default();
    for (i, e) in entries.into_iter().enumerate() {
        g[i][i] = e;
    }
    g
}

/// Flat metric in either chart.
#[derive(Clone, Debug)]
pub struct Minkowski {
    chart: Chart,
}

impl Minkowski {
    pub fn new(kind: ChartKind) -> Self {
        let chart = match kind {
            ChartKind::Cartesian => Chart::cartesian(),
            ChartKind::Spherical => Chart::spherical(),
        };
        Minkowski { chart }
    }
}

impl MetricField for Minkowski {
    fn name(&self) -> &str {
        "minkowski"
    }
    fn chart(&self) -> &Chart {
        &self.chart
    }
    fn components(&self, x: &[Jet; 4]) -> [[Jet; 4]; 4] {
        match self.chart.kind {
            ChartKind::Cartesian => diag([1.0.into(), (-1.0).into(), (-1.0).into(), (-1.0).into()]),
            ChartKind::Spherical => {
                let r2 = &x[1] * &x[1];
                let s = x[2].sin();
                diag([1.0.into(), (-1.0).into(), -r2.clone(), -(r2 * &s * &s)])
            }
        }
    }
}

/// Static spherically symmetric metric `f(r) dt² − dr²/f(r) − r² dΩ²`,
/// in spherical coordinates or their Cartesian image.
#[derive(Clone, Debug)]
pub struct StaticSpherical {
    name: String,
    chart: Chart,
    profile: Profile,
}

#[derive(Clone, Copy, Debug)]
enum Profile {
    /// `f = 1 − 2m/r`
    Schwarzschild { mass: f64 },
    /// `f = 1 − Λr²/3`
    DeSitter { lambda: f64 },
}

impl Profile {
    fn f(&self, r: &Jet) -> Jet {
        match *self {
            Profile::Schwarzschild { mass } => 1.0 - (2.0 * mass) * &r.recip(),
            Profile::DeSitter { lambda } => 1.0 - (lambda / 3.0) * &(r * r),
        }
    }

    fn f_value(&self, r: f64) -> f64 {
        match *self {
            Profile::Schwarzschild { mass } => 1.0 - 2.0 * mass / r,
            Profile::DeSitter { lambda } => 1.0 - lambda * r * r / 3.0,
        }
    }
}

impl StaticSpherical {
    pub fn schwarzschild(mass: f64, kind: ChartKind) -> Self {
        Self::build("schwarzschild", Profile::Schwarzschild { mass }, kind)
    }

    pub fn de_sitter(lambda: f64, kind: ChartKind) -> Self {
        Self::build("de_sitter", Profile::DeSitter { lambda }, kind)
    }

    fn build(name: &str, profile: Profile, kind: ChartKind) -> Self {
        let chart = match kind {
            ChartKind::Cartesian => Chart::cartesian(),
            ChartKind::Spherical => Chart::spherical(),
        };
        StaticSpherical {
            name: name.into(),
            chart,
            profile,
        }
    }

    fn radius(&self, p: &Point) -> f64 {
        match self.chart.kind {
            ChartKind::Spherical => p.0[1],
            ChartKind::Cartesian => (p.0[1] * p.0[1] + p.0[2] * p.0[2] + p.0[3] * p.0[3]).sqrt(),
        }
    }
}

impl MetricField for StaticSpherical {
    fn name(&self) -> &str {
        &self.name
    }

    fn chart(&self) -> &Chart {
        &self.chart
    }

    fn check_domain(&self, p: &Point) -> Result<()> {
        self.chart.check(p)?;
        let r = self.radius(p);
        match self.profile {
            Profile::Schwarzschild { mass } => {
                if r <= 2.0 * mass * (1.0 + 1e-6) {
                    return Err(self.chart.outside(p, "inside or too close to r = 2m"));
                }
            }
            Profile::DeSitter { .. } => {
                if r <= 0.0 && self.chart.kind == ChartKind::Spherical {
                    return Err(self.chart.outside(p, "r must be positive"));
                }
                if self.profile.f_value(r) <= 1e-6 {
                    return Err(self.chart.outside(p, "beyond the static patch"));
                }
            }
        }
        Ok(())
    }

    fn components(&self, x: &[Jet; 4]) -> [[Jet; 4]; 4] {
        match self.chart.kind {
            ChartKind::Spherical => {
                let r = &x[1];
                let f = self.profile.f(r);
                let r2 = r * r;
                let s = x[2].sin();
                diag([f.clone(), -f.recip(), -r2.clone(), -(r2 * &s * &s)])
            }
            ChartKind::Cartesian => {
                // g_ij = −δ_ij − n_i n_j (1/f − 1),  n = x/r
                let r2 = &x[1] * &x[1] + &x[2] * &x[2] + &x[3] * &x[3];
                let r = r2.sqrt();
                let f = self.profile.f(&r);
                let radial = (f.recip() - 1.0) * &r2.recip();
                let mut g: [[Jet; 4]; 4] = Default::default();
                g[0][0] = f;
                for i in 1..4 {
                    for j in 1..4 {
                        let mut e = -(&radial * &(&x[i] * &x[j]));
                        if i == j {
                            e = e - 1.0;
                        }
                        g[i][j] = e;
                    }
                }
                g
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fd_metric(metric: &dyn MetricField, p: &Point, h: f64) -> (crate::curvature::Tensor3, crate::curvature::Tensor4) {
        let g = |q: [f64; 4]| {
            let v = metric.components(&Jet::seed(&q, 0));
            let out: [[f64; 4]; 4] = std::array::from_fn(|i| std::array::from_fn(|j| v[i][j].value()));
            out
        };
        let shift = |q: [f64; 4], a: usize, d: f64| {
            let mut q = q;
            q[a] += d;
            q
        };
        let x = p.0;
        let mut dg = [[[0.0; 4]; 4]; 4];
        let mut ddg = [[[[0.0; 4]; 4]; 4]; 4];
        for s in 0..4 {
            let (gp, gm) = (g(shift(x, s, h)), g(shift(x, s, -h)));
            for mu in 0..4 {
                for nu in 0..4 {
                    dg[s][mu][nu] = (gp[mu][nu] - gm[mu][nu]) / (2.0 * h);
                }
            }
            for r in 0..4 {
                let gpp = g(shift(shift(x, s, h), r, h));
                let gpm = g(shift(shift(x, s, h), r, -h));
                let gmp = g(shift(shift(x, s, -h), r, h));
                let gmm = g(shift(shift(x, s, -h), r, -h));
                for mu in 0..4 {
                    for nu in 0..4 {
                        ddg[r][s][mu][nu] = (gpp[mu][nu] - gpm[mu][nu] - gmp[mu][nu] + gmm[mu][nu]) / (4.0 * h * h);
                    }
                }
            }
        }
        (dg, ddg)
    }

    fn builtins() -> Vec<(Box<dyn MetricField>, Vec<Point>)> {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let mut sph = |rmin: f64, rmax: f64| -> Vec<Point> {
            (0..50)
                .map(|_| Point::new(rng.gen_range(-1.0..1.0), rng.gen_range(rmin..rmax), rng.gen_range(0.3..2.8), rng.gen_range(0.0..6.2)))
                .collect()
        };
        let s1 = sph(3.0, 20.0);
        let s2 = sph(0.5, 8.0);
        let s3 = sph(3.0, 20.0);
        let cart = |pts: &Vec<Point>| -> Vec<Point> {
            pts.iter()
                .map(|p| transform_point(p, &Chart::spherical(), &Chart::cartesian()).unwrap())
                .collect()
        };
        vec![
            (Box::new(Minkowski::new(ChartKind::Cartesian)), cart(&s3)),
            (Box::new(Minkowski::new(ChartKind::Spherical)), s3.clone()),
            (Box::new(StaticSpherical::schwarzschild(1.0, ChartKind::Spherical)), s1.clone()),
            (Box::new(StaticSpherical::schwarzschild(1.0, ChartKind::Cartesian)), cart(&s1)),
            (Box::new(StaticSpherical::de_sitter(0.03, ChartKind::Spherical)), s2.clone()),
            (Box::new(StaticSpherical::de_sitter(0.03, ChartKind::Cartesian)), cart(&s2)),
        ]
    }

    #[test]
    fn minkowski_jet_is_flat() {
        let j = evaluate_metric_jet(&Minkowski::new(ChartKind::Cartesian), &Point::new(0.3, 1.0, -2.0, 0.5)).unwrap();
        assert_eq!(j.g.g, MetricAtPoint::minkowski().g);
        assert!(j.dg.iter().flatten().flatten().all(|&v| v == 0.0));
        assert!(j.ddg.iter().flatten().flatten().flatten().all(|&v| v == 0.0));
    }

    #[test]
    fn schwarzschild_gtt_at_four_m() {
        let m = StaticSpherical::schwarzschild(1.0, ChartKind::Spherical);
        let j = evaluate_metric_jet(&m, &Point::new(0.0, 4.0, PI / 2.0, 0.0)).unwrap();
        assert!((j.g.g[0][0] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn jets_agree_with_finite_differences() {
        for (metric, points) in builtins() {
            for p in &points {
                let j = evaluate_metric_jet(metric.as_ref(), p).unwrap();
                j.g.validate_lorentzian().unwrap();
                let (dg, ddg) = fd_metric(metric.as_ref(), p, 1e-4);
                // finite-difference error grows with the size of the components
                let scale = 1.0 + j.g.g.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()));
                for s in 0..4 {
                    for mu in 0..4 {
                        for nu in 0..4 {
                            assert!((j.dg[s][mu][nu] - dg[s][mu][nu]).abs() < 1e-6 * scale, "{} dg at {p}", metric.name());
                            assert_eq!(j.dg[s][mu][nu], j.dg[s][nu][mu]);
                            for r in 0..4 {
                                let d = (j.ddg[r][s][mu][nu] - ddg[r][s][mu][nu]).abs();
                                assert!(d < 1e-6 * scale, "{} ddg at {p}: {d:e}", metric.name());
                                assert!((j.ddg[r][s][mu][nu] - j.ddg[s][r][mu][nu]).abs() < 1e-14);
                            }
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn horizon_and_axis_are_rejected() {
        let m = StaticSpherical::schwarzschild(1.0, ChartKind::Spherical);
        assert!(m.metric_at(&Point::new(0.0, 2.0, 1.0, 0.0), 0).is_err());
        assert!(m.metric_at(&Point::new(0.0, 5.0, 0.0, 0.0), 0).is_err());
        let d = StaticSpherical::de_sitter(0.03, ChartKind::Spherical);
        assert!(d.metric_at(&Point::new(0.0, 10.5, 1.0, 0.0), 0).is_err());
    }

    #[test]
    fn phi_generator_maps_to_rotation() {
        // ∂_φ at a spherical point becomes −y ∂_x + x ∂_y
        let p = Point::new(0.0, 3.0, 1.0, 0.7);
        let v = transform_vector([0.0, 0.0, 0.0, 1.0], &p, &Chart::spherical(), &Chart::cartesian()).unwrap();
        let q = transform_point(&p, &Chart::spherical(), &Chart::cartesian()).unwrap();
        assert!((v[1] + q.0[2]).abs() < 1e-14);
        assert!((v[2] - q.0[1]).abs() < 1e-14);
        assert!(v[0].abs() < 1e-15 && v[3].abs() < 1e-15);
    }

    #[test]
    fn identity_transform_is_a_no_op() {
        let p = Point::new(0.1, 2.0, 3.0, 4.0);
        let c = Chart::cartesian();
        assert_eq!(transform_one_form([1.0, 2.0, 3.0, 4.0], &p, &c, &c).unwrap(), [1.0, 2.0, 3.0, 4.0]);
    }

    #[test]
    fn one_form_round_trip_and_jacobian_inverse() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let (sph, cart) = (Chart::spherical(), Chart::cartesian());
        for _ in 0..50 {
            let dir: [f64; 3] = std::array::from_fn(|_| rng.gen_range(-1.0..1.0));
            let n = (dir[0] * dir[0] + dir[1] * dir[1] + dir[2] * dir[2]).sqrt();
            let p = Point::new(rng.gen_range(-1.0..1.0), 10.0 * dir[0] / n, 10.0 * dir[1] / n, 10.0 * dir[2] / n);
            let w: [f64; 4] = std::array::from_fn(|_| rng.gen_range(-1.0..1.0));
            let q = transform_point(&p, &cart, &sph).unwrap();
            let ws = transform_one_form(w, &p, &cart, &sph).unwrap();
            let back = transform_one_form(ws, &q, &sph, &cart).unwrap();
            for i in 0..4 {
                assert!((back[i] - w[i]).abs() < 1e-10);
            }
            let a = jacobian(cartesian_to_spherical::<Jet>, &p);
            let b = jacobian(spherical_to_cartesian::<Jet>, &q);
            for i in 0..4 {
                for j in 0..4 {
                    let s: f64 = (0..4).map(|k| a[i][k] * b[k][j]).sum();
                    assert!((s - if i == j { 1.0 } else { 0.0 }).abs() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn axis_outside_overlap() {
        let p = Point::new(0.0, 0.0, 0.0, 5.0);
        assert!(transform_point(&p, &Chart::cartesian(), &Chart::spherical()).is_err());
    }
}
