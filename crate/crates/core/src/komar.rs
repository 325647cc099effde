//! Komar current, surface energy and the volume form of the energy for
//! Killing fields.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::algebra::{grade_of, hodge_star, Multivector};
use crate::calculus::{codifferential, dalembertian_and_ricci_split, exterior_derivative, linear_combination, pointwise, SharedField};
use crate::error::{Error, Result};
use crate::geometry::{jacobian, spherical_to_cartesian, ChartKind, Point, SharedMetric};
use crate::killing::{energy_momentum_apply, killing_residual, trace_times};
use crate::report::{evaluate_points_multi, ExtrapolationRow, ResidualReport};
use crate::scenarios::{KillingField, Scenario};

pub const TOL_ROUTES: f64 = 1e-6;
pub const TOL_CONSERVATION: f64 = 1e-6;
pub const TOL_D_DELTA_A: f64 = 1e-8;
pub const TOL_ENERGY: f64 = 1e-6;

/// Gauss–Legendre nodes and weights on `[−1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            // P_n(x) and P_n'(x) by recurrence
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 0 { 1.0 } else { p1 };
            let pm = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (x * pn - pm) / (x * x - 1.0);
            let dx = pn / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

/// Compensated summation in a fixed order.
pub fn kahan_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let (mut sum, mut c) = (0.0, 0.0);
    for v in values {
        let y = v - c;
        let t = sum + y;
        c = (t - sum) - y;
        sum = t;
    }
    sum
}

/// Orientation of coordinate spheres. `Outward` is `dθ∧dφ`, the boundary
/// orientation of a ball oriented by `dr∧dθ∧dφ`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SphereOrientation {
    Outward,
    #[default]
    Inward,
}

impl SphereOrientation {
    pub fn sign(self) -> f64 {
        match self {
            SphereOrientation::Outward => 1.0,
            SphereOrientation::Inward => -1.0,
        }
    }

    pub fn flipped(self) -> Self {
        match self {
            SphereOrientation::Outward => SphereOrientation::Inward,
            SphereOrientation::Inward => SphereOrientation::Outward,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            SphereOrientation::Outward => "outward: +dtheta^dphi, ball +dr^dtheta^dphi",
            SphereOrientation::Inward => "inward: -dtheta^dphi, ball -dr^dtheta^dphi",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SphereQuadrature {
    pub radii: Vec<f64>,
    pub n_theta: usize,
    pub n_phi: usize,
    #[serde(default)]
    pub orientation: SphereOrientation,
    /// Coordinate time of the slice.
    #[serde(default)]
    pub time: f64,
}

impl SphereQuadrature {
    pub fn new(radii: Vec<f64>, n_theta: usize, n_phi: usize) -> Self {
        SphereQuadrature {
            radii,
            n_theta,
            n_phi,
            orientation: SphereOrientation::default(),
            time: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_theta < 8 || self.n_phi < 16 {
            return Err(Error::Config(format!(
                "sphere quadrature needs n_theta >= 8 and n_phi >= 16, got {} and {}",
                self.n_theta, self.n_phi
            )));
        }
        if self.radii.is_empty() || self.radii.iter().any(|r| !(r.is_finite() && *r > 0.0)) {
            return Err(Error::Config(format!("radii must be positive and finite: {:?}", self.radii)));
        }
        if self.radii.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Config(format!("radii must be strictly increasing: {:?}", self.radii)));
        }
        Ok(())
    }
}

/// Image of `(t, r, θ, φ)` in the chart and the tangents `∂_r, ∂_θ, ∂_φ`.
fn embed(kind: ChartKind, s: [f64; 4]) -> (Point, [[f64; 4]; 3]) {
    let sp = Point(s);
    match kind {
        ChartKind::Spherical => (sp, [[0.0, 1.0, 0.0, 0.0], [0.0, 0.0, 1.0, 0.0], [0.0, 0.0, 0.0, 1.0]]),
        ChartKind::Cartesian => {
            let j = jacobian(spherical_to_cartesian, &sp);
            let y = spherical_to_cartesian(&s);
            (Point(y), std::array::from_fn(|k| std::array::from_fn(|a| j[a][k + 1])))
        }
    }
}

fn det(m: &[Vec<f64>]) -> f64 {
    match m.len() {
        0 => 1.0,
        1 => m[0][0],
        2 => m[0][0] * m[1][1] - m[0][1] * m[1][0],
        3 => {
            m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
                + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
        }
        _ => unreachable!("pullbacks go up to three tangents"),
    }
}

/// `ω(e_1, …, e_k)` for the grade-k part of `ω`.
pub fn evaluate_on_tangents(w: &Multivector<f64>, tangents: &[[f64; 4]]) -> f64 {
    let k = tangents.len();
    let mut total = 0.0;
    for mask in (0..16usize).filter(|m| grade_of(*m) == k) {
        if w[mask] == 0.0 {
            continue;
        }
        let idx: Vec<usize> = (0..4).filter(|i| mask & (1 << i) != 0).collect();
        let minor: Vec<Vec<f64>> = tangents.iter().map(|e| idx.iter().map(|&i| e[i]).collect()).collect();
        total += w[mask] * det(&minor);
    }
    total
}

/// `⋆ω`
pub fn hodge_field(w: SharedField, metric: SharedMetric) -> SharedField {
    pointwise(move |p, order| {
        let m = metric.metric_at(p, order)?;
        Ok(hodge_star(&w.jet(p, order)?, &m, false))
    })
}

/// `∮_{S_r} ω` for a 2-form field on the coordinate sphere of radius `r`.
pub fn sphere_integral(w: &SharedField, kind: ChartKind, r: f64, q: &SphereQuadrature) -> Result<f64> {
    let (x, wx) = gauss_legendre(q.n_theta);
    let nodes: Vec<(f64, f64, f64)> = x
        .iter()
        .zip(&wx)
        .flat_map(|(&xi, &wi)| {
            let theta = 0.5 * PI * (xi + 1.0);
            (0..q.n_phi).map(move |j| {
                let phi = -PI + 2.0 * PI * (j as f64 + 0.5) / q.n_phi as f64;
                (theta, phi, wi * 0.5 * PI * 2.0 * PI / q.n_phi as f64)
            })
        })
        .collect();
    let terms: Vec<f64> = nodes
        .par_iter()
        .map(|&(theta, phi, weight)| {
            let (p, e) = embed(kind, [q.time, r, theta, phi]);
            Ok(weight * evaluate_on_tangents(&w.value(&p)?, &[e[1], e[2]]))
        })
        .collect::<Result<_>>()?;
    Ok(q.orientation.sign() * kahan_sum(terms))
}

/// Shell `r_inner ≤ r ≤ r_outer` of a constant-time slice.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BallQuadrature {
    pub r_inner: f64,
    pub r_outer: f64,
    pub n_r: usize,
    pub n_theta: usize,
    pub n_phi: usize,
    #[serde(default)]
    pub orientation: SphereOrientation,
    #[serde(default)]
    pub time: f64,
}

impl BallQuadrature {
    pub fn ball(r_outer: f64) -> Self {
        BallQuadrature {
            r_inner: 0.0,
            r_outer,
            n_r: 24,
            n_theta: 24,
            n_phi: 32,
            orientation: SphereOrientation::default(),
            time: 0.0,
        }
    }
}

/// `∫_V ω` for a 3-form field, with the orientation Stokes-consistent with
/// the sphere orientation.
pub fn ball_integral(w: &SharedField, kind: ChartKind, q: &BallQuadrature) -> Result<f64> {
    let (xr, wr) = gauss_legendre(q.n_r);
    let (xt, wt) = gauss_legendre(q.n_theta);
    let half = 0.5 * (q.r_outer - q.r_inner);
    let mut nodes = Vec::with_capacity(q.n_r * q.n_theta * q.n_phi);
    for (a, b) in xr.iter().zip(&wr) {
        let r = q.r_inner + half * (a + 1.0);
        for (c, d) in xt.iter().zip(&wt) {
            let theta = 0.5 * PI * (c + 1.0);
            for j in 0..q.n_phi {
                let phi = -PI + 2.0 * PI * (j as f64 + 0.5) / q.n_phi as f64;
                nodes.push((r, theta, phi, b * half * d * 0.5 * PI * 2.0 * PI / q.n_phi as f64));
            }
        }
    }
    let terms: Vec<f64> = nodes
        .par_iter()
        .map(|&(r, theta, phi, weight)| {
            let (p, e) = embed(kind, [q.time, r, theta, phi]);
            Ok(weight * evaluate_on_tangents(&w.value(&p)?, &e))
        })
        .collect::<Result<_>>()?;
    Ok(q.orientation.sign() * kahan_sum(terms))
}

/// Value at `h = 0` of the polynomial through `(h_i, y_i)` (Neville).
pub fn extrapolate_to_zero(h: &[f64], y: &[f64]) -> f64 {
    let mut p = y.to_vec();
    let n = p.len();
    for k in 1..n {
        for i in 0..n - k {
            p[i] = (h[i + k] * p[i] - h[i] * p[i + 1]) / (h[i + k] - h[i]);
        }
    }
    p[0]
}

/// Surface energy and the per-radius estimates it was extrapolated from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KomarEnergy {
    pub value: f64,
    pub per_radius: Vec<ExtrapolationRow>,
    pub orientation: SphereOrientation,
}

/// `ℰ = −(1/8π)∮⋆F` on each sphere, extrapolated in `1/r` to infinity.
pub fn komar_energy_surface(s: &Scenario, k: &KillingField, q: &SphereQuadrature) -> Result<KomarEnergy> {
    q.validate()?;
    let star_f = hodge_field(k.f.clone(), s.metric.clone());
    let kind = s.chart().kind;
    let estimates: Vec<f64> = q
        .radii
        .iter()
        .map(|&r| Ok(-sphere_integral(&star_f, kind, r, q)? / (8.0 * PI)))
        .collect::<Result<_>>()?;
    let per_radius: Vec<ExtrapolationRow> = q
        .radii
        .iter()
        .zip(&estimates)
        .map(|(&radius, &estimate)| ExtrapolationRow { radius, estimate })
        .collect();
    if estimates.iter().any(|e| !e.is_finite()) {
        return Err(Error::NonFinite(format!("Komar estimates {estimates:?}")));
    }
    let scale = estimates.iter().fold(1.0f64, |m, e| m.max(e.abs()));
    let diffs: Vec<f64> = estimates.windows(2).map(|w| (w[1] - w[0]).abs()).collect();
    let floor = 1e-9 * scale;
    if diffs.windows(2).any(|d| d[1] > d[0] + floor) {
        let rows: Vec<String> = per_radius.iter().map(|r| format!("r={} E={:e}", r.radius, r.estimate)).collect();
        return Err(Error::Convergence(format!("surface estimates diverge with radius: {}", rows.join(", "))));
    }
    let h: Vec<f64> = q.radii.iter().map(|r| 1.0 / r).collect();
    Ok(KomarEnergy {
        value: extrapolate_to_zero(&h, &estimates),
        per_radius,
        orientation: q.orientation,
    })
}

/// Report wrapper for the surface energy. The residual is the spread between
/// the extrapolated value and the outermost estimate.
pub fn komar_energy_report(s: &Scenario, k: &KillingField, q: &SphereQuadrature) -> Result<ResidualReport> {
    let e = komar_energy_surface(s, k, q)?;
    let last = e.per_radius.last().map(|r| r.estimate).unwrap_or(e.value);
    let spread = (e.value - last).abs();
    let mut rep = ResidualReport::from_points("komar.energy", &s.name, &k.name, TOL_ENERGY, Vec::new());
    rep.max_residual = spread;
    rep.mean_residual = spread;
    rep = rep.with_tolerance(TOL_ENERGY).with_value(e.value);
    rep.extrapolation = Some(e.per_radius);
    rep.conventions.sphere_orientation = Some(q.orientation.label().into());
    Ok(rep)
}

/// `J_K = −δF` directly.
pub fn komar_current_field(k: &KillingField, metric: SharedMetric) -> SharedField {
    linear_combination(vec![(-1.0, codifferential(k.f.clone(), metric))])
}

/// `J_K = T(A) − ½TA + dδA + ∂·∂A`.
pub fn komar_current_explicit(s: &Scenario, k: &KillingField) -> Result<SharedField> {
    let t = s.require_energy_momentum()?;
    let metric = s.metric.clone();
    let split = dalembertian_and_ricci_split(k.a.clone(), metric.clone());
    Ok(linear_combination(vec![
        (1.0, energy_momentum_apply(k.a.clone(), metric.clone(), t)),
        (-0.5, trace_times(k.a.clone(), metric.clone(), t)),
        (1.0, exterior_derivative(codifferential(k.a.clone(), metric))),
        (1.0, split.dalembertian),
    ]))
}

/// Two routes to the Komar current, its conservation and, for Killing
/// fields, the vanishing of `dδA`.
pub fn komar_current(s: &Scenario, k: &KillingField, points: &[Point]) -> Result<Vec<ResidualReport>> {
    let direct = komar_current_field(k, s.metric.clone());
    let explicit = komar_current_explicit(s, k)?;
    let conservation = codifferential(direct.clone(), s.metric.clone());
    let d_delta_a = exterior_derivative(codifferential(k.a.clone(), s.metric.clone()));
    let [routes, cons, dd] = evaluate_points_multi(points, |p| {
        Ok([
            (&direct.value(p)? - &explicit.value(p)?).max_abs(),
            conservation.value(p)?.max_abs(),
            d_delta_a.value(p)?.max_abs(),
        ])
    })?;
    let mut out = vec![
        ResidualReport::from_points("komar.routes", &s.name, &k.name, TOL_ROUTES, routes),
        ResidualReport::from_points("komar.conservation", &s.name, &k.name, TOL_CONSERVATION, cons),
    ];
    if k.killing {
        out.push(ResidualReport::from_points("komar.d_delta_a", &s.name, &k.name, TOL_D_DELTA_A, dd));
    }
    Ok(out)
}

/// Volume form of the energy, `(1/8π)∫_V ⋆J_K`, with `J_K = −δF`. Equal to
/// the surface energy on `∂V` by Stokes.
pub fn komar_energy_volume(s: &Scenario, k: &KillingField, q: &BallQuadrature) -> Result<f64> {
    let star = hodge_field(komar_current_field(k, s.metric.clone()), s.metric.clone());
    Ok(ball_integral(&star, s.chart().kind, q)? / (8.0 * PI))
}

/// Energy of a Killing field from matter alone.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VolumeEnergy {
    pub value: f64,
    pub notes: Vec<String>,
}

/// `ℰ = (1/8π)∫_V ⋆(T(A) − ½TA)`.
pub fn killing_energy_volume(s: &Scenario, k: &KillingField, q: &BallQuadrature) -> Result<VolumeEnergy> {
    let t = s.require_energy_momentum()?;
    if t.is_vacuum() {
        return Ok(VolumeEnergy {
            value: 0.0,
            notes: vec!["vacuum: T = 0 on the region, any mass resides outside the matter support of V".into()],
        });
    }
    let probe: Vec<Point> = [0.25, 0.5, 0.75, 1.0]
        .iter()
        .map(|f| embed(s.chart().kind, [q.time, q.r_inner + f * (q.r_outer - q.r_inner), 1.0, 0.5]).0)
        .collect();
    let kr = killing_residual(s, k, &probe)?;
    if !kr.pass {
        return Err(Error::InvalidScenario {
            scenario: s.name.clone(),
            reason: format!("field `{}` is not Killing in V (residual {:e})", k.name, kr.max_residual),
        });
    }
    let integrand = linear_combination(vec![
        (1.0, energy_momentum_apply(k.a.clone(), s.metric.clone(), t)),
        (-0.5, trace_times(k.a.clone(), s.metric.clone(), t)),
    ]);
    let star = hodge_field(integrand, s.metric.clone());
    Ok(VolumeEnergy {
        value: ball_integral(&star, s.chart().kind, q)? / (8.0 * PI),
        notes: Vec::new(),
    })
}
