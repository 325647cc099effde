//! Fluid reading of a Killing 1-form against the Minkowski background:
//! velocity, vorticity, Lamb vector, the `d` field and its potential `χ`, and
//! the Helmholtz and Navier–Stokes residuals.
//!
//! With `Å = φ dx⁰ − v_i dxⁱ` the vector calculus runs on the covariant
//! components `v_i = −Å_i`; the contravariant velocity is `vⁱ = Å_i`.

use serde::{Deserialize, Serialize};

use crate::algebra::Multivector;
use crate::calculus::{exterior_derivative, linear_combination, lower_components, pointwise, SharedField};
use crate::curvature::Tensor2;
use crate::error::{Error, Result};
use crate::geometry::{ChartKind, Point};
use crate::jet::Jet;
use crate::komar::{gauss_legendre, kahan_sum};
use crate::report::{evaluate_points, evaluate_points_multi, ResidualReport};
use crate::scenarios::{KillingField, Scenario};

pub const TOL_POSTULATE: f64 = 1e-8;
pub const TOL_DIV_W: f64 = 1e-9;
pub const TOL_ROUNDTRIP: f64 = 1e-10;
pub const TOL_CHI_PATHS: f64 = 1e-7;
pub const TOL_HELMHOLTZ: f64 = 1e-10;
pub const TOL_NAVIER_STOKES: f64 = 1e-10;
pub const TOL_REBUILD: f64 = 1e-8;
pub const TOL_DG: f64 = 1e-9;
pub const TOL_LAMB_VORTICITY: f64 = 1e-8;

/// Nodes per segment of the `χ` line integrals.
const LINE_NODES: usize = 16;

/// Blade mask of `dx^a ∧ dx^b` and its sign relative to `a < b` order.
fn pair(a: usize, b: usize) -> (usize, f64) {
    ((1 << a) | (1 << b), if a < b { 1.0 } else { -1.0 })
}

/// `ω_{ab}` of a 2-form.
fn component<T: crate::algebra::Scalar>(w: &Multivector<T>, a: usize, b: usize) -> T {
    if a == b {
        return T::zero();
    }
    let (mask, s) = pair(a, b);
    w[mask].scale(s)
}

fn cross<T: crate::algebra::Scalar>(a: &[T; 3], b: &[T; 3]) -> [T; 3] {
    [
        a[1].clone() * b[2].clone() - a[2].clone() * b[1].clone(),
        a[2].clone() * b[0].clone() - a[0].clone() * b[2].clone(),
        a[0].clone() * b[1].clone() - a[1].clone() * b[0].clone(),
    ]
}

/// `∇×u` from jets; spatial index `i` is coordinate `i + 1`.
fn curl(u: &[Jet; 3]) -> [Jet; 3] {
    [
        &u[2].partial(2) - &u[1].partial(3),
        &u[0].partial(3) - &u[2].partial(1),
        &u[1].partial(1) - &u[0].partial(2),
    ]
}

fn div(u: &[Jet; 3]) -> Jet {
    &(&u[0].partial(1) + &u[1].partial(2)) + &u[2].partial(3)
}

fn values3(u: &[Jet; 3]) -> [f64; 3] {
    std::array::from_fn(|i| u[i].value())
}

fn max_abs3(u: &[f64; 3]) -> f64 {
    u.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

/// Fluid variables as jets at one point.
struct Kinematics {
    phi: Jet,
    /// `v_i = −Å_i`
    v: [Jet; 3],
    w: [Jet; 3],
    l: [Jet; 3],
    /// `F̊_{0i}`
    electric: [Jet; 3],
    /// `F̊_{jk}` as `(F̊_{23}, F̊_{31}, F̊_{12})`
    magnetic: [Jet; 3],
    d: [Jet; 3],
}

/// Fluid variables at a point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FluidPoint {
    pub coords: [f64; 4],
    pub phi: f64,
    /// Contravariant velocity `vⁱ = Å_i`.
    pub velocity: [f64; 3],
    /// Covariant velocity `v_i = −Å_i`.
    pub v_lower: [f64; 3],
    pub w: [f64; 3],
    pub l: [f64; 3],
    pub d: [f64; 3],
    pub electric: [f64; 3],
    /// `V + q = φ − ½v²`
    pub v_plus_q: f64,
}

/// Fluid decomposition of a Killing field's Minkowski dual `Å`.
#[derive(Clone)]
pub struct FluidState {
    pub scenario: String,
    pub field: String,
    a_ring: SharedField,
    f_ring: SharedField,
    /// Replaces the `d` field by zero (ablation control).
    pub ablate_d: bool,
}

impl std::fmt::Debug for FluidState {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FluidState")
            .field("scenario", &self.scenario)
            .field("field", &self.field)
            .field("ablate_d", &self.ablate_d)
            .finish()
    }
}

/// `φ = Å₀` and `v` from `Å`; requires the Cartesian Minkowski pairing.
pub fn decompose_potential(s: &Scenario, k: &KillingField) -> Result<FluidState> {
    if s.chart().kind != ChartKind::Cartesian {
        return Err(Error::ChartMismatch(format!(
            "fluid identification needs the Cartesian Minkowski chart, scenario `{}` uses {}",
            s.name,
            s.chart().name
        )));
    }
    Ok(FluidState {
        scenario: s.name.clone(),
        field: k.name.clone(),
        a_ring: k.a_ring.clone(),
        f_ring: k.f_ring.clone(),
        ablate_d: false,
    })
}

impl FluidState {
    /// State built from an arbitrary 1-form `Å` on Cartesian Minkowski.
    pub fn from_potential(name: &str, a_ring: SharedField) -> Self {
        FluidState {
            scenario: "minkowski".into(),
            field: name.into(),
            f_ring: exterior_derivative(a_ring.clone()),
            a_ring,
            ablate_d: false,
        }
    }

    pub fn ablated(&self) -> Self {
        FluidState {
            ablate_d: true,
            ..self.clone()
        }
    }

    fn kinematics(&self, p: &Point, order: usize) -> Result<Kinematics> {
        let a = self.a_ring.jet(p, order + 1)?.one_form_components();
        let f = self.f_ring.jet(p, order)?;
        let v: [Jet; 3] = std::array::from_fn(|i| -&a[i + 1]);
        let w = curl(&v);
        let v_lo: [Jet; 3] = std::array::from_fn(|i| v[i].truncate(order));
        let l = cross(&w, &v_lo);
        let electric: [Jet; 3] = std::array::from_fn(|i| component(&f, 0, i + 1));
        let magnetic = [component(&f, 2, 3), component(&f, 3, 1), component(&f, 1, 2)];
        let d = if self.ablate_d {
            std::array::from_fn(|_| Jet::zero())
        } else {
            std::array::from_fn(|i| &l[i] - &electric[i])
        };
        Ok(Kinematics {
            phi: a[0].truncate(order),
            v: v_lo,
            w,
            l,
            electric,
            magnetic,
            d,
        })
    }

    pub fn at(&self, p: &Point) -> Result<FluidPoint> {
        let k = self.kinematics(p, 0)?;
        let v_lower = values3(&k.v);
        let phi = k.phi.value();
        let v2: f64 = v_lower.iter().map(|x| x * x).sum();
        Ok(FluidPoint {
            coords: p.0,
            phi,
            velocity: v_lower.map(|x| -x),
            v_lower,
            w: values3(&k.w),
            l: values3(&k.l),
            d: values3(&k.d),
            electric: values3(&k.electric),
            v_plus_q: phi - 0.5 * v2,
        })
    }

    /// `∇×d` at `p`.
    pub fn curl_d(&self, p: &Point) -> Result<[f64; 3]> {
        Ok(values3(&curl(&self.kinematics(p, 1)?.d)))
    }

    /// `−∫ d·dx` along straight segments through `path`, at the time of the
    /// first vertex.
    fn line_integral(&self, path: &[[f64; 3]], t: f64) -> Result<f64> {
        let (x, wts) = gauss_legendre(LINE_NODES);
        let mut terms = Vec::new();
        for seg in path.windows(2) {
            let (a, b) = (seg[0], seg[1]);
            let delta = [b[0] - a[0], b[1] - a[1], b[2] - a[2]];
            if delta.iter().all(|c| *c == 0.0) {
                continue;
            }
            for (xi, wi) in x.iter().zip(&wts) {
                let s = 0.5 * (xi + 1.0);
                let q = Point::new(t, a[0] + s * delta[0], a[1] + s * delta[1], a[2] + s * delta[2]);
                let d = values3(&self.kinematics(&q, 0)?.d);
                terms.push(-0.5 * wi * (d[0] * delta[0] + d[1] * delta[1] + d[2] * delta[2]));
            }
        }
        Ok(kahan_sum(terms))
    }

    /// `χ` with `d = −∇χ` and `χ(0) = 0`, along the coordinate axes.
    pub fn chi_axis(&self, p: &Point) -> Result<f64> {
        let [t, x, y, z] = p.0;
        self.line_integral(&[[0.0; 3], [x, 0.0, 0.0], [x, y, 0.0], [x, y, z]], t)
    }

    /// `χ` along the straight segment from the origin.
    pub fn chi_straight(&self, p: &Point) -> Result<f64> {
        let [t, x, y, z] = p.0;
        self.line_integral(&[[0.0; 3], [x, y, z]], t)
    }
}

/// Validates the postulate (`∇×d = 0`) and reports the structural checks of
/// the identification.
pub fn fluid_fields(s: &Scenario, k: &KillingField, points: &[Point]) -> Result<(FluidState, Vec<ResidualReport>)> {
    let state = decompose_potential(s, k)?;
    let [curl_d, div_w, roundtrip] = evaluate_points_multi(points, |p| {
        let kin = state.kinematics(p, 1)?;
        let mut rt = 0.0f64;
        for i in 0..3 {
            // F̊_{jk} = −Σ ε_{ijk} w_i and F̊_{0i} = l_i − d_i
            rt = rt.max((kin.magnetic[i].value() + kin.w[i].value()).abs());
            rt = rt.max((kin.electric[i].value() - (kin.l[i].value() - kin.d[i].value())).abs());
        }
        Ok([max_abs3(&values3(&curl(&kin.d))), div(&kin.w).value().abs(), rt])
    })?;
    let worst = curl_d.iter().fold(0.0f64, |m, r| m.max(r.residual));
    if !(worst <= TOL_POSTULATE) {
        return Err(Error::PostulateViolated {
            curl: worst,
            tolerance: TOL_POSTULATE,
        });
    }
    let paths = evaluate_points(points, |p| Ok((state.chi_axis(p)? - state.chi_straight(p)?).abs()))?;
    let reports = vec![
        ResidualReport::from_points("fluid.postulate", &s.name, &k.name, TOL_POSTULATE, curl_d),
        ResidualReport::from_points("fluid.div_w", &s.name, &k.name, TOL_DIV_W, div_w),
        ResidualReport::from_points("fluid.roundtrip", &s.name, &k.name, TOL_ROUNDTRIP, roundtrip),
        ResidualReport::from_points("fluid.chi_paths", &s.name, &k.name, TOL_CHI_PATHS, paths),
    ];
    Ok((state, reports))
}

/// `max|∇×l + ∂w/∂t|` and `max|∇·w|`.
pub fn helmholtz_residual(state: &FluidState, points: &[Point]) -> Result<Vec<ResidualReport>> {
    let [c, d] = evaluate_points_multi(points, |p| {
        let k = state.kinematics(p, 1)?;
        let cl = curl(&k.l);
        let r: [f64; 3] = std::array::from_fn(|i| cl[i].value() + k.w[i].gradient(0));
        Ok([max_abs3(&r), div(&k.w).value().abs()])
    })?;
    Ok(vec![
        ResidualReport::from_points("helmholtz.curl", &state.scenario, &state.field, TOL_HELMHOLTZ, c),
        ResidualReport::from_points("helmholtz.div", &state.scenario, &state.field, TOL_HELMHOLTZ, d),
    ])
}

/// `max|∂_t v + w×v + ∇φ − d|`.
pub fn navier_stokes_residual(state: &FluidState, points: &[Point]) -> Result<ResidualReport> {
    let per = evaluate_points(points, |p| {
        let k = state.kinematics(p, 1)?;
        let r: [f64; 3] =
            std::array::from_fn(|i| k.v[i].gradient(0) + k.l[i].value() + k.phi.gradient(i + 1) - k.d[i].value());
        Ok(max_abs3(&r))
    })?;
    let mut rep = ResidualReport::from_points("navier_stokes", &state.scenario, &state.field, TOL_NAVIER_STOKES, per);
    if state.ablate_d {
        rep = rep.with_note("ablation: d field set to zero");
    }
    Ok(rep)
}

/// The factor `f` of `A = fÅ`: the scenario's declared expression or
/// `g(X,X)/g̊(X,X)`.
pub fn f_factor(s: &Scenario, k: &KillingField) -> SharedField {
    if let Some(f) = &s.f_expression {
        return f.clone();
    }
    let metric = s.metric.clone();
    let background = s.background.clone();
    let x = k.vector.clone();
    pointwise(move |p, order| {
        let g = metric.metric_at(p, order)?;
        let e = background.metric_at(p, order)?;
        let xv = x.jet(p, order);
        let norm = |g: &Tensor2<Jet>| {
            let low = lower_components(g, &xv);
            (0..4).fold(Jet::zero(), |acc, mu| &acc + &(&low[mu] * &xv[mu]))
        };
        Ok(Multivector::scalar(&norm(&g.g) * &norm(&e.g).recip()))
    })
}

/// `F = df∧Å + fF̊`, closedness of `G = F − F̊`, and the recovery of the Lamb
/// and vorticity components from `F`.
pub fn f_ring_relation(s: &Scenario, k: &KillingField, points: &[Point]) -> Result<Vec<ResidualReport>> {
    let f = f_factor(s, k);
    let (f1, a_ring1) = (f.clone(), k.a_ring.clone());
    let df_wedge_a = pointwise(move |p, order| {
        let fj = f1.jet(p, order + 1)?;
        let grad = Multivector::one_form(std::array::from_fn(|mu| fj[0].partial(mu)));
        Ok(grad.wedge(&a_ring1.jet(p, order)?))
    });
    let (f2, f_ring2) = (f.clone(), k.f_ring.clone());
    let f_times_fring = pointwise(move |p, order| Ok(f_ring2.jet(p, order)?.scale_by(&f2.jet(p, order)?[0])));
    let rebuilt = linear_combination(vec![(1.0, df_wedge_a.clone()), (1.0, f_times_fring)]);
    let g = linear_combination(vec![(1.0, k.f.clone()), (-1.0, k.f_ring.clone())]);
    let dg = exterior_derivative(g.clone());
    let fluid = decompose_potential(s, k).ok();
    let [rebuild, dgr, lwf] = evaluate_points_multi(points, |p| {
        let fv = f.value(p)?[0];
        let big_f = k.f.value(p)?;
        let rebuild = (&big_f - &rebuilt.value(p)?).max_abs();
        let lwf = match &fluid {
            Some(state) => {
                let fp = state.at(p)?;
                // (1/f)F − d ln f∧Å = F̊
                let recovered = &big_f.scale(1.0 / fv) - &df_wedge_a.value(p)?.scale(1.0 / fv);
                let mut worst = 0.0f64;
                for i in 0..3 {
                    let e = component(&recovered, 0, i + 1);
                    worst = worst.max((e - (fp.l[i] - fp.d[i])).abs());
                    let (j, kk) = ((i + 1) % 3 + 1, (i + 2) % 3 + 1);
                    // w_i = −½ Σ ε_{ijk} F̊_{jk}
                    let w = -component(&recovered, j, kk);
                    worst = worst.max((w - fp.w[i]).abs());
                }
                worst
            }
            None => 0.0,
        };
        Ok([rebuild, dg.value(p)?.max_abs(), lwf])
    })?;
    let g_max = points.iter().try_fold(0.0f64, |m, p| Ok::<f64, Error>(m.max(g.value(p)?.max_abs())))?;
    let declared = if s.f_expression.is_some() { "declared f" } else { "f = g(X,X)/g0(X,X)" };
    let mut out = vec![
        ResidualReport::from_points("f_relation.rebuild", &s.name, &k.name, TOL_REBUILD, rebuild).with_note(declared),
        ResidualReport::from_points("f_relation.dG", &s.name, &k.name, TOL_DG, dgr)
            .with_value(g_max)
            .with_note("value is max |G| with G = F - F0"),
    ];
    if fluid.is_some() {
        out.push(
            ResidualReport::from_points("f_relation.lamb_vorticity", &s.name, &k.name, TOL_LAMB_VORTICITY, lwf)
                .with_note("(1/f)F - dln f^A0 compared with l - d and w"),
        );
    }
    Ok(out)
}
