//! Killing verification, the wave equation for Killing 1-forms and the
//! Maxwell-like system they satisfy, including the teleparallel split.

use nalgebra::Matrix4;

use crate::algebra::Multivector;
use crate::calculus::{
    codifferential, dalembertian_and_ricci_split, dirac_apply, exterior_derivative, lie_derivative_metric, linear_combination,
    pointwise, ricci_operator, SharedField,
};
use crate::curvature::{curvature_jets, EnergyMomentum};
use crate::error::{Error, Result};
use crate::geometry::{Point, SharedMetric};
use crate::report::{evaluate_points, evaluate_points_multi, ResidualReport, Status};
use crate::scenarios::{KillingField, Scenario};

pub const TOL_KILLING: f64 = 1e-10;
pub const TOL_DELTA_A: f64 = 1e-9;
pub const TOL_BOX_RICCI: f64 = 1e-8;
pub const TOL_WAVE: f64 = 1e-8;
pub const TOL_LHE_DET: f64 = 1e-8;
pub const TOL_DF: f64 = 1e-10;
pub const TOL_DELTA_F: f64 = 1e-7;
pub const TOL_CURRENT_ROUTE: f64 = 1e-8;
pub const TOL_CONSERVATION: f64 = 1e-8;
pub const TOL_ORTHONORMAL: f64 = 1e-8;
pub const TOL_GAUGE: f64 = 1e-8;
pub const TOL_TELEPARALLEL: f64 = 1e-7;

/// `R A` for the scalar curvature `R`.
pub fn scalar_curvature_times(w: SharedField, metric: SharedMetric) -> SharedField {
    pointwise(move |p, order| {
        let c = curvature_jets(metric.as_ref(), p, order)?;
        Ok(w.jet(p, order)?.scale_by(&c.scalar))
    })
}

/// `T(A) = 𝒯^μ A_μ`
pub fn energy_momentum_apply(w: SharedField, metric: SharedMetric, t: EnergyMomentum) -> SharedField {
    pointwise(move |p, order| {
        let m = metric.metric_at(p, order)?;
        Ok(t.apply(&w.jet(p, order)?, &m))
    })
}

/// `T A` for the trace `T = T^μ_μ`.
pub fn trace_times(w: SharedField, metric: SharedMetric, t: EnergyMomentum) -> SharedField {
    pointwise(move |p, order| {
        let m = metric.metric_at(p, order)?;
        Ok(w.jet(p, order)?.scale_by(&t.trace(&m)))
    })
}

/// The current `J = RA + 2T(A)`.
pub fn current(a: SharedField, metric: SharedMetric, t: EnergyMomentum) -> SharedField {
    linear_combination(vec![
        (1.0, scalar_curvature_times(a.clone(), metric.clone())),
        (2.0, energy_momentum_apply(a, metric, t)),
    ])
}

fn norm(w: &SharedField, p: &Point) -> Result<f64> {
    Ok(w.value(p)?.max_abs())
}

fn diff_norm(a: &SharedField, b: &SharedField, p: &Point) -> Result<f64> {
    Ok((&a.value(p)? - &b.value(p)?).max_abs())
}

fn report(id: &str, s: &Scenario, k: &KillingField, tol: f64, per_point: Vec<crate::report::PointResidual>) -> ResidualReport {
    ResidualReport::from_points(id, &s.name, &k.name, tol, per_point)
}

/// `max |(£_X g)_{μν}|` per point.
pub fn killing_residual(s: &Scenario, k: &KillingField, points: &[Point]) -> Result<ResidualReport> {
    let per = evaluate_points(points, |p| {
        let l = lie_derivative_metric(k.vector.as_ref(), s.metric.as_ref(), p)?;
        Ok(l.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs())))
    })?;
    Ok(report("killing", s, k, TOL_KILLING, per))
}

/// `‖δA‖` and `‖∂·∂A − ∂∧∂A‖`.
pub fn lemma_residuals(s: &Scenario, k: &KillingField, points: &[Point]) -> Result<Vec<ResidualReport>> {
    let delta_a = codifferential(k.a.clone(), s.metric.clone());
    let split = dalembertian_and_ricci_split(k.a.clone(), s.metric.clone());
    let [d, b] = evaluate_points_multi(points, |p| {
        Ok([norm(&delta_a, p)?, diff_norm(&split.dalembertian, &split.ricci_part, p)?])
    })?;
    Ok(vec![
        report("lemmas.delta_a", s, k, TOL_DELTA_A, d),
        report("lemmas.box_ricci", s, k, TOL_BOX_RICCI, b),
    ])
}

/// `|det(R^μ_ν − ½Rδ^μ_ν − T^μ_ν)|` at `p`.
pub fn lhe_determinant(metric: &SharedMetric, t: &EnergyMomentum, p: &Point) -> Result<f64> {
    let c = curvature_jets(metric.as_ref(), p, 0)?;
    let tm = t.mixed(&c.metric);
    let r = c.scalar.value();
    let mat = Matrix4::from_fn(|mu, nu| {
        let delta = if mu == nu { 1.0 } else { 0.0 };
        c.ricci_mixed[mu][nu].value() - 0.5 * r * delta - tm[mu][nu].value()
    });
    Ok(mat.determinant().abs())
}

/// `‖∂·∂A − ½RA − T(A)‖` and the compatibility determinant.
pub fn wave_equation_residual(s: &Scenario, k: &KillingField, points: &[Point]) -> Result<Vec<ResidualReport>> {
    let t = s.require_energy_momentum()?;
    let split = dalembertian_and_ricci_split(k.a.clone(), s.metric.clone());
    let rhs = linear_combination(vec![
        (0.5, scalar_curvature_times(k.a.clone(), s.metric.clone())),
        (1.0, energy_momentum_apply(k.a.clone(), s.metric.clone(), t)),
    ]);
    let [w, det] = evaluate_points_multi(points, |p| {
        Ok([diff_norm(&split.dalembertian, &rhs, p)?, lhe_determinant(&s.metric, &t, p)?])
    })?;
    Ok(vec![
        report("wave", s, k, TOL_WAVE, w),
        report("wave.lhe_det", s, k, TOL_LHE_DET, det),
    ])
}

/// Reports of the Maxwell-like system plus the evaluable currents.
#[derive(Clone)]
pub struct MaxwellOutcome {
    pub reports: Vec<ResidualReport>,
    /// `J = RA + 2T(A)`
    pub current: SharedField,
    /// Superconducting part `J_s = RA`.
    pub superconducting: SharedField,
}

pub fn maxwell_like_residuals(s: &Scenario, k: &KillingField, points: &[Point]) -> Result<MaxwellOutcome> {
    let t = s.require_energy_momentum()?;
    let metric = s.metric.clone();
    let j = current(k.a.clone(), metric.clone(), t);
    let j_s = scalar_curvature_times(k.a.clone(), metric.clone());
    let df = exterior_derivative(k.f.clone());
    let delta_f = codifferential(k.f.clone(), metric.clone());
    let dirac_f = dirac_apply(k.f.clone(), metric.clone());
    let delta_delta_f = codifferential(delta_f.clone(), metric.clone());
    let ricci_twice = linear_combination(vec![(2.0, ricci_operator(k.a.clone(), metric.clone()))]);
    let delta_plus_j = linear_combination(vec![(1.0, delta_f.clone()), (1.0, j.clone())]);
    let [r_df, r_delta, r_dirac, r_consistency, r_route, r_cons] = evaluate_points_multi(points, |p| {
        let a = norm(&df, p)?;
        let b = norm(&delta_plus_j, p)?;
        let c = diff_norm(&dirac_f, &j, p)?;
        Ok([a, b, c, (c - a - b).max(0.0), diff_norm(&j, &ricci_twice, p)?, norm(&delta_delta_f, p)?])
    })?;
    let reports = vec![
        report("maxwell.dF", s, k, TOL_DF, r_df),
        report("maxwell.delta_F", s, k, TOL_DELTA_F, r_delta),
        report("maxwell.dirac", s, k, TOL_DELTA_F, r_dirac),
        report("maxwell.consistency", s, k, 1e-12, r_consistency)
            .with_note("excess of the Dirac residual over the sum of the dF and delta F residuals"),
        report("maxwell.curr_route", s, k, TOL_CURRENT_ROUTE, r_route),
        report("maxwell.conservation", s, k, TOL_CONSERVATION, r_cons),
    ];
    Ok(MaxwellOutcome {
        reports,
        current: j,
        superconducting: j_s,
    })
}

/// Coefficients `h^a_μ` of a coframe at `p`.
fn coframe_matrix(coframe: &[SharedField; 4], p: &Point) -> Result<Matrix4<f64>> {
    let rows: Vec<[f64; 4]> = coframe.iter().map(|c| c.value(p).map(|v| v.one_form_components())).collect::<Result<_>>()?;
    Ok(Matrix4::from_fn(|a, mu| rows[a][mu]))
}

/// `max |g_{μν} − η_ab h^a_μ h^b_ν|` at `p`.
pub fn orthonormality_error(metric: &SharedMetric, coframe: &[SharedField; 4], p: &Point) -> Result<f64> {
    let h = coframe_matrix(coframe, p)?;
    let eta = Matrix4::from_diagonal(&nalgebra::Vector4::new(1.0, -1.0, -1.0, -1.0));
    let rebuilt = h.transpose() * eta * h;
    let g = metric.metric_at(p, 0)?.values().g;
    let mut worst = 0.0f64;
    for mu in 0..4 {
        for nu in 0..4 {
            worst = worst.max((g[mu][nu] - rebuilt[(mu, nu)]).abs());
        }
    }
    Ok(worst)
}

/// Teleparallel split `δF + 2(𝔱(A) + T(A)) = 0` with
/// `𝔱ᵃ = ∂·∂𝔤ᵃ + ½R𝔤ᵃ` and `𝔱(A) = 𝔱ᵃA_a − A_a ∂·∂𝔤ᵃ`.
///
/// Returns the gauge report and the residual report. When the coframe is not
/// in the Lorenz gauge pointwise, the residual report has status
/// [`Status::GaugeViolated`] and carries the gauge values instead.
pub fn teleparallel_split(s: &Scenario, k: &KillingField, coframe: &[SharedField; 4], points: &[Point]) -> Result<Vec<ResidualReport>> {
    let t = s.require_energy_momentum()?;
    let metric = s.metric.clone();
    for p in points {
        let err = orthonormality_error(&metric, coframe, p)?;
        if !(err <= TOL_ORTHONORMAL) {
            return Err(Error::NotOrthonormal(err));
        }
    }
    let deltas: Vec<SharedField> = coframe.iter().map(|c| codifferential(c.clone(), metric.clone())).collect();
    let gauge = evaluate_points(points, |p| deltas.iter().try_fold(0.0f64, |m, d| Ok(m.max(norm(d, p)?))))?;
    let mut gauge_report = report("teleparallel.gauge", s, k, TOL_GAUGE, gauge.clone());
    if !gauge_report.pass {
        gauge_report.status = Status::GaugeViolated;
        let mut skipped = report("teleparallel", s, k, TOL_TELEPARALLEL, gauge)
            .with_note("coframe violates the Lorenz gauge; per-point values are max |delta g^a|, residual skipped");
        skipped.status = Status::GaugeViolated;
        return Ok(vec![gauge_report, skipped]);
    }
    let boxes: Vec<SharedField> = coframe
        .iter()
        .map(|c| dalembertian_and_ricci_split(c.clone(), metric.clone()).dalembertian)
        .collect();
    let delta_f = codifferential(k.f.clone(), metric.clone());
    let t_a = energy_momentum_apply(k.a.clone(), metric.clone(), t);
    let per = evaluate_points(points, |p| {
        let r = curvature_jets(metric.as_ref(), p, 0)?.scalar.value();
        let h = coframe_matrix(coframe, p)?;
        let hinv = h.try_inverse().ok_or_else(|| Error::InvalidMetric(format!("degenerate coframe at {p}")))?;
        let a = k.a.value(p)?.one_form_components();
        // A_a = A_μ (h⁻¹)^μ_a
        let a_frame: [f64; 4] = std::array::from_fn(|i| (0..4).map(|mu| a[mu] * hinv[(mu, i)]).sum());
        let mut tele = Multivector::<f64>::zero();
        for (i, (c, b)) in coframe.iter().zip(&boxes).enumerate() {
            let g_a = c.value(p)?;
            let box_a = b.value(p)?;
            let t_frame = &box_a + &g_a.scale(0.5 * r);
            tele = &tele + &(&t_frame.scale(a_frame[i]) - &box_a.scale(a_frame[i]));
        }
        let total = &delta_f.value(p)? + &(&tele + &t_a.value(p)?).scale(2.0);
        Ok(total.max_abs())
    })?;
    Ok(vec![gauge_report, report("teleparallel", s, k, TOL_TELEPARALLEL, per)])
}

/// Field strength components for diagnostics: `F_{μν}` at `p`.
pub fn field_strength(k: &KillingField, p: &Point) -> Result<[[f64; 4]; 4]> {
    let f = k.f.value(p)?;
    Ok(std::array::from_fn(|mu| {
        std::array::from_fn(|nu| {
            if mu == nu {
                0.0
            } else {
                let (lo, hi) = (mu.min(nu), mu.max(nu));
                let v = f[(1 << lo) | (1 << hi)];
                if mu < nu {
                    v
                } else {
                    -v
                }
            }
        })
    }))
}

#[cfg(test)]
mod tests {
    use std::collections::BTreeMap;

    use super::*;
    use crate::calculus::covariant_dalembertian;
    use crate::scenarios::load_scenario;

    fn setup(name: &str, field: &str) -> (Scenario, KillingField, Vec<Point>) {
        let s = load_scenario(name, &BTreeMap::new()).unwrap();
        let k = s.killing_field(field).unwrap();
        let pts = s.sample(12, 7);
        (s, k, pts)
    }

    #[test]
    fn killing_and_negative_control() {
        let (s, k, pts) = setup("schwarzschild", "phi");
        assert!(killing_residual(&s, &k, &pts).unwrap().pass);
        let c = s.killing_field("r_dr").unwrap();
        let bad = killing_residual(&s, &c, &[Point::new(0.0, 4.0, 1.0, 0.3)]).unwrap();
        assert!(bad.max_residual > 0.1);
    }

    #[test]
    fn lemmas_and_wave_hold_on_schwarzschild_and_de_sitter() {
        for (name, field) in [("schwarzschild", "t"), ("de_sitter", "t"), ("schwarzschild", "rot_x")] {
            let (s, k, pts) = setup(name, field);
            for r in lemma_residuals(&s, &k, &pts).unwrap().into_iter().chain(wave_equation_residual(&s, &k, &pts).unwrap()) {
                assert!(r.pass, "{name}/{field} {}: {:e}", r.check_id, r.max_residual);
            }
        }
    }

    #[test]
    fn box_route_agrees_with_christoffel_box() {
        let (s, k, pts) = setup("de_sitter", "t");
        let split = dalembertian_and_ricci_split(k.a.clone(), s.metric.clone());
        let cov = covariant_dalembertian(k.a.clone(), s.metric.clone());
        for p in &pts {
            assert!(diff_norm(&split.dalembertian, &cov, p).unwrap() < 1e-9);
        }
    }

    #[test]
    fn maxwell_system() {
        for (name, field) in [("schwarzschild", "t"), ("de_sitter", "t"), ("minkowski", "rot_x")] {
            let (s, k, pts) = setup(name, field);
            let out = maxwell_like_residuals(&s, &k, &pts).unwrap();
            for r in &out.reports {
                assert!(r.pass, "{name}/{field} {}: {:e}", r.check_id, r.max_residual);
            }
        }
        let (s, k, pts) = setup("de_sitter", "t");
        let out = maxwell_like_residuals(&s, &k, &pts).unwrap();
        let p = &pts[0];
        // de Sitter: R = 4Λ, T(A) = −ΛA so J = 2ΛA
        let expect = k.a.value(p).unwrap().scale(2.0 * 0.03);
        assert!((&out.current.value(p).unwrap() - &expect).max_abs() < 1e-10);
        let js = out.superconducting.value(p).unwrap();
        assert!((&js - &k.a.value(p).unwrap().scale(4.0 * 0.03)).max_abs() < 1e-10);
    }

    #[test]
    fn missing_energy_momentum_is_an_error() {
        let (mut s, k, pts) = setup("minkowski", "t");
        s.energy_momentum = None;
        assert!(matches!(wave_equation_residual(&s, &k, &pts), Err(Error::MissingEnergyMomentum(_))));
    }

    #[test]
    fn teleparallel_branches() {
        let (s, k, pts) = setup("minkowski", "rot_x");
        let cf = s.coframe.clone().unwrap();
        let reps = teleparallel_split(&s, &k, &cf, &pts).unwrap();
        assert!(reps.iter().all(|r| r.pass && r.status == Status::Pass));

        let (s, k, pts) = setup("schwarzschild", "t");
        let cf = s.coframe.clone().unwrap();
        let reps = teleparallel_split(&s, &k, &cf, &pts).unwrap();
        assert_eq!(reps[1].status, Status::GaugeViolated);

        let scaled: [SharedField; 4] = std::array::from_fn(|a| linear_combination(vec![(1.1, cf[a].clone())]));
        assert!(matches!(teleparallel_split(&s, &k, &scaled, &pts), Err(Error::NotOrthonormal(_))));
    }

    #[test]
    fn lhe_determinant_vanishes_on_shell() {
        let (s, _, pts) = setup("de_sitter", "t");
        let t = s.energy_momentum.unwrap();
        assert!(lhe_determinant(&s.metric, &t, &pts[0]).unwrap() < 1e-12);
        let wrong = EnergyMomentum::Cosmological { lambda: 0.06 };
        assert!(lhe_determinant(&s.metric, &wrong, &pts[0]).unwrap() > 1e-8);
    }
}
