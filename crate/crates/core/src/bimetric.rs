//! The curved connection seen from the flat background: nonmetricity,
//! strain, the `J` tensor and the algebraic constraint on Killing 1-forms.
//!
//! Nonmetricity is stored with the derivative index first,
//! `Q_{σαβ} = (D_σ g̊)_{αβ}`, and the strain is
//! `S^ρ_{αβ} = g̊^{ρσ}(Q_{αβσ} + Q_{βσα} − Q_{σαβ})` under that reading.

use serde::{Deserialize, Serialize};

use crate::algebra::Scalar;
use crate::curvature::{christoffel, curvature_jets, Tensor2, Tensor3};
use crate::error::{Error, Result};
use crate::geometry::{ChartKind, Point};
use crate::jet::Jet;
use crate::report::{evaluate_points_multi, ResidualReport};
use crate::scenarios::{KillingField, Scenario};

pub const TOL_NONMETRICITY: f64 = 1e-10;
pub const TOL_STRAIN: f64 = 1e-9;
pub const TOL_J_TENSOR: f64 = 1e-7;
pub const TOL_CONSTRAINT: f64 = 1e-6;

const ETA: [f64; 4] = [1.0, -1.0, -1.0, -1.0];

/// Two-metric quantities at a point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BimetricPoint {
    pub coords: [f64; 4],
    /// `Q[σ][α][β] = (D_σ g̊)_{αβ}`
    pub q: Tensor3,
    /// `S[ρ][α][β] = S^ρ_{αβ}`
    pub s: Tensor3,
    /// `K = −½S`
    pub k: Tensor3,
    /// `Γ^ρ_{αβ}` of `g`.
    pub gamma: Tensor3,
    /// `Γ̊^ρ_{αβ}` of `g̊`.
    pub gamma_ring: Tensor3,
    /// `J_{μα}`
    pub j: Tensor2,
    /// `max |Q − D(g̊ − g)|`: nonmetricity against the route through `Dg = 0`.
    pub q_oracle_gap: f64,
}

fn require_cartesian(s: &Scenario) -> Result<()> {
    if s.chart().kind != ChartKind::Cartesian {
        return Err(Error::ChartMismatch(format!(
            "scenario `{}` has no shared Cartesian chart with the Minkowski background",
            s.name
        )));
    }
    Ok(())
}

/// `(D_σ h)_{αβ}` for a symmetric tensor field `h` given as jets.
fn covariant_derivative(h: &Tensor2<Jet>, gamma: &Tensor3<Jet>) -> Tensor3<Jet> {
    std::array::from_fn(|s| {
        std::array::from_fn(|a| {
            std::array::from_fn(|b| {
                let mut acc = h[a][b].partial(s);
                for l in 0..4 {
                    acc -= &gamma[l][s][a] * &h[l][b].truncate(gamma[l][s][a].order());
                    acc -= &gamma[l][s][b] * &h[a][l].truncate(gamma[l][s][b].order());
                }
                acc
            })
        })
    })
}

/// Strain jets `S^ρ_{αβ}` from nonmetricity jets and the background inverse.
fn strain(q: &Tensor3<Jet>, ginv_ring: &Tensor2<Jet>) -> Tensor3<Jet> {
    std::array::from_fn(|r| {
        std::array::from_fn(|a| {
            std::array::from_fn(|b| {
                let mut acc = Jet::zero();
                for s in 0..4 {
                    if ginv_ring[r][s].is_zero() {
                        continue;
                    }
                    let combo = &(&q[a][b][s] + &q[b][s][a]) - &q[s][a][b];
                    acc += &ginv_ring[r][s].truncate(combo.order()) * &combo;
                }
                acc
            })
        })
    })
}

fn values3(t: &Tensor3<Jet>) -> Tensor3 {
    std::array::from_fn(|a| std::array::from_fn(|b| std::array::from_fn(|c| t[a][b][c].value())))
}

/// `Q`, `S`, `K`, both connections and `J` at `p`.
pub fn nonmetricity_and_strain(s: &Scenario, p: &Point) -> Result<BimetricPoint> {
    require_cartesian(s)?;
    // order 2 metrics give order 1 Christoffels and order 1 nonmetricity
    let m = s.metric.metric_at(p, 2)?;
    let e = s.background.metric_at(p, 2)?;
    let gamma = christoffel(&m);
    let gamma_ring = christoffel(&e);
    let q = covariant_derivative(&e.g, &gamma);
    let diff: Tensor2<Jet> = std::array::from_fn(|a| std::array::from_fn(|b| &e.g[a][b] - &m.g[a][b]));
    let q_route = covariant_derivative(&diff, &gamma);
    let mut gap = 0.0f64;
    for a in 0..4 {
        for b in 0..4 {
            for c in 0..4 {
                gap = gap.max((q[a][b][c].value() - q_route[a][b][c].value()).abs());
            }
        }
    }
    let ginv_ring: Tensor2<Jet> = std::array::from_fn(|a| std::array::from_fn(|b| e.ginv[a][b].truncate(1)));
    let s_jets = strain(&q, &ginv_ring);
    let k_jets: Tensor3<Jet> =
        std::array::from_fn(|a| std::array::from_fn(|b| std::array::from_fn(|c| s_jets[a][b][c].scale(-0.5))));
    let kv = values3(&k_jets);
    let j: Tensor2 = std::array::from_fn(|mu| {
        std::array::from_fn(|al| {
            let mut acc = 0.0;
            for r in 0..4 {
                acc += k_jets[r][r][mu].gradient(al) - k_jets[r][al][mu].gradient(r);
                for sg in 0..4 {
                    acc += kv[r][al][sg] * kv[sg][r][mu] - kv[r][r][sg] * kv[sg][al][mu];
                }
            }
            acc
        })
    });
    Ok(BimetricPoint {
        coords: p.0,
        q: values3(&q),
        s: values3(&s_jets),
        k: kv,
        gamma: values3(&gamma),
        gamma_ring: values3(&gamma_ring),
        j,
        q_oracle_gap: gap,
    })
}

/// Alias kept for callers that only need `J`.
pub fn j_tensor(s: &Scenario, p: &Point) -> Result<BimetricPoint> {
    nonmetricity_and_strain(s, p)
}

fn max_abs3(t: impl Fn(usize, usize, usize) -> f64) -> f64 {
    let mut w = 0.0f64;
    for a in 0..4 {
        for b in 0..4 {
            for c in 0..4 {
                w = w.max(t(a, b, c).abs());
            }
        }
    }
    w
}

/// Reports for nonmetricity, the connection relation `Γ = Γ̊ + ½S`, its
/// sign-flipped form, and `R_{μν} = J_{(μν)}`.
pub fn bimetric_reports(s: &Scenario, k: &KillingField, points: &[Point]) -> Result<Vec<ResidualReport>> {
    require_cartesian(s)?;
    let [q, strain, flipped, j] = evaluate_points_multi(points, |p| {
        let b = nonmetricity_and_strain(s, p)?;
        let ricci = curvature_jets(s.metric.as_ref(), p, 0)?.ricci;
        let mut jr = 0.0f64;
        for mu in 0..4 {
            for nu in 0..4 {
                let sym = 0.5 * (b.j[mu][nu] + b.j[nu][mu]);
                jr = jr.max((ricci[mu][nu].value() - sym).abs());
            }
        }
        Ok([
            b.q_oracle_gap,
            max_abs3(|r, a, c| b.gamma[r][a][c] - b.gamma_ring[r][a][c] - 0.5 * b.s[r][a][c]),
            max_abs3(|r, a, c| b.gamma[r][a][c] - b.gamma_ring[r][a][c] + 0.5 * b.s[r][a][c]),
            jr,
        ])
    })?;
    Ok(vec![
        ResidualReport::from_points("bimetric.nonmetricity", &s.name, &k.name, TOL_NONMETRICITY, q)
            .with_note("D g0 against D(g0 - g) using Dg = 0"),
        ResidualReport::from_points("bimetric.strain", &s.name, &k.name, TOL_STRAIN, strain)
            .with_note("Gamma - Gamma0 - S/2 with Q_{sab} = (D_s g0)_{ab}"),
        ResidualReport::from_points("bimetric.strain_flipped", &s.name, &k.name, TOL_STRAIN, flipped)
            .with_note("Gamma - Gamma0 + S/2: the relation holds with K = -S/2 = Gamma"),
        ResidualReport::from_points("bimetric.j_tensor", &s.name, &k.name, TOL_J_TENSOR, j),
    ])
}

/// Both sides of the constraint on a Killing 1-form, in two readings of
/// `L^α ·_g̊ γ_α Ǎ`, plus the matching gaps of `∂∧∂A` against that term.
///
/// * scalar reading: `(L^α ·_g̊ γ_α) Ǎ = η^{αβ}J_{βα} Ǎ`
/// * operator reading: `L^α (γ_α ·_g̊ Ǎ) = J_{βκ} A^β γ^κ`
pub fn constraint_last_residual(s: &Scenario, k: &KillingField, points: &[Point]) -> Result<Vec<ResidualReport>> {
    require_cartesian(s)?;
    let t = s.require_energy_momentum()?;
    let rows = evaluate_points_multi(points, |p| {
        let b = nonmetricity_and_strain(s, p)?;
        let c = curvature_jets(s.metric.as_ref(), p, 0)?;
        let g = c.metric.values();
        let a = k.a.value(p)?.one_form_components();
        let a_up: [f64; 4] = std::array::from_fn(|s| (0..4).map(|i| g.ginv[s][i] * a[i]).sum());
        // Ǎ_κ = η_{βκ} g^{βσ} A_σ
        let a_check: [f64; 4] = std::array::from_fn(|kk| ETA[kk] * a_up[kk]);
        let trace_eta: f64 = (0..4).map(|al| ETA[al] * b.j[al][al]).sum();
        let jsym = |m: usize, n: usize| 0.5 * (b.j[m][n] + b.j[n][m]);
        let trace_g: f64 = (0..4).flat_map(|m| (0..4).map(move |n| (m, n))).map(|(m, n)| g.ginv[m][n] * jsym(m, n)).sum();
        let tm = t.mixed(&c.metric);
        let t_a: [f64; 4] = std::array::from_fn(|kk| (0..4).map(|sg| tm[sg][kk].value() * a[sg]).sum());
        let rhs: [f64; 4] = std::array::from_fn(|kk| 0.5 * trace_g * a[kk] + t_a[kk]);
        let scalar: [f64; 4] = std::array::from_fn(|kk| trace_eta * a_check[kk]);
        let operator: [f64; 4] = std::array::from_fn(|kk| (0..4).map(|be| b.j[be][kk] * a_up[be]).sum());
        let ricci_a: [f64; 4] = std::array::from_fn(|kk| (0..4).map(|m| c.ricci_mixed[m][kk].value() * a[m]).sum());
        let gap = |x: &[f64; 4], y: &[f64; 4]| (0..4).fold(0.0f64, |w, i| w.max((x[i] - y[i]).abs()));
        Ok([gap(&scalar, &rhs), gap(&operator, &rhs), gap(&ricci_a, &scalar), gap(&ricci_a, &operator)])
    })?;
    let [last_s, last_o, ex_s, ex_o] = rows;
    let mk = |id: &str, per, note: &str| {
        ResidualReport::from_points(id, &s.name, &k.name, TOL_CONSTRAINT, per)
            .as_identity_gap()
            .with_note(note)
    };
    Ok(vec![
        mk("constraint_last.scalar", last_s, "LHS eta^{ab}J_{ba} Acheck_k"),
        mk("constraint_last.operator", last_o, "LHS J_{bk} A^b"),
        mk("constraint_ricci.scalar", ex_s, "R(A) against eta^{ab}J_{ba} Acheck"),
        mk("constraint_ricci.operator", ex_o, "R(A) against L^a (gamma_a . Acheck)"),
    ])
}

#[cfg(test)]
mod tests {
    use std::collections::BTreeMap;
    use std::sync::Arc;

    use super::*;
    use crate::geometry::{Chart, MetricField, Minkowski, SharedMetric};
    use crate::report::Status;
    use crate::scenarios::load_scenario;

    struct ScaledFlat;

    impl MetricField for ScaledFlat {
        fn name(&self) -> &str {
            "scaled_flat"
        }
        fn chart(&self) -> &Chart {
            static CHART: std::sync::OnceLock<Chart> = std::sync::OnceLock::new();
            CHART.get_or_init(Chart::cartesian)
        }
        fn check_domain(&self, _p: &Point) -> Result<()> {
            Ok(())
        }
        fn components(&self, _x: &[Jet; 4]) -> [[Jet; 4]; 4] {
            std::array::from_fn(|i| std::array::from_fn(|j| Jet::constant(if i == j { 4.0 * ETA[i] } else { 0.0 })))
        }
    }

    fn pts(s: &Scenario) -> Vec<Point> {
        s.sample(6, 5)
    }

    #[test]
    fn minkowski_has_no_strain() {
        let s = load_scenario("minkowski", &BTreeMap::new()).unwrap();
        let b = nonmetricity_and_strain(&s, &pts(&s)[0]).unwrap();
        assert_eq!(max_abs3(|a, c, d| b.q[a][c][d]), 0.0);
        assert_eq!(max_abs3(|a, c, d| b.s[a][c][d]), 0.0);
        assert_eq!(b.j, [[0.0; 4]; 4]);
    }

    #[test]
    fn scaled_flat_metric_has_no_nonmetricity() {
        let mut s = load_scenario("minkowski", &BTreeMap::new()).unwrap();
        s.metric = Arc::new(ScaledFlat) as SharedMetric;
        s.background = Arc::new(Minkowski::new(ChartKind::Cartesian));
        let b = nonmetricity_and_strain(&s, &Point::new(0.1, 1.0, 2.0, 3.0)).unwrap();
        assert!(b.q_oracle_gap < 1e-10);
        assert_eq!(max_abs3(|a, c, d| b.q[a][c][d]), 0.0);
    }

    #[test]
    fn strain_is_minus_twice_the_connection() {
        let s = load_scenario("schwarzschild_cartesian", &BTreeMap::new()).unwrap();
        let k = s.killing_field("t").unwrap();
        let reps = bimetric_reports(&s, &k, &pts(&s)).unwrap();
        let by = |id: &str| reps.iter().find(|r| r.check_id == id).unwrap();
        assert!(by("bimetric.nonmetricity").pass);
        assert!(by("bimetric.strain_flipped").pass);
        assert!(!by("bimetric.strain").pass);
        assert!(by("bimetric.j_tensor").pass, "{:e}", by("bimetric.j_tensor").max_residual);
    }

    #[test]
    fn j_tensor_matches_ricci_on_de_sitter() {
        let s = load_scenario("de_sitter_cartesian", &BTreeMap::new()).unwrap();
        let k = s.killing_field("t").unwrap();
        let reps = bimetric_reports(&s, &k, &pts(&s)).unwrap();
        assert!(reps.iter().find(|r| r.check_id == "bimetric.j_tensor").unwrap().pass);
    }

    #[test]
    fn constraint_readings() {
        let s = load_scenario("schwarzschild_cartesian", &BTreeMap::new()).unwrap();
        for f in ["t", "phi"] {
            let k = s.killing_field(f).unwrap();
            for r in constraint_last_residual(&s, &k, &pts(&s)).unwrap() {
                assert!(r.pass, "{f} {}: {:e}", r.check_id, r.max_residual);
            }
        }
        let s = load_scenario("de_sitter_cartesian", &BTreeMap::new()).unwrap();
        let k = s.killing_field("t").unwrap();
        let reps = constraint_last_residual(&s, &k, &pts(&s)).unwrap();
        assert_eq!(reps[0].status, Status::IdentityGap);
        assert!(reps[1].pass && reps[3].pass);
    }

    #[test]
    fn spherical_chart_is_rejected() {
        let s = load_scenario("schwarzschild", &BTreeMap::new()).unwrap();
        assert!(matches!(nonmetricity_and_strain(&s, &pts(&s)[0]), Err(Error::ChartMismatch(_))));
    }
}
