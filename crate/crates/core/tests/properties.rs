use std::collections::BTreeMap;

use einflow::algebra::{geometric_product, hodge_star, Multivector};
use einflow::calculus::{codifferential, exterior_derivative, FnField, FnVector};
use einflow::killing::killing_residual;
use einflow::report::{reports_to_json, PointResidual};
use einflow::scenarios::{load_scenario, KillingField};
use einflow::{Jet, MetricAtPoint, Point, ResidualReport};
use proptest::prelude::*;

fn coeffs() -> impl Strategy<Value = Multivector<f64>> {
    prop::array::uniform16(-1.0f64..1.0).prop_map(|coeffs| Multivector { coeffs })
}

/// Rescaled Minkowski metrics with small off-diagonal terms.
fn lorentzian() -> impl Strategy<Value = MetricAtPoint<f64>> {
    (prop::array::uniform4(0.5f64..2.0), prop::array::uniform6(-0.15f64..0.15)).prop_map(|(d, off)| {
        let mut g = [[0.0; 4]; 4];
        g[0][0] = d[0];
        for i in 1..4 {
            g[i][i] = -d[i];
        }
        let pairs = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)];
        for (k, (i, j)) in pairs.into_iter().enumerate() {
            g[i][j] = off[k];
            g[j][i] = off[k];
        }
        MetricAtPoint::new(g).unwrap()
    })
}

fn max_diff(a: &Multivector<f64>, b: &Multivector<f64>) -> f64 {
    (a - b).max_abs()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn one_forms_anticommute_to_the_metric(m in lorentzian(), a in prop::array::uniform4(-1.0f64..1.0), b in prop::array::uniform4(-1.0f64..1.0)) {
        let (ua, ub) = (Multivector::one_form(a), Multivector::one_form(b));
        let sym = &geometric_product(&ua, &ub, &m) + &geometric_product(&ub, &ua, &m);
        let expected = Multivector::scalar(2.0 * m.dot(&a, &b));
        prop_assert!(max_diff(&sym, &expected) < 1e-12);
    }

    #[test]
    fn product_is_associative(m in lorentzian(), a in coeffs(), b in coeffs(), c in coeffs()) {
        let l = geometric_product(&geometric_product(&a, &b, &m), &c, &m);
        let r = geometric_product(&a, &geometric_product(&b, &c, &m), &m);
        prop_assert!(max_diff(&l, &r) < 1e-10 * l.max_abs().max(1.0));
    }

    #[test]
    fn hodge_inverse_undoes_hodge(m in lorentzian(), c in coeffs()) {
        let back = hodge_star(&hodge_star(&c, &m, false), &m, true);
        prop_assert!(max_diff(&back, &c) < 1e-12);
    }

    #[test]
    fn jet_product_rule(a in -3.0f64..3.0, b in -3.0f64..3.0, x in 0.2f64..3.0) {
        let v = Jet::seed(&[x, 0.5, 0.0, 0.0], 3);
        // f = (a x + b) sin x, f' = a sin x + (a x + b) cos x
        let f = &(&v[0].scale(a) + &Jet::constant(b)) * &v[0].sin();
        let expected = a * x.sin() + (a * x + b) * x.cos();
        prop_assert!((f.gradient(0) - expected).abs() < 1e-12);
        let r = &f.recip() * &f;
        prop_assume!(f.value().abs() > 1e-3);
        prop_assert!((r.value() - 1.0).abs() < 1e-12 && r.gradient(0).abs() < 1e-9);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn exterior_derivative_squares_to_zero(c in prop::array::uniform16(-1.0f64..1.0), k in prop::array::uniform16(-1.0f64..1.0)) {
        let w = FnField::shared(move |x| {
            let mut mv = Multivector::zero();
            for i in 0..16 {
                mv[i] = &(&x[i % 4] * &x[(i + 1) % 4]).scale(c[i]) + &x[(i + 2) % 4].sin().scale(k[i]);
            }
            mv
        });
        let dd = exterior_derivative(exterior_derivative(w));
        let p = Point::new(0.3, 1.1, -0.4, 0.8);
        prop_assert!(dd.value(&p).unwrap().max_abs() < 1e-12);
    }

    #[test]
    fn codifferential_squares_to_zero_on_schwarzschild(c in prop::array::uniform16(-1.0f64..1.0)) {
        let s = load_scenario("schwarzschild", &BTreeMap::new()).unwrap();
        let w = FnField::shared(move |x| {
            let mut mv = Multivector::zero();
            for i in 0..16 {
                mv[i] = (&x[1] * &x[(i + 2) % 4].cos()).scale(c[i]);
            }
            mv
        });
        let dd = codifferential(codifferential(w, s.metric.clone()), s.metric.clone());
        let p = Point::new(0.0, 6.0, 1.2, 0.4);
        prop_assert!(dd.value(&p).unwrap().max_abs() < 1e-11);
    }

    #[test]
    fn killing_residual_is_linear_in_the_field(scale in -5.0f64..5.0) {
        let s = load_scenario("schwarzschild", &BTreeMap::new()).unwrap();
        let base = s.killing_field("r_dr").unwrap();
        let scaled_vector = {
            let inner = base.vector.clone();
            FnVector::shared(move |x| inner.components(x).map(|c| c.scale(scale)))
        };
        let scaled = KillingField { vector: scaled_vector, ..base.clone() };
        let points = s.sample(6, 1);
        let r0 = killing_residual(&s, &base, &points).unwrap().max_residual;
        let r1 = killing_residual(&s, &scaled, &points).unwrap().max_residual;
        prop_assert!((r1 - scale.abs() * r0).abs() < 1e-9 * r0.max(1.0));
    }

    #[test]
    fn json_reports_round_trip(values in prop::collection::vec(0.0f64..1e6, 1..8)) {
        let per: Vec<PointResidual> = values.iter().map(|&v| PointResidual { coords: [v, -v, 0.5, 1.0], residual: v }).collect();
        let r = ResidualReport::from_points("prop", "minkowski", "t", 1.0, per);
        let text = reports_to_json(std::slice::from_ref(&r)).unwrap();
        let back: Vec<ResidualReport> = serde_json::from_str(&text).unwrap();
        prop_assert_eq!(&back[0].per_point, &r.per_point);
        prop_assert_eq!(back[0].max_residual, r.max_residual);
    }
}
