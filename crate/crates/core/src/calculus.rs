//! Differential operators on form fields: `d`, `δ`, the Dirac operator
//! `∂ = d − δ`, the split `∂² = ∂·∂ + ∂∧∂`, and the Lie derivative of the metric.
//!
//! Fields are evaluated lazily as Taylor jets. An operator that differentiates
//! once asks its input for one more order than it was asked for.

use std::sync::Arc;

use crate::algebra::{grade_of, hodge_star, wedge_sign, MetricAtPoint, Multivector, Scalar};
use crate::curvature::{christoffel, contract_mixed, curvature_jets, truncate_metric, Tensor2};
use crate::error::{Error, Result};
use crate::geometry::{MetricField, Point, SharedMetric};
use crate::jet::Jet;

/// A smooth multivector-valued field with jet evaluation.
pub trait FormField: Send + Sync {
    /// Blade coefficients at `p` as Taylor jets of order `order`.
    fn jet(&self, p: &Point, order: usize) -> Result<Multivector<Jet>>;

    fn value(&self, p: &Point) -> Result<Multivector<f64>> {
        let v = self.jet(p, 0)?.values();
        if !v.is_finite() {
            return Err(Error::NonFinite(format!("form field at {p}")));
        }
        Ok(v)
    }
}

pub type SharedField = Arc<dyn FormField>;

/// A form field given by a closure over seeded coordinates.
pub struct FnField<F> {
    f: F,
}

impl<F> FnField<F>
where
    F: Fn(&[Jet; 4]) -> Multivector<Jet> + Send + Sync + 'static,
{
    pub fn new(f: F) -> Self {
        FnField { f }
    }

    pub fn shared(f: F) -> SharedField {
        Arc::new(FnField { f })
    }
}

impl<F> FormField for FnField<F>
where
    F: Fn(&[Jet; 4]) -> Multivector<Jet> + Send + Sync,
{
    fn jet(&self, p: &Point, order: usize) -> Result<Multivector<Jet>> {
        Ok((self.f)(&p.seed(order)))
    }
}

/// A form field computed directly from the point and requested order.
pub struct Pointwise<F> {
    f: F,
}

pub fn pointwise<F>(f: F) -> SharedField
where
    F: Fn(&Point, usize) -> Result<Multivector<Jet>> + Send + Sync + 'static,
{
    Arc::new(Pointwise { f })
}

impl<F> FormField for Pointwise<F>
where
    F: Fn(&Point, usize) -> Result<Multivector<Jet>> + Send + Sync,
{
    fn jet(&self, p: &Point, order: usize) -> Result<Multivector<Jet>> {
        (self.f)(p, order)
    }
}

/// A vector field `X^μ ∂_μ` with jet evaluation.
pub trait VectorField: Send + Sync {
    fn components(&self, x: &[Jet; 4]) -> [Jet; 4];

    fn jet(&self, p: &Point, order: usize) -> [Jet; 4] {
        self.components(&p.seed(order))
    }

    fn value(&self, p: &Point) -> [f64; 4] {
        let c = self.jet(p, 0);
        std::array::from_fn(|i| c[i].value())
    }
}

pub type SharedVector = Arc<dyn VectorField>;

/// A vector field given by a closure.
pub struct FnVector<F> {
    f: F,
}

impl<F> FnVector<F>
where
    F: Fn(&[Jet; 4]) -> [Jet; 4] + Send + Sync + 'static,
{
    pub fn shared(f: F) -> SharedVector {
        Arc::new(FnVector { f })
    }
}

impl<F> VectorField for FnVector<F>
where
    F: Fn(&[Jet; 4]) -> [Jet; 4] + Send + Sync,
{
    fn components(&self, x: &[Jet; 4]) -> [Jet; 4] {
        (self.f)(x)
    }
}

/// The metric dual `g(X, ·) = g_{μν} X^ν dx^μ`.
pub struct Lowered {
    vector: SharedVector,
    metric: SharedMetric,
}

pub fn lower_vector(vector: SharedVector, metric: SharedMetric) -> SharedField {
    Arc::new(Lowered { vector, metric })
}

impl FormField for Lowered {
    fn jet(&self, p: &Point, order: usize) -> Result<Multivector<Jet>> {
        let m = self.metric.metric_at(p, order)?;
        let x = self.vector.jet(p, order);
        Ok(Multivector::one_form(lower_components(&m.g, &x)))
    }
}

pub fn lower_components(g: &Tensor2<Jet>, x: &[Jet; 4]) -> [Jet; 4] {
    std::array::from_fn(|mu| {
        let mut acc = Jet::zero();
        for nu in 0..4 {
            if !g[mu][nu].is_zero() && !x[nu].is_zero() {
                acc += &g[mu][nu] * &x[nu];
            }
        }
        acc
    })
}

/// `dω` of a jet multivector; the result has one order less.
pub fn d_jet(w: &Multivector<Jet>) -> Multivector<Jet> {
    let mut out = Multivector::<Jet>::zero();
    for mask in 0..16usize {
        if w.coeffs[mask].is_zero() {
            continue;
        }
        for mu in 0..4 {
            let bit = 1 << mu;
            if mask & bit != 0 {
                continue;
            }
            let term = w.coeffs[mask].partial(mu).scale(wedge_sign(bit, mask));
            out.coeffs[mask | bit] += term;
        }
    }
    // blades that were never touched keep full order; bring all to a common order
    let order = w.order().saturating_sub(1);
    out.truncate(order)
}

/// `δω = Σ_r (−1)^r ⋆⁻¹ d ⋆ ω_r`, with `w` and `m_hi` one order above `m_lo`.
pub fn codifferential_jet(w: &Multivector<Jet>, m_hi: &MetricAtPoint<Jet>, m_lo: &MetricAtPoint<Jet>) -> Multivector<Jet> {
    let mut out = Multivector::<Jet>::zero();
    for r in 1..=4 {
        let wr = w.grade(r);
        if wr.grades_present().is_empty() {
            continue;
        }
        let inner = d_jet(&hodge_star(&wr, m_hi, false));
        let term = hodge_star(&inner, m_lo, true);
        out = out + if r % 2 == 0 { term } else { -term };
    }
    out
}

struct Exterior {
    inner: SharedField,
}

impl FormField for Exterior {
    fn jet(&self, p: &Point, order: usize) -> Result<Multivector<Jet>> {
        Ok(d_jet(&self.inner.jet(p, order + 1)?))
    }
}

pub fn exterior_derivative(w: SharedField) -> SharedField {
    Arc::new(Exterior { inner: w })
}

struct Codifferential {
    inner: SharedField,
    metric: SharedMetric,
}

impl FormField for Codifferential {
    fn jet(&self, p: &Point, order: usize) -> Result<Multivector<Jet>> {
        let w = self.inner.jet(p, order + 1)?;
        let m_hi = self.metric.metric_at(p, order + 1)?;
        let m_lo = truncate_metric(&m_hi, order);
        Ok(codifferential_jet(&w, &m_hi, &m_lo))
    }
}

pub fn codifferential(w: SharedField, metric: SharedMetric) -> SharedField {
    Arc::new(Codifferential { inner: w, metric })
}

/// `Σ c_i ω_i`
pub struct Combination {
    terms: Vec<(f64, SharedField)>,
}

impl FormField for Combination {
    fn jet(&self, p: &Point, order: usize) -> Result<Multivector<Jet>> {
        let mut out = Multivector::<Jet>::zero();
        for (c, f) in &self.terms {
            out = out + f.jet(p, order)?.scale(*c);
        }
        Ok(out.truncate(order))
    }
}

pub fn linear_combination(terms: Vec<(f64, SharedField)>) -> SharedField {
    Arc::new(Combination { terms })
}

/// `∂ω = dω − δω`
pub fn dirac_apply(w: SharedField, metric: SharedMetric) -> SharedField {
    linear_combination(vec![(1.0, exterior_derivative(w.clone())), (-1.0, codifferential(w, metric))])
}

/// `−(dδ + δd)ω`
pub fn hodge_square(w: SharedField, metric: SharedMetric) -> SharedField {
    let dd = exterior_derivative(codifferential(w.clone(), metric.clone()));
    let dd2 = codifferential(exterior_derivative(w), metric);
    linear_combination(vec![(-1.0, dd), (-1.0, dd2)])
}

fn require_one_form(w: &Multivector<Jet>) -> Result<()> {
    let grades = w.grades_present();
    if grades.iter().any(|&g| g != 1) {
        return Err(Error::NotOneForm(grades));
    }
    Ok(())
}

/// Ricci operator on a 1-form, `∂∧∂A = A_μ ℛ^μ = R^μ_ν A_μ dx^ν`.
struct RicciOperator {
    inner: SharedField,
    metric: SharedMetric,
}

impl FormField for RicciOperator {
    fn jet(&self, p: &Point, order: usize) -> Result<Multivector<Jet>> {
        let a = self.inner.jet(p, order)?;
        require_one_form(&a)?;
        let c = curvature_jets(self.metric.as_ref(), p, order)?;
        Ok(contract_mixed(&c.ricci_mixed, &a))
    }
}

pub fn ricci_operator(w: SharedField, metric: SharedMetric) -> SharedField {
    Arc::new(RicciOperator { inner: w, metric })
}

/// The pieces of `∂²` on a 1-form.
#[derive(Clone)]
pub struct DiracSplit {
    /// `∂·∂A = ∂²A − ∂∧∂A`
    pub dalembertian: SharedField,
    /// `∂∧∂A`
    pub ricci_part: SharedField,
    /// `∂²A = −(dδ + δd)A`
    pub square: SharedField,
}

pub fn dalembertian_and_ricci_split(w: SharedField, metric: SharedMetric) -> DiracSplit {
    let square = hodge_square(w.clone(), metric.clone());
    let ricci_part = ricci_operator(w, metric);
    let dalembertian = linear_combination(vec![(1.0, square.clone()), (-1.0, ricci_part.clone())]);
    DiracSplit {
        dalembertian,
        ricci_part,
        square,
    }
}

/// Covariant `g^{μν} D_μ D_ν A` of a 1-form from Christoffel symbols. Used as an
/// independent route to `∂·∂`.
struct CovariantBox {
    inner: SharedField,
    metric: SharedMetric,
}

impl FormField for CovariantBox {
    fn jet(&self, p: &Point, order: usize) -> Result<Multivector<Jet>> {
        let a = self.inner.jet(p, order + 2)?;
        require_one_form(&a)?;
        let m = self.metric.metric_at(p, order + 2)?;
        let gamma = christoffel(&m); // order + 1
        let ac = a.one_form_components();
        // ∇_λ A_ν at order + 1
        let nabla: Tensor2<Jet> = std::array::from_fn(|l| {
            std::array::from_fn(|nu| {
                let mut acc = ac[nu].partial(l);
                for k in 0..4 {
                    if !gamma[k][l][nu].is_zero() {
                        acc -= &gamma[k][l][nu] * &ac[k];
                    }
                }
                acc
            })
        });
        let ginv = truncate_metric(&m, order).ginv;
        let g_lo: [[[Jet; 4]; 4]; 4] =
            std::array::from_fn(|k| std::array::from_fn(|a| std::array::from_fn(|b| gamma[k][a][b].truncate(order))));
        let n_lo: Tensor2<Jet> = std::array::from_fn(|l| std::array::from_fn(|nu| nabla[l][nu].truncate(order)));
        let comps = std::array::from_fn(|nu| {
            let mut acc = Jet::zero();
            for mu in 0..4 {
                for l in 0..4 {
                    if ginv[mu][l].is_zero() {
                        continue;
                    }
                    // ∇_μ∇_λ A_ν
                    let mut t = nabla[l][nu].partial(mu);
                    for k in 0..4 {
                        t -= &g_lo[k][mu][l] * &n_lo[k][nu];
                        t -= &g_lo[k][mu][nu] * &n_lo[l][k];
                    }
                    acc += &ginv[mu][l] * &t;
                }
            }
            acc
        });
        Ok(Multivector::one_form(comps))
    }
}

pub fn covariant_dalembertian(w: SharedField, metric: SharedMetric) -> SharedField {
    Arc::new(CovariantBox { inner: w, metric })
}

/// `(£_X g)_{μν} = X^ρ∂_ρ g_{μν} + g_{ρν}∂_μX^ρ + g_{μρ}∂_νX^ρ` at `p`.
pub fn lie_derivative_metric(x: &dyn VectorField, metric: &dyn MetricField, p: &Point) -> Result<Tensor2> {
    let m = metric.metric_at(p, 1)?;
    let xv = x.jet(p, 1);
    let g = m.values().g;
    let xs: [f64; 4] = std::array::from_fn(|i| xv[i].value());
    Ok(std::array::from_fn(|mu| {
        std::array::from_fn(|nu| {
            let mut s = 0.0;
            for r in 0..4 {
                s += xs[r] * m.g[mu][nu].gradient(r) + g[r][nu] * xv[r].gradient(mu) + g[mu][r] * xv[r].gradient(nu);
            }
            s
        })
    }))
}

/// Largest blade coefficient of `ω(p)`.
pub fn norm_at(w: &dyn FormField, p: &Point) -> Result<f64> {
    Ok(w.value(p)?.max_abs())
}

/// Grades of `ω(p)` with a coefficient above `tol`.
pub fn grades_at(w: &dyn FormField, p: &Point, tol: f64) -> Result<Vec<usize>> {
    let v = w.value(p)?;
    let mut g: Vec<usize> = (0..16).filter(|&m| v[m].abs() > tol).map(grade_of).collect();
    g.dedup();
    g.sort_unstable();
    g.dedup();
    Ok(g)
}
