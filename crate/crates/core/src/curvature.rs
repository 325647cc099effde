//! Levi-Civita connection, curvature and energy-momentum bookkeeping.
//!
//! Conventions: `Γ^ρ_{μν} = ½ g^{ρσ}(∂_μ g_{σν} + ∂_ν g_{σμ} − ∂_σ g_{μν})`,
//! `R^ρ_{σμν} = ∂_μΓ^ρ_{νσ} − ∂_νΓ^ρ_{μσ} + Γ^ρ_{μλ}Γ^λ_{νσ} − Γ^ρ_{νλ}Γ^λ_{μσ}`,
//! and `R_{σν} = R^ρ_{σνρ}`. With signature (+,−,−,−) this gives the de Sitter
//! static patch `R = +4Λ`.

use serde::{Deserialize, Serialize};

use crate::algebra::{MetricAtPoint, Multivector, Scalar};
use crate::error::Result;
use crate::geometry::{MetricField, Point};
use crate::jet::Jet;

pub type Tensor2<T = f64> = [[T; 4]; 4];
pub type Tensor3<T = f64> = [[[T; 4]; 4]; 4];
pub type Tensor4<T = f64> = [[[[T; 4]; 4]; 4]; 4];

fn zeros2<T: Scalar>() -> Tensor2<T> {
    std::array::from_fn(|_| std::array::from_fn(|_| T::zero()))
}

fn values2(t: &Tensor2<Jet>) -> Tensor2 {
    std::array::from_fn(|i| std::array::from_fn(|j| t[i][j].value()))
}

/// `Γ^ρ_{μν}` from a metric jet; the result has one order less than `m`.
pub fn christoffel(m: &MetricAtPoint<Jet>) -> Tensor3<Jet> {
    let dg: Tensor3<Jet> = std::array::from_fn(|s| std::array::from_fn(|a| std::array::from_fn(|b| m.g[a][b].partial(s))));
    // Γ_{σμν} (first index lowered)
    let lower: Tensor3<Jet> = std::array::from_fn(|s| {
        std::array::from_fn(|mu| std::array::from_fn(|nu| (&dg[mu][s][nu] + &dg[nu][s][mu] - &dg[s][mu][nu]).scale(0.5)))
    });
    std::array::from_fn(|r| {
        std::array::from_fn(|mu| {
            std::array::from_fn(|nu| {
                let mut acc = Jet::zero();
                for s in 0..4 {
                    if !m.ginv[r][s].is_zero() && !lower[s][mu][nu].is_zero() {
                        acc += &m.ginv[r][s] * &lower[s][mu][nu];
                    }
                }
                acc
            })
        })
    })
}

/// Curvature objects as jets of a requested order.
#[derive(Clone, Debug)]
pub struct CurvatureJets {
    /// Metric truncated to the curvature order.
    pub metric: MetricAtPoint<Jet>,
    /// `Γ^ρ_{μν}`, one order above the curvature.
    pub christoffel: Tensor3<Jet>,
    /// `R^ρ_{σμν}`
    pub riemann: Tensor4<Jet>,
    /// `R_{μν}`
    pub ricci: Tensor2<Jet>,
    /// `R^μ_ν`
    pub ricci_mixed: Tensor2<Jet>,
    pub scalar: Jet,
}

/// Curvature at `p` to Taylor order `order`; the metric is evaluated at `order + 2`.
pub fn curvature_jets(metric: &dyn MetricField, p: &Point, order: usize) -> Result<CurvatureJets> {
    let m = metric.metric_at(p, order + 2)?;
    let gamma = christoffel(&m);
    let dgamma: Tensor4<Jet> = std::array::from_fn(|s| {
        std::array::from_fn(|r| std::array::from_fn(|mu| std::array::from_fn(|nu| gamma[r][mu][nu].partial(s))))
    });
    let gl: Tensor3<Jet> = std::array::from_fn(|r| std::array::from_fn(|mu| std::array::from_fn(|nu| gamma[r][mu][nu].truncate(order))));
    let riemann: Tensor4<Jet> = std::array::from_fn(|r| {
        std::array::from_fn(|s| {
            std::array::from_fn(|mu| {
                std::array::from_fn(|nu| {
                    let mut acc = &dgamma[mu][r][nu][s] - &dgamma[nu][r][mu][s];
                    for l in 0..4 {
                        acc += &gl[r][mu][l] * &gl[l][nu][s];
                        acc -= &gl[r][nu][l] * &gl[l][mu][s];
                    }
                    acc
                })
            })
        })
    });
    let ricci: Tensor2<Jet> = std::array::from_fn(|s| {
        std::array::from_fn(|nu| {
            let mut acc = Jet::zero();
            for r in 0..4 {
                acc += &riemann[r][s][nu][r];
            }
            acc
        })
    });
    let metric = truncate_metric(&m, order);
    let ricci_mixed = metric.raise(&ricci);
    let mut scalar = Jet::zero();
    for mu in 0..4 {
        scalar += &ricci_mixed[mu][mu];
    }
    Ok(CurvatureJets {
        metric,
        christoffel: gamma,
        riemann,
        ricci,
        ricci_mixed,
        scalar,
    })
}

pub fn truncate_metric(m: &MetricAtPoint<Jet>, order: usize) -> MetricAtPoint<Jet> {
    let t = |x: &Tensor2<Jet>| std::array::from_fn(|i| std::array::from_fn(|j| x[i][j].truncate(order)));
    MetricAtPoint {
        g: t(&m.g),
        ginv: t(&m.ginv),
        det: m.det.truncate(order),
    }
}

/// Curvature values at a point.
#[derive(Clone, Debug, Serialize)]
pub struct CurvatureBundle {
    #[serde(skip)]
    pub metric: MetricAtPoint<f64>,
    /// `Γ^ρ_{μν}`
    pub christoffel: Tensor3,
    /// `dchristoffel[σ][ρ][μ][ν] = ∂_σ Γ^ρ_{μν}`
    pub dchristoffel: Tensor4,
    /// `R^ρ_{σμν}`
    pub riemann: Tensor4,
    pub ricci: Tensor2,
    /// `R^μ_ν`
    pub ricci_mixed: Tensor2,
    pub scalar: f64,
    /// `G_{μν} = R_{μν} − ½ R g_{μν}`
    pub einstein: Tensor2,
}

impl CurvatureBundle {
    /// Ricci 1-forms `ℛ^μ = R^μ_ν dx^ν`.
    pub fn ricci_forms(&self) -> [Multivector<f64>; 4] {
        std::array::from_fn(|mu| Multivector::one_form(self.ricci_mixed[mu]))
    }

    /// `G^μ_ν`
    pub fn einstein_mixed(&self) -> Tensor2 {
        self.metric.raise(&self.einstein)
    }
}

pub fn curvature_at(metric: &dyn MetricField, p: &Point) -> Result<CurvatureBundle> {
    let c = curvature_jets(metric, p, 0)?;
    let m = c.metric.values();
    let christoffel = std::array::from_fn(|r| std::array::from_fn(|a| std::array::from_fn(|b| c.christoffel[r][a][b].value())));
    let dchristoffel = std::array::from_fn(|s| {
        std::array::from_fn(|r| std::array::from_fn(|a| std::array::from_fn(|b| c.christoffel[r][a][b].gradient(s))))
    });
    let riemann = std::array::from_fn(|r| {
        std::array::from_fn(|s| std::array::from_fn(|a| std::array::from_fn(|b| c.riemann[r][s][a][b].value())))
    });
    let ricci = values2(&c.ricci);
    let scalar = c.scalar.value();
    let einstein = std::array::from_fn(|a| std::array::from_fn(|b| ricci[a][b] - 0.5 * scalar * m.g[a][b]));
    Ok(CurvatureBundle {
        metric: m,
        christoffel,
        dchristoffel,
        riemann,
        ricci,
        ricci_mixed: values2(&c.ricci_mixed),
        scalar,
        einstein,
    })
}

/// Energy-momentum content in geometric units (`Ricci − ½Rg = T`, no 8π).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EnergyMomentum {
    Vacuum,
    /// `T_{μν} = −Λ g_{μν}`: the sign for which de Sitter solves the field
    /// equation under the curvature conventions of this module.
    Cosmological { lambda: f64 },
}

impl EnergyMomentum {
    /// `T_{μν}` as jets matching the order of `m`.
    pub fn lower(&self, m: &MetricAtPoint<Jet>) -> Tensor2<Jet> {
        match *self {
            EnergyMomentum::Vacuum => zeros2(),
            EnergyMomentum::Cosmological { lambda } => {
                std::array::from_fn(|i| std::array::from_fn(|j| m.g[i][j].scale(-lambda)))
            }
        }
    }

    /// `T^μ_ν`
    pub fn mixed(&self, m: &MetricAtPoint<Jet>) -> Tensor2<Jet> {
        m.raise(&self.lower(m))
    }

    /// `T = T^μ_μ`
    pub fn trace(&self, m: &MetricAtPoint<Jet>) -> Jet {
        let t = self.mixed(m);
        let mut acc = Jet::zero();
        for (mu, row) in t.iter().enumerate() {
            acc += &row[mu];
        }
        acc
    }

    /// `T(A) = 𝒯^μ A_μ = T^μ_ν A_μ dx^ν`.
    pub fn apply(&self, a: &Multivector<Jet>, m: &MetricAtPoint<Jet>) -> Multivector<Jet> {
        contract_mixed(&self.mixed(m), a)
    }

    /// Energy-momentum 1-forms `𝒯^μ = T^μ_ν dx^ν`.
    pub fn one_forms(&self, m: &MetricAtPoint<Jet>) -> [Multivector<Jet>; 4] {
        let t = self.mixed(m);
        std::array::from_fn(|mu| Multivector::one_form(t[mu].clone()))
    }

    pub fn is_vacuum(&self) -> bool {
        matches!(self, EnergyMomentum::Vacuum)
    }
}

/// `M^μ_ν A_μ dx^ν` for a mixed tensor `M` and 1-form `A`.
pub fn contract_mixed(mixed: &Tensor2<Jet>, a: &Multivector<Jet>) -> Multivector<Jet> {
    let comps = a.one_form_components();
    Multivector::one_form(std::array::from_fn(|nu| {
        let mut acc = Jet::zero();
        for mu in 0..4 {
            if !comps[mu].is_zero() && !mixed[mu][nu].is_zero() {
                acc += &mixed[mu][nu] * &comps[mu];
            }
        }
        acc
    }))
}

/// `max |G_{μν} − T_{μν}|` at `p`.
pub fn einstein_residual(metric: &dyn MetricField, t: &EnergyMomentum, p: &Point) -> Result<f64> {
    let c = curvature_at(metric, p)?;
    let m = metric.metric_at(p, 0)?;
    let tl = values2(&t.lower(&m));
    let mut worst = 0.0f64;
    for i in 0..4 {
        for j in 0..4 {
            worst = worst.max((c.einstein[i][j] - tl[i][j]).abs());
        }
    }
    Ok(worst)
}

/// `max_ν |∇_μ G^μ_ν|`, from order-1 curvature jets (third metric derivatives).
pub fn bianchi_residual(metric: &dyn MetricField, p: &Point) -> Result<f64> {
    let c = curvature_jets(metric, p, 1)?;
    let g_mixed: Tensor2<Jet> = std::array::from_fn(|mu| {
        std::array::from_fn(|nu| {
            let delta = if mu == nu { 1.0 } else { 0.0 };
            &c.ricci_mixed[mu][nu] - &(c.scalar.scale(0.5 * delta))
        })
    });
    let gamma: Tensor3 = std::array::from_fn(|r| std::array::from_fn(|a| std::array::from_fn(|b| c.christoffel[r][a][b].value())));
    let gv = values2(&g_mixed);
    let mut worst = 0.0f64;
    for nu in 0..4 {
        let mut div = 0.0;
        for mu in 0..4 {
            div += g_mixed[mu][nu].gradient(mu);
            for l in 0..4 {
                div += gamma[mu][mu][l] * gv[l][nu] - gamma[l][mu][nu] * gv[mu][l];
            }
        }
        worst = worst.max(div.abs());
    }
    Ok(worst)
}
