//! Point-local Clifford algebra of differential forms over a coordinate coframe.
//!
//! Blades are indexed by a bitmask over `{dx⁰, dx¹, dx², dx³}` with factors in
//! ascending order. Products contract with the cotangent metric `g^{μν}`, so
//! `dx^μ dx^ν + dx^ν dx^μ = 2 g^{μν}`. Everything is generic over [`Scalar`] so
//! the same code runs on plain `f64` values and on Taylor [`Jet`]s.

use std::fmt::Debug;
use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jet::Jet;

/// Determinants at or below this magnitude are treated as singular.
pub const DEGENERACY_THRESHOLD: f64 = 1e-14;

/// Numeric type the algebra runs on.
pub trait Scalar:
    Clone
    + Debug
    + Send
    + Sync
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
{
    fn from_f64(v: f64) -> Self;
    fn zero() -> Self {
        Self::from_f64(0.0)
    }
    /// Value at the base point (identity for `f64`).
    fn value(&self) -> f64;
    fn scale(&self, s: f64) -> Self;
    fn recip(&self) -> Self;
    fn sqrt(&self) -> Self;
    /// Structurally zero, allowing cheap skips.
    fn is_zero(&self) -> bool;
}

impl Scalar for f64 {
    fn from_f64(v: f64) -> Self {
        v
    }
    fn value(&self) -> f64 {
        *self
    }
    fn scale(&self, s: f64) -> Self {
        self * s
    }
    fn recip(&self) -> Self {
        1.0 / self
    }
    fn sqrt(&self) -> Self {
        f64::sqrt(*self)
    }
    fn is_zero(&self) -> bool {
        *self == 0.0
    }
}

impl Scalar for Jet {
    fn from_f64(v: f64) -> Self {
        Jet::constant(v)
    }
    fn zero() -> Self {
        Jet::zero()
    }
    fn value(&self) -> f64 {
        Jet::value(self)
    }
    fn scale(&self, s: f64) -> Self {
        Jet::scale(self, s)
    }
    fn recip(&self) -> Self {
        Jet::recip(self)
    }
    fn sqrt(&self) -> Self {
        Jet::sqrt(self)
    }
    fn is_zero(&self) -> bool {
        self.coeffs().iter().all(|c| *c == 0.0)
    }
}

/// Grade of a blade mask.
#[inline]
pub fn grade_of(mask: usize) -> usize {
    (mask as u32).count_ones() as usize
}

/// Sign of `blade(a) ∧ blade(b)` relative to `blade(a | b)`; zero when they overlap.
#[inline]
pub fn wedge_sign(a: usize, b: usize) -> f64 {
    if a & b != 0 {
        return 0.0;
    }
    // count pairs (i in a, j in b) with i > j
    let mut swaps = 0;
    for j in 0..4 {
        if b & (1 << j) != 0 {
            swaps += grade_of(a & !((1 << (j + 1)) - 1));
        }
    }
    if swaps % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Reversion sign `(−1)^{r(r−1)/2}` on grade `r`.
#[inline]
pub fn reverse_sign(grade: usize) -> f64 {
    if (grade * grade.saturating_sub(1) / 2).is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

/// A multivector: 16 blade coefficients over the coordinate coframe.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Multivector<T = f64> {
    pub coeffs: [T; 16],
}

impl<T: Scalar> Default for Multivector<T> {
    fn default() -> Self {
        Self::zero()
    }
}

impl<T: Scalar> Multivector<T> {
    pub fn zero() -> Self {
        Multivector {
            coeffs: std::array::from_fn(|_| T::zero()),
        }
    }

    pub fn scalar(s: T) -> Self {
        let mut m = Self::zero();
        m.coeffs[0] = s;
        m
    }

    pub fn blade(mask: usize, coeff: T) -> Self {
        let mut m = Self::zero();
        m.coeffs[mask] = coeff;
        m
    }

    /// A 1-form `a_μ dx^μ`.
    pub fn one_form(a: [T; 4]) -> Self {
        let mut m = Self::zero();
        for (mu, c) in a.into_iter().enumerate() {
            m.coeffs[1 << mu] = c;
        }
        m
    }

    /// The 1-form components `a_μ` (ignores other grades).
    pub fn one_form_components(&self) -> [T; 4] {
        std::array::from_fn(|mu| self.coeffs[1 << mu].clone())
    }

    pub fn grade(&self, r: usize) -> Self {
        let mut m = Self::zero();
        for mask in 0..16 {
            if grade_of(mask) == r {
                m.coeffs[mask] = self.coeffs[mask].clone();
            }
        }
        m
    }

    pub fn reverse(&self) -> Self {
        let mut m = self.clone();
        for mask in 0..16 {
            let s = reverse_sign(grade_of(mask));
            if s < 0.0 {
                m.coeffs[mask] = -m.coeffs[mask].clone();
            }
        }
        m
    }

    pub fn scale(&self, s: f64) -> Self {
        Multivector {
            coeffs: std::array::from_fn(|i| self.coeffs[i].scale(s)),
        }
    }

    pub fn scale_by(&self, s: &T) -> Self {
        Multivector {
            coeffs: std::array::from_fn(|i| {
                if self.coeffs[i].is_zero() {
                    T::zero()
                } else {
                    self.coeffs[i].clone() * s.clone()
                }
            }),
        }
    }

    pub fn map<U: Scalar>(&self, f: impl Fn(&T) -> U) -> Multivector<U> {
        Multivector {
            coeffs: std::array::from_fn(|i| f(&self.coeffs[i])),
        }
    }

    /// Base-point values.
    pub fn values(&self) -> Multivector<f64> {
        self.map(|c| c.value())
    }

    /// Grades carrying a nonzero coefficient.
    pub fn grades_present(&self) -> Vec<usize> {
        let mut g: Vec<usize> = (0..16)
            .filter(|&m| !self.coeffs[m].is_zero())
            .map(grade_of)
            .collect();
        g.sort_unstable();
        g.dedup();
        g
    }

    /// Exterior product; metric independent.
    pub fn wedge(&self, other: &Self) -> Self {
        let mut out = Self::zero();
        for a in 0..16 {
            if self.coeffs[a].is_zero() {
                continue;
            }
            for b in 0..16 {
                if other.coeffs[b].is_zero() {
                    continue;
                }
                let s = wedge_sign(a, b);
                if s != 0.0 {
                    let term = (self.coeffs[a].clone() * other.coeffs[b].clone()).scale(s);
                    out.coeffs[a | b] = out.coeffs[a | b].clone() + term;
                }
            }
        }
        out
    }
}

impl Multivector<f64> {
    /// Max absolute blade coefficient.
    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |m, c| m.max(c.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_finite())
    }
}

impl Multivector<Jet> {
    /// Partial derivative of every blade coefficient along `x^var`.
    pub fn partial(&self, var: usize) -> Self {
        self.map(|c| c.partial(var))
    }

    pub fn truncate(&self, order: usize) -> Self {
        self.map(|c| c.truncate(order))
    }

    pub fn order(&self) -> usize {
        self.coeffs.iter().map(Jet::order).min().unwrap_or(0)
    }
}

impl<T> Index<usize> for Multivector<T> {
    type Output = T;
    fn index(&self, mask: usize) -> &T {
        &self.coeffs[mask]
    }
}

impl<T> IndexMut<usize> for Multivector<T> {
    fn index_mut(&mut self, mask: usize) -> &mut T {
        &mut self.coeffs[mask]
    }
}

impl<T: Scalar> Add for Multivector<T> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        &self + &rhs
    }
}

impl<T: Scalar> Add for &Multivector<T> {
    type Output = Multivector<T>;
    fn add(self, rhs: Self) -> Multivector<T> {
        Multivector {
            coeffs: std::array::from_fn(|i| self.coeffs[i].clone() + rhs.coeffs[i].clone()),
        }
    }
}

impl<T: Scalar> Sub for Multivector<T> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        &self - &rhs
    }
}

impl<T: Scalar> Sub for &Multivector<T> {
    type Output = Multivector<T>;
    fn sub(self, rhs: Self) -> Multivector<T> {
        Multivector {
            coeffs: std::array::from_fn(|i| self.coeffs[i].clone() - rhs.coeffs[i].clone()),
        }
    }
}

impl<T: Scalar> Neg for Multivector<T> {
    type Output = Self;
    fn neg(self) -> Self {
        self.scale(-1.0)
    }
}

/// Metric components at a point, with inverse and determinant.
#[derive(Clone, Debug)]
pub struct MetricAtPoint<T = f64> {
    pub g: [[T; 4]; 4],
    pub ginv: [[T; 4]; 4],
    pub det: T,
}

fn det3<T: Scalar>(m: &[[T; 4]; 4], rows: [usize; 3], cols: [usize; 3]) -> T {
    let e = |r: usize, c: usize| m[rows[r]][cols[c]].clone();
    e(0, 0) * (e(1, 1) * e(2, 2) - e(1, 2) * e(2, 1)) - e(0, 1) * (e(1, 0) * e(2, 2) - e(1, 2) * e(2, 0))
        + e(0, 2) * (e(1, 0) * e(2, 1) - e(1, 1) * e(2, 0))
}

fn others(i: usize) -> [usize; 3] {
    let mut out = [0; 3];
    let mut k = 0;
    for j in 0..4 {
        if j != i {
            out[k] = j;
            k += 1;
        }
    }
    out
}

impl<T: Scalar> MetricAtPoint<T> {
    /// Builds inverse and determinant by cofactor expansion.
    pub fn new(g: [[T; 4]; 4]) -> Result<Self> {
        let cof: [[T; 4]; 4] = std::array::from_fn(|i| {
            std::array::from_fn(|j| {
                let c = det3(&g, others(i), others(j));
                if (i + j) % 2 == 0 {
                    c
                } else {
                    -c
                }
            })
        });
        let mut det = T::zero();
        for (j, c) in cof[0].iter().enumerate() {
            det = det + g[0][j].clone() * c.clone();
        }
        let d = det.value();
        if !d.is_finite() || d.abs() <= DEGENERACY_THRESHOLD {
            return Err(Error::SingularMetric { det: d });
        }
        let inv_det = det.recip();
        // inverse = adjugate / det, adjugate = cofactorᵀ
        let ginv = std::array::from_fn(|i| std::array::from_fn(|j| cof[j][i].clone() * inv_det.clone()));
        Ok(MetricAtPoint { g, ginv, det })
    }

    /// Cotangent inner product `g^{μν} a_μ b_ν`.
    pub fn dot(&self, a: &[T; 4], b: &[T; 4]) -> T {
        let mut s = T::zero();
        for mu in 0..4 {
            for nu in 0..4 {
                if a[mu].is_zero() || b[nu].is_zero() || self.ginv[mu][nu].is_zero() {
                    continue;
                }
                s = s + self.ginv[mu][nu].clone() * a[mu].clone() * b[nu].clone();
            }
        }
        s
    }

    /// `sign(det g)`.
    pub fn det_sign(&self) -> f64 {
        self.det.value().signum()
    }

    /// Volume element `τ_g = √|det g| dx⁰∧dx¹∧dx²∧dx³`.
    pub fn volume(&self) -> Multivector<T> {
        let abs_det = self.det.scale(self.det_sign());
        Multivector::blade(15, abs_det.sqrt())
    }

    /// Raises the first index of a covariant 2-tensor: `g^{μα} t_{αν}`.
    pub fn raise(&self, t: &[[T; 4]; 4]) -> [[T; 4]; 4] {
        std::array::from_fn(|mu| {
            std::array::from_fn(|nu| {
                let mut s = T::zero();
                for a in 0..4 {
                    if self.ginv[mu][a].is_zero() || t[a][nu].is_zero() {
                        continue;
                    }
                    s = s + self.ginv[mu][a].clone() * t[a][nu].clone();
                }
                s
            })
        })
    }

    pub fn values(&self) -> MetricAtPoint<f64> {
        let v = |m: &[[T; 4]; 4]| std::array::from_fn(|i| std::array::from_fn(|j| m[i][j].value()));
        MetricAtPoint {
            g: v(&self.g),
            ginv: v(&self.ginv),
            det: self.det.value(),
        }
    }
}

impl MetricAtPoint<f64> {
    pub fn minkowski() -> Self {
        let mut g = [[0.0; 4]; 4];
        g[0][0] = 1.0;
        for (i, row) in g.iter_mut().enumerate().skip(1) {
            row[i] = -1.0;
        }
        MetricAtPoint::new(g).expect("η is nondegenerate")
    }

    /// Checks symmetry, inverse accuracy and the (+,−,−,−) signature.
    pub fn validate_lorentzian(&self) -> Result<()> {
        for i in 0..4 {
            for j in 0..4 {
                if (self.g[i][j] - self.g[j][i]).abs() > 1e-12 * (1.0 + self.g[i][j].abs()) {
                    return Err(Error::InvalidMetric(format!("g not symmetric at ({i},{j})")));
                }
                let mut s = 0.0;
                for k in 0..4 {
                    s += self.g[i][k] * self.ginv[k][j];
                }
                let target = if i == j { 1.0 } else { 0.0 };
                if (s - target).abs() > 1e-12 {
                    return Err(Error::InvalidMetric(format!("g·g⁻¹ deviates by {:e}", (s - target).abs())));
                }
            }
        }
        let m = nalgebra::Matrix4::from_fn(|i, j| self.g[i][j]);
        let eig = m.symmetric_eigenvalues();
        let negatives = eig.iter().filter(|&&e| e < 0.0).count();
        let positives = eig.iter().filter(|&&e| e > 0.0).count();
        if positives != 1 || negatives != 3 {
            return Err(Error::InvalidMetric(format!(
                "signature is ({positives}+, {negatives}-), expected (+,−,−,−)"
            )));
        }
        Ok(())
    }
}

/// `dx^i ⌟ C` for the basis covector `dx^i`.
fn basis_contract<T: Scalar>(i: usize, c: &Multivector<T>, m: &MetricAtPoint<T>) -> Multivector<T> {
    let mut out = Multivector::<T>::zero();
    for mask in 1..16usize {
        if c.coeffs[mask].is_zero() {
            continue;
        }
        let mut pos = 0;
        for j in 0..4 {
            if mask & (1 << j) == 0 {
                continue;
            }
            let gij = &m.ginv[i][j];
            if !gij.is_zero() {
                let sign = if pos % 2 == 0 { 1.0 } else { -1.0 };
                let rest = mask & !(1 << j);
                let term = (gij.clone() * c.coeffs[mask].clone()).scale(sign);
                out.coeffs[rest] = out.coeffs[rest].clone() + term;
            }
            pos += 1;
        }
    }
    out
}

/// `dx^i ∧ C`.
fn basis_wedge<T: Scalar>(i: usize, c: &Multivector<T>) -> Multivector<T> {
    let mut out = Multivector::<T>::zero();
    let bit = 1 << i;
    for mask in 0..16usize {
        if mask & bit != 0 || c.coeffs[mask].is_zero() {
            continue;
        }
        let s = wedge_sign(bit, mask);
        out.coeffs[mask | bit] = out.coeffs[mask | bit].clone() + c.coeffs[mask].scale(s);
    }
    out
}

/// Left contraction of a 1-form on a multivector, `a ⌟ C`.
pub fn contract_one_form<T: Scalar>(a: &[T; 4], c: &Multivector<T>, m: &MetricAtPoint<T>) -> Multivector<T> {
    let mut out = Multivector::zero();
    for (i, ai) in a.iter().enumerate() {
        if ai.is_zero() {
            continue;
        }
        out = out + basis_contract(i, c, m).scale_by(ai);
    }
    out
}

/// Left contraction `A ⌟ B`, using `(a ∧ C) ⌟ B = a ⌟ (C ⌟ B)`.
pub fn left_contraction<T: Scalar>(a: &Multivector<T>, b: &Multivector<T>, m: &MetricAtPoint<T>) -> Multivector<T> {
    let mut out = Multivector::zero();
    for mask in 0..16 {
        if a.coeffs[mask].is_zero() {
            continue;
        }
        out = out + blade_contract(mask, b, m).scale_by(&a.coeffs[mask]);
    }
    out
}

fn blade_contract<T: Scalar>(mask: usize, b: &Multivector<T>, m: &MetricAtPoint<T>) -> Multivector<T> {
    if mask == 0 {
        return b.clone();
    }
    let i = mask.trailing_zeros() as usize;
    let rest = mask & !(1 << i);
    basis_contract(i, &blade_contract(rest, b, m), m)
}

/// Wedge and left contraction together, as returned by the Clifford split.
pub fn wedge_contract<T: Scalar>(
    a: &Multivector<T>,
    b: &Multivector<T>,
    m: &MetricAtPoint<T>,
) -> (Multivector<T>, Multivector<T>) {
    (a.wedge(b), left_contraction(a, b, m))
}

/// `blade(mask) · C`, built recursively from
/// `(dx^i ∧ B) C = dx^i (B C) − (dx^i ⌟ B) C` with `i` the lowest factor.
fn blade_product<T: Scalar>(mask: usize, c: &Multivector<T>, m: &MetricAtPoint<T>, memo: &mut [Option<Multivector<T>>; 16]) -> Multivector<T> {
    if let Some(v) = &memo[mask] {
        return v.clone();
    }
    let result = if mask == 0 {
        c.clone()
    } else {
        let i = mask.trailing_zeros() as usize;
        let rest = mask & !(1 << i);
        let bc = blade_product(rest, c, m, memo);
        let first = basis_contract(i, &bc, m) + basis_wedge(i, &bc);
        let lower = basis_contract(i, &Multivector::blade(rest, T::from_f64(1.0)), m);
        let mut second = Multivector::zero();
        for lm in 0..16 {
            if lower.coeffs[lm].is_zero() {
                continue;
            }
            second = second + blade_product(lm, c, m, memo).scale_by(&lower.coeffs[lm]);
        }
        first - second
    };
    memo[mask] = Some(result.clone());
    result
}

/// Clifford product `a b` under the cotangent metric of `m`.
pub fn geometric_product<T: Scalar>(a: &Multivector<T>, b: &Multivector<T>, m: &MetricAtPoint<T>) -> Multivector<T> {
    let mut memo: [Option<Multivector<T>>; 16] = Default::default();
    let mut out = Multivector::zero();
    for mask in 0..16 {
        if a.coeffs[mask].is_zero() {
            continue;
        }
        out = out + blade_product(mask, b, m, &mut memo).scale_by(&a.coeffs[mask]);
    }
    out
}

/// Precomputed product table for repeated products at a fixed metric.
pub struct CliffordTable {
    table: Vec<Multivector<f64>>,
}

impl CliffordTable {
    pub fn new(m: &MetricAtPoint<f64>) -> Self {
        let mut table = Vec::with_capacity(256);
        for a in 0..16 {
            for b in 0..16 {
                table.push(geometric_product(
                    &Multivector::blade(a, 1.0),
                    &Multivector::blade(b, 1.0),
                    m,
                ));
            }
        }
        CliffordTable { table }
    }

    pub fn entry(&self, a: usize, b: usize) -> &Multivector<f64> {
        &self.table[a * 16 + b]
    }

    pub fn product(&self, a: &Multivector<f64>, b: &Multivector<f64>) -> Multivector<f64> {
        let mut out = [0.0; 16];
        for i in 0..16 {
            if a.coeffs[i] == 0.0 {
                continue;
            }
            for j in 0..16 {
                if b.coeffs[j] == 0.0 {
                    continue;
                }
                let s = a.coeffs[i] * b.coeffs[j];
                for (k, o) in out.iter_mut().enumerate() {
                    *o += s * self.table[i * 16 + j].coeffs[k];
                }
            }
        }
        Multivector { coeffs: out }
    }
}

/// Hodge star `⋆C = C̃ τ_g`; with `inverse`, applies
/// `⋆⁻¹S = (−1)^{s(4−s)} sign(det g) ⋆S` grade by grade.
pub fn hodge_star<T: Scalar>(c: &Multivector<T>, m: &MetricAtPoint<T>, inverse: bool) -> Multivector<T> {
    let tau = m.volume();
    let rev = c.reverse();
    let mut out = Multivector::zero();
    // only the τ column of the table is needed
    let mut memo: [Option<Multivector<T>>; 16] = Default::default();
    for mask in 0..16 {
        if rev.coeffs[mask].is_zero() {
            continue;
        }
        let mut coeff = rev.coeffs[mask].clone();
        if inverse {
            let s = grade_of(mask);
            let sign = if (s * (4 - s)).is_multiple_of(2) { 1.0 } else { -1.0 };
            coeff = coeff.scale(sign * m.det_sign());
        }
        out = out + blade_product(mask, &tau, m, &mut memo).scale_by(&coeff);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Independent Cayley-table oracle: the metric is diagonalized by an
    /// orthonormal cobasis θ^a = E^a_μ dx^μ, coordinate blades are expanded
    /// as antisymmetrized sums of orthonormal products, multiplied with the
    /// integer-sign Cl(1,3) rule, and mapped back.
    pub(crate) mod oracle {
        use super::super::*;

        /// Product of orthonormal basis blades in Cl(p,q) with signature `sig`.
        pub fn ortho_blade_product(a: usize, b: usize, sig: [f64; 4]) -> (usize, f64) {
            // reorder a·b by bubble: count swaps moving each factor of b leftwards
            let mut sign = 1.0;
            let mut swaps = 0;
            for j in 0..4 {
                if b & (1 << j) != 0 {
                    swaps += grade_of(a & !((1 << (j + 1)) - 1));
                }
            }
            if swaps % 2 == 1 {
                sign = -1.0;
            }
            for (i, s) in sig.iter().enumerate() {
                if a & b & (1 << i) != 0 {
                    sign *= s;
                }
            }
            (a ^ b, sign)
        }

        pub fn signature_minkowski() -> [f64; 4] {
            [1.0, -1.0, -1.0, -1.0]
        }

        /// Brute-force product through an explicit orthonormal cobasis.
        pub fn product_via_frame(a: &Multivector<f64>, b: &Multivector<f64>, g: &[[f64; 4]; 4]) -> Multivector<f64> {
            let m = nalgebra::Matrix4::from_fn(|i, j| g[i][j]);
            let ginv = m.try_inverse().unwrap();
            let eig = ginv.symmetric_eigen();
            // cotangent metric ginv = V diag(λ) Vᵀ; θ^a = √|λ_a| (Vᵀ dx)_a
            let mut order: Vec<usize> = (0..4).collect();
            order.sort_by(|&i, &j| eig.eigenvalues[j].partial_cmp(&eig.eigenvalues[i]).unwrap());
            let sig: [f64; 4] = std::array::from_fn(|a| eig.eigenvalues[order[a]].signum());
            // dx^μ = Σ_a P[μ][a] θ^a
            let p: [[f64; 4]; 4] = std::array::from_fn(|mu| {
                std::array::from_fn(|a| eig.eigenvectors[(mu, order[a])] * eig.eigenvalues[order[a]].abs().sqrt())
            });
            let pinv = {
                let pm = nalgebra::Matrix4::from_fn(|i, j| p[i][j]);
                pm.try_inverse().unwrap()
            };
            let to_frame = |x: &Multivector<f64>| expand(x, &p);
            let fa = to_frame(a);
            let fb = to_frame(b);
            let mut fc = Multivector::<f64>::zero();
            for i in 0..16 {
                for j in 0..16 {
                    if fa.coeffs[i] == 0.0 || fb.coeffs[j] == 0.0 {
                        continue;
                    }
                    let (k, s) = ortho_blade_product(i, j, sig);
                    fc.coeffs[k] += s * fa.coeffs[i] * fb.coeffs[j];
                }
            }
            let back: [[f64; 4]; 4] = std::array::from_fn(|a| std::array::from_fn(|mu| pinv[(a, mu)]));
            expand(&fc, &back)
        }

        /// Change of 1-form basis applied to blades: each factor `e^μ = Σ_a p[μ][a] f^a`.
        fn expand(x: &Multivector<f64>, p: &[[f64; 4]; 4]) -> Multivector<f64> {
            let mut out = Multivector::<f64>::zero();
            for mask in 0..16 {
                if x.coeffs[mask] == 0.0 {
                    continue;
                }
                let mut acc = Multivector::<f64>::scalar(x.coeffs[mask]);
                for mu in 0..4 {
                    if mask & (1 << mu) == 0 {
                        continue;
                    }
                    let v = Multivector::one_form(p[mu]);
                    acc = acc.wedge(&v);
                }
                out = out + acc;
            }
            out
        }
    }

    fn mv(seed: u64) -> Multivector<f64> {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        Multivector {
            coeffs: std::array::from_fn(|_| rng.gen_range(-1.0..1.0)),
        }
    }

    fn schwarzschild_point() -> MetricAtPoint<f64> {
        let (m, r, th) = (1.0, 4.3, 1.1);
        let f = 1.0 - 2.0 * m / r;
        let mut g = [[0.0; 4]; 4];
        g[0][0] = f;
        g[1][1] = -1.0 / f;
        g[2][2] = -r * r;
        g[3][3] = -r * r * f64::sin(th).powi(2);
        MetricAtPoint::new(g).unwrap()
    }

    fn skewed_metric() -> MetricAtPoint<f64> {
        // Lorentzian with off-diagonal terms
        let g = [
            [1.2, 0.3, 0.1, 0.0],
            [0.3, -1.0, 0.2, 0.05],
            [0.1, 0.2, -1.5, 0.1],
            [0.0, 0.05, 0.1, -0.8],
        ];
        MetricAtPoint::new(g).unwrap()
    }

    #[test]
    fn basis_squares_follow_signature() {
        let eta = MetricAtPoint::minkowski();
        let e0 = Multivector::blade(1, 1.0);
        let e1 = Multivector::blade(2, 1.0);
        assert_eq!(geometric_product(&e0, &e0, &eta), Multivector::scalar(1.0));
        assert_eq!(geometric_product(&e1, &e1, &eta), Multivector::scalar(-1.0));
    }

    #[test]
    fn minkowski_table_matches_integer_cayley_table() {
        let eta = MetricAtPoint::minkowski();
        let table = CliffordTable::new(&eta);
        for a in 0..16 {
            for b in 0..16 {
                let (k, s) = oracle::ortho_blade_product(a, b, oracle::signature_minkowski());
                let expected = Multivector::blade(k, s);
                assert_eq!(table.entry(a, b), &expected, "blade {a} * blade {b}");
            }
        }
    }

    #[test]
    fn product_matches_frame_oracle_on_curved_metrics() {
        for m in [schwarzschild_point(), skewed_metric()] {
            for seed in 0..20 {
                let a = mv(seed);
                let b = mv(seed + 100);
                let direct = geometric_product(&a, &b, &m);
                let oracle = oracle::product_via_frame(&a, &b, &m.g);
                assert!((&direct - &oracle).max_abs() < 1e-10, "seed {seed}");
            }
        }
    }

    #[test]
    fn associativity_on_random_triples() {
        for m in [schwarzschild_point(), skewed_metric()] {
            let t = CliffordTable::new(&m);
            for seed in 0..1000 {
                let (a, b, c) = (mv(3 * seed), mv(3 * seed + 1), mv(3 * seed + 2));
                let l = t.product(&t.product(&a, &b), &c);
                let r = t.product(&a, &t.product(&b, &c));
                let scale = l.max_abs().max(1.0);
                assert!((&l - &r).max_abs() / scale < 1e-11);
            }
        }
    }

    #[test]
    fn clifford_split_for_one_forms() {
        let m = skewed_metric();
        for seed in 0..50 {
            let a = mv(seed).grade(1);
            let c = mv(seed + 7);
            let (w, lc) = wedge_contract(&a, &c, &m);
            let prod = geometric_product(&a, &c, &m);
            assert!((&prod - &(&w + &lc)).max_abs() < 1e-12);
        }
    }

    #[test]
    fn contraction_and_wedge_examples() {
        let eta = MetricAtPoint::minkowski();
        let dx1 = Multivector::blade(2, 1.0);
        assert_eq!(dx1.wedge(&dx1), Multivector::zero());
        let dx0 = Multivector::blade(1, 1.0);
        let c = Multivector::blade(3, 1.0); // dx⁰∧dx¹
        assert_eq!(left_contraction(&dx0, &c, &eta), Multivector::blade(2, 1.0));
    }

    #[test]
    fn hodge_examples() {
        let eta = MetricAtPoint::minkowski();
        assert_eq!(hodge_star(&Multivector::scalar(1.0), &eta, false), Multivector::blade(15, 1.0));
        assert_eq!(hodge_star(&Multivector::blade(1, 1.0), &eta, false), Multivector::blade(14, 1.0));
    }

    #[test]
    fn hodge_inverse_round_trip_and_grades() {
        for m in [MetricAtPoint::minkowski(), schwarzschild_point(), skewed_metric()] {
            for seed in 0..50 {
                let c = mv(seed);
                let s = hodge_star(&c, &m, false);
                for r in 0..=4 {
                    let sr = hodge_star(&c.grade(r), &m, false);
                    assert!((&sr - &sr.grade(4 - r)).max_abs() < 1e-12);
                }
                let back = hodge_star(&s, &m, true);
                assert!((&back - &c).max_abs() < 1e-12);
            }
        }
    }

    #[test]
    fn singular_metric_is_rejected() {
        let g = [[1.0, 0.0, 0.0, 0.0], [0.0, 0.0, 0.0, 0.0], [0.0, 0.0, -1.0, 0.0], [0.0, 0.0, 0.0, -1.0]];
        assert!(matches!(MetricAtPoint::new(g), Err(Error::SingularMetric { .. })));
    }

    #[test]
    fn signature_validation() {
        assert!(MetricAtPoint::minkowski().validate_lorentzian().is_ok());
        let g = [[1.0, 0.0, 0.0, 0.0], [0.0, 1.0, 0.0, 0.0], [0.0, 0.0, -1.0, 0.0], [0.0, 0.0, 0.0, -1.0]];
        assert!(MetricAtPoint::new(g).unwrap().validate_lorentzian().is_err());
    }
}
