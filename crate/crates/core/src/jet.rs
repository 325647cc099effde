//! Truncated multivariate Taylor jets in the four chart coordinates.
//!
//! A [`Jet`] of order `k` stores the Taylor coefficients of a smooth function
//! around a base point up to total degree `k`. Arithmetic propagates exactly
//! (forward mode), and [`Jet::partial`] differentiates the truncated
//! polynomial, lowering the order by one. Operators built on top of fields
//! (d, δ, ∂, curvature) therefore compose to any depth: evaluating a field at
//! order `k + n` and applying `n` derivatives yields an exact order-`k` jet.
//!
//! Monomials are stored in graded order, so the coefficient layout of an
//! order-`k` jet is a prefix of the layout of every higher order. A jet may
//! carry fewer coefficients than its order allows; missing ones are zero.

use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};
use std::sync::OnceLock;

/// Highest supported total degree.
pub const MAX_ORDER: usize = 6;

const N_VARS: usize = 4;

struct Tables {
    /// Exponent vectors in graded order.
    monomials: Vec<[u8; N_VARS]>,
    /// `count[k]` = number of monomials of degree ≤ k.
    count: [usize; MAX_ORDER + 1],
    /// Product table `(i, j, k)` sorted by `deg(i) + deg(j)`.
    products: Vec<(u16, u16, u16)>,
    /// `product_count[k]` = number of product entries with degree sum ≤ k.
    product_count: [usize; MAX_ORDER + 1],
    /// Per variable: `(src, dst, factor)` sorted by `deg(src)`.
    derivs: [Vec<(u16, u16, f64)>; N_VARS],
    /// `deriv_count[v][k]` = entries with `deg(src) ≤ k`.
    deriv_count: [[usize; MAX_ORDER + 1]; N_VARS],
}

fn degree(m: &[u8; N_VARS]) -> usize {
    m.iter().map(|&e| e as usize).sum()
}

fn tables() -> &'static Tables {
    static TABLES: OnceLock<Tables> = OnceLock::new();
    TABLES.get_or_init(build_tables)
}

fn build_tables() -> Tables {
    let mut monomials = Vec::new();
    let mut count = [0usize; MAX_ORDER + 1];
    for deg in 0..=MAX_ORDER {
        // lexicographically descending exponents within one degree
        let mut layer = Vec::new();
        for a in (0..=deg).rev() {
            for b in (0..=deg - a).rev() {
                for c in (0..=deg - a - b).rev() {
                    let d = deg - a - b - c;
                    layer.push([a as u8, b as u8, c as u8, d as u8]);
                }
            }
        }
        monomials.extend(layer);
        count[deg] = monomials.len();
    }
    let index_of = |m: &[u8; N_VARS]| monomials.iter().position(|x| x == m).unwrap();

    let mut products = Vec::new();
    for (i, a) in monomials.iter().enumerate() {
        for (j, b) in monomials.iter().enumerate() {
            if degree(a) + degree(b) <= MAX_ORDER {
                let s = [a[0] + b[0], a[1] + b[1], a[2] + b[2], a[3] + b[3]];
                products.push((i as u16, j as u16, index_of(&s) as u16));
            }
        }
    }
    products.sort_by_key(|&(i, j, _)| degree(&monomials[i as usize]) + degree(&monomials[j as usize]));
    let mut product_count = [0usize; MAX_ORDER + 1];
    for (k, slot) in product_count.iter_mut().enumerate() {
        *slot = products
            .iter()
            .filter(|&&(i, j, _)| degree(&monomials[i as usize]) + degree(&monomials[j as usize]) <= k)
            .count();
    }

    let mut derivs: [Vec<(u16, u16, f64)>; N_VARS] = Default::default();
    let mut deriv_count = [[0usize; MAX_ORDER + 1]; N_VARS];
    for v in 0..N_VARS {
        for (i, m) in monomials.iter().enumerate() {
            if m[v] > 0 {
                let mut t = *m;
                t[v] -= 1;
                derivs[v].push((i as u16, index_of(&t) as u16, m[v] as f64));
            }
        }
        // already sorted by source degree because monomials are graded
        for k in 0..=MAX_ORDER {
            deriv_count[v][k] = derivs[v]
                .iter()
                .filter(|&&(s, _, _)| degree(&monomials[s as usize]) <= k)
                .count();
        }
    }

    Tables {
        monomials,
        count,
        products,
        product_count,
        derivs,
        deriv_count,
    }
}

/// Number of Taylor coefficients of a jet of the given order.
pub fn coefficient_count(order: usize) -> usize {
    tables().count[order]
}

/// Exponent vector of the monomial stored at `index`.
pub fn monomial(index: usize) -> [u8; 4] {
    tables().monomials[index]
}

/// A truncated Taylor expansion in the four chart coordinates.
#[derive(Clone, PartialEq)]
pub struct Jet {
    order: u8,
    coeffs: Vec<f64>,
}

impl Jet {
    /// A constant. Constants are exact to every order.
    pub fn constant(value: f64) -> Self {
        Jet {
            order: MAX_ORDER as u8,
            coeffs: vec![value],
        }
    }

    pub fn zero() -> Self {
        Jet {
            order: MAX_ORDER as u8,
            coeffs: Vec::new(),
        }
    }

    /// The coordinate function `x^var` expanded around `value`.
    pub fn variable(value: f64, var: usize, order: usize) -> Self {
        assert!(var < N_VARS);
        assert!(order <= MAX_ORDER, "jet order {order} exceeds {MAX_ORDER}");
        let mut coeffs = vec![value];
        if order >= 1 {
            coeffs.resize(5, 0.0);
            coeffs[1 + var] = 1.0;
        }
        Jet {
            order: order as u8,
            coeffs,
        }
    }

    /// Seeds all four coordinates at a base point.
    pub fn seed(point: &[f64; 4], order: usize) -> [Jet; 4] {
        std::array::from_fn(|i| Jet::variable(point[i], i, order))
    }

    pub fn order(&self) -> usize {
        self.order as usize
    }

    pub fn value(&self) -> f64 {
        self.coeffs.first().copied().unwrap_or(0.0)
    }

    /// Taylor coefficient at a monomial index.
    pub fn coeff(&self, index: usize) -> f64 {
        self.coeffs.get(index).copied().unwrap_or(0.0)
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// ∂f/∂x^var at the base point.
    pub fn gradient(&self, var: usize) -> f64 {
        if self.order == 0 {
            return 0.0;
        }
        self.coeff(1 + var)
    }

    /// ∂²f/∂x^a∂x^b at the base point.
    pub fn hessian(&self, a: usize, b: usize) -> f64 {
        if self.order < 2 {
            return 0.0;
        }
        let mut m = [0u8; 4];
        m[a] += 1;
        m[b] += 1;
        let t = tables();
        let idx = t.monomials[..t.count[2]].iter().position(|x| *x == m).unwrap();
        let factor = if a == b { 2.0 } else { 1.0 };
        factor * self.coeff(idx)
    }

    /// Truncates to a lower order (no-op when already at or below it).
    pub fn truncate(&self, order: usize) -> Jet {
        if order >= self.order() {
            return self.clone();
        }
        let n = coefficient_count(order).min(self.coeffs.len());
        Jet {
            order: order as u8,
            coeffs: self.coeffs[..n].to_vec(),
        }
    }

    /// Partial derivative with respect to `x^var`; the result has one order less.
    ///
    /// Panics on an order-0 jet, which carries no derivative information.
    pub fn partial(&self, var: usize) -> Jet {
        assert!(self.order > 0, "cannot differentiate an order-0 jet");
        let t = tables();
        let out_order = self.order() - 1;
        let n_out = coefficient_count(out_order).min(self.coeffs.len());
        let mut coeffs = vec![0.0; n_out];
        let len = self.coeffs.len();
        for &(src, dst, factor) in &t.derivs[var][..t.deriv_count[var][self.order()]] {
            let src = src as usize;
            if src < len {
                coeffs[dst as usize] += factor * self.coeffs[src];
            }
        }
        Jet {
            order: out_order as u8,
            coeffs,
        }
    }

    pub fn scale(&self, s: f64) -> Jet {
        Jet {
            order: self.order,
            coeffs: self.coeffs.iter().map(|c| c * s).collect(),
        }
    }

    /// Composes a univariate function given its derivatives at the base value:
    /// `derivs[n] = f⁽ⁿ⁾(value)`, at least `order + 1` entries.
    pub fn compose(&self, derivs: &[f64]) -> Jet {
        let k = self.order();
        let mut h = self.clone();
        if let Some(c0) = h.coeffs.first_mut() {
            *c0 = 0.0;
        }
        let mut out = Jet {
            order: self.order,
            coeffs: vec![derivs[0]],
        };
        let mut power = Jet::constant(1.0);
        let mut factorial = 1.0;
        for (n, d) in derivs.iter().enumerate().take(k + 1).skip(1) {
            power = &power * &h;
            factorial *= n as f64;
            if *d != 0.0 {
                out += power.scale(d / factorial);
            }
        }
        out.order = self.order;
        out
    }

    pub fn recip(&self) -> Jet {
        let a = self.value();
        let mut derivs = vec![0.0; self.order() + 1];
        // d^n/dx^n x^-1 = (-1)^n n! x^-(n+1)
        let mut fact = 1.0;
        for (n, d) in derivs.iter_mut().enumerate() {
            if n > 0 {
                fact *= n as f64;
            }
            let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
            *d = sign * fact / a.powi(n as i32 + 1);
        }
        self.compose(&derivs)
    }

    pub fn powf(&self, p: f64) -> Jet {
        let a = self.value();
        let mut derivs = vec![0.0; self.order() + 1];
        let mut coef = 1.0;
        for (n, d) in derivs.iter_mut().enumerate() {
            *d = coef * a.powf(p - n as f64);
            coef *= p - n as f64;
        }
        self.compose(&derivs)
    }

    pub fn sqrt(&self) -> Jet {
        self.powf(0.5)
    }

    pub fn sin(&self) -> Jet {
        let a = self.value();
        let cycle = [a.sin(), a.cos(), -a.sin(), -a.cos()];
        let derivs: Vec<f64> = (0..=self.order()).map(|n| cycle[n % 4]).collect();
        self.compose(&derivs)
    }

    pub fn cos(&self) -> Jet {
        let a = self.value();
        let cycle = [a.cos(), -a.sin(), -a.cos(), a.sin()];
        let derivs: Vec<f64> = (0..=self.order()).map(|n| cycle[n % 4]).collect();
        self.compose(&derivs)
    }

    pub fn exp(&self) -> Jet {
        let e = self.value().exp();
        self.compose(&vec![e; self.order() + 1])
    }

    pub fn ln(&self) -> Jet {
        let a = self.value();
        let mut derivs = vec![a.ln(); self.order() + 1];
        let mut fact = 1.0;
        for n in 1..=self.order() {
            if n > 1 {
                fact *= (n - 1) as f64;
            }
            let sign = if n % 2 == 1 { 1.0 } else { -1.0 };
            derivs[n] = sign * fact / a.powi(n as i32);
        }
        self.compose(&derivs)
    }

    /// `atan2(self, x)`, differentiated through `atan` of the better-conditioned ratio.
    pub fn atan2(&self, x: &Jet) -> Jet {
        let y = self;
        let base = y.value().atan2(x.value());
        if x.value().abs() >= y.value().abs() {
            let u = y / x;
            atan_series(&u) + (base - u.value().atan())
        } else {
            // atan2(y, x) = ±π/2 − atan(x/y)
            let u = x / y;
            -atan_series(&u) + (base + u.value().atan())
        }
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_finite())
    }

    fn binary_len(&self, other: &Jet, order: usize) -> usize {
        self.coeffs
            .len()
            .max(other.coeffs.len())
            .min(coefficient_count(order))
    }
}

fn atan_series(u: &Jet) -> Jet {
    let a = u.value();
    let k = u.order();
    // derivatives of g(t) = 1/(1+t²) at a, via the recurrence
    // (1+t²) g = 1 ⇒ (1+a²) g⁽ⁿ⁾ + 2n a g⁽ⁿ⁻¹⁾ + n(n−1) g⁽ⁿ⁻²⁾ = 0
    let mut g = vec![0.0; k + 1];
    g[0] = 1.0 / (1.0 + a * a);
    for n in 1..=k {
        let mut s = 2.0 * n as f64 * a * g[n - 1];
        if n >= 2 {
            s += (n * (n - 1)) as f64 * g[n - 2];
        }
        g[n] = -s / (1.0 + a * a);
    }
    let mut derivs = vec![a.atan()];
    derivs.extend_from_slice(&g[..k]);
    u.compose(&derivs)
}

impl fmt::Debug for Jet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Jet(o{}; {:?})", self.order, self.coeffs)
    }
}

impl Default for Jet {
    fn default() -> Self {
        Jet::zero()
    }
}

impl From<f64> for Jet {
    fn from(v: f64) -> Self {
        Jet::constant(v)
    }
}

impl Add<&Jet> for &Jet {
    type Output = Jet;
    fn add(self, rhs: &Jet) -> Jet {
        let order = self.order().min(rhs.order());
        let n = self.binary_len(rhs, order);
        let coeffs = (0..n).map(|i| self.coeff(i) + rhs.coeff(i)).collect();
        Jet {
            order: order as u8,
            coeffs,
        }
    }
}

impl Sub<&Jet> for &Jet {
    type Output = Jet;
    fn sub(self, rhs: &Jet) -> Jet {
        let order = self.order().min(rhs.order());
        let n = self.binary_len(rhs, order);
        let coeffs = (0..n).map(|i| self.coeff(i) - rhs.coeff(i)).collect();
        Jet {
            order: order as u8,
            coeffs,
        }
    }
}

impl Mul<&Jet> for &Jet {
    type Output = Jet;
    fn mul(self, rhs: &Jet) -> Jet {
        let order = self.order().min(rhs.order());
        let (la, lb) = (self.coeffs.len(), rhs.coeffs.len());
        if la == 0 || lb == 0 {
            return Jet {
                order: order as u8,
                coeffs: Vec::new(),
            };
        }
        if la == 1 {
            return rhs.scale(self.coeffs[0]).truncate(order);
        }
        if lb == 1 {
            return self.scale(rhs.coeffs[0]).truncate(order);
        }
        let t = tables();
        let mut coeffs = vec![0.0; coefficient_count(order)];
        for &(i, j, k) in &t.products[..t.product_count[order]] {
            let (i, j) = (i as usize, j as usize);
            if i < la && j < lb {
                coeffs[k as usize] += self.coeffs[i] * rhs.coeffs[j];
            }
        }
        Jet {
            order: order as u8,
            coeffs,
        }
    }
}

impl Div<&Jet> for &Jet {
    type Output = Jet;
    fn div(self, rhs: &Jet) -> Jet {
        if rhs.coeffs.len() <= 1 {
            return self.scale(1.0 / rhs.value()).truncate(rhs.order());
        }
        self * &rhs.recip()
    }
}

impl Neg for &Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale(-1.0)
    }
}

impl Neg for Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale(-1.0)
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr<Jet> for Jet {
            type Output = Jet;
            fn $m(self, rhs: Jet) -> Jet {
                (&self).$m(&rhs)
            }
        }
        impl $tr<&Jet> for Jet {
            type Output = Jet;
            fn $m(self, rhs: &Jet) -> Jet {
                (&self).$m(rhs)
            }
        }
        impl $tr<Jet> for &Jet {
            type Output = Jet;
            fn $m(self, rhs: Jet) -> Jet {
                self.$m(&rhs)
            }
        }
        impl $tr<f64> for Jet {
            type Output = Jet;
            fn $m(self, rhs: f64) -> Jet {
                (&self).$m(&Jet::constant(rhs))
            }
        }
        impl $tr<f64> for &Jet {
            type Output = Jet;
            fn $m(self, rhs: f64) -> Jet {
                self.$m(&Jet::constant(rhs))
            }
        }
        impl $tr<Jet> for f64 {
            type Output = Jet;
            fn $m(self, rhs: Jet) -> Jet {
                (&Jet::constant(self)).$m(&rhs)
            }
        }
        impl $tr<&Jet> for f64 {
            type Output = Jet;
            fn $m(self, rhs: &Jet) -> Jet {
                (&Jet::constant(self)).$m(rhs)
            }
        }
    };
}

forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);
forward_owned!(Div, div);

impl AddAssign<Jet> for Jet {
    fn add_assign(&mut self, rhs: Jet) {
        *self = &*self + &rhs;
    }
}

impl AddAssign<&Jet> for Jet {
    fn add_assign(&mut self, rhs: &Jet) {
        *self = &*self + rhs;
    }
}

impl SubAssign<Jet> for Jet {
    fn sub_assign(&mut self, rhs: Jet) {
        *self = &*self - &rhs;
    }
}

impl MulAssign<f64> for Jet {
    fn mul_assign(&mut self, rhs: f64) {
        for c in &mut self.coeffs {
            *c *= rhs;
        }
    }
}
