//! Test functions for classical operator evaluation: global values plus local
//! second-order data and a description of the far field.

use std::sync::Arc;

/// What is known about `u(z)` for `|z - x| ≥ R`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FarField {
    /// `lo ≤ u(z) ≤ hi`.
    Range { lo: f64, hi: f64 },
    /// `δ(u, x, y) = amplitude·(cos(frequency·y₁) - 1)` for every `y`.
    CosineMode { amplitude: f64, frequency: f64 },
}

impl FarField {
    pub fn constant(c: f64) -> Self {
        FarField::Range { lo: c, hi: c }
    }

    /// A plain range containing `u` beyond the radius.
    pub fn to_range(self, sup: f64) -> (f64, f64) {
        match self {
            FarField::Range { lo, hi } => (lo, hi),
            FarField::CosineMode { .. } => (-sup, sup),
        }
    }
}

/// An evaluable function on ℝⁿ, bounded, with `C^{1,1}` data at query points.
pub trait PointFunction: Send + Sync {
    fn dim(&self) -> usize;
    fn value(&self, x: &[f64]) -> f64;
    fn gradient(&self, x: &[f64]) -> Vec<f64>;
    /// Row-major `n × n` Hessian.
    fn hessian(&self, x: &[f64]) -> Vec<f64>;
    /// Upper bound for `sup |u|`.
    fn sup_norm(&self) -> f64;
    /// `M` with `|δ(u,x,y) - yᵀD²u(x)y| ≤ M|y|⁴` for `|y| ≤ eps`, if known.
    fn residual_bound(&self, x: &[f64], eps: f64) -> Option<f64>;
    /// Radius around `x` beyond which [`PointFunction::far_field`] applies.
    fn far_radius(&self, x: &[f64]) -> f64;
    fn far_field(&self, x: &[f64], radius: f64) -> FarField {
        let _ = (x, radius);
        let s = self.sup_norm();
        FarField::Range { lo: -s, hi: s }
    }
    /// Distances `|y|` at which `y ↦ δ(u, x, y)` may lose smoothness.
    fn radial_breakpoints(&self, x: &[f64]) -> Vec<f64> {
        let _ = x;
        Vec::new()
    }
    /// Length scale of `u`, used for the default inner radius.
    fn scale(&self) -> f64 {
        1.0
    }
    fn name(&self) -> String;
}

/// `δ(u, x, y) = u(x+y) + u(x-y) - 2u(x)`.
pub fn second_difference(u: &dyn PointFunction, x: &[f64], y: &[f64]) -> f64 {
    let mut p = x.to_vec();
    let mut m = x.to_vec();
    for i in 0..x.len() {
        p[i] += y[i];
        m[i] -= y[i];
    }
    u.value(&p) + u.value(&m) - 2.0 * u.value(x)
}

/// Central finite-difference Hessian, row-major.
pub fn hessian_fd(u: &dyn PointFunction, x: &[f64], h: f64) -> Vec<f64> {
    let n = x.len();
    let mut out = vec![0.0; n * n];
    let f = |dx: &[(usize, f64)]| {
        let mut z = x.to_vec();
        for &(i, d) in dx {
            z[i] += d;
        }
        u.value(&z)
    };
    for i in 0..n {
        out[i * n + i] = (f(&[(i, h)]) - 2.0 * u.value(x) + f(&[(i, -h)])) / (h * h);
        for j in 0..i {
            let v = (f(&[(i, h), (j, h)]) - f(&[(i, h), (j, -h)]) - f(&[(i, -h), (j, h)])
                + f(&[(i, -h), (j, -h)]))
                / (4.0 * h * h);
            out[i * n + j] = v;
            out[j * n + i] = v;
        }
    }
    out
}

fn norm2(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum()
}

fn falling(a: f64, k: usize) -> f64 {
    (0..k).map(|i| a - i as f64).product()
}

/// `u(x) = cos(x₁)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cosine {
    pub n: usize,
}

impl Cosine {
    /// Default far radius: the tenth asymptotic zero of the spherical mean,
    /// so the oscillatory tail starts on a half-period boundary.
    fn zero_radius(&self) -> f64 {
        (10.5 + (self.n as f64 - 1.0) / 4.0) * std::f64::consts::PI
    }
}

impl PointFunction for Cosine {
    fn dim(&self) -> usize {
        self.n
    }
    fn value(&self, x: &[f64]) -> f64 {
        x[0].cos()
    }
    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        let mut g = vec![0.0; self.n];
        g[0] = -x[0].sin();
        g
    }
    fn hessian(&self, x: &[f64]) -> Vec<f64> {
        let mut h = vec![0.0; self.n * self.n];
        h[0] = -x[0].cos();
        h
    }
    fn sup_norm(&self) -> f64 {
        1.0
    }
    fn residual_bound(&self, x: &[f64], _eps: f64) -> Option<f64> {
        // δ = 2cos(x₁)(cos y₁ - 1) and |cos t - 1 + t²/2| ≤ t⁴/24
        Some(x[0].cos().abs() / 12.0)
    }
    fn far_radius(&self, _x: &[f64]) -> f64 {
        self.zero_radius()
    }
    fn far_field(&self, x: &[f64], _radius: f64) -> FarField {
        FarField::CosineMode {
            amplitude: 2.0 * x[0].cos(),
            frequency: 1.0,
        }
    }
    fn name(&self) -> String {
        "cos".into()
    }
}

/// `u(x) = (1 - |x|²)⁴` on the unit ball, zero outside.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bump {
    pub n: usize,
}

impl PointFunction for Bump {
    fn dim(&self) -> usize {
        self.n
    }
    fn value(&self, x: &[f64]) -> f64 {
        let s = norm2(x);
        if s < 1.0 {
            (1.0 - s).powi(4)
        } else {
            0.0
        }
    }
    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        let s = norm2(x);
        let g1 = if s < 1.0 { -4.0 * (1.0 - s).powi(3) } else { 0.0 };
        x.iter().map(|v| 2.0 * g1 * v).collect()
    }
    fn hessian(&self, x: &[f64]) -> Vec<f64> {
        let n = self.n;
        let s = norm2(x);
        let mut h = vec![0.0; n * n];
        if s >= 1.0 {
            return h;
        }
        let g1 = -4.0 * (1.0 - s).powi(3);
        let g2 = 12.0 * (1.0 - s).powi(2);
        for i in 0..n {
            for j in 0..n {
                h[i * n + j] = 4.0 * g2 * x[i] * x[j] + if i == j { 2.0 * g1 } else { 0.0 };
            }
        }
        h
    }
    fn sup_norm(&self) -> f64 {
        1.0
    }
    fn residual_bound(&self, x: &[f64], eps: f64) -> Option<f64> {
        let r = norm2(x).sqrt();
        if r + eps <= 1.0 {
            // expand (1 - |z|²)⁴ = Σ C(4,k)(-1)^k |z|^{2k}; the fourth directional
            // derivative of |z|^{2k} is at most (2k)₄ |z|^{2k-4}
            let rho = r + eps;
            let binom = [1.0, 4.0, 6.0, 4.0, 1.0];
            let m4: f64 = (2..=4)
                .map(|k| binom[k] * falling(2.0 * k as f64, 4) * rho.powi(2 * k as i32 - 4))
                .sum();
            Some(m4 / 12.0)
        } else if r - eps >= 1.0 {
            Some(0.0)
        } else {
            None
        }
    }
    fn far_radius(&self, x: &[f64]) -> f64 {
        norm2(x).sqrt() + 1.0
    }
    fn far_field(&self, _x: &[f64], _radius: f64) -> FarField {
        FarField::constant(0.0)
    }
    fn radial_breakpoints(&self, x: &[f64]) -> Vec<f64> {
        let r = norm2(x).sqrt();
        vec![(1.0 - r).abs(), 1.0 + r]
    }
    fn name(&self) -> String {
        "bump".into()
    }
}

/// `u(x) = |x|²`: unbounded, for second-difference checks only.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadratic {
    pub n: usize,
}

impl PointFunction for Quadratic {
    fn dim(&self) -> usize {
        self.n
    }
    fn value(&self, x: &[f64]) -> f64 {
        norm2(x)
    }
    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        x.iter().map(|v| 2.0 * v).collect()
    }
    fn hessian(&self, _x: &[f64]) -> Vec<f64> {
        let n = self.n;
        (0..n * n).map(|k| if k % (n + 1) == 0 { 2.0 } else { 0.0 }).collect()
    }
    fn sup_norm(&self) -> f64 {
        f64::INFINITY
    }
    fn residual_bound(&self, _x: &[f64], _eps: f64) -> Option<f64> {
        Some(0.0)
    }
    fn far_radius(&self, _x: &[f64]) -> f64 {
        f64::INFINITY
    }
    fn name(&self) -> String {
        "quadratic".into()
    }
}

/// `u(x) = height · min{1, |x|²/radius²}`. With `height = 1` and
/// `radius = 2R` this is the comparison function `w_R`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadraticCap {
    pub n: usize,
    pub height: f64,
    pub radius: f64,
}

impl QuadraticCap {
    pub fn w_r(n: usize, big_r: f64) -> Self {
        QuadraticCap {
            n,
            height: 1.0,
            radius: 2.0 * big_r,
        }
    }
}

impl PointFunction for QuadraticCap {
    fn dim(&self) -> usize {
        self.n
    }
    fn value(&self, x: &[f64]) -> f64 {
        self.height * (norm2(x) / (self.radius * self.radius)).min(1.0)
    }
    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        let inside = norm2(x) < self.radius * self.radius;
        let c = if inside { 2.0 * self.height / (self.radius * self.radius) } else { 0.0 };
        x.iter().map(|v| c * v).collect()
    }
    fn hessian(&self, x: &[f64]) -> Vec<f64> {
        let n = self.n;
        let inside = norm2(x) < self.radius * self.radius;
        let c = if inside { 2.0 * self.height / (self.radius * self.radius) } else { 0.0 };
        (0..n * n).map(|k| if k % (n + 1) == 0 { c } else { 0.0 }).collect()
    }
    fn sup_norm(&self) -> f64 {
        self.height.abs()
    }
    fn residual_bound(&self, x: &[f64], eps: f64) -> Option<f64> {
        let r = norm2(x).sqrt();
        (r + eps <= self.radius || r - eps >= self.radius).then_some(0.0)
    }
    fn far_radius(&self, x: &[f64]) -> f64 {
        norm2(x).sqrt() + self.radius
    }
    fn far_field(&self, _x: &[f64], _radius: f64) -> FarField {
        FarField::constant(self.height)
    }
    fn radial_breakpoints(&self, x: &[f64]) -> Vec<f64> {
        let r = norm2(x).sqrt();
        vec![(self.radius - r).abs(), self.radius + r]
    }
    fn scale(&self) -> f64 {
        self.radius
    }
    fn name(&self) -> String {
        "quadratic-cap".into()
    }
}

/// `u(x) = a + b·x` on the ball of radius `extent`, zero outside.
#[derive(Debug, Clone, PartialEq)]
pub struct TruncatedAffine {
    pub offset: f64,
    pub slope: Vec<f64>,
    pub extent: f64,
}

impl PointFunction for TruncatedAffine {
    fn dim(&self) -> usize {
        self.slope.len()
    }
    fn value(&self, x: &[f64]) -> f64 {
        if norm2(x) < self.extent * self.extent {
            self.offset + self.slope.iter().zip(x).map(|(b, v)| b * v).sum::<f64>()
        } else {
            0.0
        }
    }
    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        if norm2(x) < self.extent * self.extent {
            self.slope.clone()
        } else {
            vec![0.0; x.len()]
        }
    }
    fn hessian(&self, x: &[f64]) -> Vec<f64> {
        vec![0.0; x.len() * x.len()]
    }
    fn sup_norm(&self) -> f64 {
        self.offset.abs() + norm2(&self.slope).sqrt() * self.extent
    }
    fn residual_bound(&self, x: &[f64], eps: f64) -> Option<f64> {
        let r = norm2(x).sqrt();
        (r + eps <= self.extent || r - eps >= self.extent).then_some(0.0)
    }
    fn far_radius(&self, x: &[f64]) -> f64 {
        norm2(x).sqrt() + self.extent
    }
    fn far_field(&self, _x: &[f64], _radius: f64) -> FarField {
        FarField::constant(0.0)
    }
    fn radial_breakpoints(&self, x: &[f64]) -> Vec<f64> {
        let r = norm2(x).sqrt();
        vec![(self.extent - r).abs(), self.extent + r]
    }
    fn scale(&self) -> f64 {
        self.extent
    }
    fn name(&self) -> String {
        "affine".into()
    }
}

/// `c·u`.
#[derive(Clone)]
pub struct Scaled {
    pub factor: f64,
    pub inner: Arc<dyn PointFunction>,
}

impl PointFunction for Scaled {
    fn dim(&self) -> usize {
        self.inner.dim()
    }
    fn value(&self, x: &[f64]) -> f64 {
        self.factor * self.inner.value(x)
    }
    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        self.inner.gradient(x).into_iter().map(|v| self.factor * v).collect()
    }
    fn hessian(&self, x: &[f64]) -> Vec<f64> {
        self.inner.hessian(x).into_iter().map(|v| self.factor * v).collect()
    }
    fn sup_norm(&self) -> f64 {
        self.factor.abs() * self.inner.sup_norm()
    }
    fn residual_bound(&self, x: &[f64], eps: f64) -> Option<f64> {
        self.inner.residual_bound(x, eps).map(|m| m * self.factor.abs())
    }
    fn far_radius(&self, x: &[f64]) -> f64 {
        self.inner.far_radius(x)
    }
    fn far_field(&self, x: &[f64], radius: f64) -> FarField {
        match self.inner.far_field(x, radius) {
            FarField::Range { lo, hi } => {
                let (a, b) = (self.factor * lo, self.factor * hi);
                FarField::Range { lo: a.min(b), hi: a.max(b) }
            }
            FarField::CosineMode { amplitude, frequency } => FarField::CosineMode {
                amplitude: self.factor * amplitude,
                frequency,
            },
        }
    }
    fn radial_breakpoints(&self, x: &[f64]) -> Vec<f64> {
        self.inner.radial_breakpoints(x)
    }
    fn scale(&self) -> f64 {
        self.inner.scale()
    }
    fn name(&self) -> String {
        format!("{}*{}", self.factor, self.inner.name())
    }
}

/// `u + v`.
#[derive(Clone)]
pub struct Sum {
    pub first: Arc<dyn PointFunction>,
    pub second: Arc<dyn PointFunction>,
}

impl PointFunction for Sum {
    fn dim(&self) -> usize {
        self.first.dim()
    }
    fn value(&self, x: &[f64]) -> f64 {
        self.first.value(x) + self.second.value(x)
    }
    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        let b = self.second.gradient(x);
        self.first.gradient(x).iter().zip(b).map(|(a, b)| a + b).collect()
    }
    fn hessian(&self, x: &[f64]) -> Vec<f64> {
        let b = self.second.hessian(x);
        self.first.hessian(x).iter().zip(b).map(|(a, b)| a + b).collect()
    }
    fn sup_norm(&self) -> f64 {
        self.first.sup_norm() + self.second.sup_norm()
    }
    fn residual_bound(&self, x: &[f64], eps: f64) -> Option<f64> {
        Some(self.first.residual_bound(x, eps)? + self.second.residual_bound(x, eps)?)
    }
    fn far_radius(&self, x: &[f64]) -> f64 {
        self.first.far_radius(x).max(self.second.far_radius(x))
    }
    fn far_field(&self, x: &[f64], radius: f64) -> FarField {
        match (self.first.far_field(x, radius), self.second.far_field(x, radius)) {
            (
                FarField::CosineMode { amplitude: a, frequency: f },
                FarField::CosineMode { amplitude: b, frequency: g },
            ) if f == g => FarField::CosineMode {
                amplitude: a + b,
                frequency: f,
            },
            (p, q) => {
                let (a0, a1) = p.to_range(self.first.sup_norm());
                let (b0, b1) = q.to_range(self.second.sup_norm());
                FarField::Range { lo: a0 + b0, hi: a1 + b1 }
            }
        }
    }
    fn radial_breakpoints(&self, x: &[f64]) -> Vec<f64> {
        let mut v = self.first.radial_breakpoints(x);
        v.extend(self.second.radial_breakpoints(x));
        v
    }
    fn scale(&self) -> f64 {
        self.first.scale().min(self.second.scale())
    }
    fn name(&self) -> String {
        format!("{}+{}", self.first.name(), self.second.name())
    }
}
