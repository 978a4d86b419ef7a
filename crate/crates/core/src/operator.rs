//! Classical evaluation of the normalised linear operator
//! `(1/2)C_φ ∫ δ(u,x,y)/(|y|ⁿφ(|y|)) dy` and of the extremal operators
//! `M^± u(x) = C_φ ∫ (w₊δ⁺ - w₋δ⁻)/(|y|ⁿφ(|y|)) dy`, with `(w₊, w₋) = (Λ, λ)`
//! for `M⁺` and `(λ, Λ)` for `M⁻`. Note the two normalisations differ by 2.
//!
//! The integral is split at `ε` and `R`:
//! * `|y| < ε`: `δ` is replaced by `yᵀD²u(x)y`, which is positively
//!   homogeneous of degree 2, so the ball contributes
//!   `C̲(ε) ∫_S w(θᵀD²u(x)θ) dσ`; the Taylor remainder is enclosed by
//!   `max(w₊,w₋)|S| M ∫₀^ε r³/φ`.
//! * `ε < |y| < R`: radial quadrature in `ln r` over angular quadrature of
//!   the exact `δ`.
//! * `|y| > R`: closed form or enclosure from the function's far field.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::functions::{FarField, PointFunction};
use crate::kernel::Kernel;
use crate::normalizer::{cosine_tail, cphi_direct, NormalizationResult};
use crate::quad::{adaptive_with_err, Enclosure, Estimate, QuadOptions};
use crate::special::sphere_area;

pub const MAX_OPERATOR_DIM: usize = 3;

/// Ellipticity constants `0 < λ ≤ Λ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExtremalParams {
    pub lambda: f64,
    #[serde(rename = "Lambda")]
    pub big_lambda: f64,
}

impl ExtremalParams {
    pub fn new(lambda: f64, big_lambda: f64) -> Result<Self> {
        if !(lambda > 0.0 && lambda <= big_lambda && big_lambda.is_finite()) {
            return Err(Error::invalid(format!(
                "need 0 < lambda ≤ Lambda < ∞, got {lambda} and {big_lambda}"
            )));
        }
        Ok(ExtremalParams { lambda, big_lambda })
    }
}

/// Weights on `δ⁺` and `δ⁻`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Weights {
    pub plus: f64,
    pub minus: f64,
}

impl Weights {
    pub const LINEAR: Weights = Weights {
        plus: 1.0,
        minus: 1.0,
    };

    pub fn pucci_plus(p: &ExtremalParams) -> Self {
        Weights {
            plus: p.big_lambda,
            minus: p.lambda,
        }
    }

    pub fn pucci_minus(p: &ExtremalParams) -> Self {
        Weights {
            plus: p.lambda,
            minus: p.big_lambda,
        }
    }

    /// `w₊ d⁺ - w₋ d⁻`.
    pub fn apply(&self, d: f64) -> f64 {
        if d >= 0.0 {
            self.plus * d
        } else {
            self.minus * d
        }
    }

    pub fn max(&self) -> f64 {
        self.plus.max(self.minus)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OperatorValue {
    pub value: f64,
    pub error: f64,
    pub inner: f64,
    pub annulus: f64,
    pub tail: f64,
    /// Inner radius of the accepted evaluation.
    pub eps: f64,
}

impl OperatorValue {
    pub fn estimate(&self) -> Estimate {
        Estimate::new(self.value, self.error)
    }

    pub fn lo(&self) -> f64 {
        self.value - self.error
    }

    pub fn hi(&self) -> f64 {
        self.value + self.error
    }
}

/// The unnormalised integral split into its three pieces.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegralParts {
    pub inner: Estimate,
    pub annulus: Estimate,
    pub tail: Estimate,
}

impl IntegralParts {
    pub fn total(&self) -> Estimate {
        self.inner + self.annulus + self.tail
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OperatorOptions {
    /// Relative accuracy (cancellation aware) of each quadrature.
    pub tol: f64,
    /// Inner radius; defaults to `1e-3` times the function's scale.
    pub eps: Option<f64>,
    /// Radius where the far-field description takes over.
    pub r_max: Option<f64>,
    /// Re-evaluate with `ε/4` and require agreement.
    pub eps_sweep: bool,
}

impl Default for OperatorOptions {
    fn default() -> Self {
        OperatorOptions {
            tol: 1e-8,
            eps: None,
            r_max: None,
            eps_sweep: true,
        }
    }
}

/// A kernel in a fixed dimension together with its normalising constant.
#[derive(Debug, Clone)]
pub struct Operator<'a> {
    pub kernel: &'a Kernel,
    pub n: usize,
    pub cphi: NormalizationResult,
    pub opts: OperatorOptions,
}

impl<'a> Operator<'a> {
    /// Computes `C_φ` by the spherical route.
    pub fn new(kernel: &'a Kernel, n: usize, opts: OperatorOptions) -> Result<Self> {
        let cphi = cphi_direct(kernel, n, (0.01 * opts.tol).max(1e-12))?;
        Operator::with_cphi(kernel, cphi, opts)
    }

    pub fn with_cphi(kernel: &'a Kernel, cphi: NormalizationResult, opts: OperatorOptions) -> Result<Self> {
        let n = cphi.n;
        if n == 0 || n > MAX_OPERATOR_DIM {
            return Err(Error::invalid(format!(
                "operator evaluation supports 1 ≤ n ≤ {MAX_OPERATOR_DIM}, got {n}"
            )));
        }
        Ok(Operator {
            kernel,
            n,
            cphi,
            opts,
        })
    }

    /// `(1/2)C_φ ∫ δ(u,x,y)/(|y|ⁿφ(|y|)) dy`.
    pub fn linear_apply(&self, u: &dyn PointFunction, x: &[f64]) -> Result<OperatorValue> {
        self.evaluate(u, x, Weights::LINEAR, 0.5)
    }

    pub fn pucci_plus(&self, u: &dyn PointFunction, x: &[f64], p: &ExtremalParams) -> Result<OperatorValue> {
        self.evaluate(u, x, Weights::pucci_plus(p), 1.0)
    }

    pub fn pucci_minus(&self, u: &dyn PointFunction, x: &[f64], p: &ExtremalParams) -> Result<OperatorValue> {
        self.evaluate(u, x, Weights::pucci_minus(p), 1.0)
    }

    /// `factor · C_φ ∫ (w₊δ⁺ - w₋δ⁻)/(|y|ⁿφ(|y|)) dy` with the ε sweep.
    pub fn evaluate(
        &self,
        u: &dyn PointFunction,
        x: &[f64],
        w: Weights,
        factor: f64,
    ) -> Result<OperatorValue> {
        self.check_point(u, x)?;
        let mut eps = self.opts.eps.unwrap_or(1e-3 * u.scale());
        // the Taylor bound must be available on the inner ball
        let mut tries = 0;
        while u.residual_bound(x, eps).is_none() {
            eps *= 0.25;
            tries += 1;
            if tries > 20 {
                return Err(Error::invalid(format!(
                    "{} is not C^{{1,1}} near the query point",
                    u.name()
                )));
            }
        }
        let coarse = self.integral(u, x, w, eps)?;
        let accepted = if self.opts.eps_sweep {
            let fine = self.integral(u, x, w, 0.25 * eps)?;
            let (a, b) = (coarse.total(), fine.total());
            let scale = a.value.abs().max(b.value.abs());
            if (a.value - b.value).abs() > a.error + b.error + 10.0 * self.opts.tol * scale {
                return Err(Error::tolerance(
                    format!("inner-radius sweep for {} (ε = {eps:e} vs ε/4)", u.name()),
                    self.opts.tol,
                    Estimate::new(b.value, (a.value - b.value).abs()),
                ));
            }
            eps *= 0.25;
            fine
        } else {
            coarse
        };
        Ok(self.normalise(accepted, factor, eps))
    }

    fn normalise(&self, parts: IntegralParts, factor: f64, eps: f64) -> OperatorValue {
        let c = self.cphi.estimate() * factor;
        let total = parts.total();
        let v = c.times(total);
        OperatorValue {
            value: v.value,
            error: v.error,
            inner: c.value * parts.inner.value,
            annulus: c.value * parts.annulus.value,
            tail: c.value * parts.tail.value,
            eps,
        }
    }

    fn check_point(&self, u: &dyn PointFunction, x: &[f64]) -> Result<()> {
        if u.dim() != self.n || x.len() != self.n {
            return Err(Error::invalid(format!(
                "dimension mismatch: operator n = {}, function n = {}, point has {} coordinates",
                self.n,
                u.dim(),
                x.len()
            )));
        }
        if !u.sup_norm().is_finite() {
            return Err(Error::invalid(format!("{} is unbounded", u.name())));
        }
        Ok(())
    }

    /// `∫ (w₊δ⁺ - w₋δ⁻)/(|y|ⁿφ(|y|)) dy` for a fixed inner radius.
    pub fn integral(&self, u: &dyn PointFunction, x: &[f64], w: Weights, eps: f64) -> Result<IntegralParts> {
        let n = self.n;
        let tol = self.opts.tol;
        let area = sphere_area(n);
        let kernel = self.kernel;

        // inner ball
        let h = u.hessian(x);
        let quad_form = |th: &[f64]| {
            let mut s = 0.0;
            for i in 0..n {
                for j in 0..n {
                    s += th[i] * h[i * n + j] * th[j];
                }
            }
            s
        };
        let ang = angular_integral(n, 0.01 * tol, 0.0, |th| (w.apply(quad_form(th)), 0.0))?;
        let lower = kernel.lower_moment(eps, (0.01 * tol).max(1e-12))?.estimate();
        let m4 = u
            .residual_bound(x, eps)
            .ok_or_else(|| Error::invalid(format!("no Taylor bound for {} at ε = {eps}", u.name())))?;
        let fourth = if m4 > 0.0 {
            kernel.lower_power_integral(4.0, eps, 1e-6)?.value * (1.0 + 1e-6)
        } else {
            0.0
        };
        let inner = ang.times(lower) + Estimate::new(0.0, w.max() * area * m4 * fourth);

        // annulus
        let r_max = self.opts.r_max.unwrap_or_else(|| u.far_radius(x));
        if !r_max.is_finite() || r_max <= eps {
            return Err(Error::invalid(format!(
                "far-field radius {r_max} must exceed the inner radius {eps}"
            )));
        }
        let ux = u.value(x);
        let noise = 1e-14 * u.sup_norm().max(ux.abs());
        let (t0, t1) = (eps.ln(), r_max.ln());
        let mut points: Vec<f64> = vec![t0];
        let mut breaks: Vec<f64> = u
            .radial_breakpoints(x)
            .into_iter()
            .filter(|&b| b > eps && b < r_max)
            .map(f64::ln)
            .collect();
        breaks.sort_by(f64::total_cmp);
        points.extend(breaks);
        points.push(t1);
        let mut fine = Vec::new();
        for win in points.windows(2) {
            let pieces = ((win[1] - win[0]) / 0.5).ceil().max(1.0) as usize;
            for k in 0..pieces {
                fine.push(win[0] + (win[1] - win[0]) * k as f64 / pieces as f64);
            }
        }
        fine.push(t1);
        fine.dedup();
        let mut y = vec![0.0; n];
        let mut xp = vec![0.0; n];
        let mut xm = vec![0.0; n];
        let mut failure = None;
        let annulus = adaptive_with_err(
            |t| {
                let r = t.exp();
                let inv_phi = (-kernel.ln_phi(t)).exp();
                let a = angular_integral(n, 0.01 * tol, 16.0 * w.max() * noise, |th| {
                    for i in 0..n {
                        y[i] = r * th[i];
                        xp[i] = x[i] + y[i];
                        xm[i] = x[i] - y[i];
                    }
                    let d = u.value(&xp) + u.value(&xm) - 2.0 * ux;
                    if d.abs() < noise {
                        (0.0, w.max() * d.abs())
                    } else {
                        (w.apply(d), 0.0)
                    }
                });
                match a {
                    Ok(a) => (a.value * inv_phi, a.error * inv_phi),
                    Err(e) => {
                        failure.get_or_insert(e);
                        (f64::NAN, f64::INFINITY)
                    }
                }
            },
            &fine,
            &QuadOptions::rel(tol).with_l1(tol).with_max_panels(2000),
        );
        if let Some(e) = failure {
            return Err(e);
        }
        let annulus = annulus.require(&format!("annulus integral for {}", u.name()), tol)?;

        // far field
        let tail = match u.far_field(x, r_max) {
            FarField::Range { lo, hi } => {
                let cb = kernel.upper(r_max)?;
                let a = w.apply(2.0 * lo - 2.0 * ux) * area;
                let b = w.apply(2.0 * hi - 2.0 * ux) * area;
                let c = [a * cb.lo(), a * cb.hi(), b * cb.lo(), b * cb.hi()];
                let lo = c.iter().cloned().fold(f64::INFINITY, f64::min);
                let hi = c.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                Enclosure::new(lo, hi).to_estimate()
            }
            FarField::CosineMode {
                amplitude,
                frequency,
            } => {
                // δ = amplitude·(cos - 1) has the sign of -amplitude
                let coef = w.apply(-amplitude);
                let t = cosine_tail(kernel, n, frequency, r_max, 0.1 * tol)?;
                t * (coef * area)
            }
        };
        Ok(IntegralParts {
            inner,
            annulus,
            tail,
        })
    }
}

/// `∫_{S^{n-1}} f(θ) dσ` for even integrands `f(θ) = f(-θ)`, `n ≤ 3`.
/// `abs_tol` absorbs integrands that are pure noise.
pub fn angular_integral<F>(n: usize, tol: f64, abs_tol: f64, mut f: F) -> Result<Estimate>
where
    F: FnMut(&[f64]) -> (f64, f64),
{
    let opts = QuadOptions::rel(tol)
        .with_l1(tol)
        .with_abs(abs_tol)
        .with_max_panels(400);
    match n {
        1 => {
            let (v, e) = f(&[1.0]);
            Ok(Estimate::new(2.0 * v, 2.0 * e))
        }
        2 => {
            let q = adaptive_with_err(
                |a: f64| f(&[a.cos(), a.sin()]),
                &crate::quad::uniform_points(0.0, std::f64::consts::PI, 8),
                &opts,
            );
            Ok(q.require("angular integral", tol)? * 2.0)
        }
        3 => {
            let mut failed = false;
            let q = adaptive_with_err(
                |z: f64| {
                    let s = (1.0 - z * z).max(0.0).sqrt();
                    let inner = adaptive_with_err(
                        |b: f64| f(&[z, s * b.cos(), s * b.sin()]),
                        &crate::quad::uniform_points(0.0, std::f64::consts::PI, 4),
                        &opts,
                    );
                    if !inner.converged {
                        failed = true;
                    }
                    (inner.value(), inner.error())
                },
                &crate::quad::uniform_points(-1.0, 1.0, 4),
                &opts,
            );
            if failed && !q.converged {
                return Err(Error::tolerance("angular integral", tol, q.estimate));
            }
            Ok(q.require("angular integral", tol)? * 2.0)
        }
        _ => Err(Error::invalid(format!(
            "angular quadrature supports n ≤ {MAX_OPERATOR_DIM}, got {n}"
        ))),
    }
}

/// `4nω_n ‖u‖∞ C̄(R)`: bound on the part of `∫ |δ|/(|y|ⁿφ)` beyond `R`.
pub fn tail_bound(u_sup: f64, kernel: &Kernel, n: usize, radius: f64) -> Result<f64> {
    if u_sup == 0.0 {
        return Ok(0.0);
    }
    let cb = kernel.upper(radius)?;
    Ok(4.0 * sphere_area(n) * u_sup * cb.hi())
}

/// `δ(R) = C_φ λ nω_n C̲(R)/(2R²)`, the lower bound for `M⁻ w_R` on `B_R`.
pub fn w_r_gap(kernel: &Kernel, cphi: &NormalizationResult, lambda: f64, radius: f64) -> Result<f64> {
    if radius < 4.0 {
        return Err(Error::invalid(format!("w_R gap needs R ≥ 4, got {radius}")));
    }
    let lower = kernel.lower(radius)?;
    Ok(cphi.value * lambda * sphere_area(cphi.n) * lower.value / (2.0 * radius * radius))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GapReport {
    pub radius: f64,
    pub gap: f64,
    pub samples: Vec<(Vec<f64>, OperatorValue)>,
    pub worst_point: Vec<f64>,
    pub worst_margin: f64,
}

/// Checks `M⁻w_R(x) ≥ δ(R) - enclosure` at the given points of `B_R`.
pub fn w_r_subsolution_gap(
    op: &Operator,
    params: &ExtremalParams,
    radius: f64,
    points: &[Vec<f64>],
) -> Result<GapReport> {
    let gap = w_r_gap(op.kernel, &op.cphi, params.lambda, radius)?;
    let w = crate::functions::QuadraticCap::w_r(op.n, radius);
    let mut samples = Vec::with_capacity(points.len());
    let mut worst_margin = f64::INFINITY;
    let mut worst_point = Vec::new();
    for x in points {
        let v = op.pucci_minus(&w, x, params)?;
        let margin = v.hi() - gap;
        if margin < worst_margin {
            worst_margin = margin;
            worst_point = x.clone();
        }
        samples.push((x.clone(), v));
    }
    if worst_margin < 0.0 {
        return Err(Error::Verification(format!(
            "M⁻w_R falls below δ(R) = {gap} at {worst_point:?} (margin {worst_margin:e})"
        )));
    }
    Ok(GapReport {
        radius,
        gap,
        samples,
        worst_point,
        worst_margin,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functions::{Bump, Cosine, TruncatedAffine};
    use crate::kernel::ScalingFunction;
    use std::f64::consts::PI;

    fn power(s: f64) -> Kernel {
        Kernel::natural(ScalingFunction::power(s).unwrap(), None).unwrap()
    }

    #[test]
    fn cosine_at_origin_is_minus_one() {
        for (k, n) in [(power(1.0), 1), (power(0.6), 2)] {
            let op = Operator::new(&k, n, OperatorOptions::default()).unwrap();
            let v = op.linear_apply(&Cosine { n }, &vec![0.0; n]).unwrap();
            assert!((v.value + 1.0).abs() <= v.error + 1e-9, "{v:?}");
            assert!((v.inner + v.annulus + v.tail - v.value).abs() < 1e-12);
        }
    }

    #[test]
    fn cosine_off_origin() {
        let k = power(1.0);
        let op = Operator::new(&k, 1, OperatorOptions::default()).unwrap();
        let v = op.linear_apply(&Cosine { n: 1 }, &[PI / 3.0]).unwrap();
        assert!((v.value + 0.5).abs() <= v.error + 1e-9, "{v:?}");
    }

    #[test]
    fn pucci_on_cosine() {
        let k = power(1.0);
        let p = ExtremalParams::new(1.0, 2.0).unwrap();
        let op = Operator::new(&k, 1, OperatorOptions::default()).unwrap();
        let plus = op.pucci_plus(&Cosine { n: 1 }, &[0.0], &p).unwrap();
        let minus = op.pucci_minus(&Cosine { n: 1 }, &[0.0], &p).unwrap();
        assert!((plus.value + 2.0).abs() <= plus.error + 1e-9, "{plus:?}");
        assert!((minus.value + 4.0).abs() <= minus.error + 1e-9, "{minus:?}");
    }

    #[test]
    fn affine_region_gives_only_tail() {
        let k = power(1.0);
        let op = Operator::new(&k, 1, OperatorOptions::default()).unwrap();
        let u = TruncatedAffine {
            offset: 0.5,
            slope: vec![0.01],
            extent: 50.0,
        };
        let v = op.linear_apply(&u, &[1.0]).unwrap();
        let bound = 0.5 * op.cphi.value * tail_bound(u.sup_norm(), &k, 1, 49.0).unwrap();
        assert!(v.value.abs() <= bound + v.error, "{v:?} vs {bound}");
    }

    #[test]
    fn tail_bound_examples() {
        let k = power(1.0);
        assert!((tail_bound(1.0, &k, 1, 1.0).unwrap() - 8.0).abs() < 1e-9);
        assert_eq!(tail_bound(0.0, &k, 1, 1.0).unwrap(), 0.0);
        assert!(tail_bound(1.0, &k, 1, 10.0).unwrap() < tail_bound(1.0, &k, 1, 5.0).unwrap());
    }

    #[test]
    fn bump_laplacian_order_two_limit_shape() {
        // symmetric ordering M⁻ ≤ 2L ≤ M⁺ at a few points
        let k = power(1.5);
        let op = Operator::new(&k, 2, OperatorOptions::default()).unwrap();
        let p = ExtremalParams::new(0.5, 1.5).unwrap();
        for x in [[0.0, 0.0], [0.5, 0.2], [1.5, 0.0]] {
            let l = op.linear_apply(&Bump { n: 2 }, &x).unwrap();
            let lo = op.pucci_minus(&Bump { n: 2 }, &x, &p).unwrap();
            let hi = op.pucci_plus(&Bump { n: 2 }, &x, &p).unwrap();
            assert!(lo.lo() <= 2.0 * l.hi() && 2.0 * l.lo() <= hi.hi(), "{x:?}");
        }
    }

    #[test]
    fn w_r_gap_example() {
        let k = power(1.0);
        let op = Operator::new(&k, 1, OperatorOptions::default()).unwrap();
        let gap = w_r_gap(&k, &op.cphi, 1.0, 4.0).unwrap();
        assert!((gap - 1.0 / (4.0 * PI)).abs() < 1e-9);
        let p = ExtremalParams::new(1.0, 1.0).unwrap();
        let pts: Vec<Vec<f64>> = [0.0, 1.0, 2.5, 3.9].iter().map(|&v| vec![v]).collect();
        let rep = w_r_subsolution_gap(&op, &p, 4.0, &pts).unwrap();
        assert!(rep.worst_margin >= 0.0);
    }

    #[test]
    fn rejects_bad_input() {
        let k = power(1.0);
        assert!(ExtremalParams::new(2.0, 1.0).is_err());
        assert!(Operator::new(&k, 4, OperatorOptions::default()).is_err());
        let op = Operator::new(&k, 1, OperatorOptions::default()).unwrap();
        assert!(op.linear_apply(&crate::functions::Quadratic { n: 1 }, &[0.0]).is_err());
    }
}
