//! Scaling functions φ, weak-scaling certificates and the kernel moments
//!
//! ```text
//!   C̲(R) = ∫₀ᴿ r/φ(r) dr,      C̄(R) = ∫_R^∞ dr/(r φ(r)).
//! ```
//!
//! All integrals are evaluated in the logarithmic variable `τ = ln r`, where
//! the integrands become `e^{kτ}/φ(e^τ)` and decay exponentially towards the
//! singular end. The unbounded pieces are never estimated: they are enclosed
//! by power-law brackets built from the local log-slope of φ, or from the
//! certificate when no slope information is available.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::quad::{integrate_down, integrate_up, Enclosure, Estimate, TailOptions};

/// The order profile of a kernel `K(y) ≍ 1/(|y|ⁿ φ(|y|))`.
#[derive(Debug, Clone, PartialEq)]
pub enum ScalingFunction {
    /// `r^σ`.
    Power { sigma: f64 },
    /// `r^σ̲ + r^σ̄`.
    SumPowers { lower: f64, upper: f64 },
    /// `r^σ̲ (log(1 + r⁻²))^{-(2-σ̄)/2}`.
    LogLower { lower: f64, upper: f64 },
    /// `r^σ̄ (log(1 + r⁻²))^{σ̲/2}`.
    LogUpper { lower: f64, upper: f64 },
    /// Piecewise linear interpolation in log-log coordinates.
    UserTable(LogLogTable),
}

/// Samples `(ln r, ln φ(r))` with strictly increasing abscissae.
#[derive(Debug, Clone, PartialEq)]
pub struct LogLogTable {
    ln_r: Vec<f64>,
    ln_phi: Vec<f64>,
}

impl LogLogTable {
    /// Builds a table from `(r, φ(r))` pairs.
    pub fn from_pairs(pairs: &[(f64, f64)]) -> Result<Self> {
        if pairs.len() < 2 {
            return Err(Error::invalid("a scaling table needs at least two samples"));
        }
        let mut ln_r = Vec::with_capacity(pairs.len());
        let mut ln_phi = Vec::with_capacity(pairs.len());
        for &(r, phi) in pairs {
            if !(r > 0.0 && phi > 0.0 && r.is_finite() && phi.is_finite()) {
                return Err(Error::invalid(format!(
                    "table entries must be positive and finite, got ({r}, {phi})"
                )));
            }
            ln_r.push(r.ln());
            ln_phi.push(phi.ln());
        }
        if ln_r.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::invalid("table radii must be strictly increasing"));
        }
        Ok(LogLogTable { ln_r, ln_phi })
    }

    pub fn len(&self) -> usize {
        self.ln_r.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ln_r.is_empty()
    }

    fn ln_range(&self) -> (f64, f64) {
        (self.ln_r[0], *self.ln_r.last().unwrap())
    }

    fn interpolate(&self, t: f64) -> Option<f64> {
        let (lo, hi) = self.ln_range();
        if !(t >= lo && t <= hi) {
            return None;
        }
        let i = match self.ln_r.partition_point(|&x| x <= t) {
            0 => 0,
            k if k >= self.ln_r.len() => self.ln_r.len() - 2,
            k => k - 1,
        };
        let (x0, x1) = (self.ln_r[i], self.ln_r[i + 1]);
        let (y0, y1) = (self.ln_phi[i], self.ln_phi[i + 1]);
        Some(y0 + (y1 - y0) * (t - x0) / (x1 - x0))
    }

    fn slope_range(&self, t0: f64, t1: f64) -> Option<(f64, f64)> {
        let (lo, hi) = self.ln_range();
        if t0 < lo || t1 > hi {
            return None;
        }
        let mut min = f64::INFINITY;
        let mut max = f64::NEG_INFINITY;
        for i in 0..self.ln_r.len() - 1 {
            let (x0, x1) = (self.ln_r[i], self.ln_r[i + 1]);
            if x1 < t0 || x0 > t1 {
                continue;
            }
            let s = (self.ln_phi[i + 1] - self.ln_phi[i]) / (x1 - x0);
            min = min.min(s);
            max = max.max(s);
        }
        min.is_finite().then_some((min, max))
    }
}

fn check_exponent(name: &str, s: f64) -> Result<()> {
    if s > 0.0 && s < 2.0 {
        Ok(())
    } else {
        Err(Error::invalid(format!("{name} must lie in (0, 2), got {s}")))
    }
}

fn check_pair(lower: f64, upper: f64, strict: bool) -> Result<()> {
    check_exponent("sigma_lower", lower)?;
    check_exponent("sigma_upper", upper)?;
    if lower > upper || (strict && lower == upper) {
        return Err(Error::invalid(format!(
            "need sigma_lower {} sigma_upper, got {lower} and {upper}",
            if strict { "<" } else { "<=" }
        )));
    }
    Ok(())
}

/// `ln(1 + e^x)` without overflow.
fn softplus(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

/// `ln ln(1 + e^{-2t})`.
fn ln_log_term(t: f64) -> f64 {
    if t < 0.0 {
        softplus(-2.0 * t).ln()
    } else {
        let x = (-2.0 * t).exp();
        let ratio = if x < 1e-300 { 1.0 } else { x.ln_1p() / x };
        -2.0 * t + ratio.ln()
    }
}

/// `1/((1 + r²) ln(1 + r⁻²))` at `r = e^t`; increases from 0 to 1.
fn log_slope_factor(t: f64) -> f64 {
    (-(softplus(2.0 * t) + ln_log_term(t))).exp().min(1.0)
}

fn logistic(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

impl ScalingFunction {
    pub fn power(sigma: f64) -> Result<Self> {
        check_exponent("sigma", sigma)?;
        Ok(ScalingFunction::Power { sigma })
    }

    pub fn sum_powers(lower: f64, upper: f64) -> Result<Self> {
        check_pair(lower, upper, false)?;
        Ok(ScalingFunction::SumPowers { lower, upper })
    }

    pub fn log_lower(lower: f64, upper: f64) -> Result<Self> {
        check_pair(lower, upper, false)?;
        Ok(ScalingFunction::LogLower { lower, upper })
    }

    pub fn log_upper(lower: f64, upper: f64) -> Result<Self> {
        check_pair(lower, upper, true)?;
        Ok(ScalingFunction::LogUpper { lower, upper })
    }

    pub fn table(table: LogLogTable) -> Self {
        ScalingFunction::UserTable(table)
    }

    pub fn family_name(&self) -> &'static str {
        match self {
            ScalingFunction::Power { .. } => "power",
            ScalingFunction::SumPowers { .. } => "sum_powers",
            ScalingFunction::LogLower { .. } => "log_lower",
            ScalingFunction::LogUpper { .. } => "log_upper",
            ScalingFunction::UserTable(_) => "table",
        }
    }

    /// Parameters as `key=value` pairs joined by `;` (CSV safe).
    pub fn params_string(&self) -> String {
        match self {
            ScalingFunction::Power { sigma } => format!("sigma={sigma}"),
            ScalingFunction::SumPowers { lower, upper }
            | ScalingFunction::LogLower { lower, upper }
            | ScalingFunction::LogUpper { lower, upper } => {
                format!("sigma_lower={lower};sigma_upper={upper}")
            }
            ScalingFunction::UserTable(t) => format!("samples={}", t.len()),
        }
    }

    pub fn label(&self) -> String {
        format!("{}({})", self.family_name(), self.params_string())
    }

    /// Range of `ln r` on which φ can be evaluated.
    pub fn ln_domain(&self) -> (f64, f64) {
        match self {
            ScalingFunction::UserTable(t) => t.ln_range(),
            _ => (f64::NEG_INFINITY, f64::INFINITY),
        }
    }

    /// φ(r).
    pub fn eval(&self, r: f64) -> Result<f64> {
        if !(r > 0.0) || !r.is_finite() {
            return Err(Error::invalid(format!("φ needs a positive radius, got {r}")));
        }
        match *self {
            ScalingFunction::Power { sigma } => Ok(r.powf(sigma)),
            ScalingFunction::SumPowers { lower, upper } => Ok(r.powf(lower) + r.powf(upper)),
            _ => self.ln_eval(r.ln()).map(f64::exp).map_err(|e| match e {
                Error::OutOfTable { what, min, max, .. } => Error::OutOfTable {
                    what,
                    r,
                    min,
                    max,
                },
                other => other,
            }),
        }
    }

    /// `ln φ(e^t)`.
    pub fn ln_eval(&self, t: f64) -> Result<f64> {
        match self {
            ScalingFunction::Power { sigma } => Ok(sigma * t),
            ScalingFunction::SumPowers { lower, upper } => {
                let d = upper - lower;
                Ok(if t > 0.0 {
                    upper * t + (-d * t).exp().ln_1p()
                } else {
                    lower * t + (d * t).exp().ln_1p()
                })
            }
            ScalingFunction::LogLower { lower, upper } => {
                Ok(lower * t - 0.5 * (2.0 - upper) * ln_log_term(t))
            }
            ScalingFunction::LogUpper { lower, upper } => {
                Ok(upper * t + 0.5 * lower * ln_log_term(t))
            }
            ScalingFunction::UserTable(table) => table.interpolate(t).ok_or_else(|| {
                let (a, b) = table.ln_range();
                Error::OutOfTable {
                    what: "scaling table",
                    r: t.exp(),
                    min: a.exp(),
                    max: b.exp(),
                }
            }),
        }
    }

    /// Local slope `d ln φ / d ln r` for the analytic families.
    fn slope(&self, t: f64) -> Option<f64> {
        match *self {
            ScalingFunction::Power { sigma } => Some(sigma),
            ScalingFunction::SumPowers { lower, upper } => {
                Some(lower + (upper - lower) * logistic((upper - lower) * t))
            }
            ScalingFunction::LogLower { lower, upper } => {
                let s = if t == f64::NEG_INFINITY {
                    0.0
                } else if t == f64::INFINITY {
                    1.0
                } else {
                    log_slope_factor(t)
                };
                Some(lower + (2.0 - upper) * s)
            }
            ScalingFunction::LogUpper { lower, upper } => {
                let s = if t == f64::NEG_INFINITY {
                    0.0
                } else if t == f64::INFINITY {
                    1.0
                } else {
                    log_slope_factor(t)
                };
                Some(upper - lower * s)
            }
            ScalingFunction::UserTable(_) => None,
        }
    }

    /// Bounds `[α, β]` on the log-slope of φ over `[t0, t1]` (either end may
    /// be infinite). Every analytic family has a monotone slope, so the end
    /// values bracket it.
    pub fn slope_range(&self, t0: f64, t1: f64) -> Option<(f64, f64)> {
        if let ScalingFunction::UserTable(t) = self {
            return t.slope_range(t0, t1);
        }
        let a = self.slope(t0)?;
        let b = self.slope(t1)?;
        Some((a.min(b), a.max(b)))
    }

    /// The weak-scaling constants each analytic family satisfies exactly.
    pub fn natural_certificate(&self, sigma0: Option<f64>) -> Option<WeakScalingCertificate> {
        let (lo, hi) = match self {
            ScalingFunction::UserTable(_) => return None,
            _ => self.slope_range(f64::NEG_INFINITY, f64::INFINITY)?,
        };
        WeakScalingCertificate::new(1.0, lo, hi, sigma0.unwrap_or(lo)).ok()
    }
}

/// Free-standing form of [`ScalingFunction::eval`].
pub fn eval_phi(phi: &ScalingFunction, r: f64) -> Result<f64> {
    phi.eval(r)
}

/// Constants `(a, σ̲, σ̄)` with
/// `a⁻¹(R/r)^σ̲ ≤ φ(R)/φ(r) ≤ a(R/r)^σ̄` for `0 < r ≤ R`, plus the floor σ₀.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WeakScalingCertificate {
    pub a: f64,
    pub sigma_lower: f64,
    pub sigma_upper: f64,
    pub sigma0: f64,
}

impl WeakScalingCertificate {
    pub fn new(a: f64, sigma_lower: f64, sigma_upper: f64, sigma0: f64) -> Result<Self> {
        if !(a >= 1.0) || !a.is_finite() {
            return Err(Error::invalid(format!("certificate constant a must be ≥ 1, got {a}")));
        }
        if !(sigma0 > 0.0 && sigma0 <= sigma_lower && sigma_lower <= sigma_upper && sigma_upper < 2.0)
        {
            return Err(Error::invalid(format!(
                "need 0 < sigma0 ≤ sigma_lower ≤ sigma_upper < 2, got {sigma0}, {sigma_lower}, {sigma_upper}"
            )));
        }
        Ok(WeakScalingCertificate {
            a,
            sigma_lower,
            sigma_upper,
            sigma0,
        })
    }
}

/// Logarithmically spaced radii used for sample-based certificate checks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RatioGrid {
    pub r_min: f64,
    pub r_max: f64,
    pub points: usize,
}

impl Default for RatioGrid {
    fn default() -> Self {
        RatioGrid {
            r_min: 1e-4,
            r_max: 1e4,
            points: 129,
        }
    }
}

impl RatioGrid {
    pub fn radii(&self) -> Vec<f64> {
        let (a, b) = (self.r_min.ln(), self.r_max.ln());
        (0..self.points)
            .map(|i| (a + (b - a) * i as f64 / (self.points - 1) as f64).exp())
            .collect()
    }

    fn validate(&self) -> Result<()> {
        if !(self.r_min > 0.0) || self.points < 2 {
            return Err(Error::invalid("ratio grid needs r_min > 0 and at least two points"));
        }
        if self.r_max / self.r_min < 1e6 * (1.0 - 1e-12) {
            return Err(Error::invalid(format!(
                "ratio grid must span at least six decades, spans {:.3}",
                (self.r_max / self.r_min).log10()
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScalingViolation {
    pub r: f64,
    pub big_r: f64,
    /// `true` for the lower bound `a⁻¹(R/r)^σ̲`, `false` for the upper one.
    pub lower_bound: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScalingReport {
    pub violations: Vec<ScalingViolation>,
    pub pairs_checked: usize,
    /// Extreme log-ratios `ln(φ(R)/φ(r))/ln(R/r)` over distinct pairs.
    pub empirical_sigma_lower: f64,
    pub empirical_sigma_upper: f64,
    /// Smallest `a` that makes the certificate's exponents hold on the grid.
    pub empirical_a: f64,
}

impl ScalingReport {
    pub fn certified(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks the weak-scaling inequalities on every pair `r ≤ R` of the grid.
pub fn check_weak_scaling(
    phi: &ScalingFunction,
    cert: &WeakScalingCertificate,
    grid: &RatioGrid,
) -> Result<ScalingReport> {
    grid.validate()?;
    let radii = grid.radii();
    let ln_phi: Vec<f64> = radii.iter().map(|&r| phi.ln_eval(r.ln())).collect::<Result<_>>()?;
    let ln_a = cert.a.ln();
    let mut violations = Vec::new();
    let mut s_lo = f64::INFINITY;
    let mut s_hi = f64::NEG_INFINITY;
    let mut ln_a_emp: f64 = 0.0;
    let mut pairs = 0;
    for i in 0..radii.len() {
        for j in i..radii.len() {
            pairs += 1;
            let lr = radii[j].ln() - radii[i].ln();
            let lp = ln_phi[j] - ln_phi[i];
            let slack = 1e-11 * (1.0 + lp.abs() + lr.abs());
            if lp < -ln_a + cert.sigma_lower * lr - slack {
                violations.push(ScalingViolation {
                    r: radii[i],
                    big_r: radii[j],
                    lower_bound: true,
                });
            }
            if lp > ln_a + cert.sigma_upper * lr + slack {
                violations.push(ScalingViolation {
                    r: radii[i],
                    big_r: radii[j],
                    lower_bound: false,
                });
            }
            ln_a_emp = ln_a_emp
                .max(cert.sigma_lower * lr - lp)
                .max(lp - cert.sigma_upper * lr);
            if j > i {
                let s = lp / lr;
                s_lo = s_lo.min(s);
                s_hi = s_hi.max(s);
            }
        }
    }
    Ok(ScalingReport {
        violations,
        pairs_checked: pairs,
        empirical_sigma_lower: s_lo,
        empirical_sigma_upper: s_hi,
        empirical_a: ln_a_emp.exp(),
    })
}

/// A moment with its enclosure half-width.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MomentValue {
    pub value: f64,
    pub error: f64,
    pub radius: f64,
}

impl MomentValue {
    pub fn estimate(&self) -> Estimate {
        Estimate::new(self.value, self.error)
    }
}

/// A scaling function together with the certificate it is used under.
#[derive(Debug, Clone, PartialEq)]
pub struct Kernel {
    pub phi: ScalingFunction,
    pub cert: WeakScalingCertificate,
}

impl Kernel {
    pub fn new(phi: ScalingFunction, cert: WeakScalingCertificate) -> Self {
        Kernel { phi, cert }
    }

    /// Uses the family's exact certificate; `sigma0` defaults to σ̲.
    pub fn natural(phi: ScalingFunction, sigma0: Option<f64>) -> Result<Self> {
        let cert = phi.natural_certificate(sigma0).ok_or_else(|| {
            Error::invalid(format!("{} needs an explicit certificate", phi.family_name()))
        })?;
        Ok(Kernel { phi, cert })
    }

    pub fn label(&self) -> String {
        self.phi.label()
    }

    pub fn phi(&self, r: f64) -> Result<f64> {
        self.phi.eval(r)
    }

    pub fn ln_phi(&self, t: f64) -> f64 {
        self.phi.ln_eval(t).unwrap_or(f64::NAN)
    }

    fn cert_and_slope<F>(&self, slopes: Option<(f64, f64)>, cert_bounds: F, a: f64) -> Option<Enclosure>
    where
        F: Fn(f64, f64, f64) -> Enclosure,
    {
        let c = self.cert;
        let mut enc = cert_bounds(a, c.sigma_lower, c.sigma_upper);
        if let Some((lo, hi)) = slopes {
            let s = cert_bounds(1.0, lo, hi);
            enc = Enclosure::new(enc.lo.max(s.lo), enc.hi.min(s.hi));
            if enc.lo > enc.hi {
                enc = s;
            }
        }
        Some(enc)
    }

    /// Encloses `∫₀^{e^t} ρ^{k-1}/φ(ρ) dρ` for `k > σ̄`.
    pub fn lower_tail_enclosure(&self, k: f64, t: f64) -> Option<Enclosure> {
        let ln_phi_t = self.phi.ln_eval(t).ok()?;
        let base = (k * t - ln_phi_t).exp();
        let slopes = self.phi.slope_range(f64::NEG_INFINITY, t);
        self.cert_and_slope(
            slopes,
            |a, lo, hi| Enclosure::new(base / (a * (k - lo)), a * base / (k - hi)),
            self.cert.a,
        )
    }

    /// Encloses `∫_{e^t}^∞ ρ^{-j-1}/φ(ρ) dρ` for `j ≥ 0`.
    pub fn upper_tail_enclosure(&self, j: f64, t: f64) -> Option<Enclosure> {
        let ln_phi_t = self.phi.ln_eval(t).ok()?;
        let base = (-j * t - ln_phi_t).exp();
        let slopes = self.phi.slope_range(t, f64::INFINITY);
        self.cert_and_slope(
            slopes,
            |a, lo, hi| Enclosure::new(base / (a * (j + hi)), a * base / (j + lo)),
            self.cert.a,
        )
    }

    /// `∫₀^R ρ^{k-1}/φ(ρ) dρ`; `k = 2` gives C̲(R).
    pub fn lower_power_integral(&self, k: f64, radius: f64, tol: f64) -> Result<MomentValue> {
        check_radius(radius)?;
        let top = radius.ln();
        let (floor, ceiling) = self.phi.ln_domain();
        if top > ceiling {
            self.phi.eval(radius)?;
        }
        let q = integrate_down(
            |t| ((k * t - self.ln_phi(t)).exp(), 0.0),
            top,
            floor,
            |t| self.lower_tail_enclosure(k, t),
            &TailOptions::rel(tol),
        );
        finish_moment(q, radius, tol, "lower moment")
    }

    /// `∫_R^∞ ρ^{-j-1}/φ(ρ) dρ`; `j = 0` gives C̄(R).
    pub fn upper_power_integral(&self, j: f64, radius: f64, tol: f64) -> Result<MomentValue> {
        check_radius(radius)?;
        let bottom = radius.ln();
        let (floor, ceiling) = self.phi.ln_domain();
        if bottom < floor {
            self.phi.eval(radius)?;
        }
        let q = integrate_up(
            |t| ((-j * t - self.ln_phi(t)).exp(), 0.0),
            bottom,
            ceiling,
            |t| self.upper_tail_enclosure(j, t),
            &TailOptions::rel(tol),
        );
        finish_moment(q, radius, tol, "upper moment")
    }

    /// C̲(R) = ∫₀ᴿ r/φ(r) dr.
    pub fn lower_moment(&self, radius: f64, tol: f64) -> Result<MomentValue> {
        self.lower_power_integral(2.0, radius, tol)
    }

    /// C̄(R) = ∫_R^∞ dr/(r φ(r)).
    pub fn upper_moment(&self, radius: f64, tol: f64) -> Result<MomentValue> {
        self.upper_power_integral(0.0, radius, tol)
    }

    /// C̲(R) as an [`Estimate`], with the default accuracy.
    pub fn lower(&self, radius: f64) -> Result<Estimate> {
        self.lower_moment(radius, DEFAULT_MOMENT_TOL).map(|m| m.estimate())
    }

    /// C̄(R) as an [`Estimate`], with the default accuracy.
    pub fn upper(&self, radius: f64) -> Result<Estimate> {
        self.upper_moment(radius, DEFAULT_MOMENT_TOL).map(|m| m.estimate())
    }
}

pub const DEFAULT_MOMENT_TOL: f64 = 1e-11;

fn check_radius(radius: f64) -> Result<()> {
    if radius > 0.0 && radius.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(format!("radius must be positive and finite, got {radius}")))
    }
}

fn finish_moment(q: crate::quad::Quadrature, radius: f64, tol: f64, what: &str) -> Result<MomentValue> {
    let est = q.estimate;
    if !est.value.is_finite() || est.error > tol * est.value.abs() * (1.0 + 1e-9) {
        return Err(Error::tolerance(format!("{what} at R = {radius}"), tol, est));
    }
    Ok(MomentValue {
        value: est.value,
        error: est.error,
        radius,
    })
}

/// Outcome of one inequality check, enclosure aware.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct InequalityCheck {
    pub name: &'static str,
    pub value: f64,
    pub error: f64,
    pub lower_bound: f64,
    pub upper_bound: f64,
    pub pass: bool,
}

impl InequalityCheck {
    fn new(name: &'static str, est: Estimate, lower_bound: f64, upper_bound: f64) -> Self {
        let slack = 1e-12 * est.value.abs();
        let pass = est.hi() + slack >= lower_bound && est.lo() - slack <= upper_bound;
        InequalityCheck {
            name,
            value: est.value,
            error: est.error,
            lower_bound,
            upper_bound,
            pass,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MomentInequalities {
    pub radius: f64,
    pub t: f64,
    pub lower: InequalityCheck,
    pub upper: InequalityCheck,
    pub ratio: InequalityCheck,
}

impl MomentInequalities {
    pub fn all_pass(&self) -> bool {
        self.lower.pass && self.upper.pass && self.ratio.pass
    }
}

/// The three moment bounds implied by the certificate:
/// `R²/(a(2-σ̲)φ(R)) ≤ C̲(R) ≤ aR²/((2-σ̄)φ(R))`,
/// `1/(aσ̄φ(R)) ≤ C̄(R) ≤ a/(σ̲φ(R))` and
/// `C̲(R)/C̲(tR) ≤ 1 + a² t^{σ̲-2}`.
pub fn moment_inequalities(kernel: &Kernel, radius: f64, t: f64, tol: f64) -> Result<MomentInequalities> {
    if !(t > 0.0 && t < 1.0) {
        return Err(Error::invalid(format!("t must lie in (0, 1), got {t}")));
    }
    let c = kernel.cert;
    let phi_r = kernel.phi(radius)?;
    let lower = kernel.lower_moment(radius, tol)?.estimate();
    let upper = kernel.upper_moment(radius, tol)?.estimate();
    let lower_t = kernel.lower_moment(t * radius, tol)?.estimate();
    let ratio = lower.times(lower_t.recip().ok_or_else(|| Error::invalid("C̲(tR) enclosure contains 0"))?);
    let r2 = radius * radius;
    Ok(MomentInequalities {
        radius,
        t,
        lower: InequalityCheck::new(
            "lower_moment_bracket",
            lower,
            r2 / (c.a * (2.0 - c.sigma_lower) * phi_r),
            c.a * r2 / ((2.0 - c.sigma_upper) * phi_r),
        ),
        upper: InequalityCheck::new(
            "upper_moment_bracket",
            upper,
            1.0 / (c.a * c.sigma_upper * phi_r),
            c.a / (c.sigma_lower * phi_r),
        ),
        ratio: InequalityCheck::new(
            "lower_moment_ratio",
            ratio,
            f64::NEG_INFINITY,
            1.0 + c.a * c.a * t.powf(c.sigma_lower - 2.0),
        ),
    })
}

/// Right-hand-side scale `(C̲ + C̄)R²/C̲(R)` of the regularity estimates, with
/// `C̲ = C̲(1)`, `C̄ = C̄(1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RhsScale {
    pub radius: f64,
    pub scale: f64,
    pub scale_error: f64,
    /// `(C̲(R) + C̄(R))R²/C̲(R)`, the same quantity with moments taken at R.
    pub at_radius: f64,
    /// `R² + 2a²/σ₀`, which bounds `at_radius` for every admissible φ.
    pub sigma0_bound: f64,
    /// `scale / sigma0_bound`: the kernel's empirical `C(n, a)`.
    pub implied_constant: f64,
    pub bound_holds: bool,
}

pub fn rhs_scale(kernel: &Kernel, radius: f64, tol: f64) -> Result<RhsScale> {
    let c1 = kernel.lower_moment(1.0, tol)?.estimate();
    let cb1 = kernel.upper_moment(1.0, tol)?.estimate();
    let cr = kernel.lower_moment(radius, tol)?.estimate();
    let cbr = kernel.upper_moment(radius, tol)?.estimate();
    let r2 = radius * radius;
    let inv = cr.recip().ok_or_else(|| Error::invalid("C̲(R) enclosure contains 0"))?;
    let scale = (c1 + cb1).times(inv) * r2;
    let at_radius = (cr + cbr).times(inv) * r2;
    let a = kernel.cert.a;
    let sigma0_bound = r2 + 2.0 * a * a / kernel.cert.sigma0;
    Ok(RhsScale {
        radius,
        scale: scale.value,
        scale_error: scale.error,
        at_radius: at_radius.value,
        sigma0_bound,
        implied_constant: scale.value / sigma0_bound,
        bound_holds: at_radius.lo() <= sigma0_bound * (1.0 + 1e-12),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn power(s: f64) -> Kernel {
        Kernel::natural(ScalingFunction::power(s).unwrap(), None).unwrap()
    }

    #[test]
    fn eval_examples() {
        assert_eq!(ScalingFunction::power(1.0).unwrap().eval(2.0).unwrap(), 2.0);
        assert_eq!(ScalingFunction::sum_powers(0.5, 1.5).unwrap().eval(1.0).unwrap(), 2.0);
        let v = ScalingFunction::log_lower(1.0, 1.5).unwrap().eval(1.0).unwrap();
        assert_relative_eq!(v, 1.095_957_302_446_792_3, max_relative = 1e-14);
    }

    #[test]
    fn eval_rejects_bad_radius_and_table_range() {
        let phi = ScalingFunction::power(1.0).unwrap();
        assert!(phi.eval(0.0).is_err());
        assert!(phi.eval(-1.0).is_err());
        let t = LogLogTable::from_pairs(&[(0.1, 0.1), (1.0, 1.0), (10.0, 10.0)]).unwrap();
        let phi = ScalingFunction::table(t);
        assert_relative_eq!(phi.eval(3.0).unwrap(), 3.0, max_relative = 1e-12);
        assert!(matches!(phi.eval(20.0), Err(Error::OutOfTable { .. })));
        assert!(matches!(phi.eval(0.01), Err(Error::OutOfTable { .. })));
    }

    #[test]
    fn ln_eval_is_consistent_far_out() {
        for phi in [
            ScalingFunction::sum_powers(0.5, 1.5).unwrap(),
            ScalingFunction::log_lower(1.0, 1.5).unwrap(),
            ScalingFunction::log_upper(0.5, 1.5).unwrap(),
        ] {
            for &r in &[1e-8f64, 1e-3, 0.7, 1.0, 3.0, 1e4, 1e9] {
                let direct = match &phi {
                    ScalingFunction::SumPowers { lower, upper } => r.powf(*lower) + r.powf(*upper),
                    ScalingFunction::LogLower { lower, upper } => {
                        r.powf(*lower) * r.powi(-2).ln_1p().powf(-(2.0 - upper) / 2.0)
                    }
                    ScalingFunction::LogUpper { lower, upper } => {
                        r.powf(*upper) * r.powi(-2).ln_1p().powf(lower / 2.0)
                    }
                    _ => unreachable!(),
                };
                assert_relative_eq!(phi.eval(r).unwrap(), direct, max_relative = 1e-12);
            }
        }
    }

    #[test]
    fn natural_certificates() {
        let c = ScalingFunction::log_lower(1.0, 1.5).unwrap().natural_certificate(None).unwrap();
        assert_eq!((c.a, c.sigma_lower), (1.0, 1.0));
        assert_relative_eq!(c.sigma_upper, 1.5, max_relative = 1e-12);
        let c = ScalingFunction::log_upper(0.5, 1.5).unwrap().natural_certificate(None).unwrap();
        assert_relative_eq!(c.sigma_lower, 1.0, max_relative = 1e-12);
        assert_eq!(c.sigma_upper, 1.5);
    }

    #[test]
    fn weak_scaling_examples() {
        let grid = RatioGrid::default();
        let phi = ScalingFunction::power(1.0).unwrap();
        let cert = WeakScalingCertificate::new(1.0, 1.0, 1.0, 1.0).unwrap();
        assert!(check_weak_scaling(&phi, &cert, &grid).unwrap().certified());

        let phi = ScalingFunction::sum_powers(0.5, 1.5).unwrap();
        let cert = WeakScalingCertificate::new(1.0, 0.5, 1.5, 0.5).unwrap();
        let rep = check_weak_scaling(&phi, &cert, &grid).unwrap();
        assert!(rep.certified());
        assert!(rep.empirical_sigma_lower >= 0.5 && rep.empirical_sigma_upper <= 1.5);

        // exponent mismatch: every pair with R > r breaks the lower bound
        let phi = ScalingFunction::power(1.0).unwrap();
        let cert = WeakScalingCertificate::new(1.0, 1.2, 1.5, 1.0).unwrap();
        let rep = check_weak_scaling(&phi, &cert, &grid).unwrap();
        let distinct = grid.points * (grid.points - 1) / 2;
        assert_eq!(rep.violations.len(), distinct);
        assert!(rep.violations.iter().all(|v| v.lower_bound && v.big_r > v.r));
    }

    #[test]
    fn grid_must_span_six_decades() {
        let phi = ScalingFunction::power(1.0).unwrap();
        let cert = WeakScalingCertificate::new(1.0, 1.0, 1.0, 1.0).unwrap();
        let grid = RatioGrid {
            r_min: 1.0,
            r_max: 10.0,
            points: 64,
        };
        assert!(check_weak_scaling(&phi, &cert, &grid).is_err());
    }

    #[test]
    fn power_moments_closed_forms() {
        let m = power(1.0).lower_moment(1.0, 1e-12).unwrap();
        assert_relative_eq!(m.value, 1.0, max_relative = 1e-12);
        let m = power(0.5).lower_moment(2.0, 1e-12).unwrap();
        assert_relative_eq!(m.value, 2f64.powf(1.5) / 1.5, max_relative = 1e-12);
        assert!((m.value - 1.885_618_083_164_126_7).abs() <= m.error + 1e-15);
        let m = power(1.0).upper_moment(1.0, 1e-12).unwrap();
        assert_relative_eq!(m.value, 1.0, max_relative = 1e-12);
        let m = power(0.5).upper_moment(4.0, 1e-12).unwrap();
        assert_relative_eq!(m.value, 1.0, max_relative = 1e-12);
        let m = power(1.9).upper_moment(1.0, 1e-12).unwrap();
        assert_relative_eq!(m.value, 1.0 / 1.9, max_relative = 1e-12);
    }

    #[test]
    fn extreme_exponents() {
        let s = 2.0 - 2f64.powi(-12);
        let m = power(s).lower_moment(0.5, 1e-10).unwrap();
        assert_relative_eq!(m.value, 0.5f64.powf(2.0 - s) / (2.0 - s), max_relative = 1e-10);
        let s = 2f64.powi(-12);
        let m = power(s).upper_moment(3.0, 1e-10).unwrap();
        assert_relative_eq!(m.value, 3f64.powf(-s) / s, max_relative = 1e-10);
    }

    #[test]
    fn sum_powers_moment_matches_brute_force() {
        // fine-mesh midpoint oracle after the substitution r = u^{4}, which
        // removes the endpoint singularity of r^{1-σ}
        let k = Kernel::natural(ScalingFunction::sum_powers(0.5, 1.5).unwrap(), None).unwrap();
        let m = k.lower_moment(1.0, 1e-12).unwrap();
        let n = 200_000;
        let mut s = 0.0;
        for i in 0..n {
            let u = (i as f64 + 0.5) / n as f64;
            let r = u.powi(4);
            s += r / (r.sqrt() + r.powf(1.5)) * 4.0 * u.powi(3);
        }
        s /= n as f64;
        assert!((m.value - s).abs() < 1e-8, "{} vs {}", m.value, s);
        // bracket from the certificate: [1/(a(2-σ̲)φ(1)), a/((2-σ̄)φ(1))] = [1/3, 1]
        assert!(m.value > 1.0 / 3.0 && m.value < 1.0);
    }

    #[test]
    fn table_moments_use_certificate_outside_range() {
        let pairs: Vec<(f64, f64)> = (-40..=40)
            .map(|i| {
                let r = 10f64.powf(i as f64 / 10.0);
                (r, r)
            })
            .collect();
        let phi = ScalingFunction::table(LogLogTable::from_pairs(&pairs).unwrap());
        let cert = WeakScalingCertificate::new(1.0, 1.0, 1.0, 1.0).unwrap();
        let k = Kernel::new(phi, cert);
        let m = k.lower_moment(1.0, 1e-9).unwrap();
        assert_relative_eq!(m.value, 1.0, max_relative = 1e-9);
        // a loose certificate cannot reach a tight tolerance
        let loose = Kernel::new(k.phi.clone(), WeakScalingCertificate::new(2.0, 0.5, 1.5, 0.5).unwrap());
        assert!(matches!(loose.upper_moment(1.0, 1e-12), Err(Error::Tolerance { .. })));
    }

    #[test]
    fn inequality_examples() {
        let rep = moment_inequalities(&power(1.0), 1.0, 0.5, 1e-12).unwrap();
        assert!(rep.all_pass());
        // C̲(1)/C̲(0.5) = 1/0.5 = 2 ≤ 3
        assert_relative_eq!(rep.ratio.value, 2.0, max_relative = 1e-10);
        assert_relative_eq!(rep.ratio.upper_bound, 3.0, max_relative = 1e-14);
        let rep = moment_inequalities(&power(1.5), 1.0, 0.5, 1e-12).unwrap();
        assert!(rep.upper.pass);
        assert_relative_eq!(rep.upper.lower_bound, 1.0 / 1.5, max_relative = 1e-14);
        assert_relative_eq!(rep.upper.upper_bound, 1.0 / 1.5, max_relative = 1e-14);
        let k = Kernel::natural(ScalingFunction::sum_powers(0.5, 1.5).unwrap(), None).unwrap();
        assert!(moment_inequalities(&k, 1.0, 0.1, 1e-12).unwrap().all_pass());
    }

    #[test]
    fn rhs_scale_examples() {
        let s = rhs_scale(&power(1.0), 1.0, 1e-12).unwrap();
        assert_relative_eq!(s.scale, 2.0, max_relative = 1e-10);
        let s = rhs_scale(&power(1.0), 2.0, 1e-12).unwrap();
        assert_relative_eq!(s.scale, 4.0, max_relative = 1e-10);
        assert!(s.bound_holds);
        let s = rhs_scale(&power(0.5), 1.0, 1e-12).unwrap();
        assert_relative_eq!(s.scale, 4.0, max_relative = 1e-10);
        // fractional case (2/σ)R^σ
        let s = rhs_scale(&power(0.7), 3.0, 1e-12).unwrap();
        assert_relative_eq!(s.scale, 2.0 / 0.7 * 3f64.powf(0.7), max_relative = 1e-10);
    }
}
