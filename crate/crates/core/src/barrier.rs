//! The power-decay subsolution `Φ₁ = min{(κ₀R)^{-p}, |x|^{-p}}`, the capped
//! barrier built from it, and the search for a working `κ₀`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::functions::{FarField, PointFunction};
use crate::kernel::Kernel;
use crate::operator::{ExtremalParams, Operator, OperatorOptions, OperatorValue};
use crate::quad::{adaptive, adaptive_with_err, uniform_points, QuadOptions};
use crate::special::sphere_area;

/// Offset keeping `p` strictly above `n + 1`.
pub const P_OFFSET: f64 = 1e-9;
/// Radii sampled in `[κ₁R, R)`.
pub const SAMPLE_RADII: usize = 32;
/// Number of halvings tried below `κ₁/16`.
pub const MAX_HALVINGS: usize = 24;

fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

fn rising(a: f64, k: usize) -> f64 {
    (0..k).map(|i| a + i as f64).product()
}

/// Smallest exponent with `p > n + 1` and `(p+2)(λ/2)c_n ≥ Λ|∂B₁|`,
/// where `c_n = |∂B₁|/n`.
pub fn select_p(n: usize, lambda: f64, big_lambda: f64) -> Result<f64> {
    ExtremalParams::new(lambda, big_lambda)?;
    if n == 0 {
        return Err(Error::invalid("dimension must be positive"));
    }
    let n = n as f64;
    Ok((n + 1.0 + P_OFFSET).max(2.0 * n * big_lambda / lambda - 2.0))
}

/// `(p+2)(λ/2)c_n - Λ|∂B₁|`.
pub fn sphere_margin(n: usize, lambda: f64, big_lambda: f64, p: f64) -> f64 {
    let area = sphere_area(n);
    (p + 2.0) * 0.5 * lambda * area / n as f64 - big_lambda * area
}

/// `ρ₀ = 2⁻⁸/n`.
pub fn rho0(n: usize) -> f64 {
    1.0 / (256.0 * n as f64)
}

/// `r_k = ρ₀ 2^{-1/(2-σ̲)-k} R`.
pub fn r_k(n: usize, sigma_lower: f64, radius: f64, k: u32) -> f64 {
    rho0(n) * 2f64.powf(-1.0 / (2.0 - sigma_lower) - k as f64) * radius
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BarrierParams {
    pub n: usize,
    pub lambda: f64,
    #[serde(rename = "Lambda")]
    pub big_lambda: f64,
    #[serde(rename = "R")]
    pub radius: f64,
    pub kappa1: f64,
    pub p: f64,
    pub kappa0: f64,
    pub sigma0: f64,
    pub rho0: f64,
}

impl BarrierParams {
    pub fn new(
        n: usize,
        ext: ExtremalParams,
        radius: f64,
        kappa1: f64,
        p: f64,
        kappa0: f64,
        sigma0: f64,
    ) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::invalid(format!("R must be positive, got {radius}")));
        }
        if !(kappa1 > 0.0 && kappa1 < 1.0) {
            return Err(Error::invalid(format!("κ₁ must lie in (0,1), got {kappa1}")));
        }
        if !(p > n as f64 + 1.0) {
            return Err(Error::invalid(format!("p = {p} must exceed n + 1 = {}", n + 1)));
        }
        if sphere_margin(n, ext.lambda, ext.big_lambda, p) < -1e-12 {
            return Err(Error::invalid(format!("p = {p} violates the sphere condition")));
        }
        if !(kappa0 > 0.0 && kappa0 < kappa1 / 8.0) {
            return Err(Error::invalid(format!("κ₀ must lie in (0, κ₁/8), got {kappa0}")));
        }
        if !(sigma0 > 0.0 && sigma0 < 2.0) {
            return Err(Error::invalid(format!("σ₀ must lie in (0,2), got {sigma0}")));
        }
        Ok(BarrierParams {
            n,
            lambda: ext.lambda,
            big_lambda: ext.big_lambda,
            radius,
            kappa1,
            p,
            kappa0,
            sigma0,
            rho0: rho0(n),
        })
    }
}

/// `Φ₁(x) = min{(κ₀R)^{-p}, |x|^{-p}}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Phi1 {
    pub n: usize,
    pub p: f64,
    /// `κ₀R`.
    pub cap_radius: f64,
    /// Radius beyond the query point where only a range is used.
    pub reach: f64,
}

impl Phi1 {
    pub fn new(n: usize, p: f64, kappa0: f64, radius: f64) -> Self {
        Phi1 {
            n,
            p,
            cap_radius: kappa0 * radius,
            reach: 16.0 * radius,
        }
    }

    pub fn radial(&self, r: f64) -> f64 {
        r.max(self.cap_radius).powf(-self.p)
    }
}

impl PointFunction for Phi1 {
    fn dim(&self) -> usize {
        self.n
    }
    fn value(&self, x: &[f64]) -> f64 {
        self.radial(norm(x))
    }
    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        let r = norm(x);
        if r <= self.cap_radius {
            return vec![0.0; x.len()];
        }
        let c = -self.p * r.powf(-self.p - 2.0);
        x.iter().map(|v| c * v).collect()
    }
    fn hessian(&self, x: &[f64]) -> Vec<f64> {
        let n = self.n;
        let r = norm(x);
        let mut h = vec![0.0; n * n];
        if r <= self.cap_radius {
            return h;
        }
        let c = self.p * r.powf(-self.p - 2.0);
        for i in 0..n {
            for j in 0..n {
                let id = if i == j { 1.0 } else { 0.0 };
                h[i * n + j] = c * ((self.p + 2.0) * x[i] * x[j] / (r * r) - id);
            }
        }
        h
    }
    fn sup_norm(&self) -> f64 {
        self.cap_radius.powf(-self.p)
    }
    fn residual_bound(&self, x: &[f64], eps: f64) -> Option<f64> {
        let r = norm(x);
        if r - eps > self.cap_radius {
            // fourth directional derivative of |z|^{-p} is at most (p)⁽⁴⁾|z|^{-p-4}
            Some(rising(self.p, 4) * (r - eps).powf(-self.p - 4.0) / 12.0)
        } else if r + eps < self.cap_radius {
            Some(0.0)
        } else {
            None
        }
    }
    fn far_radius(&self, x: &[f64]) -> f64 {
        norm(x) + self.reach
    }
    fn far_field(&self, x: &[f64], radius: f64) -> FarField {
        let d = (radius - norm(x)).max(self.cap_radius);
        FarField::Range {
            lo: 0.0,
            hi: d.powf(-self.p),
        }
    }
    fn radial_breakpoints(&self, x: &[f64]) -> Vec<f64> {
        let r = norm(x);
        vec![(r - self.cap_radius).abs(), r + self.cap_radius]
    }
    fn scale(&self) -> f64 {
        self.cap_radius
    }
    fn name(&self) -> String {
        format!("phi1(p={},cap={})", self.p, self.cap_radius)
    }
}

/// `C_φ λ ∫ δ(Φ₁, x, y)/(|y|ⁿφ(|y|)) dy` over the two balls `B_{R₀/2}(±x)`
/// around the poles of `y ↦ Φ₁(x ∓ y)`, with `x = R₀e₁`.
pub fn pole_contribution(op: &Operator, phi1: &Phi1, r0: f64, lambda: f64, tol: f64) -> Result<f64> {
    let n = op.n;
    let kernel = op.kernel;
    let mut x = vec![0.0; n];
    x[0] = r0;
    let ux = phi1.radial(r0);
    // y = x + s·(cos a, sin a, 0); δ depends on s and a only
    let delta = |s: f64, a: f64| -> f64 {
        let (c, sn) = (a.cos(), a.sin());
        let plus = ((2.0 * r0 + s * c).powi(2) + (s * sn).powi(2)).sqrt();
        let y = ((r0 + s * c).powi(2) + (s * sn).powi(2)).sqrt();
        let d = phi1.radial(plus) + phi1.radial(s) - 2.0 * ux;
        d.max(0.0) / (y.powi(n as i32) * kernel.ln_phi(y.ln()).exp())
    };
    let half = 0.5 * r0;
    let mut s_points = vec![0.0];
    if phi1.cap_radius < half {
        s_points.push(phi1.cap_radius);
    }
    s_points.push(half);
    let opts = QuadOptions::rel(tol).with_max_panels(2000);
    let total = match n {
        1 => {
            let q = adaptive(|s| delta(s, 0.0) + delta(s, std::f64::consts::PI), &s_points, &opts);
            q.value()
        }
        2 | 3 => {
            let q = adaptive_with_err(
                |s| {
                    let inner = adaptive(
                        |a| {
                            let w = if n == 2 { 2.0 * s } else { 2.0 * std::f64::consts::PI * s * s * a.sin() };
                            w * delta(s, a)
                        },
                        &uniform_points(0.0, std::f64::consts::PI, 8),
                        &QuadOptions::rel(0.1 * tol).with_max_panels(400),
                    );
                    (inner.value(), inner.error())
                },
                &s_points,
                &opts,
            );
            q.value()
        }
        _ => {
            return Err(Error::invalid(format!("pole contribution supports n ≤ 3, got {n}")));
        }
    };
    Ok(2.0 * op.cphi.value * lambda * total)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EvidenceRow {
    #[serde(rename = "R0")]
    pub r0: f64,
    #[serde(rename = "Mminus")]
    pub m_minus: f64,
    pub err: f64,
    #[serde(rename = "I1")]
    pub i1: f64,
    #[serde(rename = "I2plusI3")]
    pub i2_plus_i3: f64,
}

impl EvidenceRow {
    pub fn accepted(&self) -> bool {
        self.m_minus + self.err >= 0.0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KappaAttempt {
    pub kappa0: f64,
    pub min_margin: f64,
    pub accepted: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KappaSearch {
    pub p: f64,
    pub kappa0: f64,
    pub kappa1: f64,
    pub radius: f64,
    pub attempts: Vec<KappaAttempt>,
    pub evidence: Vec<EvidenceRow>,
    /// The evidence recomputed at a quarter of the tolerance.
    pub refined: Vec<EvidenceRow>,
    pub mesh_stable: bool,
}

/// `M⁻Φ₁(R₀e₁)` together with the split into the pole balls and the rest.
pub fn evidence_row(op: &Operator, ext: &ExtremalParams, phi1: &Phi1, r0: f64, tol: f64) -> Result<EvidenceRow> {
    let mut x = vec![0.0; op.n];
    x[0] = r0;
    let v: OperatorValue = op.pucci_minus(phi1, &x, ext)?;
    let i1 = pole_contribution(op, phi1, r0, ext.lambda, tol)?;
    Ok(EvidenceRow {
        r0,
        m_minus: v.value,
        err: v.error,
        i1,
        i2_plus_i3: v.value - i1,
    })
}

/// Sample radii `κ₁R ≤ R₀ < R`, geometrically spaced.
pub fn sample_radii(kappa1: f64, radius: f64, count: usize) -> Vec<f64> {
    let lo = (kappa1 * radius).ln();
    let hi = radius.ln();
    (0..count)
        .map(|i| (lo + (hi - lo) * i as f64 / count as f64).exp())
        .collect()
}

fn evidence(op: &Operator, ext: &ExtremalParams, phi1: &Phi1, radii: &[f64], tol: f64) -> Result<Vec<EvidenceRow>> {
    radii.iter().map(|&r0| evidence_row(op, ext, phi1, r0, tol)).collect()
}

/// Halves `κ₀` from `κ₁/16` until `M⁻Φ₁ ≥ -enclosure` at every sampled
/// radius, then repeats the accepted table at `tol/4`.
pub fn find_kappa0(
    kernel: &Kernel,
    n: usize,
    ext: &ExtremalParams,
    kappa1: f64,
    radius: f64,
    p: f64,
    tol: f64,
) -> Result<KappaSearch> {
    if !(kappa1 > 0.0 && kappa1 < 1.0) {
        return Err(Error::invalid(format!("κ₁ must lie in (0,1), got {kappa1}")));
    }
    if !(p > n as f64 + 1.0) {
        return Err(Error::invalid(format!("p = {p} must exceed n + 1")));
    }
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(Error::invalid(format!("R must be positive, got {radius}")));
    }
    let opts = OperatorOptions {
        tol,
        ..Default::default()
    };
    let op = Operator::new(kernel, n, opts)?;
    let fine_op = Operator::with_cphi(
        kernel,
        op.cphi.clone(),
        OperatorOptions {
            tol: 0.25 * tol,
            ..opts
        },
    )?;
    let radii = sample_radii(kappa1, radius, SAMPLE_RADII);
    let mut attempts = Vec::new();
    let mut best: Option<(f64, Vec<EvidenceRow>)> = None;
    let mut kappa0 = kappa1 / 16.0;
    for _ in 0..MAX_HALVINGS {
        let phi1 = Phi1::new(n, p, kappa0, radius);
        let rows = evidence(&op, ext, &phi1, &radii, tol)?;
        let min_margin = rows
            .iter()
            .map(|r| r.m_minus + r.err)
            .fold(f64::INFINITY, f64::min);
        let accepted = min_margin >= 0.0;
        attempts.push(KappaAttempt {
            kappa0,
            min_margin,
            accepted,
        });
        if accepted {
            let refined = evidence(&fine_op, ext, &phi1, &radii, 0.25 * tol)?;
            let mesh_stable = rows
                .iter()
                .zip(&refined)
                .all(|(a, b)| a.m_minus.signum() == b.m_minus.signum() && b.accepted());
            return Ok(KappaSearch {
                p,
                kappa0,
                kappa1,
                radius,
                attempts,
                evidence: rows,
                refined,
                mesh_stable,
            });
        }
        if best.as_ref().is_none_or(|(m, _)| min_margin > *m) {
            best = Some((min_margin, rows));
        }
        kappa0 *= 0.5;
    }
    let (margin, rows) = best.expect("at least one attempt");
    let worst = rows
        .iter()
        .min_by(|a, b| (a.m_minus + a.err).total_cmp(&(b.m_minus + b.err)))
        .expect("nonempty");
    Err(Error::Verification(format!(
        "no κ₀ down to {:e} makes M⁻Φ₁ nonnegative; best margin {margin:e} at R₀ = {} (I1 = {:e}, I2+I3 = {:e})",
        kappa0 * 2.0,
        worst.r0,
        worst.i1,
        worst.i2_plus_i3
    )))
}

/// `Φ = c₀·P` on `B_{κ₀R}`, `c₀(κ₀R)^p(|x|^{-p} - R^{-p})` on
/// `B_R ∖ B_{κ₀R}` and `0` outside `B_R`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CappedBarrier {
    pub p: f64,
    pub kappa0: f64,
    #[serde(rename = "R")]
    pub radius: f64,
    pub c0: f64,
    pub a: f64,
    pub b: f64,
}

impl CappedBarrier {
    pub fn new(p: f64, kappa0: f64, radius: f64) -> Result<Self> {
        if !(p > 0.0 && kappa0 > 0.0 && kappa0 < 1.0 && radius > 0.0) {
            return Err(Error::invalid(format!(
                "capped barrier needs p > 0, 0 < κ₀ < 1, R > 0 (got {p}, {kappa0}, {radius})"
            )));
        }
        let c0 = 2.0 / (kappa0.powf(p) * ((4.0f64 / 3.0).powf(p) - 1.0));
        let cap = kappa0 * radius;
        Ok(CappedBarrier {
            p,
            kappa0,
            radius,
            c0,
            a: 0.5 * p / (cap * cap),
            b: 1.0 - kappa0.powf(p) + 0.5 * p,
        })
    }

    pub fn from_params(params: &BarrierParams) -> Result<Self> {
        CappedBarrier::new(params.p, params.kappa0, params.radius)
    }

    fn cap_radius(&self) -> f64 {
        self.kappa0 * self.radius
    }

    /// The three pieces as functions of `r = |x|`, without the `c₀` factor.
    pub fn inner_piece(&self, r: f64) -> f64 {
        -self.a * r * r + self.b
    }

    pub fn outer_piece(&self, r: f64) -> f64 {
        self.cap_radius().powf(self.p) * (r.powf(-self.p) - self.radius.powf(-self.p))
    }

    pub fn radial(&self, r: f64) -> f64 {
        if r < self.cap_radius() {
            self.c0 * self.inner_piece(r)
        } else if r < self.radius {
            self.c0 * self.outer_piece(r)
        } else {
            0.0
        }
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        self.radial(norm(x))
    }

    /// Radial slopes of the inner and outer pieces at `κ₀R`.
    pub fn seam_slopes(&self) -> (f64, f64) {
        let r = self.cap_radius();
        let inner = -2.0 * self.a * r;
        let outer = -self.p * self.cap_radius().powf(self.p) * r.powf(-self.p - 1.0);
        (self.c0 * inner, self.c0 * outer)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CappedReport {
    pub seam_value_inner: f64,
    pub seam_value_outer: f64,
    pub seam_value_rel: f64,
    pub seam_slope_inner: f64,
    pub seam_slope_outer: f64,
    pub seam_slope_rel: f64,
    pub value_at_three_quarters: f64,
    pub min_on_three_quarter_ball: f64,
    pub max_outside: f64,
    pub inherited_samples: usize,
    pub inherited_worst: f64,
    pub passed: bool,
}

/// Evaluation checks of the capped barrier on deterministic samples in
/// dimension `n`.
pub fn verify_capped(phi: &CappedBarrier, n: usize) -> Result<CappedReport> {
    if n == 0 {
        return Err(Error::invalid("dimension must be positive"));
    }
    let cap = phi.cap_radius();
    let rel = |a: f64, b: f64| (a - b).abs() / a.abs().max(b.abs()).max(f64::MIN_POSITIVE);
    let seam_value_inner = phi.c0 * phi.inner_piece(cap);
    let seam_value_outer = phi.c0 * phi.outer_piece(cap);
    let (seam_slope_inner, seam_slope_outer) = phi.seam_slopes();

    let big_r = phi.radius;
    let mut min_inside = f64::INFINITY;
    let mut max_outside: f64 = 0.0;
    let steps = 400;
    for i in 0..=steps {
        let r = 0.75 * big_r * i as f64 / steps as f64;
        let mut x = vec![0.0; n];
        x[0] = r;
        min_inside = min_inside.min(phi.value(&x));
        let mut z = vec![0.0; n];
        z[n - 1] = big_r * (1.0 + 3.0 * i as f64 / steps as f64);
        max_outside = max_outside.max(phi.value(&z).abs());
    }

    // δ(Φ,x,y) ≥ c₀(κ₀R)^p δ(Φ₁,x,y) for x in the annulus
    let phi1 = Phi1::new(n, phi.p, phi.kappa0, big_r);
    let scale = phi.c0 * cap.powf(phi.p);
    let mut worst = f64::INFINITY;
    let mut samples = 0;
    let xs = 24;
    let ys = 48;
    for i in 0..xs {
        let r = cap * (big_r / cap).powf((i as f64 + 0.5) / xs as f64);
        let mut x = vec![0.0; n];
        x[0] = r;
        for j in 0..ys {
            let s = 2.5 * big_r * (j as f64 + 0.5) / ys as f64;
            for k in 0..6 {
                let a = std::f64::consts::PI * k as f64 / 5.0;
                let mut y = vec![0.0; n];
                y[0] = s * a.cos();
                if n > 1 {
                    y[1] = s * a.sin();
                } else if k > 0 {
                    continue;
                }
                let xp: Vec<f64> = x.iter().zip(&y).map(|(a, b)| a + b).collect();
                let xm: Vec<f64> = x.iter().zip(&y).map(|(a, b)| a - b).collect();
                let d = phi.value(&xp) + phi.value(&xm) - 2.0 * phi.value(&x);
                let d1 = phi1.value(&xp) + phi1.value(&xm) - 2.0 * phi1.value(&x);
                worst = worst.min(d - scale * d1);
                samples += 1;
            }
        }
    }
    let slack = 1e-12 * phi.c0 * phi.b;
    let report = CappedReport {
        seam_value_inner,
        seam_value_outer,
        seam_value_rel: rel(seam_value_inner, seam_value_outer),
        seam_slope_inner,
        seam_slope_outer,
        seam_slope_rel: rel(seam_slope_inner, seam_slope_outer),
        value_at_three_quarters: phi.radial(0.75 * big_r),
        min_on_three_quarter_ball: min_inside,
        max_outside,
        inherited_samples: samples,
        inherited_worst: worst,
        passed: false,
    };
    let passed = report.seam_value_rel <= 1e-10
        && report.seam_slope_rel <= 1e-10
        && report.min_on_three_quarter_ball >= 2.0 * (1.0 - 1e-12)
        && report.max_outside == 0.0
        && report.inherited_worst >= -slack;
    Ok(CappedReport { passed, ..report })
}
