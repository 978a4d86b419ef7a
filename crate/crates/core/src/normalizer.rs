//! The normalising constant
//!
//! ```text
//!   C_φ⁻¹ = ∫_{ℝⁿ} (1 - cos y₁)/(|y|ⁿ φ(|y|)) dy
//! ```
//!
//! by a spherical route (radial integral of the angular mean of `1 - cos`)
//! and by the gnomonic reduction
//! `C_φ⁻¹ = ∫_{ℝⁿ⁻¹} H(ζ) ζ⁻ⁿ dy′` with `ζ = (1 + |y′|²)^{1/2}` and
//! `H(ζ) = ∫_ℝ (1 - cos(r/ζ))/(|r|φ(|r|)) dr`.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::kernel::Kernel;
use crate::quad::{
    adaptive, adaptive_with_err, integrate_down, integrate_up, oscillatory_tail, Enclosure, Estimate,
    QuadOptions, TailOptions,
};
use crate::special::{ball_volume, gamma, sphere_area, AngularWeight};

pub const DEFAULT_TOL: f64 = 1e-9;
const MAX_REDUCED_DIM: usize = 5;
const TAIL_SEGMENTS: usize = 48;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    DirectSpherical,
    ZetaReduced,
    ClosedFormPower,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::DirectSpherical => "direct-spherical",
            Method::ZetaReduced => "zeta-reduced",
            Method::ClosedFormPower => "closed-form-power",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NormalizationResult {
    pub value: f64,
    pub error: f64,
    pub method: Method,
    pub n: usize,
}

impl NormalizationResult {
    pub fn estimate(&self) -> Estimate {
        Estimate::new(self.value, self.error)
    }

    pub fn agrees_with(&self, other: &NormalizationResult) -> bool {
        (self.value - other.value).abs() <= self.error + other.error
    }
}

fn check_dim(n: usize) -> Result<()> {
    if n == 0 {
        Err(Error::invalid("dimension must be at least 1"))
    } else {
        Ok(())
    }
}

/// `C(n, σ) = 2^σ Γ((n+σ)/2) / (π^{n/2} |Γ(-σ/2)|)`.
pub fn cphi_power_closed_form(n: usize, sigma: f64) -> Result<f64> {
    check_dim(n)?;
    if !(sigma > 0.0 && sigma < 2.0) {
        return Err(Error::invalid(format!("sigma must lie in (0, 2), got {sigma}")));
    }
    let nf = n as f64;
    Ok(2f64.powf(sigma) * gamma((nf + sigma) / 2.0) / (PI.powf(nf / 2.0) * gamma(-sigma / 2.0).abs()))
}

fn finish(inverse: Estimate, n: usize, method: Method, tol: f64) -> Result<NormalizationResult> {
    let c = inverse
        .recip()
        .ok_or_else(|| Error::tolerance("C_φ⁻¹ enclosure contains 0", tol, inverse))?;
    if !(c.error <= tol * c.value) {
        return Err(Error::tolerance(format!("C_φ ({})", method.as_str()), tol, c));
    }
    Ok(NormalizationResult {
        value: c.value,
        error: c.error,
        method,
        n,
    })
}

/// Spherical route: `C_φ⁻¹ = |S^{n-1}| ∫₀^∞ (1 - m_n(r))/(r φ(r)) dr` where
/// `m_n` is the spherical mean of `cos(r θ₁)`.
pub fn cphi_direct(kernel: &Kernel, n: usize, tol: f64) -> Result<NormalizationResult> {
    let inv = inverse_direct(kernel, n, tol)?;
    finish(inv, n, Method::DirectSpherical, tol)
}

/// `C_φ⁻¹` by the spherical route.
pub fn inverse_direct(kernel: &Kernel, n: usize, tol: f64) -> Result<Estimate> {
    check_dim(n)?;
    let j = radial_symbol_integral(kernel, AngularWeight::new(n), 0.0, 0.25 * tol)?;
    Ok(j * sphere_area(n))
}

/// `∫₀^∞ (1 - m(s))/(s φ(e^{shift} s)) ds`.
fn radial_symbol_integral(
    kernel: &Kernel,
    weight: AngularWeight,
    shift: f64,
    tol: f64,
) -> Result<Estimate> {
    let n = weight.dim() as f64;
    let (dom_lo, dom_hi) = kernel.phi.ln_domain();
    let inv_phi = |t: f64| (-kernel.ln_phi(t + shift)).exp();
    let split = 0.0;
    if split + shift < dom_lo || split + shift > dom_hi {
        kernel.phi.eval((split + shift).exp())?;
    }

    // (0, 1]: 1 - m(s) = s²/(2n) - s⁴/(8n(n+2)) + … with alternating,
    // decreasing terms, which brackets the cut-off part.
    let inner = integrate_down(
        |t| ((ln_one_minus_mean_cos(&weight, t) - kernel.ln_phi(t + shift)).exp(), 0.0),
        split,
        dom_lo - shift,
        |t| {
            let l2 = kernel.lower_tail_enclosure(2.0, t + shift)?;
            let l4 = kernel.lower_tail_enclosure(4.0, t + shift)?;
            let s2 = (-2.0 * shift).exp();
            let s4 = (-4.0 * shift).exp();
            Some(Enclosure::new(
                (l2.lo * s2 / (2.0 * n) - l4.hi * s4 / (8.0 * n * (n + 2.0))).max(0.0),
                l2.hi * s2 / (2.0 * n),
            ))
        },
        &TailOptions::rel(0.2 * tol),
    );
    let inner = inner.require("symbol integral near the origin", 0.2 * tol)?;

    // [1, X] between consecutive asymptotic zeros of the angular mean.
    let phase = (n - 1.0) / 4.0;
    let mut points = vec![1.0];
    let mut k = 0.0;
    loop {
        let z = (k + 0.5 + phase) * PI;
        if z > 1.0 + 1e-3 {
            points.push(z);
        }
        if z >= 10.0 * PI {
            break;
        }
        k += 1.0;
    }
    let mut x_cut = *points.last().unwrap();
    let table_top = (dom_hi - shift).exp();
    let mut clipped = false;
    if x_cut > table_top {
        points.retain(|&p| p < table_top);
        points.push(table_top);
        x_cut = table_top;
        clipped = true;
    }
    let middle = adaptive_with_err(
        |r| (weight.one_minus_mean_cos(r) / r * inv_phi(r.ln()), 0.0),
        &points,
        &QuadOptions::rel(0.05 * tol).with_abs(0.05 * tol * inner.value),
    )
    .require("symbol integral on the middle range", tol)?;

    let outer = if clipped {
        // no information beyond the table: 0 ≤ 1 - m ≤ 2
        let cb = kernel
            .upper_tail_enclosure(0.0, x_cut.ln() + shift)
            .ok_or_else(|| Error::invalid("no tail enclosure at the end of the table"))?;
        Enclosure::new(0.0, 2.0 * cb.hi).to_estimate()
    } else {
        let cbar = kernel.upper_moment(x_cut * shift.exp(), 0.2 * tol)?.estimate();
        let osc = oscillatory_tail(
            |r| (weight.mean_cos(r) / r * inv_phi(r.ln()), 0.0),
            x_cut,
            PI,
            TAIL_SEGMENTS,
        );
        cbar - osc
    };
    Ok(inner + middle + outer)
}

/// `∫_R^∞ (1 - m_n(k r))/(r φ(r)) dr`, the part of the cosine symbol beyond
/// `R`. `R` should sit near a zero of `m_n(k ·)` so that the segments of the
/// oscillatory remainder alternate.
pub fn cosine_tail(kernel: &Kernel, n: usize, frequency: f64, radius: f64, tol: f64) -> Result<Estimate> {
    check_dim(n)?;
    let weight = AngularWeight::new(n);
    let cbar = kernel.upper_moment(radius, tol)?.estimate();
    let osc = oscillatory_tail(
        |r| (weight.mean_cos(frequency * r) / r * (-kernel.ln_phi(r.ln())).exp(), 0.0),
        radius,
        PI / frequency,
        TAIL_SEGMENTS,
    );
    Ok(cbar - osc)
}

/// `ln(1 - m(e^t))`, usable far below the underflow threshold of `e^{2t}`.
fn ln_one_minus_mean_cos(weight: &AngularWeight, t: f64) -> f64 {
    let lead = 2.0 * t - (2.0 * weight.dim() as f64).ln();
    if t < -40.0 {
        lead
    } else {
        let r = t.exp();
        lead + (weight.one_minus_mean_cos(r) / (r * r * weight.second_moment() / 2.0)).ln()
    }
}

/// Gnomonic route, an independent check of [`cphi_direct`]. Dimensions up to
/// five; for `n = 1` it is the one-dimensional integral.
pub fn cphi_reduced(kernel: &Kernel, n: usize, tol: f64) -> Result<NormalizationResult> {
    let inv = inverse_reduced(kernel, n, tol)?;
    finish(inv, n, Method::ZetaReduced, tol)
}

pub fn inverse_reduced(kernel: &Kernel, n: usize, tol: f64) -> Result<Estimate> {
    check_dim(n)?;
    if n > MAX_REDUCED_DIM {
        return Err(Error::invalid(format!(
            "the reduced route supports n ≤ {MAX_REDUCED_DIM}, got {n}"
        )));
    }
    let w1 = AngularWeight::new(1);
    // H(ζ) = 2 ∫₀^∞ (1 - cos s)/(s φ(ζ s)) ds
    let h = |ln_zeta: f64| -> (f64, f64) {
        match radial_symbol_integral(kernel, w1, ln_zeta, 0.1 * tol) {
            Ok(e) => (2.0 * e.value, 2.0 * e.error),
            Err(_) => (f64::NAN, f64::INFINITY),
        }
    };
    if n == 1 {
        return radial_symbol_integral(kernel, w1, 0.0, 0.1 * tol).map(|e| e * 2.0);
    }
    let nf = n as f64;
    let shell = sphere_area(n - 1);
    let ln_zeta = |rho: f64| 0.5 * (rho * rho).ln_1p();

    let near = adaptive_with_err(
        |rho| {
            let (v, e) = h(ln_zeta(rho));
            let w = rho.powi(n as i32 - 2) * (-nf * ln_zeta(rho)).exp();
            (w * v, w * e)
        },
        &[0.0, 0.5, 1.0],
        &QuadOptions::rel(0.1 * tol),
    )
    .require("reduced integral on |y′| ≤ 1", 0.1 * tol)?;

    // H(ζ) ≤ C̲(ζ)/ζ² + 4C̄(ζ) ≤ K/φ(ζ), and φ grows at least like ζ^α
    let (glob_lo, glob_hi, a) = match kernel.phi.slope_range(f64::NEG_INFINITY, f64::INFINITY) {
        Some((lo, hi)) => (lo, hi, 1.0),
        None => (kernel.cert.sigma_lower, kernel.cert.sigma_upper, kernel.cert.a),
    };
    let k_const = a / (2.0 - glob_hi) + 4.0 * a / glob_lo;
    let far = integrate_up(
        |t| {
            let rho = t.exp();
            let lz = ln_zeta(rho);
            let (v, e) = h(lz);
            let w = ((nf - 1.0) * t - nf * lz).exp();
            (w * v, w * e)
        },
        0.0,
        f64::INFINITY,
        |t| {
            let rho = t.exp();
            let lz = ln_zeta(rho);
            let alpha = match kernel.phi.slope_range(lz, f64::INFINITY) {
                Some((lo, _)) => lo,
                None => kernel.cert.sigma_lower,
            };
            let bound = k_const * a * (alpha * lz - kernel.ln_phi(lz)).exp() * rho.powf(-1.0 - alpha)
                / (1.0 + alpha);
            Some(Enclosure::new(0.0, bound))
        },
        &TailOptions::rel(0.1 * tol),
    )
    .require("reduced integral on |y′| ≥ 1", 0.1 * tol)?;
    Ok((near + far) * shell)
}

/// Closed form for `Power(σ)` kernels, as a [`NormalizationResult`].
pub fn cphi_closed_form_result(n: usize, sigma: f64) -> Result<NormalizationResult> {
    let v = cphi_power_closed_form(n, sigma)?;
    Ok(NormalizationResult {
        value: v,
        error: 64.0 * f64::EPSILON * v,
        method: Method::ClosedFormPower,
        n,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundRow {
    pub radius: f64,
    pub rho: f64,
    pub error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundReport {
    pub n: usize,
    pub cphi: NormalizationResult,
    pub rows: Vec<BoundRow>,
    pub rho_min: f64,
    pub rho_max: f64,
    /// `1/(2nω_n)`: bound `C_φ(C̲(R) + C̄(R)) ≥ 1/(2nω_n)` valid for every R.
    pub c1: f64,
    /// `ρ(1)/a`, the smallest `c₂` this kernel allows.
    pub c2_candidate: f64,
    pub lower_holds: bool,
}

/// `1/(2nω_n)`, from `1 - cos t ≤ t²/2` inside `B_R` and `≤ 2` outside.
pub fn lower_envelope_constant(n: usize) -> f64 {
    1.0 / (2.0 * n as f64 * ball_volume(n))
}

/// Evaluates `ρ(R) = C_φ(C̲(R) + C̄(R))` over the given radii.
pub fn bound_check(
    kernel: &Kernel,
    cphi: &NormalizationResult,
    radii: &[f64],
    tol: f64,
) -> Result<BoundReport> {
    let n = cphi.n;
    let c = cphi.estimate();
    let c1 = lower_envelope_constant(n);
    let mut rows = Vec::with_capacity(radii.len());
    for &r in radii {
        let m = kernel.lower(r)? + kernel.upper(r)?;
        let rho = c.times(m);
        rows.push(BoundRow {
            radius: r,
            rho: rho.value,
            error: rho.error,
        });
    }
    let at_one = c.times(kernel.lower_moment(1.0, tol)?.estimate() + kernel.upper_moment(1.0, tol)?.estimate());
    let rho_min = rows.iter().map(|r| r.rho).fold(f64::INFINITY, f64::min);
    let rho_max = rows.iter().map(|r| r.rho).fold(f64::NEG_INFINITY, f64::max);
    let lower_holds = rows.iter().all(|r| r.rho + r.error >= c1);
    Ok(BoundReport {
        n,
        cphi: *cphi,
        rows,
        rho_min,
        rho_max,
        c1,
        c2_candidate: at_one.value / kernel.cert.a,
        lower_holds,
    })
}

/// Geometric radii from `lo` to `hi` inclusive.
pub fn geometric_radii(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    let (a, b) = (lo.ln(), hi.ln());
    (0..count)
        .map(|i| (a + (b - a) * i as f64 / (count.max(2) - 1) as f64).exp())
        .collect()
}

/// `∫₀^∞ (1 - cos r)/r^{1+σ} dr` by plain quadrature in `r`, slow but free of
/// the machinery above; used as a test oracle.
pub fn brute_force_inverse_1d(sigma: f64) -> f64 {
    let f = |r: f64| if r < 1e-4 { 0.5 * r.powf(1.0 - sigma) } else { (1.0 - r.cos()) / r.powf(1.0 + sigma) };
    let mut pts: Vec<f64> = vec![0.0, 1e-4, 1e-2, 1.0];
    let mut x = 2.0;
    while x < 2e5 {
        pts.push(x);
        x += 2.0;
    }
    let body = adaptive(f, &pts, &QuadOptions::rel(1e-12).with_max_panels(400_000)).value();
    let end = *pts.last().unwrap();
    2.0 * (body + end.powf(-sigma) / sigma)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::{LogLogTable, ScalingFunction, WeakScalingCertificate};
    use approx::assert_relative_eq;

    fn power(s: f64) -> Kernel {
        Kernel::natural(ScalingFunction::power(s).unwrap(), None).unwrap()
    }

    #[test]
    fn closed_form_examples() {
        assert_relative_eq!(cphi_power_closed_form(1, 1.0).unwrap(), 1.0 / PI, max_relative = 1e-13);
        assert_relative_eq!(cphi_power_closed_form(2, 1.0).unwrap(), 0.5 / PI, max_relative = 1e-13);
        // 30-digit references
        assert_relative_eq!(
            cphi_power_closed_form(3, 1.7).unwrap(),
            0.095_922_602_903_742_730_744,
            max_relative = 1e-12
        );
        assert_relative_eq!(
            cphi_power_closed_form(2, 0.3).unwrap(),
            0.049_301_190_915_883_541_599,
            max_relative = 1e-12
        );
        let s = 0.01;
        let ratio = cphi_power_closed_form(1, s).unwrap() / s;
        assert!((ratio - 0.5).abs() < 0.02 * 0.5);
        assert!(cphi_power_closed_form(1, 2.0).is_err());
        assert!(cphi_power_closed_form(1, 0.0).is_err());
    }

    #[test]
    fn direct_power_examples() {
        let r = cphi_direct(&power(1.0), 1, 1e-10).unwrap();
        assert!((r.value - 1.0 / PI).abs() <= r.error + 1e-14, "{r:?}");
        let r = cphi_direct(&power(1.0), 2, 1e-10).unwrap();
        assert!((r.value - 0.5 / PI).abs() <= r.error + 1e-14, "{r:?}");
        let s = 1.99;
        let r = cphi_direct(&power(s), 1, 1e-9).unwrap();
        assert!((r.value / (2.0 - s) - 1.0).abs() < 0.02);
    }

    #[test]
    fn direct_matches_brute_force_oracle() {
        for s in [0.4, 1.3] {
            let inv = inverse_direct(&power(s), 1, 1e-10).unwrap();
            let brute = brute_force_inverse_1d(s);
            assert_relative_eq!(inv.value, brute, max_relative = 1e-7);
        }
    }

    #[test]
    fn reduced_matches_closed_form() {
        let r = cphi_reduced(&power(1.5), 3, 1e-8).unwrap();
        let c = cphi_power_closed_form(3, 1.5).unwrap();
        assert!((r.value - c).abs() <= r.error + 1e-13, "{r:?} vs {c}");
    }

    #[test]
    fn routes_agree_on_sum_powers() {
        let k = Kernel::natural(ScalingFunction::sum_powers(0.5, 1.5).unwrap(), None).unwrap();
        let d = cphi_direct(&k, 2, 1e-9).unwrap();
        let r = cphi_reduced(&k, 2, 1e-8).unwrap();
        assert!(d.agrees_with(&r), "{d:?} {r:?}");
    }

    #[test]
    fn scaled_power_via_table() {
        // φ(r) = (c r)^σ gives C_φ = c^σ C(n, σ)
        let (c, s) = (3.0, 0.8);
        let pairs: Vec<(f64, f64)> = (-60..=60)
            .map(|i| {
                let r = 10f64.powf(i as f64 / 10.0);
                (r, (c * r).powf(s))
            })
            .collect();
        let phi = ScalingFunction::table(LogLogTable::from_pairs(&pairs).unwrap());
        let k = Kernel::new(phi, WeakScalingCertificate::new(1.0, s, s, s).unwrap());
        let r = cphi_direct(&k, 2, 1e-8).unwrap();
        let expect = c.powf(s) * cphi_power_closed_form(2, s).unwrap();
        assert!((r.value - expect).abs() <= r.error + 1e-12, "{r:?} vs {expect}");
    }

    #[test]
    fn bound_report_power_one() {
        let k = power(1.0);
        let c = cphi_direct(&k, 1, 1e-10).unwrap();
        let rep = bound_check(&k, &c, &[1.0], 1e-10).unwrap();
        assert_relative_eq!(rep.rows[0].rho, 2.0 / PI, max_relative = 1e-9);
        assert!(rep.lower_holds);
        assert_relative_eq!(rep.c1, 0.25, max_relative = 1e-15);
    }

    #[test]
    fn reduced_route_dimension_cap() {
        assert!(cphi_reduced(&power(1.0), 6, 1e-6).is_err());
        assert!(cphi_direct(&power(1.0), 0, 1e-6).is_err());
    }
}
