//! Gamma function, sphere measures and the angular disintegration of the
//! uniform measure on `S^{n-1}`.

use std::f64::consts::PI;

use crate::quad::gauss_legendre;

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

/// Γ(x) for real `x` away from the non-positive integers. Lanczos
/// approximation on `x ≥ 1/2`, reflection below.
pub fn gamma(x: f64) -> f64 {
    if x < 0.5 {
        let s = (PI * x).sin();
        if s == 0.0 {
            return f64::NAN;
        }
        PI / (s * gamma(1.0 - x))
    } else if x > 171.7 {
        f64::INFINITY
    } else {
        (ln_gamma_lanczos(x)).exp()
    }
}

/// ln Γ(x) for `x > 0`.
pub fn ln_gamma(x: f64) -> f64 {
    if x < 0.5 {
        (PI / (PI * x).sin()).ln() - ln_gamma(1.0 - x)
    } else {
        ln_gamma_lanczos(x)
    }
}

fn ln_gamma_lanczos(x: f64) -> f64 {
    let x = x - 1.0;
    let mut acc = LANCZOS[0];
    for (i, c) in LANCZOS.iter().enumerate().skip(1) {
        acc += c / (x + i as f64);
    }
    let t = x + LANCZOS_G + 0.5;
    0.5 * (2.0 * PI).ln() + (x + 0.5) * t.ln() - t + acc.ln()
}

/// Surface measure `|S^{n-1}| = 2π^{n/2}/Γ(n/2)`, with `|S^0| = 2`.
pub fn sphere_area(n: usize) -> f64 {
    match n {
        0 => 0.0,
        1 => 2.0,
        2 => 2.0 * PI,
        3 => 4.0 * PI,
        _ => 2.0 * PI.powf(n as f64 / 2.0) / gamma(n as f64 / 2.0),
    }
}

/// Volume `ω_n` of the unit ball in `ℝⁿ`, so that `nω_n = |S^{n-1}|`.
pub fn ball_volume(n: usize) -> f64 {
    sphere_area(n) / n as f64
}

/// Law of the first coordinate θ₁ of a point on `S^{n-1}` under surface
/// measure: density `|S^{n-2}| (1-t²)^{(n-3)/2}` on `[-1, 1]`, and the
/// two-point measure `{±1}` for `n = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AngularWeight {
    n: usize,
}

impl AngularWeight {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "dimension must be positive");
        AngularWeight { n }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Total mass `|S^{n-1}|`.
    pub fn mass(&self) -> f64 {
        sphere_area(self.n)
    }

    /// Unnormalised density of θ₁ at `t ∈ (-1, 1)`; `n ≥ 2`.
    pub fn density(&self, t: f64) -> f64 {
        debug_assert!(self.n >= 2);
        sphere_area(self.n - 1) * (1.0 - t * t).powf((self.n as f64 - 3.0) / 2.0)
    }

    /// Average of `cos(r θ₁)` over the sphere, i.e. `Γ(n/2)(2/r)^{n/2-1}J_{n/2-1}(r)`.
    pub fn mean_cos(&self, r: f64) -> f64 {
        let r = r.abs();
        let n = self.n;
        if r <= 2.0 {
            return self.mean_cos_series(r);
        }
        match n {
            1 => r.cos(),
            3 => r.sin() / r,
            _ if n % 2 == 0 => mean_cos_trapezoid(n, r),
            _ => mean_cos_gauss(n, r),
        }
    }

    /// `1 - mean_cos(r)` without cancellation for small `r`.
    pub fn one_minus_mean_cos(&self, r: f64) -> f64 {
        let r = r.abs();
        if r <= 2.0 {
            // Σ_{k≥1} (-1)^{k+1} c_k r^{2k}
            let nu1 = self.n as f64 / 2.0;
            let q = r * r / 4.0;
            let mut term = 1.0;
            let mut sum = 0.0;
            for k in 1..40 {
                term *= q / (k as f64 * (nu1 + k as f64 - 1.0));
                let signed = if k % 2 == 1 { term } else { -term };
                sum += signed;
                if term < 1e-18 * sum.abs() {
                    break;
                }
            }
            sum
        } else {
            1.0 - self.mean_cos(r)
        }
    }

    fn mean_cos_series(&self, r: f64) -> f64 {
        1.0 - self.one_minus_mean_cos(r)
    }

    /// Second and fourth moments `E[θ₁²] = 1/n`, `E[θ₁⁴] = 3/(n(n+2))`.
    pub fn second_moment(&self) -> f64 {
        1.0 / self.n as f64
    }

    pub fn fourth_moment(&self) -> f64 {
        3.0 / (self.n as f64 * (self.n as f64 + 2.0))
    }
}

// ∫₀^π cos(r cos θ) sin^{n-2}θ dθ with the trapezoid rule; the integrand is a
// smooth π-periodic function for even n, so the rule converges spectrally.
fn mean_cos_trapezoid(n: usize, r: f64) -> f64 {
    let m = n - 2;
    let nodes = (r * 0.75) as usize + 2 * m + 40;
    let h = PI / nodes as f64;
    let mut sum = 0.0;
    for i in 0..nodes {
        let th = i as f64 * h;
        sum += (r * th.cos()).cos() * th.sin().powi(m as i32);
    }
    sum * h / sin_power_integral(m)
}

// ∫_{-1}^{1} cos(r t)(1-t²)^k dt by Gauss-Legendre for odd n = 2k + 3.
fn mean_cos_gauss(n: usize, r: f64) -> f64 {
    let k = (n - 3) / 2;
    let count = (r * 0.6) as usize + k + 30;
    let (x, w) = gauss_legendre(count);
    let mut num = 0.0;
    let mut den = 0.0;
    for (t, wt) in x.iter().zip(&w) {
        let base = (1.0 - t * t).powi(k as i32);
        num += wt * (r * t).cos() * base;
        den += wt * base;
    }
    num / den
}

/// `∫₀^π sin^m θ dθ = √π Γ((m+1)/2)/Γ(m/2 + 1)`.
fn sin_power_integral(m: usize) -> f64 {
    let m = m as f64;
    PI.sqrt() * (ln_gamma((m + 1.0) / 2.0) - ln_gamma(m / 2.0 + 1.0)).exp()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn gamma_identities() {
        assert_relative_eq!(gamma(1.0), 1.0, max_relative = 1e-13);
        assert_relative_eq!(gamma(0.5), PI.sqrt(), max_relative = 1e-13);
        for &x in &[0.1, 0.37, 1.3, 2.5, 4.75, 9.2] {
            assert_relative_eq!(gamma(x + 1.0), x * gamma(x), max_relative = 1e-12);
        }
        assert_relative_eq!(gamma(-0.5), -2.0 * PI.sqrt(), max_relative = 1e-13);
        assert_relative_eq!(gamma(5.0), 24.0, max_relative = 1e-13);
    }

    #[test]
    fn sphere_measures() {
        assert_eq!(sphere_area(1), 2.0);
        assert_relative_eq!(ball_volume(2), PI, max_relative = 1e-15);
        assert_relative_eq!(ball_volume(3), 4.0 * PI / 3.0, max_relative = 1e-15);
        assert_relative_eq!(sphere_area(4), 2.0 * PI * PI, max_relative = 1e-13);
        assert_relative_eq!(sphere_area(5), 8.0 * PI * PI / 3.0, max_relative = 1e-13);
    }

    #[test]
    fn mean_cos_closed_forms() {
        let w3 = AngularWeight::new(3);
        let w5 = AngularWeight::new(5);
        for &r in &[0.1, 1.0, 2.0, 2.5, 7.3, 40.0, 333.0] {
            assert_relative_eq!(AngularWeight::new(1).mean_cos(r), r.cos(), epsilon = 1e-14);
            assert!((w3.mean_cos(r) - r.sin() / r).abs() < 1e-14);
            let j = 3.0 * (r.sin() - r * r.cos()) / r.powi(3);
            assert!((w5.mean_cos(r) - j).abs() < 1e-12, "r={r}");
        }
    }

    #[test]
    fn mean_cos_two_dimensions_matches_bessel_values() {
        // J0 reference values (mpmath)
        let w = AngularWeight::new(2);
        let cases = [
            (1.0, 0.765_197_686_557_966_6),
            (2.5, -0.048_383_776_468_197_996),
            (10.0, -0.245_935_764_451_348_33),
            (100.0, 0.019_985_850_304_223_122),
        ];
        for (r, j0) in cases {
            assert!((w.mean_cos(r) - j0).abs() < 1e-13, "r={r}: {}", w.mean_cos(r));
        }
    }

    #[test]
    fn small_argument_series() {
        let w = AngularWeight::new(2);
        let r: f64 = 1e-4;
        assert_relative_eq!(w.one_minus_mean_cos(r), r * r / 4.0, max_relative = 1e-8);
        let w1 = AngularWeight::new(1);
        assert_relative_eq!(w1.one_minus_mean_cos(0.3), 1.0 - 0.3f64.cos(), max_relative = 1e-14);
    }
}
