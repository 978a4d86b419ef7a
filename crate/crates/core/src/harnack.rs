//! One-dimensional grid experiments for the Harnack and Hölder estimates:
//! a monotone discretisation of `Lu = C_φ m ∫ δ(u,x,y)/(|y|φ(|y|)) dy`,
//! Dirichlet solves with exterior data, and the measured quantities.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::kernel::Kernel;
use crate::normalizer::cphi_direct;
use crate::quad::{adaptive, QuadOptions};

/// Exterior data beyond this multiple of `R` is folded into the tail.
pub const TRUNCATION_FACTOR: f64 = 8.0;
/// Trial exponents for the Hölder profile.
pub const HOLDER_ALPHAS: [f64; 10] = [0.05, 0.1, 0.15, 0.2, 0.25, 0.3, 0.35, 0.4, 0.45, 0.5];

/// `height · (1 - ((x - center)/width)²)⁴₊`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DataBump {
    pub center: f64,
    pub width: f64,
    pub height: f64,
}

impl DataBump {
    pub fn eval(&self, x: f64) -> f64 {
        let s = (x - self.center) / self.width;
        if s.abs() < 1.0 {
            self.height * (1.0 - s * s).powi(4)
        } else {
            0.0
        }
    }

    fn reach(&self) -> f64 {
        self.center.abs() + self.width
    }
}

/// Closed-form data `g = constant + Σ bumps` on the complement of `B_{2R}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExteriorData {
    pub constant: f64,
    pub bumps: Vec<DataBump>,
}

impl ExteriorData {
    pub fn constant(c: f64) -> Self {
        ExteriorData {
            constant: c,
            bumps: Vec::new(),
        }
    }

    /// A unit bump of width `R` centred at `center·R`.
    pub fn bump(center: f64, radius: f64) -> Self {
        ExteriorData {
            constant: 0.0,
            bumps: vec![DataBump {
                center: center * radius,
                width: radius,
                height: 1.0,
            }],
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.constant + self.bumps.iter().map(|b| b.eval(x)).sum::<f64>()
    }

    fn reach(&self) -> f64 {
        self.bumps.iter().map(DataBump::reach).fold(0.0, f64::max)
    }

    pub fn label(&self) -> String {
        let mut s = format!("c={}", self.constant);
        for b in &self.bumps {
            s.push_str(&format!(";bump({},{},{})", b.center, b.width, b.height));
        }
        s
    }
}

/// Symmetric grid `x_i = i h` with unknowns at `|x_i| < 2R`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Grid1D {
    pub h: f64,
    #[serde(rename = "R")]
    pub radius: f64,
    /// `2R/h`.
    pub half: usize,
    /// `Y/h` for the truncation radius `Y`.
    pub reach: usize,
}

impl Grid1D {
    pub fn new(radius: f64, h: f64, truncation: f64) -> Result<Self> {
        if !(radius > 0.0 && h > 0.0 && radius.is_finite()) {
            return Err(Error::invalid(format!("need R > 0 and h > 0, got R = {radius}, h = {h}")));
        }
        let steps = radius / h;
        if (steps - steps.round()).abs() > 1e-9 * steps || steps.round() < 2.0 {
            return Err(Error::invalid(format!("h = {h} must divide R = {radius}")));
        }
        if truncation < 4.0 {
            return Err(Error::invalid(format!("truncation factor must be at least 4, got {truncation}")));
        }
        let steps = steps.round() as usize;
        Ok(Grid1D {
            h,
            radius,
            half: 2 * steps,
            reach: (truncation * steps as f64).round() as usize,
        })
    }

    pub fn unknowns(&self) -> usize {
        2 * self.half - 1
    }

    /// Position of unknown `k`.
    pub fn node(&self, k: usize) -> f64 {
        (k as f64 - (self.half as f64 - 1.0)) * self.h
    }

    pub fn truncation(&self) -> f64 {
        self.reach as f64 * self.h
    }

    /// Unknown indices with `|x| ≤ R`.
    pub fn inner_indices(&self) -> std::ops::RangeInclusive<usize> {
        let c = self.half - 1;
        let r = self.half / 2;
        (c - r)..=(c + r)
    }
}

/// Nonnegative weights `W_j` with `∫_{|y|<Y} δ K ≈ 2 Σ W_j δ(jh)`, exact for
/// quadratic `δ`, plus the tail mass `C̄(Y)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiscreteOperator {
    pub kernel: String,
    pub grid: Grid1D,
    pub cphi: f64,
    pub multiplier: f64,
    /// `weights[j]` for `j = 0..=reach`; `weights[0] = 0`.
    pub weights: Vec<f64>,
    pub tail: f64,
}

pub fn discretize(kernel: &Kernel, multiplier: f64, grid: Grid1D, tol: f64) -> Result<DiscreteOperator> {
    if !(multiplier > 0.0 && multiplier.is_finite()) {
        return Err(Error::invalid(format!("multiplier must be positive, got {multiplier}")));
    }
    let h = grid.h;
    let (lo, hi) = kernel.phi.ln_domain();
    if h.ln() < lo || grid.truncation().ln() > hi {
        return Err(Error::invalid(format!(
            "φ is not tabulated on [h, Y] = [{h}, {}]",
            grid.truncation()
        )));
    }
    let cphi = cphi_direct(kernel, 1, tol)?.value;
    let m = grid.reach;
    let mut weights = vec![0.0; m + 1];
    weights[1] = kernel.lower_moment(h, tol)?.value / (h * h);
    let opts = QuadOptions::rel(tol).with_abs(0.0);
    // y²K(y) = y/φ(y); interpolate δ(y)/y² linearly on each cell
    let y2k = |y: f64| y * (-kernel.ln_phi(y.ln())).exp();
    for j in 1..m {
        let a = j as f64 * h;
        let left = adaptive(|y| (1.0 - (y - a) / h) * y2k(y), &[a, a + h], &opts).value();
        let right = adaptive(|y| ((y - a) / h) * y2k(y), &[a, a + h], &opts).value();
        weights[j] += left / (a * a);
        weights[j + 1] += right / ((a + h) * (a + h));
    }
    let tail = kernel.upper_moment(grid.truncation(), tol)?.value;
    Ok(DiscreteOperator {
        kernel: kernel.label(),
        grid,
        cphi,
        multiplier,
        weights,
        tail,
    })
}

impl DiscreteOperator {
    fn scale(&self) -> f64 {
        self.cphi * self.multiplier
    }

    /// `L u(x)` for a closed-form `u` that equals `far` beyond the truncation.
    pub fn apply_function(&self, u: &dyn Fn(f64) -> f64, x: f64, far: f64) -> f64 {
        let h = self.grid.h;
        let ux = u(x);
        let mut s = 0.0;
        for (j, w) in self.weights.iter().enumerate().skip(1) {
            let y = j as f64 * h;
            s += w * (u(x + y) + u(x - y) - 2.0 * ux);
        }
        self.scale() * (2.0 * s + 4.0 * self.tail * (far - ux))
    }

    /// The interior sum alone, `2 C_φ m Σ W_j δ(u, x, jh)`, for functions whose
    /// far contribution is handled separately.
    pub fn apply_truncated(&self, u: &dyn Fn(f64) -> f64, x: f64) -> f64 {
        let h = self.grid.h;
        let ux = u(x);
        let s: f64 = self
            .weights
            .iter()
            .enumerate()
            .skip(1)
            .map(|(j, w)| w * (u(x + j as f64 * h) + u(x - j as f64 * h) - 2.0 * ux))
            .sum();
        2.0 * self.scale() * s
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridSolution {
    pub grid: Grid1D,
    pub nodes: Vec<f64>,
    pub values: Vec<f64>,
}

impl GridSolution {
    pub fn inner(&self) -> (&[f64], &[f64]) {
        let r = self.grid.inner_indices();
        let (a, b) = (*r.start(), *r.end() + 1);
        (&self.nodes[a..b], &self.values[a..b])
    }
}

/// Solves `Lu = f` at the unknowns with `u = g` elsewhere. `f` is indexed
/// like the unknowns.
pub fn solve_dirichlet(op: &DiscreteOperator, f: &[f64], g: &ExteriorData) -> Result<GridSolution> {
    let grid = op.grid;
    let nu = grid.unknowns();
    if f.len() != nu {
        return Err(Error::invalid(format!("source has {} entries, grid has {nu} unknowns", f.len())));
    }
    if g.reach() > grid.truncation() - 2.0 * grid.radius {
        return Err(Error::invalid(format!(
            "exterior data reaches {} but the truncation only covers {}",
            g.reach(),
            grid.truncation() - 2.0 * grid.radius
        )));
    }
    let c = op.scale();
    let w = &op.weights;
    let total: f64 = w.iter().sum();
    let mut a = DMatrix::<f64>::zeros(nu, nu);
    let mut b = DVector::<f64>::zeros(nu);
    let centre = grid.half as i64 - 1;
    for k in 0..nu {
        let i = k as i64 - centre;
        a[(k, k)] = -4.0 * total - 4.0 * op.tail;
        let mut load = 4.0 * op.tail * g.constant;
        for (j, wj) in w.iter().enumerate().skip(1) {
            for m in [i + j as i64, i - j as i64] {
                if m.abs() < grid.half as i64 {
                    a[(k, (m + centre) as usize)] += 2.0 * wj;
                } else {
                    load += 2.0 * wj * g.eval(m as f64 * grid.h);
                }
            }
        }
        b[k] = f[k] / c - load;
    }
    let u = a
        .lu()
        .solve(&b)
        .ok_or_else(|| Error::Solver("singular Dirichlet matrix".into()))?;
    Ok(GridSolution {
        grid,
        nodes: (0..nu).map(|k| grid.node(k)).collect(),
        values: u.iter().copied().collect(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HolderPoint {
    pub alpha: f64,
    pub seminorm: f64,
    /// `R^α [u]_α`.
    pub scaled: f64,
}

/// Discrete `sup |u(x) - u(y)|/|x - y|^α` over nodes in `B_R`.
pub fn holder_report(sol: &GridSolution, alphas: &[f64]) -> Vec<HolderPoint> {
    let (x, u) = sol.inner();
    let radius = sol.grid.radius;
    alphas
        .iter()
        .map(|&alpha| {
            let mut best: f64 = 0.0;
            for i in 0..x.len() {
                for j in (i + 1)..x.len() {
                    best = best.max((u[i] - u[j]).abs() / (x[j] - x[i]).powf(alpha));
                }
            }
            HolderPoint {
                alpha,
                seminorm: best,
                scaled: radius.powf(alpha) * best,
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LevelSetFit {
    pub thresholds: Vec<f64>,
    pub measures: Vec<f64>,
    /// `None` when fewer than four points decay.
    pub epsilon: Option<f64>,
    pub r_squared: Option<f64>,
    pub used: usize,
}

/// `|{u > t} ∩ B_R|` on the given thresholds and the least-squares tail
/// exponent over the points where the measure is strictly between 0 and `|B_R|`.
pub fn level_set_decay(sol: &GridSolution, thresholds: &[f64]) -> LevelSetFit {
    let (_, u) = sol.inner();
    let h = sol.grid.h;
    let full = u.len() as f64 * h;
    let measures: Vec<f64> = thresholds
        .iter()
        .map(|&t| u.iter().filter(|&&v| v > t).count() as f64 * h)
        .collect();
    let pts: Vec<(f64, f64)> = thresholds
        .iter()
        .zip(&measures)
        .filter(|(&t, &m)| t > 0.0 && m > 0.0 && m < full)
        .map(|(&t, &m)| (t.ln(), m.ln()))
        .collect();
    let used = pts.len();
    let (epsilon, r_squared) = if used < 4 {
        (None, None)
    } else {
        let k = used as f64;
        let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
        let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
        let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
        let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let syy: f64 = pts.iter().map(|p| (p.1 - my).powi(2)).sum();
        let slope = sxy / sxx;
        let r2 = if syy > 0.0 { sxy * sxy / (sxx * syy) } else { 1.0 };
        (Some(-slope), Some(r2))
    };
    LevelSetFit {
        thresholds: thresholds.to_vec(),
        measures,
        epsilon,
        r_squared,
        used,
    }
}

/// Logarithmic thresholds strictly inside `(inf, sup)` of `u` on `B_R`.
pub fn default_thresholds(sol: &GridSolution, count: usize) -> Vec<f64> {
    let (_, u) = sol.inner();
    let lo = u.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = u.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if !(lo > 0.0) || hi <= lo {
        return Vec::new();
    }
    (1..=count)
        .map(|i| (lo.ln() + (hi.ln() - lo.ln()) * i as f64 / (count + 1) as f64).exp())
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HarnackReport {
    pub kernel: String,
    pub data: String,
    pub h: f64,
    #[serde(rename = "R")]
    pub radius: f64,
    pub sup: f64,
    pub inf: f64,
    pub quotient: f64,
    /// `|f|∞`, the `C₀` of the estimates.
    pub c0: f64,
    pub rhs_scale: f64,
    pub c_emp: f64,
    pub holder: Vec<HolderPoint>,
    pub level_sets: LevelSetFit,
    pub min_value: f64,
}

/// Measures one solved case.
pub fn measure(kernel: &Kernel, data: &ExteriorData, sol: &GridSolution, source: f64, tol: f64) -> Result<HarnackReport> {
    let (_, u) = sol.inner();
    let sup = u.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let inf = u.iter().cloned().fold(f64::INFINITY, f64::min);
    let min_value = sol.values.iter().cloned().fold(f64::INFINITY, f64::min);
    let radius = sol.grid.radius;
    let cl = kernel.lower_moment(radius, tol)?.value;
    let cu = kernel.upper_moment(radius, tol)?.value;
    let rhs_scale = (cl + cu) * radius * radius / cl;
    let c0 = source.abs();
    Ok(HarnackReport {
        kernel: kernel.label(),
        data: data.label(),
        h: sol.grid.h,
        radius,
        sup,
        inf,
        quotient: sup / inf,
        c0,
        rhs_scale,
        c_emp: sup / (inf + c0 * rhs_scale),
        holder: holder_report(sol, &HOLDER_ALPHAS),
        level_sets: level_set_decay(sol, &default_thresholds(sol, 24)),
        min_value,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HarnackConfig {
    #[serde(rename = "R")]
    pub radius: f64,
    pub h: f64,
    pub multiplier: f64,
    /// Constant source `f` on `B_{2R}`.
    pub source: f64,
    pub truncation: f64,
    pub tol: f64,
}

impl HarnackConfig {
    pub fn standard(radius: f64) -> Self {
        HarnackConfig {
            radius,
            h: radius / 200.0,
            multiplier: 1.0,
            source: 0.0,
            truncation: TRUNCATION_FACTOR,
            tol: 1e-10,
        }
    }
}

/// One kernel and datum at `h` and `h/2`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HarnackCase {
    pub coarse: HarnackReport,
    pub fine: HarnackReport,
    pub quotient_change: f64,
    /// Largest relative change of `R^α[u]_α` over the α grid.
    pub holder_change: f64,
}

impl HarnackCase {
    pub fn positive(&self) -> bool {
        self.coarse.inf > 0.0 && self.fine.inf > 0.0
    }

    pub fn epsilon_positive(&self) -> bool {
        [&self.coarse, &self.fine]
            .iter()
            .all(|r| r.level_sets.epsilon.is_some_and(|e| e > 0.0))
    }
}

pub fn solve_case(kernel: &Kernel, data: &ExteriorData, cfg: &HarnackConfig, h: f64) -> Result<HarnackReport> {
    let grid = Grid1D::new(cfg.radius, h, cfg.truncation)?;
    let op = discretize(kernel, cfg.multiplier, grid, cfg.tol)?;
    let f = vec![cfg.source; grid.unknowns()];
    let sol = solve_dirichlet(&op, &f, data)?;
    if data.constant >= 0.0 && data.bumps.iter().all(|b| b.height >= 0.0) && cfg.source <= 0.0 {
        let lowest = sol.values.iter().cloned().fold(f64::INFINITY, f64::min);
        if lowest < -1e-12 {
            return Err(Error::Verification(format!(
                "discrete minimum principle violated: min u = {lowest:e}"
            )));
        }
    }
    measure(kernel, data, &sol, cfg.source, cfg.tol)
}

pub fn run_case(kernel: &Kernel, data: &ExteriorData, cfg: &HarnackConfig) -> Result<HarnackCase> {
    let coarse = solve_case(kernel, data, cfg, cfg.h)?;
    let fine = solve_case(kernel, data, cfg, 0.5 * cfg.h)?;
    let quotient_change = (fine.quotient - coarse.quotient).abs() / coarse.quotient;
    let holder_change = coarse
        .holder
        .iter()
        .zip(&fine.holder)
        .map(|(a, b)| {
            if a.scaled == 0.0 && b.scaled == 0.0 {
                0.0
            } else {
                (a.scaled - b.scaled).abs() / a.scaled.abs().max(b.scaled.abs())
            }
        })
        .fold(0.0, f64::max);
    Ok(HarnackCase {
        coarse,
        fine,
        quotient_change,
        holder_change,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepOutcome {
    pub kernel: String,
    pub data: String,
    pub case: Option<HarnackCase>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepSummary {
    pub cases: Vec<SweepOutcome>,
    pub max_c_emp: f64,
    pub median_c_emp: f64,
    pub max_over_median: f64,
    pub uniform: bool,
    pub quotients_stable: bool,
    pub holder_stable: bool,
    pub epsilon_positive: bool,
    pub failures: usize,
}

impl SweepSummary {
    pub fn passed(&self) -> bool {
        self.failures == 0 && self.uniform && self.quotients_stable && self.holder_stable && self.epsilon_positive
    }
}

pub const QUOTIENT_STABILITY: f64 = 0.05;
pub const HOLDER_STABILITY: f64 = 0.10;
pub const UNIFORMITY_FACTOR: f64 = 10.0;

/// Every kernel against every datum. Failures are recorded per case.
pub fn harnack_sweep(kernels: &[Kernel], data: &[ExteriorData], cfg: &HarnackConfig) -> SweepSummary {
    let mut cases = Vec::new();
    for k in kernels {
        for d in data {
            let (case, error) = match run_case(k, d, cfg) {
                Ok(c) => (Some(c), None),
                Err(e) => (None, Some(e.to_string())),
            };
            cases.push(SweepOutcome {
                kernel: k.label(),
                data: d.label(),
                case,
                error,
            });
        }
    }
    summarize(cases)
}

fn summarize(cases: Vec<SweepOutcome>) -> SweepSummary {
    let ok: Vec<&HarnackCase> = cases.iter().filter_map(|c| c.case.as_ref()).collect();
    let mut c_emp: Vec<f64> = ok.iter().map(|c| c.coarse.c_emp).collect();
    c_emp.sort_by(f64::total_cmp);
    let max_c_emp = c_emp.last().copied().unwrap_or(f64::NAN);
    let median_c_emp = if c_emp.is_empty() {
        f64::NAN
    } else if c_emp.len() % 2 == 1 {
        c_emp[c_emp.len() / 2]
    } else {
        0.5 * (c_emp[c_emp.len() / 2 - 1] + c_emp[c_emp.len() / 2])
    };
    let max_over_median = max_c_emp / median_c_emp;
    let failures = cases.len() - ok.len();
    SweepSummary {
        max_c_emp,
        median_c_emp,
        max_over_median,
        uniform: max_over_median <= UNIFORMITY_FACTOR,
        quotients_stable: ok.iter().all(|c| c.quotient_change <= QUOTIENT_STABILITY),
        holder_stable: ok.iter().all(|c| c.holder_change <= HOLDER_STABILITY),
        epsilon_positive: ok.iter().all(|c| c.epsilon_positive()),
        failures,
        cases,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::ScalingFunction;
    use crate::normalizer::cosine_tail;

    fn power(s: f64) -> Kernel {
        Kernel::natural(ScalingFunction::power(s).unwrap(), None).unwrap()
    }

    #[test]
    fn weights_reproduce_second_moment() {
        let k = power(1.2);
        let grid = Grid1D::new(1.0, 0.05, 8.0).unwrap();
        let op = discretize(&k, 1.0, grid, 1e-11).unwrap();
        assert!(op.weights.iter().all(|&w| w >= 0.0));
        let s: f64 = op.weights.iter().enumerate().map(|(j, w)| w * (j as f64 * 0.05).powi(2)).sum();
        let exact = k.lower_moment(8.0, 1e-12).unwrap().value;
        assert!((s - exact).abs() <= 1e-9 * exact, "{s} {exact}");
    }

    #[test]
    fn cosine_consistency() {
        for s in [0.5, 1.0, 1.5] {
            let k = power(s);
            let grid = Grid1D::new(1.0, 0.01, 13.0).unwrap();
            let op = discretize(&k, 1.5, grid, 1e-11).unwrap();
            let y = grid.truncation();
            let near = op.apply_truncated(&|x: f64| x.cos(), 0.0);
            // ∫_{|y|>Y} 2(cos y - 1)K = -4 ∫_Y^∞ (1 - cos r)/(rφ) dr
            let far = -4.0 * op.cphi * op.multiplier * cosine_tail(&k, 1, 1.0, y, 1e-10).unwrap().value;
            let v = near + far;
            assert!((v + 3.0).abs() < 2e-3, "σ = {s}: {v}");
        }
    }

    #[test]
    fn affine_and_constant() {
        let k = power(1.0);
        let grid = Grid1D::new(1.0, 0.02, 8.0).unwrap();
        let op = discretize(&k, 1.0, grid, 1e-11).unwrap();
        let ext = 2.0 * grid.truncation();
        let affine = |x: f64| if x.abs() <= ext { 1.0 + 0.3 * x } else { 1.0 };
        for x in [-1.0, 0.0, 0.7] {
            let v = op.apply_function(&affine, x, 1.0);
            // only the truncated tail sees the asymmetric extension
            assert!(v.abs() <= 4.0 * op.cphi * op.tail * 0.3 * x.abs() + 1e-12, "{v}");
        }
        let sol = solve_dirichlet(&op, &vec![0.0; grid.unknowns()], &ExteriorData::constant(1.0)).unwrap();
        assert!(sol.values.iter().all(|v| (v - 1.0).abs() < 1e-12));
    }

    #[test]
    fn positive_data_gives_positive_solution() {
        let k = power(1.5);
        let grid = Grid1D::new(1.0, 0.02, 8.0).unwrap();
        let op = discretize(&k, 1.0, grid, 1e-11).unwrap();
        let sol = solve_dirichlet(&op, &vec![0.0; grid.unknowns()], &ExteriorData::bump(3.0, 1.0)).unwrap();
        assert!(sol.values.iter().all(|&v| v > 0.0));
        let (_, u) = sol.inner();
        assert!(u.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn linearity() {
        let k = power(0.8);
        let grid = Grid1D::new(1.0, 0.05, 8.0).unwrap();
        let op = discretize(&k, 1.0, grid, 1e-11).unwrap();
        let n = grid.unknowns();
        let f1: Vec<f64> = (0..n).map(|i| (i as f64 * 0.1).sin()).collect();
        let f2 = vec![-0.5; n];
        let g1 = ExteriorData::bump(3.0, 1.0);
        let g2 = ExteriorData::bump(-4.0, 1.0);
        let a = solve_dirichlet(&op, &f1, &g1).unwrap();
        let b = solve_dirichlet(&op, &f2, &g2).unwrap();
        let fsum: Vec<f64> = f1.iter().zip(&f2).map(|(a, b)| a + b).collect();
        let gsum = ExteriorData {
            constant: 0.0,
            bumps: [g1.bumps.clone(), g2.bumps.clone()].concat(),
        };
        let c = solve_dirichlet(&op, &fsum, &gsum).unwrap();
        for i in 0..n {
            assert!((c.values[i] - a.values[i] - b.values[i]).abs() < 1e-10);
        }
    }

    #[test]
    fn holder_and_level_sets_trivial_cases() {
        let grid = Grid1D::new(1.0, 0.1, 8.0).unwrap();
        let n = grid.unknowns();
        let flat = GridSolution {
            grid,
            nodes: (0..n).map(|k| grid.node(k)).collect(),
            values: vec![1.0; n],
        };
        assert!(holder_report(&flat, &HOLDER_ALPHAS).iter().all(|p| p.seminorm == 0.0));
        let fit = level_set_decay(&flat, &[1.5, 2.0, 4.0]);
        assert!(fit.measures.iter().all(|&m| m == 0.0));
        assert!(fit.epsilon.is_none());

        let affine = GridSolution {
            values: flat.nodes.iter().map(|x| 2.0 + x).collect(),
            ..flat
        };
        let prof = holder_report(&affine, &[0.5, 1.0]);
        assert!((prof[1].seminorm - 1.0).abs() < 1e-12);
        let fit = level_set_decay(&affine, &default_thresholds(&affine, 12));
        assert!(fit.measures.windows(2).all(|w| w[1] <= w[0]));
        assert!(fit.epsilon.unwrap() > 0.0);
    }

    #[test]
    fn grid_validation() {
        assert!(Grid1D::new(1.0, 0.3, 8.0).is_err());
        assert!(Grid1D::new(1.0, 0.25, 2.0).is_err());
        let g = Grid1D::new(2.0, 0.5, 8.0).unwrap();
        assert_eq!(g.unknowns(), 15);
        assert_eq!(g.node(7), 0.0);
        assert_eq!(g.inner_indices(), 3..=11);
    }
}
