//! Quadrature building blocks.
//!
//! Everything here works on integrands that return a value together with an
//! error estimate for that value, so that inner integrals (angular averages,
//! special functions evaluated by quadrature) can feed their own uncertainty
//! into the enclosure of the outer integral. Error bookkeeping is panel-level:
//! each Gauss-Kronrod panel reports `|K15 - G7|` plus the weighted integrand
//! errors plus a rounding floor, and panels are summed left to right.

use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

/// A value with a non-negative error half-width.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
}

impl Estimate {
    pub const ZERO: Estimate = Estimate {
        value: 0.0,
        error: 0.0,
    };

    pub fn new(value: f64, error: f64) -> Self {
        Estimate {
            value,
            error: error.abs(),
        }
    }

    pub fn exact(value: f64) -> Self {
        Estimate { value, error: 0.0 }
    }

    pub fn lo(&self) -> f64 {
        self.value - self.error
    }

    pub fn hi(&self) -> f64 {
        self.value + self.error
    }

    /// Product of two enclosures, first order plus the cross term.
    pub fn times(self, other: Estimate) -> Estimate {
        Estimate::new(
            self.value * other.value,
            self.value.abs() * other.error
                + other.value.abs() * self.error
                + self.error * other.error,
        )
    }

    /// Reciprocal with an outward enclosure. Requires the enclosure to
    /// exclude zero.
    pub fn recip(self) -> Option<Estimate> {
        if self.lo() > 0.0 || self.hi() < 0.0 {
            let v = 1.0 / self.value;
            let a = 1.0 / self.lo();
            let b = 1.0 / self.hi();
            let err = (a - v).abs().max((b - v).abs());
            Some(Estimate::new(v, err))
        } else {
            None
        }
    }

    pub fn contains(&self, x: f64) -> bool {
        (x - self.value).abs() <= self.error
    }

    /// True when the two enclosures overlap.
    pub fn overlaps(&self, other: &Estimate) -> bool {
        (self.value - other.value).abs() <= self.error + other.error
    }

    pub fn relative_error(&self) -> f64 {
        if self.value == 0.0 {
            f64::INFINITY
        } else {
            self.error / self.value.abs()
        }
    }
}

impl Add for Estimate {
    type Output = Estimate;
    fn add(self, rhs: Estimate) -> Estimate {
        Estimate::new(self.value + rhs.value, self.error + rhs.error)
    }
}

impl AddAssign for Estimate {
    fn add_assign(&mut self, rhs: Estimate) {
        self.value += rhs.value;
        self.error += rhs.error;
    }
}

impl Sub for Estimate {
    type Output = Estimate;
    fn sub(self, rhs: Estimate) -> Estimate {
        Estimate::new(self.value - rhs.value, self.error + rhs.error)
    }
}

impl Neg for Estimate {
    type Output = Estimate;
    fn neg(self) -> Estimate {
        Estimate::new(-self.value, self.error)
    }
}

impl Mul<f64> for Estimate {
    type Output = Estimate;
    fn mul(self, rhs: f64) -> Estimate {
        Estimate::new(self.value * rhs, self.error * rhs.abs())
    }
}

/// Closed interval `[lo, hi]` known to contain a quantity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Enclosure {
    pub lo: f64,
    pub hi: f64,
}

impl Enclosure {
    pub fn new(a: f64, b: f64) -> Self {
        Enclosure {
            lo: a.min(b),
            hi: a.max(b),
        }
    }

    pub fn mid(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    pub fn half_width(&self) -> f64 {
        0.5 * (self.hi - self.lo)
    }

    pub fn to_estimate(self) -> Estimate {
        Estimate::new(self.mid(), self.half_width())
    }
}

/// Result of an adaptive integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadrature {
    pub estimate: Estimate,
    /// Integral of `|f|`, used for cancellation-aware tolerances.
    pub resabs: f64,
    pub converged: bool,
    pub evaluations: usize,
}

impl Quadrature {
    pub fn value(&self) -> f64 {
        self.estimate.value
    }

    pub fn error(&self) -> f64 {
        self.estimate.error
    }

    /// Converts a non-converged result into [`crate::Error::Tolerance`].
    pub fn require(self, what: &str, target: f64) -> crate::Result<Estimate> {
        if self.converged {
            Ok(self.estimate)
        } else {
            Err(crate::Error::tolerance(what, target, self.estimate))
        }
    }
}

/// Stopping rule for [`adaptive`]: the total error must drop below
/// `max(abs_tol, rel_tol * |I|, l1_tol * ∫|f|)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadOptions {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub l1_tol: f64,
    pub max_panels: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        QuadOptions {
            abs_tol: 0.0,
            rel_tol: 1e-10,
            l1_tol: 0.0,
            max_panels: 4000,
        }
    }
}

impl QuadOptions {
    pub fn rel(rel_tol: f64) -> Self {
        QuadOptions {
            rel_tol,
            ..Default::default()
        }
    }

    pub fn with_abs(mut self, abs_tol: f64) -> Self {
        self.abs_tol = abs_tol;
        self
    }

    pub fn with_l1(mut self, l1_tol: f64) -> Self {
        self.l1_tol = l1_tol;
        self
    }

    pub fn with_max_panels(mut self, max_panels: usize) -> Self {
        self.max_panels = max_panels;
        self
    }

    fn target(&self, value: f64, resabs: f64) -> f64 {
        self.abs_tol
            .max(self.rel_tol * value.abs())
            .max(self.l1_tol * resabs)
    }
}

// Kronrod 15-point abscissae and weights; the 7-point Gauss rule uses the odd
// indexed abscissae.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
    resabs: f64,
    splittable: bool,
}

fn gk15<F>(f: &mut F, a: f64, b: f64) -> Panel
where
    F: FnMut(f64) -> (f64, f64),
{
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let (fc, ec) = f(center);
    let mut kron = fc * WGK[7];
    let mut gauss = fc * WG[3];
    let mut resabs = fc.abs() * WGK[7];
    let mut prop = ec * WGK[7];
    for j in 0..7 {
        let dx = half * XGK[j];
        let (f1, e1) = f(center - dx);
        let (f2, e2) = f(center + dx);
        kron += WGK[j] * (f1 + f2);
        resabs += WGK[j] * (f1.abs() + f2.abs());
        prop += WGK[j] * (e1 + e2);
        if j % 2 == 1 {
            gauss += WG[j / 2] * (f1 + f2);
        }
    }
    let value = kron * half;
    let resabs = resabs * half.abs();
    let mut error = ((kron - gauss) * half).abs() + prop * half.abs();
    error = error.max(50.0 * f64::EPSILON * resabs);
    if !value.is_finite() {
        error = f64::INFINITY;
    }
    let width = (b - a).abs();
    let splittable = width > 1e-13 * (a.abs().max(b.abs()).max(1e-300));
    Panel {
        a,
        b,
        value,
        error,
        resabs,
        splittable,
    }
}

/// Globally adaptive Gauss-Kronrod (7/15) integration over the partition
/// given by `points` (at least two, increasing). The integrand returns
/// `(value, error)`.
pub fn adaptive_with_err<F>(mut f: F, points: &[f64], opts: &QuadOptions) -> Quadrature
where
    F: FnMut(f64) -> (f64, f64),
{
    assert!(points.len() >= 2, "need at least one interval");
    let mut panels: Vec<Panel> = points
        .windows(2)
        .filter(|w| w[1] > w[0])
        .map(|w| gk15(&mut f, w[0], w[1]))
        .collect();
    let mut evaluations = 15 * panels.len();
    if panels.is_empty() {
        return Quadrature {
            estimate: Estimate::ZERO,
            resabs: 0.0,
            converged: true,
            evaluations,
        };
    }
    let converged = loop {
        let (value, error, resabs) = totals(&panels);
        if error <= opts.target(value, resabs) {
            break true;
        }
        if !error.is_finite() && !value.is_finite() {
            break false;
        }
        if panels.len() >= opts.max_panels {
            break false;
        }
        let worst = panels
            .iter()
            .enumerate()
            .filter(|(_, p)| p.splittable)
            .max_by(|(_, p), (_, q)| p.error.total_cmp(&q.error))
            .map(|(i, _)| i);
        let Some(i) = worst else { break false };
        let p = panels.swap_remove(i);
        let mid = 0.5 * (p.a + p.b);
        panels.push(gk15(&mut f, p.a, mid));
        panels.push(gk15(&mut f, mid, p.b));
        evaluations += 30;
    };
    panels.sort_by(|p, q| p.a.total_cmp(&q.a));
    let (value, error, resabs) = totals(&panels);
    Quadrature {
        estimate: Estimate::new(value, error),
        resabs,
        converged,
        evaluations,
    }
}

fn totals(panels: &[Panel]) -> (f64, f64, f64) {
    let mut value = 0.0;
    let mut error = 0.0;
    let mut resabs = 0.0;
    for p in panels {
        value += p.value;
        error += p.error;
        resabs += p.resabs;
    }
    (value, error, resabs)
}

/// [`adaptive_with_err`] for an exact integrand.
pub fn adaptive<F>(mut f: F, points: &[f64], opts: &QuadOptions) -> Quadrature
where
    F: FnMut(f64) -> f64,
{
    adaptive_with_err(move |x| (f(x), 0.0), points, opts)
}

/// `n` evenly spaced breakpoints plus the end point, convenient as an
/// initial partition.
pub fn uniform_points(a: f64, b: f64, pieces: usize) -> Vec<f64> {
    let pieces = pieces.max(1);
    (0..=pieces)
        .map(|i| {
            if i == pieces {
                b
            } else {
                a + (b - a) * i as f64 / pieces as f64
            }
        })
        .collect()
}

/// Settings for the semi-infinite integrators.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailOptions {
    /// Requested relative accuracy of the whole integral.
    pub rel_tol: f64,
    /// Absolute floor below which the error is considered negligible.
    pub abs_tol: f64,
    /// Width of the first panel; widths double afterwards.
    pub first_width: f64,
    pub max_steps: usize,
}

impl Default for TailOptions {
    fn default() -> Self {
        TailOptions {
            rel_tol: 1e-11,
            abs_tol: 0.0,
            first_width: 1.0,
            max_steps: 64,
        }
    }
}

impl TailOptions {
    pub fn rel(rel_tol: f64) -> Self {
        TailOptions {
            rel_tol,
            ..Default::default()
        }
    }
}

/// Integrates `f` over `(-∞, top]`. `tail(T)` must return an enclosure of
/// `∫_{-∞}^{T} f`, or `None` when no enclosure is available at `T`.
/// Integration proceeds downwards in panels of doubling width and stops once
/// the tail enclosure is narrow enough or `floor` is reached.
pub fn integrate_down<F, T>(
    mut f: F,
    top: f64,
    floor: f64,
    mut tail: T,
    opts: &TailOptions,
) -> Quadrature
where
    F: FnMut(f64) -> (f64, f64),
    T: FnMut(f64) -> Option<Enclosure>,
{
    semi_infinite(&mut f, top, floor, &mut tail, opts, Direction::Down)
}

/// Mirror image of [`integrate_down`] over `[bottom, ∞)`; `tail(T)` encloses
/// `∫_{T}^{∞} f` and `ceiling` is the largest admissible abscissa.
pub fn integrate_up<F, T>(
    mut f: F,
    bottom: f64,
    ceiling: f64,
    mut tail: T,
    opts: &TailOptions,
) -> Quadrature
where
    F: FnMut(f64) -> (f64, f64),
    T: FnMut(f64) -> Option<Enclosure>,
{
    semi_infinite(&mut f, bottom, ceiling, &mut tail, opts, Direction::Up)
}

#[derive(Clone, Copy, PartialEq)]
enum Direction {
    Down,
    Up,
}

fn semi_infinite<F, T>(
    f: &mut F,
    start: f64,
    limit: f64,
    tail: &mut T,
    opts: &TailOptions,
    dir: Direction,
) -> Quadrature
where
    F: FnMut(f64) -> (f64, f64),
    T: FnMut(f64) -> Option<Enclosure>,
{
    let mut acc = Estimate::ZERO;
    let mut resabs = 0.0;
    let mut evaluations = 0;
    let mut edge = start;
    let mut width = opts.first_width;
    for _ in 0..opts.max_steps {
        let at_limit = match dir {
            Direction::Down => edge <= limit,
            Direction::Up => edge >= limit,
        };
        if let Some(enc) = tail(edge) {
            let t = enc.to_estimate();
            let total = acc + t;
            let target = opts.abs_tol.max(opts.rel_tol * total.value.abs());
            if t.error <= 0.25 * target || at_limit {
                let converged = total.error <= target;
                return Quadrature {
                    estimate: total,
                    resabs: resabs + t.value.abs(),
                    converged,
                    evaluations,
                };
            }
        } else if at_limit {
            break;
        }
        let next = match dir {
            Direction::Down => (edge - width).max(limit),
            Direction::Up => (edge + width).min(limit),
        };
        let (a, b) = match dir {
            Direction::Down => (next, edge),
            Direction::Up => (edge, next),
        };
        let panel_opts = QuadOptions::rel(0.05 * opts.rel_tol)
            .with_abs((0.05 * opts.rel_tol * acc.value.abs()).max(0.05 * opts.abs_tol));
        let q = adaptive_with_err(&mut *f, &uniform_points(a, b, 2), &panel_opts);
        acc += q.estimate;
        resabs += q.resabs;
        evaluations += q.evaluations;
        edge = next;
        width *= 2.0;
    }
    Quadrature {
        estimate: Estimate::new(acc.value, f64::INFINITY),
        resabs,
        converged: false,
        evaluations,
    }
}

/// Integral of an oscillating integrand over `[start, ∞)`, computed as the
/// limit of partial sums over consecutive segments of length `step`
/// (normally one half period, so the segment integrals alternate in sign).
/// The partial sums are accelerated by repeated pairwise averaging; the error
/// estimate is the spread of the best averaging level plus the segment
/// quadrature errors.
pub fn oscillatory_tail<F>(mut f: F, start: f64, step: f64, segments: usize) -> Estimate
where
    F: FnMut(f64) -> (f64, f64),
{
    let segments = segments.max(4);
    let mut partial = Vec::with_capacity(segments);
    let mut seg_err = 0.0;
    let mut sum = 0.0;
    let opts = QuadOptions::rel(1e-13).with_l1(1e-14);
    for k in 0..segments {
        let a = start + step * k as f64;
        let b = a + step;
        let q = adaptive_with_err(&mut f, &[a, 0.5 * (a + b), b], &opts);
        sum += q.value();
        seg_err += q.error();
        partial.push(sum);
    }
    let accel = accelerate_partial_sums(&partial);
    Estimate::new(accel.value, accel.error + seg_err)
}

/// Repeated pairwise averaging of a sequence of partial sums. Returns the
/// estimate from the level whose last two entries agree best, with that
/// disagreement as the error.
pub fn accelerate_partial_sums(partial: &[f64]) -> Estimate {
    let n = partial.len();
    if n == 0 {
        return Estimate::ZERO;
    }
    if n == 1 {
        return Estimate::new(partial[0], f64::INFINITY);
    }
    let mut level: Vec<f64> = partial.to_vec();
    let mut best = Estimate::new(
        level[n - 1],
        (level[n - 1] - level[n - 2]).abs(),
    );
    while level.len() > 2 {
        let next: Vec<f64> = level.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
        let m = next.len();
        let spread = (next[m - 1] - next[m - 2]).abs();
        let drift = (next[m - 1] - level[level.len() - 1]).abs();
        let err = spread.max(0.5 * drift.min(spread * 1e3));
        if err < best.error {
            best = Estimate::new(next[m - 1], err);
        }
        level = next;
    }
    let floor = 8.0 * f64::EPSILON * partial.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    Estimate::new(best.value, best.error.max(floor))
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        dp = if d != 0.0 { d } else { dp };
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let p = if n == 0 { 1.0 } else { p1 };
    let d = n as f64 * (x * p - p0) / (x * x - 1.0);
    (p, d)
}
