//! Limits of the normalised moments and operators along kernel sequences
//! whose exponents tend to 2 or to 0.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::functions::{Bump, PointFunction};
use crate::kernel::{Kernel, ScalingFunction};
use crate::normalizer::cphi_direct;
use crate::operator::{Operator, OperatorOptions};
use crate::special::ball_volume;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Target {
    ToTwo,
    ToZero,
}

impl Target {
    pub fn as_str(&self) -> &'static str {
        match self {
            Target::ToTwo => "to-2",
            Target::ToZero => "to-0",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "to-2" | "2" => Ok(Target::ToTwo),
            "to-0" | "0" => Ok(Target::ToZero),
            _ => Err(Error::invalid(format!("unknown target {s:?}, expected to-2 or to-0"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SequenceFamily {
    /// `Power(2 - 2^{-k})` or `Power(2^{-k})`.
    Power,
    /// `SumPowers(2 - 2^{1-k}, 2 - 2^{-k})` or `SumPowers(2^{-k}, 2^{1-k})`.
    SumPowers,
}

impl SequenceFamily {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "power" => Ok(SequenceFamily::Power),
            "sum_powers" => Ok(SequenceFamily::SumPowers),
            _ => Err(Error::invalid(format!(
                "unknown sequence family {s:?}, expected power or sum_powers"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KernelSequence {
    pub family: SequenceFamily,
    pub target: Target,
    pub ks: Vec<u32>,
}

impl KernelSequence {
    pub fn new(family: SequenceFamily, target: Target, ks: Vec<u32>) -> Result<Self> {
        if ks.is_empty() || ks.iter().any(|&k| k == 0 || k > 40) {
            return Err(Error::invalid("k values must lie in 1..=40"));
        }
        Ok(KernelSequence { family, target, ks })
    }

    /// The default sweep `k = 1..=12`.
    pub fn standard(family: SequenceFamily, target: Target) -> Self {
        KernelSequence {
            family,
            target,
            ks: (1..=12).collect(),
        }
    }

    pub fn scaling(&self, k: u32) -> Result<ScalingFunction> {
        let e = 2f64.powi(-(k as i32));
        match (self.family, self.target) {
            (SequenceFamily::Power, Target::ToTwo) => ScalingFunction::power(2.0 - e),
            (SequenceFamily::Power, Target::ToZero) => ScalingFunction::power(e),
            (SequenceFamily::SumPowers, Target::ToTwo) => ScalingFunction::sum_powers(2.0 - 2.0 * e, 2.0 - e),
            (SequenceFamily::SumPowers, Target::ToZero) => ScalingFunction::sum_powers(e, 2.0 * e),
        }
    }

    pub fn kernel(&self, k: u32) -> Result<Kernel> {
        Kernel::natural(self.scaling(k)?, None)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LimitRow {
    pub k: u32,
    pub value: f64,
    pub error: f64,
    pub target: f64,
    /// `|value - target| / |target|`, or the absolute gap when the target is 0.
    pub deviation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LimitSweepReport {
    pub quantity: String,
    pub n: usize,
    pub rows: Vec<LimitRow>,
    pub final_deviation: f64,
    pub threshold: f64,
}

impl LimitSweepReport {
    pub fn passed(&self) -> bool {
        self.final_deviation <= self.threshold
    }

    /// Whether the last `m` deviations decrease.
    pub fn tail_monotone(&self, m: usize) -> bool {
        let d: Vec<f64> = self.rows.iter().map(|r| r.deviation).collect();
        let start = d.len().saturating_sub(m);
        d[start..].windows(2).all(|w| w[1] <= w[0])
    }
}

fn deviation(value: f64, target: f64) -> f64 {
    if target == 0.0 {
        value.abs()
    } else {
        (value - target).abs() / target.abs()
    }
}

fn report(quantity: String, n: usize, rows: Vec<LimitRow>, threshold: f64) -> LimitSweepReport {
    let final_deviation = rows.last().map_or(f64::INFINITY, |r| r.deviation);
    LimitSweepReport {
        quantity,
        n,
        rows,
        final_deviation,
        threshold,
    }
}

fn moment_sweep(seq: &KernelSequence, n: usize, radius: f64, tol: f64, lower: bool) -> Result<LimitSweepReport> {
    let (want, target) = if lower {
        (Target::ToTwo, 2.0 / ball_volume(n))
    } else {
        (Target::ToZero, 1.0 / (n as f64 * ball_volume(n)))
    };
    if seq.target != want {
        return Err(Error::invalid(format!(
            "this limit needs a {} sequence, got {}",
            want.as_str(),
            seq.target.as_str()
        )));
    }
    let mut rows = Vec::with_capacity(seq.ks.len());
    for &k in &seq.ks {
        let kernel = seq.kernel(k)?;
        let c = cphi_direct(&kernel, n, tol)?.estimate();
        let m = if lower {
            kernel.lower_moment(radius, tol)?
        } else {
            kernel.upper_moment(radius, tol)?
        };
        let v = c.times(m.estimate());
        rows.push(LimitRow {
            k,
            value: v.value,
            error: v.error,
            target,
            deviation: deviation(v.value, target),
        });
    }
    let name = if lower { "cphi*lower_moment" } else { "cphi*upper_moment" };
    Ok(report(format!("{name}(R={radius})"), n, rows, 0.01))
}

/// `C_{φ_k} C̲_{φ_k}(R) → 2/ω_n` along a to-2 sequence.
pub fn limit_product_lower(seq: &KernelSequence, n: usize, radius: f64, tol: f64) -> Result<LimitSweepReport> {
    moment_sweep(seq, n, radius, tol, true)
}

/// `C_{φ_k} C̄_{φ_k}(R) → 1/(nω_n)` along a to-0 sequence.
pub fn limit_product_upper(seq: &KernelSequence, n: usize, radius: f64, tol: f64) -> Result<LimitSweepReport> {
    moment_sweep(seq, n, radius, tol, false)
}

/// `-L_k u(x)` for the polynomial bump; the limit is `-Δu(x)` along to-2
/// sequences and `u(x)` along to-0 sequences.
pub fn operator_limit(seq: &KernelSequence, n: usize, x: &[f64], tol: f64) -> Result<LimitSweepReport> {
    let u = Bump { n };
    let target = match seq.target {
        Target::ToTwo => {
            let h = u.hessian(x);
            -(0..n).map(|i| h[i * n + i]).sum::<f64>()
        }
        Target::ToZero => u.value(x),
    };
    let opts = OperatorOptions {
        tol,
        ..Default::default()
    };
    let mut rows = Vec::with_capacity(seq.ks.len());
    for &k in &seq.ks {
        let kernel = seq.kernel(k)?;
        let op = Operator::new(&kernel, n, opts)?;
        let v = op.linear_apply(&u, x)?;
        rows.push(LimitRow {
            k,
            value: -v.value,
            error: v.error,
            target,
            deviation: deviation(-v.value, target),
        });
    }
    Ok(report(format!("-L_k bump at {x:?}"), n, rows, 0.02))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::normalizer::cphi_power_closed_form;

    #[test]
    fn lower_limit_power_sweep() {
        for n in [1, 2] {
            let seq = KernelSequence::new(SequenceFamily::Power, Target::ToTwo, (1..=10).collect()).unwrap();
            let rep = limit_product_lower(&seq, n, 1.0, 1e-10).unwrap();
            assert!(rep.passed(), "{rep:?}");
            assert!(rep.tail_monotone(4));
            for row in &rep.rows {
                let s = 2.0 - 2f64.powi(-(row.k as i32));
                let oracle = cphi_power_closed_form(n, s).unwrap() / (2.0 - s);
                assert!((row.value - oracle).abs() <= 1e-8 * oracle, "{row:?} vs {oracle}");
            }
        }
    }

    #[test]
    fn upper_limit_targets() {
        let seq = KernelSequence::new(SequenceFamily::Power, Target::ToZero, vec![10]).unwrap();
        let rep = limit_product_upper(&seq, 3, 1.0, 1e-10).unwrap();
        assert!((rep.rows[0].target - 1.0 / (4.0 * std::f64::consts::PI)).abs() < 1e-15);
        assert!(rep.passed(), "{rep:?}");
    }

    #[test]
    fn mismatched_target_is_rejected() {
        let seq = KernelSequence::standard(SequenceFamily::Power, Target::ToZero);
        assert!(limit_product_lower(&seq, 1, 1.0, 1e-8).is_err());
        assert!(KernelSequence::new(SequenceFamily::Power, Target::ToTwo, vec![]).is_err());
    }

    #[test]
    fn sum_powers_sequence_is_admissible() {
        for t in [Target::ToTwo, Target::ToZero] {
            let seq = KernelSequence::standard(SequenceFamily::SumPowers, t);
            for k in 1..=12 {
                assert!(seq.kernel(k).is_ok());
            }
        }
    }
}
