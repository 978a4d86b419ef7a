//! Flat `key=value` configuration text and kernel construction from it.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::kernel::{Kernel, LogLogTable, ScalingFunction, WeakScalingCertificate};

pub const KERNEL_KEYS: [&str; 7] = ["family", "sigma", "sigma_lower", "sigma_upper", "a", "sigma0", "table"];

/// Parsed `key=value` pairs. Blank lines and `#` comments are skipped.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct KeyValues {
    pub entries: BTreeMap<String, String>,
}

impl KeyValues {
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::invalid(format!("line {}: expected key=value, got {raw:?}", i + 1)))?;
            let (k, v) = (k.trim(), v.trim());
            if k.is_empty() || v.is_empty() {
                return Err(Error::invalid(format!("line {}: empty key or value", i + 1)));
            }
            if entries.insert(k.to_string(), v.to_string()).is_some() {
                return Err(Error::invalid(format!("line {}: duplicate key {k:?}", i + 1)));
            }
        }
        Ok(KeyValues { entries })
    }

    /// Rejects keys outside `allowed`.
    pub fn check_allowed(&self, allowed: &[&str]) -> Result<()> {
        let unknown: Vec<&str> = self
            .entries
            .keys()
            .map(String::as_str)
            .filter(|k| !allowed.contains(k))
            .collect();
        if unknown.is_empty() {
            Ok(())
        } else {
            Err(Error::invalid(format!("unknown config keys: {}", unknown.join(", "))))
        }
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }

    pub fn set(&mut self, key: &str, value: impl ToString) {
        self.entries.insert(key.to_string(), value.to_string());
    }

    pub fn f64(&self, key: &str) -> Result<Option<f64>> {
        self.get(key)
            .map(|v| {
                v.parse::<f64>()
                    .ok()
                    .filter(|x| x.is_finite())
                    .ok_or_else(|| Error::invalid(format!("{key}: not a finite number: {v:?}")))
            })
            .transpose()
    }

    pub fn usize(&self, key: &str) -> Result<Option<usize>> {
        self.get(key)
            .map(|v| {
                v.parse::<usize>()
                    .map_err(|_| Error::invalid(format!("{key}: not a nonnegative integer: {v:?}")))
            })
            .transpose()
    }

    fn require(&self, key: &str) -> Result<f64> {
        self.f64(key)?
            .ok_or_else(|| Error::invalid(format!("missing key {key:?} for family {:?}", self.get("family").unwrap_or(""))))
    }
}

/// Builds the kernel described by the kernel keys. `table` must be given
/// when `family=table`; such kernels also need `a`, `sigma_lower` and
/// `sigma_upper` as their certificate. For the analytic families `a`
/// widens the exact certificate.
pub fn kernel_from(kv: &KeyValues, table: Option<LogLogTable>) -> Result<Kernel> {
    let family = kv.get("family").ok_or_else(|| Error::invalid("missing key \"family\""))?;
    let sigma0 = kv.f64("sigma0")?;
    let phi = match family {
        "power" => ScalingFunction::power(kv.require("sigma")?)?,
        "sum_powers" => ScalingFunction::sum_powers(kv.require("sigma_lower")?, kv.require("sigma_upper")?)?,
        "log_lower" => ScalingFunction::log_lower(kv.require("sigma_lower")?, kv.require("sigma_upper")?)?,
        "log_upper" => ScalingFunction::log_upper(kv.require("sigma_lower")?, kv.require("sigma_upper")?)?,
        "table" => {
            let t = table.ok_or_else(|| Error::invalid("family=table needs a table file"))?;
            let phi = ScalingFunction::table(t);
            let lo = kv.require("sigma_lower")?;
            let cert = WeakScalingCertificate::new(
                kv.require("a")?,
                lo,
                kv.require("sigma_upper")?,
                sigma0.unwrap_or(lo),
            )?;
            return Ok(Kernel::new(phi, cert));
        }
        other => {
            return Err(Error::invalid(format!(
                "unknown family {other:?}, expected power, sum_powers, log_lower, log_upper or table"
            )))
        }
    };
    let mut kernel = Kernel::natural(phi, sigma0)?;
    if let Some(a) = kv.f64("a")? {
        let c = kernel.cert;
        kernel.cert = WeakScalingCertificate::new(a, c.sigma_lower, c.sigma_upper, c.sigma0)?;
    }
    Ok(kernel)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_builds() {
        let kv = KeyValues::parse("# kernel\nfamily = sum_powers\nsigma_lower=0.5\nsigma_upper=1.5 # inline\n\n").unwrap();
        let k = kernel_from(&kv, None).unwrap();
        assert_eq!(k.label(), ScalingFunction::sum_powers(0.5, 1.5).unwrap().label());
        assert_eq!(k.cert.sigma0, 0.5);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(KeyValues::parse("family").is_err());
        assert!(KeyValues::parse("a=1\na=2").is_err());
        let kv = KeyValues::parse("famly=power").unwrap();
        assert!(kv.check_allowed(&KERNEL_KEYS).is_err());
        assert!(kernel_from(&KeyValues::parse("family=power").unwrap(), None).is_err());
        assert!(kernel_from(&KeyValues::parse("family=power\nsigma=x").unwrap(), None).is_err());
        assert!(kernel_from(&KeyValues::parse("family=power\nsigma=1\na=0.5").unwrap(), None).is_err());
        assert!(kernel_from(&KeyValues::parse("family=table\na=1\nsigma_lower=1\nsigma_upper=1").unwrap(), None).is_err());
    }

    #[test]
    fn explicit_a_widens_certificate() {
        let kv = KeyValues::parse("family=power\nsigma=1\na=2\nsigma0=0.5").unwrap();
        let k = kernel_from(&kv, None).unwrap();
        assert_eq!((k.cert.a, k.cert.sigma_lower, k.cert.sigma0), (2.0, 1.0, 0.5));
    }
}
