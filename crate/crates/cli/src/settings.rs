use std::fs;
use std::str::FromStr;

use serde_json::{Map, Value};
use varorder::config::{kernel_from, KeyValues, KERNEL_KEYS};
use varorder::{Kernel, LogLogTable};

use crate::failure::Failure;
use crate::Common;

const GENERAL_KEYS: [&str; 8] = ["n", "tol", "seed", "lambda", "Lambda", "R", "kappa1", "h"];

/// Config file plus `--set` entries, with every value actually used
/// recorded for the artifacts.
pub struct Settings {
    kv: KeyValues,
    resolved: Map<String, Value>,
    pub seed: u64,
}

impl Settings {
    pub fn load(common: &Common) -> Result<Self, Failure> {
        let mut kv = match &common.config {
            Some(path) => {
                let text = fs::read_to_string(path)
                    .map_err(|e| Failure::Config(format!("reading {}: {e}", path.display())))?;
                KeyValues::parse(&text)?
            }
            None => KeyValues::default(),
        };
        for entry in &common.set {
            let (k, v) = entry
                .split_once('=')
                .ok_or_else(|| Failure::Config(format!("--set expects KEY=VALUE, got {entry:?}")))?;
            kv.set(k.trim(), v.trim());
        }
        let allowed: Vec<&str> = KERNEL_KEYS.iter().chain(GENERAL_KEYS.iter()).copied().collect();
        kv.check_allowed(&allowed)?;
        let mut s = Settings {
            kv,
            resolved: Map::new(),
            seed: 0,
        };
        s.seed = s.value("seed", common.seed, 0u64)?;
        s.record("seed", Value::from(s.seed));
        Ok(s)
    }

    fn record(&mut self, key: &str, v: Value) {
        self.resolved.insert(key.to_string(), v);
    }

    fn value<T: FromStr + Copy>(&self, key: &str, flag: Option<T>, default: T) -> Result<T, Failure> {
        if let Some(v) = flag {
            return Ok(v);
        }
        match self.kv.get(key) {
            Some(text) => text
                .parse::<T>()
                .map_err(|_| Failure::Config(format!("{key}: cannot parse {text:?}"))),
            None => Ok(default),
        }
    }

    pub fn f64(&mut self, key: &str, flag: Option<f64>, default: f64) -> Result<f64, Failure> {
        let v = self.value(key, flag, default)?;
        if !v.is_finite() {
            return Err(Failure::Config(format!("{key} must be finite")));
        }
        self.record(key, Value::from(v));
        Ok(v)
    }

    pub fn positive(&mut self, key: &str, flag: Option<f64>, default: f64) -> Result<f64, Failure> {
        let v = self.f64(key, flag, default)?;
        if v <= 0.0 {
            return Err(Failure::Config(format!("{key} must be positive, got {v}")));
        }
        Ok(v)
    }

    pub fn usize(&mut self, key: &str, flag: Option<usize>, default: usize) -> Result<usize, Failure> {
        let v = self.value(key, flag, default)?;
        self.record(key, Value::from(v));
        Ok(v)
    }

    pub fn tol(&mut self, common: &Common, default: f64) -> Result<f64, Failure> {
        self.positive("tol", common.tol, default)
    }

    /// Records a subcommand-only parameter.
    pub fn note(&mut self, key: &str, v: impl Into<Value>) {
        self.record(key, v.into());
    }

    pub fn kernel(&mut self) -> Result<Kernel, Failure> {
        let table = match self.kv.get("table") {
            Some(path) => Some(read_table(path)?),
            None => None,
        };
        let kernel = kernel_from(&self.kv, table)?;
        for k in KERNEL_KEYS {
            if let Some(v) = self.kv.get(k) {
                self.resolved.insert(k.to_string(), Value::String(v.to_string()));
            }
        }
        let c = kernel.cert;
        self.record("cert_a", Value::from(c.a));
        self.record("cert_sigma_lower", Value::from(c.sigma_lower));
        self.record("cert_sigma_upper", Value::from(c.sigma_upper));
        self.record("cert_sigma0", Value::from(c.sigma0));
        Ok(kernel)
    }

    pub fn kernel_key(&self, key: &str) -> Option<&str> {
        self.kv.get(key)
    }

    pub fn resolved(&self) -> Map<String, Value> {
        self.resolved.clone()
    }
}

/// Two-column `r,phi` samples; a non-numeric first row is a header.
fn read_table(path: &str) -> Result<LogLogTable, Failure> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| Failure::Config(format!("reading table {path}: {e}")))?;
    let mut pairs = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        let rec = rec.map_err(|e| Failure::Config(format!("table {path}: {e}")))?;
        let parsed = (rec.get(0).map(str::parse::<f64>), rec.get(1).map(str::parse::<f64>));
        match parsed {
            (Some(Ok(r)), Some(Ok(phi))) => pairs.push((r, phi)),
            _ if i == 0 => continue,
            _ => return Err(Failure::Config(format!("table {path}: bad row {}", i + 1))),
        }
    }
    Ok(LogLogTable::from_pairs(&pairs)?)
}

pub fn parse_list(key: &str, text: &str) -> Result<Vec<f64>, Failure> {
    text.split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| Failure::Config(format!("{key}: bad number {s:?}")))
        })
        .collect()
}
