use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde_json::{Map, Value};

use crate::failure::Failure;

pub const TOOL: &str = concat!("varorder ", env!("CARGO_PKG_VERSION"));

/// Writes CSV and JSON files into one directory, each stamped with the tool
/// version and the resolved configuration.
pub struct Artifacts {
    dir: PathBuf,
    config: Map<String, Value>,
}

impl Artifacts {
    pub fn new(dir: &Path, config: Map<String, Value>) -> Result<Self, Failure> {
        fs::create_dir_all(dir).map_err(|e| Failure::Io(format!("creating {}: {e}", dir.display())))?;
        Ok(Artifacts {
            dir: dir.to_path_buf(),
            config,
        })
    }

    fn config_line(&self) -> String {
        self.config
            .iter()
            .map(|(k, v)| match v {
                Value::String(s) => format!("{k}={s}"),
                other => format!("{k}={other}"),
            })
            .collect::<Vec<_>>()
            .join(" ")
    }

    /// The JSON document `{tool, config, ...body}`; also returned for printing.
    pub fn json(&self, name: &str, body: Value) -> Result<String, Failure> {
        let mut doc = Map::new();
        doc.insert("tool".into(), Value::String(TOOL.into()));
        doc.insert("config".into(), Value::Object(self.config.clone()));
        if let Value::Object(fields) = body {
            doc.extend(fields);
        }
        let text = serde_json::to_string_pretty(&Value::Object(doc)).map_err(|e| Failure::Io(e.to_string()))? + "\n";
        let path = self.dir.join(name);
        fs::write(&path, &text).map_err(|e| Failure::Io(format!("writing {}: {e}", path.display())))?;
        Ok(text)
    }

    pub fn csv(&self, name: &str, header: &[&str], rows: &[Vec<String>]) -> Result<(), Failure> {
        let path = self.dir.join(name);
        let io = |e: std::io::Error| Failure::Io(format!("writing {}: {e}", path.display()));
        let mut file = fs::File::create(&path).map_err(io)?;
        writeln!(file, "# {TOOL}").map_err(io)?;
        writeln!(file, "# config: {}", self.config_line()).map_err(io)?;
        let mut w = csv::Writer::from_writer(file);
        let csv_err = |e: csv::Error| Failure::Io(format!("writing {}: {e}", path.display()));
        w.write_record(header).map_err(csv_err)?;
        for r in rows {
            w.write_record(r).map_err(csv_err)?;
        }
        w.flush().map_err(io)?;
        Ok(())
    }
}

/// Shortest round-trip decimal form.
pub fn num(x: f64) -> String {
    format!("{x:?}")
}
