use std::io::Write;
use std::path::Path;

use serde::Serialize;
use serde_json::{json, Map, Value};

use dclab_core::NORMALIZATION_VERSION;

use crate::args::Format;

/// One result table, rendered either as CSV or inside the JSON `data` member.
pub struct Artifact {
    pub command: &'static str,
    pub meta: Map<String, Value>,
    pub data: Value,
    pub columns: Vec<(&'static str, &'static str)>,
    pub rows: Vec<Vec<String>>,
}

impl Artifact {
    pub fn new(command: &'static str, data: impl Serialize) -> Self {
        Artifact {
            command,
            meta: Map::new(),
            data: serde_json::to_value(data).expect("artifact data serializes"),
            columns: Vec::new(),
            rows: Vec::new(),
        }
    }

    pub fn meta(mut self, key: &str, value: impl Serialize) -> Self {
        self.meta
            .insert(key.to_string(), serde_json::to_value(value).expect("meta serializes"));
        self
    }

    /// Column names with their units.
    pub fn columns(mut self, columns: &[(&'static str, &'static str)]) -> Self {
        self.columns = columns.to_vec();
        self
    }

    pub fn row(&mut self, cells: Vec<String>) {
        self.rows.push(cells);
    }

    fn full_meta(&self) -> Value {
        let mut m = Map::new();
        m.insert("tool".into(), json!("dclab"));
        m.insert("version".into(), json!(env!("CARGO_PKG_VERSION")));
        m.insert("command".into(), json!(self.command));
        m.insert("normalization_version".into(), json!(NORMALIZATION_VERSION));
        for (k, v) in &self.meta {
            m.insert(k.clone(), v.clone());
        }
        Value::Object(m)
    }

    pub fn render(&self, format: Format) -> Result<String, String> {
        match format {
            Format::Json => {
                let doc = json!({ "meta": self.full_meta(), "data": self.data });
                serde_json::to_string_pretty(&doc).map(|s| s + "\n").map_err(|e| e.to_string())
            }
            Format::Csv => {
                let mut w = csv::Writer::from_writer(Vec::new());
                let header: Vec<String> = self
                    .columns
                    .iter()
                    .map(|(name, unit)| format!("{name} [{unit}; {NORMALIZATION_VERSION}]"))
                    .collect();
                w.write_record(&header).map_err(|e| e.to_string())?;
                for r in &self.rows {
                    w.write_record(r).map_err(|e| e.to_string())?;
                }
                let bytes = w.into_inner().map_err(|e| e.to_string())?;
                String::from_utf8(bytes).map_err(|e| e.to_string())
            }
        }
    }

    pub fn emit(&self, format: Format, output: Option<&Path>) -> Result<(), String> {
        let text = self.render(format)?;
        match output {
            Some(p) => std::fs::write(p, text).map_err(|e| format!("{}: {e}", p.display())),
            None => std::io::stdout().write_all(text.as_bytes()).map_err(|e| e.to_string()),
        }
    }
}

/// Shortest round-trip representation, so CSV cells are bit-exact.
pub fn num(v: f64) -> String {
    format!("{v:?}")
}
