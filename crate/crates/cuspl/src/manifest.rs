//! Per-run provenance record.

use serde_json::{Map, Value};

use crate::cache;

/// Emitted with every run. `output_checksum` covers only the deterministic
/// part of the output, so identical inputs give identical checksums.
#[derive(Debug, Clone)]
pub struct RunManifest {
    pub subcommand: String,
    pub parameters: Map<String, Value>,
    pub library_version: &'static str,
    pub coefficient_checksum: Option<String>,
    pub wall_clock_seconds: f64,
    pub output_checksum: String,
}

impl RunManifest {
    pub fn new(subcommand: &str, parameters: Map<String, Value>) -> Self {
        RunManifest {
            subcommand: subcommand.to_string(),
            parameters,
            library_version: env!("CARGO_PKG_VERSION"),
            coefficient_checksum: None,
            wall_clock_seconds: 0.0,
            output_checksum: String::new(),
        }
    }

    pub fn set_output(&mut self, bytes: &[u8]) {
        self.output_checksum = cache::checksum(bytes);
    }

    pub fn to_json(&self) -> Value {
        let mut m = Map::new();
        m.insert("subcommand".into(), self.subcommand.clone().into());
        m.insert("parameters".into(), Value::Object(self.parameters.clone()));
        m.insert("library_version".into(), self.library_version.into());
        m.insert(
            "coefficient_checksum".into(),
            self.coefficient_checksum.clone().map_or(Value::Null, Value::String),
        );
        m.insert("wall_clock_seconds".into(), crate::format::num(self.wall_clock_seconds));
        m.insert("output_checksum".into(), self.output_checksum.clone().into());
        Value::Object(m)
    }
}
