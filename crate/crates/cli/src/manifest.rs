//! Run manifests: every output file gets a sidecar
//! `<out>.manifest.json` recording the command, the fully resolved
//! configuration (defaults materialized), the seed, and the input/output
//! paths. Re-running the recorded invocation reproduces the outputs byte
//! for byte.

use std::path::Path;

use serde::Serialize;
use serde_json::Value;

use crate::CliError;

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub version: String,
    pub seed: u64,
    pub config: Value,
    pub inputs: Vec<String>,
    pub outputs: Vec<String>,
}

impl RunManifest {
    pub fn new(command: &str, seed: u64, config: Value) -> Self {
        Self {
            command: command.to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            seed,
            config,
            inputs: Vec::new(),
            outputs: Vec::new(),
        }
    }

    pub fn input(mut self, path: &Path) -> Self {
        self.inputs.push(path.display().to_string());
        self
    }

    pub fn output(mut self, path: &Path) -> Self {
        self.outputs.push(path.display().to_string());
        self
    }

    /// Write the sidecar next to `out`.
    pub fn write_sidecar(&self, out: &Path) -> Result<(), CliError> {
        let mut path = out.as_os_str().to_owned();
        path.push(".manifest.json");
        crate::dataio::write_json(Path::new(&path), self)
    }
}
