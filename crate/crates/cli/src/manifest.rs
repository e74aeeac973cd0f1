//! Run manifests: every resolved configuration value, recorded as JSON next
//! to the command's outputs. Timestamps live only here.

use std::path::Path;

use serde::Serialize;

use crate::errors::Result;

#[derive(Serialize)]
pub struct Manifest {
    pub command: String,
    pub seed: u64,
    pub inputs: Vec<String>,
    pub resolved: serde_json::Value,
    pub generated_at_unix: u64,
}

impl Manifest {
    pub fn new(command: &str, seed: u64, inputs: Vec<String>, resolved: serde_json::Value) -> Self {
        Manifest {
            command: command.to_string(),
            seed,
            inputs,
            resolved,
            generated_at_unix: std::time::SystemTime::now()
                .duration_since(std::time::UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0),
        }
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self)
            .map_err(|e| crate::errors::CliError::io(e.to_string()))?;
        std::fs::write(path, text)?;
        Ok(())
    }
}
