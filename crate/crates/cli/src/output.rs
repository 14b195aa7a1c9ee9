//! Output files. Every file carries the embedded run configuration: JSON
//! files under `"config"`, CSV files as a block of `# ` comment lines above the
//! header row.

use std::path::{Path, PathBuf};

use serde_json::Value;

use crate::config::Embedded;
use crate::CliError;

pub struct Output {
    dir: PathBuf,
    embedded: Embedded,
    written: Vec<PathBuf>,
}

impl Output {
    pub fn new(dir: &Path, embedded: Embedded) -> Result<Self, CliError> {
        std::fs::create_dir_all(dir)
            .map_err(|e| CliError::Failed(format!("cannot create output directory {}: {e}", dir.display())))?;
        Ok(Self {
            dir: dir.to_path_buf(),
            embedded,
            written: Vec::new(),
        })
    }

    pub fn config(&self) -> Value {
        self.embedded.to_json()
    }

    fn write(&mut self, name: &str, bytes: &[u8]) -> Result<(), CliError> {
        let path = self.dir.join(name);
        if let Some(parent) = path.parent() {
            std::fs::create_dir_all(parent).map_err(|e| CliError::Failed(format!("{}: {e}", parent.display())))?;
        }
        std::fs::write(&path, bytes).map_err(|e| CliError::Failed(format!("{}: {e}", path.display())))?;
        self.written.push(path);
        Ok(())
    }

    /// CSV body produced by `body`, preceded by the commented configuration.
    pub fn csv<F>(&mut self, name: &str, body: F) -> Result<(), CliError>
    where
        F: FnOnce(&mut Vec<u8>) -> qha_core::Result<()>,
    {
        let mut bytes = self.embedded.comment_block().into_bytes();
        body(&mut bytes)?;
        self.write(name, &bytes)
    }

    /// JSON object with `schema_version` and `config` added at the top level.
    pub fn json(&mut self, name: &str, mut value: Value) -> Result<(), CliError> {
        if let Value::Object(map) = &mut value {
            map.insert("schema_version".into(), Value::String(qha_core::experiments::SCHEMA_VERSION.into()));
            map.insert("config".into(), self.config());
        }
        let mut text = serde_json::to_string_pretty(&value).map_err(|e| CliError::Failed(e.to_string()))?;
        text.push('\n');
        self.write(name, text.as_bytes())
    }

    /// Raw bytes that already embed the configuration.
    pub fn raw(&mut self, name: &str, bytes: &[u8]) -> Result<(), CliError> {
        self.write(name, bytes)
    }

    pub fn written(&self) -> &[PathBuf] {
        &self.written
    }
}
