use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;
use wavekin::io::{to_versioned_json, SCHEMA_VERSION};
use wavekin::Result;

pub const MANIFEST_NAME: &str = "manifest.json";

/// Record of one invocation: enough to rerun it and reproduce every CSV.
#[derive(Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct RunManifest {
    pub schema_version: u32,
    pub command: String,
    pub argv: Vec<String>,
    /// Effective configuration, defaults included.
    pub config: serde_json::Value,
    pub seeds: Vec<u64>,
    pub tool_version: String,
    pub outputs: Vec<String>,
    pub wall_seconds: f64,
    pub status: String,
}

/// Output directory plus the bookkeeping that ends up in the manifest.
pub struct Run {
    dir: PathBuf,
    command: String,
    start: Instant,
    pub config: serde_json::Value,
    pub seeds: Vec<u64>,
    outputs: Vec<String>,
}

impl Run {
    pub fn new(dir: &Path, command: &str) -> Result<Self> {
        std::fs::create_dir_all(dir)?;
        Ok(Run {
            dir: dir.to_path_buf(),
            command: command.into(),
            start: Instant::now(),
            config: serde_json::Value::Null,
            seeds: Vec::new(),
            outputs: Vec::new(),
        })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    pub fn text(&mut self, name: &str, body: &str) -> Result<PathBuf> {
        let p = self.path(name);
        std::fs::write(&p, body)?;
        self.outputs.push(name.into());
        Ok(p)
    }

    /// JSON artifact with `schemaVersion` and a `manifest` back-reference.
    pub fn json<T: Serialize + ?Sized>(&mut self, name: &str, value: &T) -> Result<PathBuf> {
        let mut v = to_versioned_json(value)?;
        if let serde_json::Value::Object(m) = &mut v {
            m.insert("manifest".into(), MANIFEST_NAME.into());
        }
        self.text(name, &(serde_json::to_string_pretty(&v)? + "\n"))
    }

    pub fn finish(self, argv: &[String], status: &str) -> Result<()> {
        let m = RunManifest {
            schema_version: SCHEMA_VERSION,
            command: self.command,
            argv: argv.to_vec(),
            config: self.config,
            seeds: self.seeds,
            tool_version: env!("CARGO_PKG_VERSION").into(),
            outputs: self.outputs,
            wall_seconds: self.start.elapsed().as_secs_f64(),
            status: status.into(),
        };
        std::fs::write(self.dir.join(MANIFEST_NAME), serde_json::to_string_pretty(&m)? + "\n")?;
        Ok(())
    }
}
