//! Writers that stamp every artifact with the config hash and seed.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;
use serde_json::json;

pub struct Output {
    dir: PathBuf,
    command: &'static str,
    config_hash: String,
    seed: u64,
}

impl Output {
    pub fn new(dir: &Path, command: &'static str, config_hash: String, seed: u64) -> Result<Self> {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        Ok(Self {
            dir: dir.to_path_buf(),
            command,
            config_hash,
            seed,
        })
    }

    pub fn config_hash(&self) -> &str {
        &self.config_hash
    }

    fn write(&self, name: &str, body: &str) -> Result<PathBuf> {
        let path = self.dir.join(name);
        fs::write(&path, body).with_context(|| format!("writing {}", path.display()))?;
        Ok(path)
    }

    fn preamble(&self, comment: &str) -> String {
        format!(
            "{comment} shapelink {} {}\n{comment} config_hash = {}\n{comment} seed = {}\n",
            self.command,
            env!("CARGO_PKG_VERSION"),
            self.config_hash,
            self.seed
        )
    }

    /// CSV with `#` provenance lines ahead of the header.
    pub fn csv(&self, name: &str, header: &str, rows: impl IntoIterator<Item = String>) -> Result<PathBuf> {
        let mut body = self.preamble("#");
        body.push_str(header);
        body.push('\n');
        for r in rows {
            body.push_str(&r);
            body.push('\n');
        }
        self.write(name, &body)
    }

    /// A CSV body that already carries its own header line.
    pub fn csv_body(&self, name: &str, body: &str) -> Result<PathBuf> {
        self.write(name, &(self.preamble("#") + body))
    }

    /// JSON object `{command, config_hash, seed, data}`.
    pub fn json<T: Serialize>(&self, name: &str, data: &T) -> Result<PathBuf> {
        let doc = json!({
            "command": self.command,
            "version": env!("CARGO_PKG_VERSION"),
            "config_hash": self.config_hash,
            "seed": self.seed,
            "data": data,
        });
        self.write(name, &(serde_json::to_string_pretty(&doc)? + "\n"))
    }

    /// TOML with `#` provenance lines.
    pub fn toml<T: Serialize>(&self, name: &str, data: &T) -> Result<PathBuf> {
        let body = toml::to_string_pretty(data).context("encoding TOML")?;
        self.write(name, &(self.preamble("#") + &body))
    }
}
