use std::io::Write;
use std::path::{Path, PathBuf};

use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::config::{config_hash, hex, RunConfig};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(header: Vec<String>) -> Self {
        Table { header, rows: Vec::new() }
    }

    fn to_bytes(&self, comment: &str) -> anyhow::Result<Vec<u8>> {
        let mut buf = Vec::new();
        writeln!(buf, "# {comment}")?;
        let mut w = csv::Writer::from_writer(buf);
        w.write_record(&self.header)?;
        for r in &self.rows {
            // shortest round-trip formatting keeps output byte-stable
            w.write_record(r.iter().map(|v| format!("{v:?}")))?;
        }
        Ok(w.into_inner().map_err(|e| e.into_error())?)
    }
}

/// What a command produced, ready to be written.
pub struct Emitted {
    pub command: &'static str,
    pub config: RunConfig,
    pub model: Value,
    pub summary: Value,
}

impl Emitted {
    pub fn hash(&self) -> String {
        config_hash(self.command, &self.config)
    }

    fn metadata(&self, outputs: Vec<Value>) -> Value {
        serde_json::json!({
            "tool": "pltd",
            "version": VERSION,
            "command": self.command,
            "config": self.config,
            "config_sha256": self.hash(),
            "model": self.model,
            "summary": self.summary,
            "outputs": outputs,
        })
    }

    /// CSV to `--out` (metadata next to it as `<out>.meta.json`) or to stdout
    /// (metadata as one JSON line on stderr). Returns the CSV digest.
    pub fn write_table(&self, table: &Table) -> anyhow::Result<String> {
        let comment = format!("pltd {VERSION} command={} config-sha256={}", self.command, self.hash());
        let bytes = table.to_bytes(&comment)?;
        let digest = hex(&Sha256::digest(&bytes));
        match &self.config.out {
            Some(p) => {
                std::fs::write(p, &bytes)?;
                let name = file_name(p);
                let meta = self.metadata(vec![serde_json::json!({ "file": name, "sha256": digest })]);
                std::fs::write(meta_path(p), pretty(&meta)?)?;
            }
            None => {
                std::io::stdout().write_all(&bytes)?;
                eprintln!("{}", self.metadata(vec![serde_json::json!({ "file": "-", "sha256": digest })]));
            }
        }
        Ok(digest)
    }

    /// A JSON report with the metadata folded in.
    pub fn write_report(&self, report: Value) -> anyhow::Result<()> {
        let mut meta = self.metadata(vec![]);
        meta["report"] = report;
        let text = pretty(&meta)?;
        match &self.config.out {
            Some(p) => std::fs::write(p, text)?,
            None => std::io::stdout().write_all(text.as_bytes())?,
        }
        Ok(())
    }
}

pub fn meta_path(p: &Path) -> PathBuf {
    let mut s = p.as_os_str().to_owned();
    s.push(".meta.json");
    PathBuf::from(s)
}

pub fn file_name(p: &Path) -> String {
    p.file_name().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default()
}

pub fn pretty(v: &Value) -> anyhow::Result<String> {
    Ok(serde_json::to_string_pretty(v)? + "\n")
}
