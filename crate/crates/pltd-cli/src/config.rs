use std::path::{Path, PathBuf};

use clap::Args;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use sha2::{Digest, Sha256};

use crate::fail::config_error;

/// Options shared by every command. A JSON config file uses the same keys
/// (`N` and `T` in upper case); flags override the file.
#[derive(Args, Serialize, Deserialize, Default, Clone, Debug, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Bialgebra: su2 or sl2r.
    #[arg(long)]
    pub algebra: Option<String>,
    /// modified-principal, modified-principal-real, pure-qt, principal,
    /// principal-limit(μ), g-invariant(μ) or custom(λ,μ).
    #[arg(long)]
    pub preset: Option<String>,
    /// λ for a custom splitting (use with --mu instead of --preset).
    #[arg(long, allow_hyphen_values = true)]
    pub lambda: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub mu: Option<String>,
    /// Grid intervals on [0, π].
    #[arg(long = "N")]
    #[serde(rename = "N")]
    pub n: Option<usize>,
    #[arg(long, allow_hyphen_values = true)]
    pub dt: Option<f64>,
    /// Final time.
    #[arg(long = "T", allow_hyphen_values = true)]
    #[serde(rename = "T")]
    pub t: Option<f64>,
    /// double-neumann, periodic or free.
    #[arg(long)]
    pub bc: Option<String>,
    /// ChaCha8 seed for every random input.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Initial data: identity or random (particle); two-wave, random or
    /// pointlike (field, duality).
    #[arg(long)]
    pub init: Option<String>,
    /// Amplitude of random or pulse initial data.
    #[arg(long, allow_hyphen_values = true)]
    pub amp: Option<f64>,
    /// Write every n-th step.
    #[arg(long)]
    pub every: Option<usize>,
    /// Initial particle momentum, comma separated (complex allowed: 1+2i).
    #[arg(long, allow_hyphen_values = true)]
    pub p0: Option<String>,
    /// μ values for limits, comma separated.
    #[arg(long)]
    pub mus: Option<String>,
    /// Random sample points per μ for limits.
    #[arg(long)]
    pub samples: Option<usize>,
    /// Sweep kind: particle or field.
    #[arg(long)]
    pub kind: Option<String>,
    /// Sweep presets separated by ';'.
    #[arg(long)]
    pub presets: Option<String>,
    /// Sweep replicas per preset; replica r uses seed + r.
    #[arg(long)]
    pub replicas: Option<usize>,
    /// Output file (directory for sweep). Standard output if absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

impl RunConfig {
    /// File values overlaid by every flag that was given.
    pub fn merged(file: Option<&Path>, flags: &RunConfig) -> anyhow::Result<RunConfig> {
        let mut base = match file {
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|e| config_error(format!("{}: {e}", p.display())))?;
                let v: Value = serde_json::from_str(&text).map_err(|e| config_error(format!("{}: {e}", p.display())))?;
                match v {
                    Value::Object(m) => m,
                    _ => return Err(config_error("config file must hold a JSON object")),
                }
            }
            None => Map::new(),
        };
        if let Value::Object(over) = serde_json::to_value(flags)? {
            for (k, v) in over {
                if !v.is_null() {
                    base.insert(k, v);
                }
            }
        }
        serde_json::from_value(Value::Object(base)).map_err(|e| config_error(format!("config: {e}")))
    }

    pub fn algebra(&self) -> &str {
        self.algebra.as_deref().unwrap_or("su2")
    }

    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(0)
    }

    pub fn positive(&self, name: &str, v: Option<f64>, default: f64) -> anyhow::Result<f64> {
        let x = v.unwrap_or(default);
        if x.is_finite() && x > 0.0 {
            Ok(x)
        } else {
            Err(config_error(format!("{name} must be positive, got {x}")))
        }
    }
}

/// Hash of the command and its effective configuration, without the output path.
pub fn config_hash(command: &str, cfg: &RunConfig) -> String {
    let mut c = cfg.clone();
    c.out = None;
    let v = serde_json::json!({ "command": command, "config": c });
    hex(&Sha256::digest(v.to_string().as_bytes()))
}

pub fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}
