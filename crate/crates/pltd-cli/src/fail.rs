use std::fmt;

/// Bad input: exit code 2.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

pub fn config_error(msg: impl Into<String>) -> anyhow::Error {
    anyhow::Error::new(ConfigError(msg.into()))
}

pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

/// Config and I/O problems map to 2, everything else is numerical.
pub fn classify(e: &anyhow::Error) -> (i32, &'static str) {
    if e.downcast_ref::<ConfigError>().is_some() || e.downcast_ref::<std::io::Error>().is_some() {
        (EXIT_CONFIG, "config")
    } else {
        (EXIT_NUMERICAL, "numerical")
    }
}

pub fn error_json(kind: &str, e: &anyhow::Error) -> String {
    serde_json::json!({ "error": kind, "message": format!("{e:#}") }).to_string()
}
