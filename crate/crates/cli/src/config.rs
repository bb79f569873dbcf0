//! Run configuration files.
//!
//! A config names an optional base preset and overrides any of its fields:
//!
//! ```toml
//! base = "paper"
//!
//! [experiment]
//! seed = 7
//! events = 600
//!
//! [experiment.noise]
//! bsm_visibility = [0.7, 0.65]
//! ```
//!
//! Tables are merged key by key into the base preset, then the result is
//! parsed strictly: unknown keys fail with their path.

use std::path::Path;

use serde::Deserialize;
use serde_json::Value;
use swapchain::experiment::{preset, ExperimentPreset};

use crate::error::CliError;
use crate::output::Format;

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Preset whose fields are the defaults; `ideal` when absent.
    pub base: Option<String>,
    /// Field overrides, same schema as a report's `preset` object.
    #[serde(default)]
    pub experiment: Option<Value>,
    pub out: Option<String>,
    pub format: Option<Format>,
    #[serde(default)]
    pub verbose: bool,
}

pub fn load(path: &Path) -> Result<RunConfig, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(path.display().to_string(), e))?;
    let value: Value = match path.extension().and_then(|e| e.to_str()) {
        Some("toml") => {
            let table: toml::Table = toml::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
            serde_json::to_value(table).map_err(|e| CliError::Config(e.to_string()))?
        }
        Some("json") => serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?,
        _ => {
            return Err(CliError::Config(format!(
                "{}: config files must end in .toml or .json",
                path.display()
            )))
        }
    };
    parse(value).map_err(|e| match e {
        CliError::Config(msg) => CliError::Config(format!("{}: {msg}", path.display())),
        other => other,
    })
}

fn parse(value: Value) -> Result<RunConfig, CliError> {
    serde_path_to_error::deserialize(value).map_err(|e| CliError::Config(describe(&e)))
}

fn describe(e: &serde_path_to_error::Error<serde_json::Error>) -> String {
    let path = e.path().to_string();
    if path == "." {
        e.inner().to_string()
    } else {
        format!("{path}: {}", e.inner())
    }
}

fn merge(base: &mut Value, overrides: Value) {
    match (base, overrides) {
        (Value::Object(b), Value::Object(o)) => {
            for (k, v) in o {
                match b.get_mut(&k) {
                    Some(slot) => merge(slot, v),
                    None => {
                        b.insert(k, v);
                    }
                }
            }
        }
        (slot, v) => *slot = v,
    }
}

impl RunConfig {
    /// The base preset with this config's overrides applied.
    pub fn resolve(&self, fallback: &str) -> Result<ExperimentPreset, CliError> {
        let base = preset(self.base.as_deref().unwrap_or(fallback))?;
        let Some(overrides) = &self.experiment else {
            return Ok(base);
        };
        if !overrides.is_object() {
            return Err(CliError::Config("experiment: expected a table".into()));
        }
        let mut value = serde_json::to_value(&base).map_err(|e| CliError::Config(e.to_string()))?;
        merge(&mut value, overrides.clone());
        serde_path_to_error::deserialize(value).map_err(|e| CliError::Config(format!("experiment.{}", describe(&e))))
    }
}
