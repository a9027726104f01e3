//! Optional config file (TOML or JSON, chosen by extension).
//!
//! ```toml
//! threads = 4
//! format = "csv"
//!
//! [metrics]
//! dist_ratio_thresholds = [0.5, 0.75, 1.0]
//! radius = "inscribed"
//!
//! [canonical]
//! canon_height = 512
//!
//! [scales]
//! s_depth = 2.0
//!
//! [perturb]
//! sigma_t = 0.2
//! ```
//!
//! Every key present in the file overrides the matching command-line flag.

use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::Failure;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Text,
    Json,
    Csv,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub threads: Option<usize>,
    pub format: Option<Format>,
    pub metrics: Option<Value>,
    pub canonical: Option<Value>,
    pub scales: Option<Value>,
    pub perturb: Option<Value>,
}

impl FileConfig {
    pub fn load(path: Option<&Path>) -> Result<Self, Failure> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = std::fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
        let parsed = if path.extension().is_some_and(|e| e == "toml") {
            toml::from_str(&text).map_err(|e| e.to_string())
        } else {
            serde_json::from_str(&text).map_err(|e| e.to_string())
        };
        parsed.map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
    }
}

/// Replace the fields of `base` that appear in `patch`.
pub fn overlay<T: Serialize + DeserializeOwned>(base: T, patch: Option<&Value>, section: &str) -> Result<T, Failure> {
    let Some(patch) = patch else {
        return Ok(base);
    };
    let Value::Object(fields) = patch else {
        return Err(Failure::Input(format!("config: [{section}] must be a table")));
    };
    let mut merged = serde_json::to_value(base).map_err(|e| Failure::Internal(e.to_string()))?;
    let Value::Object(target) = &mut merged else {
        return Err(Failure::Internal(format!("config: [{section}] is not a struct")));
    };
    for (k, v) in fields {
        target.insert(k.clone(), v.clone());
    }
    serde_json::from_value(merged).map_err(|e| Failure::Input(format!("config: [{section}]: {e}")))
}
