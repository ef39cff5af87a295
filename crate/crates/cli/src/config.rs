//! Run configuration file, dotted-path overrides and the run manifest.

use std::path::{Path, PathBuf};

use rovergym_core::EnvOptions;
use rovergym_rl::TrainConfig;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use sha2::{Digest, Sha256};
use thiserror::Error;

pub const VERSION: &str = concat!(env!("CARGO_PKG_VERSION"), "+", env!("ROVERGYM_GIT_REV"));

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CliConfig {
    pub train: TrainConfig,
    pub env: EnvOptions,
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: invalid JSON: {source}")]
    Syntax { path: PathBuf, source: serde_json::Error },
    #[error("config `{path}`: {message}")]
    Invalid { path: String, message: String },
    #[error("override `{0}` must look like path.to.field=value")]
    BadOverride(String),
}

/// Set `path.to.field` in a JSON tree, creating objects along the way. The
/// value is parsed as JSON when possible and kept as a string otherwise.
pub fn apply_override(root: &mut Value, assignment: &str) -> Result<(), ConfigError> {
    let bad = || ConfigError::BadOverride(assignment.to_string());
    let (path, raw) = assignment.split_once('=').ok_or_else(bad)?;
    let keys: Vec<&str> = path.split('.').collect();
    if keys.iter().any(|k| k.is_empty()) {
        return Err(bad());
    }
    let value = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
    let mut node = root;
    for key in &keys[..keys.len() - 1] {
        if !node.is_object() {
            return Err(bad());
        }
        node = node
            .as_object_mut()
            .expect("checked object")
            .entry(key.to_string())
            .or_insert_with(|| Value::Object(Map::new()));
    }
    node.as_object_mut()
        .ok_or_else(bad)?
        .insert(keys[keys.len() - 1].to_string(), value);
    Ok(())
}

impl CliConfig {
    /// Decode a JSON tree, naming the offending field path on failure.
    pub fn from_value(value: Value) -> Result<Self, ConfigError> {
        let config: CliConfig = serde_path_to_error::deserialize(value).map_err(|e| ConfigError::Invalid {
            path: e.path().to_string(),
            message: e.inner().to_string(),
        })?;
        config.train.validate().map_err(|e| ConfigError::Invalid {
            path: "train".into(),
            message: e.to_string(),
        })?;
        Ok(config)
    }

    /// Config file (or defaults) with `overrides` applied in order.
    pub fn load(path: Option<&Path>, overrides: &[String]) -> Result<Self, ConfigError> {
        let mut root = match path {
            Some(p) => read_json(p)?,
            None => Value::Object(Map::new()),
        };
        for o in overrides {
            apply_override(&mut root, o)?;
        }
        CliConfig::from_value(root)
    }

    pub fn to_value(&self) -> Value {
        serde_json::to_value(self).expect("config serializes")
    }

    /// SHA-256 of the compact serialization; field order is fixed by the
    /// struct definitions so equal configs hash equally.
    pub fn hash(&self) -> String {
        let text = serde_json::to_string(self).expect("config serializes");
        Sha256::digest(text.as_bytes())
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect()
    }
}

pub fn read_json(path: &Path) -> Result<Value, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    serde_json::from_str(&text).map_err(|source| ConfigError::Syntax {
        path: path.to_path_buf(),
        source,
    })
}

/// Written next to every training run; enough to rerun it exactly.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    pub version: String,
    pub env_id: String,
    pub seed: u64,
    pub config_hash: String,
    pub config: CliConfig,
}

impl Manifest {
    pub fn new(env_id: &str, config: &CliConfig) -> Self {
        Manifest {
            version: VERSION.to_string(),
            env_id: env_id.to_string(),
            seed: config.train.seed,
            config_hash: config.hash(),
            config: config.clone(),
        }
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        serde_path_to_error::deserialize(read_json(path)?).map_err(|e| ConfigError::Invalid {
            path: e.path().to_string(),
            message: e.inner().to_string(),
        })
    }
}
