//! Named environment registry.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dynamics::{DynamicsConfig, RoverGeometry};
use crate::env::{Env, EnvError};
use crate::envs::drive::{self, DriveConfig, DriveEnv};
use crate::envs::leo::{self, LeoConfig, LeoEnv};
use crate::envs::lsd::{self, EpisodeConfig, LsdEnv};
use crate::envs::{RewardWeights, SensorConfig};

/// Everything an environment constructor may be configured with.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EnvOptions {
    pub episode: EpisodeConfig,
    pub leo: LeoConfig,
    pub drive: DriveConfig,
    pub reward: RewardWeights,
    pub sensors: SensorConfig,
    pub geometry: RoverGeometry,
    pub dynamics: DynamicsConfig,
}

pub type Constructor = fn(&EnvOptions, u64) -> Result<Box<dyn Env>, EnvError>;

#[derive(Clone, Copy)]
pub struct EnvEntry {
    pub id: &'static str,
    pub constructor: Constructor,
}

#[derive(Debug, Error, PartialEq)]
pub enum RegistryError {
    #[error("environment id `{0}` must look like `name-v0` (lowercase letters and underscores)")]
    BadId(String),
    #[error("environment id `{0}` is already registered")]
    Duplicate(String),
}

/// Returns true for ids of the form `^[a-z_]+-v[0-9]+$`.
pub fn is_valid_id(id: &str) -> bool {
    let Some((name, version)) = id.rsplit_once("-v") else {
        return false;
    };
    !name.is_empty()
        && name.bytes().all(|b| b.is_ascii_lowercase() || b == b'_')
        && !version.is_empty()
        && version.bytes().all(|b| b.is_ascii_digit())
}

#[derive(Clone, Default)]
pub struct EnvRegistry {
    entries: BTreeMap<&'static str, EnvEntry>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EnvListing {
    pub id: String,
    pub observation_dim: usize,
    pub action_dim: usize,
}

impl EnvRegistry {
    pub fn empty() -> Self {
        EnvRegistry::default()
    }

    /// The three shipped environments.
    pub fn with_defaults() -> Self {
        let mut reg = EnvRegistry::empty();
        reg.register(lsd::ID, |o, seed| {
            Ok(Box::new(LsdEnv::new(
                o.episode, o.reward, o.sensors, o.geometry, o.dynamics, seed,
            )?))
        })
        .expect("builtin id");
        reg.register(leo::ID, |o, seed| {
            Ok(Box::new(LeoEnv::new(
                o.leo, o.reward, o.sensors, o.geometry, o.dynamics, seed,
            )?))
        })
        .expect("builtin id");
        reg.register(drive::ID, |o, seed| {
            Ok(Box::new(DriveEnv::new(o.drive, o.geometry, o.dynamics, seed)?))
        })
        .expect("builtin id");
        reg
    }

    pub fn register(&mut self, id: &'static str, constructor: Constructor) -> Result<(), RegistryError> {
        if !is_valid_id(id) {
            return Err(RegistryError::BadId(id.to_string()));
        }
        if self.entries.contains_key(id) {
            return Err(RegistryError::Duplicate(id.to_string()));
        }
        self.entries.insert(id, EnvEntry { id, constructor });
        Ok(())
    }

    pub fn ids(&self) -> impl Iterator<Item = &'static str> + '_ {
        self.entries.keys().copied()
    }

    pub fn contains(&self, id: &str) -> bool {
        self.entries.contains_key(id)
    }

    pub fn make(&self, id: &str, seed: u64) -> Result<Box<dyn Env>, EnvError> {
        self.make_with(id, seed, &EnvOptions::default())
    }

    pub fn make_with(&self, id: &str, seed: u64, options: &EnvOptions) -> Result<Box<dyn Env>, EnvError> {
        let entry = self
            .entries
            .get(id)
            .ok_or_else(|| EnvError::UnknownEnvironment(id.to_string()))?;
        (entry.constructor)(options, seed)
    }

    /// Id and space dimensions of every entry, constructed with `options`.
    pub fn listing(&self, options: &EnvOptions) -> Result<Vec<EnvListing>, EnvError> {
        self.entries
            .values()
            .map(|e| {
                let env = (e.constructor)(options, 0)?;
                Ok(EnvListing {
                    id: e.id.to_string(),
                    observation_dim: env.observation_space().dim(),
                    action_dim: env.action_space().dim(),
                })
            })
            .collect()
    }
}

/// Construct a registered environment with default options. The returned
/// environment must be reset before stepping.
pub fn make(env_id: &str, seed: u64) -> Result<Box<dyn Env>, EnvError> {
    EnvRegistry::with_defaults().make(env_id, seed)
}

pub fn make_with(env_id: &str, seed: u64, options: &EnvOptions) -> Result<Box<dyn Env>, EnvError> {
    EnvRegistry::with_defaults().make_with(env_id, seed, options)
}
