//! Versioned JSON checkpoint of a trained policy.
//!
//! ```json
//! {
//!   "format": "rovergym-checkpoint",
//!   "version": 1,
//!   "algo": "ppo",
//!   "env_id": "drive_to_target-v0",
//!   "observation_dim": 1,
//!   "action_low": [-1.5], "action_high": [1.5],
//!   "sizes": [1, 64, 64, 1],
//!   "head": {"kind": "gaussian", "log_std": [-0.7]},
//!   "obs_norm": {"mean": [..], "var": [..], "count": 2048.0, "clip": 10.0},
//!   "manifest": [{"name": "policy.l0.weight", "shape": [64, 1]}, ..],
//!   "params": [..]
//! }
//! ```
//!
//! `params` is the concatenation of the manifest tensors in order.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::config::Algo;
use crate::losses::actor_actions;
use crate::mlp::Mlp;
use crate::normalizer::RunningNorm;

pub const FORMAT: &str = "rovergym-checkpoint";
pub const VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum CheckpointError {
    #[error("checkpoint is not valid JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("not a rovergym checkpoint (format `{0}`)")]
    Format(String),
    #[error("unsupported checkpoint version {found} (expected {VERSION})")]
    Version { found: u32 },
    #[error("checkpoint shape manifest is inconsistent: {0}")]
    Shape(String),
    #[error("checkpoint contains non-finite values")]
    NonFinite,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PolicyHead {
    /// Mean of a diagonal Gaussian; deterministic evaluation uses the mean.
    Gaussian { log_std: Vec<f64> },
    /// `tanh` squashing of the network output.
    Tanh,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TensorEntry {
    pub name: String,
    pub shape: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Checkpoint {
    pub format: String,
    pub version: u32,
    pub algo: Algo,
    pub env_id: String,
    pub observation_dim: usize,
    pub action_low: Vec<f64>,
    pub action_high: Vec<f64>,
    pub sizes: Vec<usize>,
    pub head: PolicyHead,
    pub obs_norm: Option<RunningNorm>,
    pub manifest: Vec<TensorEntry>,
    pub params: Vec<f64>,
}

impl Checkpoint {
    pub fn new(
        algo: Algo,
        env_id: &str,
        net: &Mlp,
        head: PolicyHead,
        obs_norm: Option<RunningNorm>,
        action_low: Vec<f64>,
        action_high: Vec<f64>,
    ) -> Self {
        Checkpoint {
            format: FORMAT.to_string(),
            version: VERSION,
            algo,
            env_id: env_id.to_string(),
            observation_dim: net.input_dim(),
            action_low,
            action_high,
            sizes: net.sizes().to_vec(),
            head,
            obs_norm,
            manifest: net
                .manifest("policy")
                .into_iter()
                .map(|(name, shape)| TensorEntry { name, shape })
                .collect(),
            params: net.params().to_vec(),
        }
    }

    pub fn action_dim(&self) -> usize {
        self.action_low.len()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("checkpoint serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, CheckpointError> {
        let ck: Checkpoint = serde_json::from_str(text)?;
        ck.check()?;
        Ok(ck)
    }

    fn check(&self) -> Result<(), CheckpointError> {
        if self.format != FORMAT {
            return Err(CheckpointError::Format(self.format.clone()));
        }
        if self.version != VERSION {
            return Err(CheckpointError::Version { found: self.version });
        }
        let shape = |msg: String| Err(CheckpointError::Shape(msg));
        if self.sizes.len() < 2 || self.sizes.contains(&0) {
            return shape(format!("bad layer sizes {:?}", self.sizes));
        }
        let expected = Mlp::zeros(&self.sizes).manifest("policy");
        let listed: Vec<(String, Vec<usize>)> = self
            .manifest
            .iter()
            .map(|e| (e.name.clone(), e.shape.clone()))
            .collect();
        if listed != expected {
            return shape("manifest does not match layer sizes".into());
        }
        let total: usize = self.manifest.iter().map(|e| e.shape.iter().product::<usize>()).sum();
        if total != self.params.len() {
            return shape(format!(
                "manifest lists {total} values, params has {}",
                self.params.len()
            ));
        }
        let act = *self.sizes.last().expect("checked length");
        if self.observation_dim != self.sizes[0] {
            return shape("observation_dim differs from the input layer".into());
        }
        if self.action_low.len() != act || self.action_high.len() != act {
            return shape("action bounds differ from the output layer".into());
        }
        if self.action_low.iter().zip(&self.action_high).any(|(l, h)| !(l < h)) {
            return shape("action bounds need low < high".into());
        }
        if let PolicyHead::Gaussian { log_std } = &self.head {
            if log_std.len() != act {
                return shape("log_std length differs from the action dimension".into());
            }
            if log_std.iter().any(|v| !v.is_finite()) {
                return Err(CheckpointError::NonFinite);
            }
        }
        if let Some(norm) = &self.obs_norm {
            if norm.dim() != self.observation_dim || norm.var.len() != self.observation_dim {
                return shape("observation normalizer dimension".into());
            }
            if norm.mean.iter().chain(&norm.var).any(|v| !v.is_finite()) || !(norm.count > 0.0) {
                return Err(CheckpointError::NonFinite);
            }
        }
        if self.params.iter().any(|v| !v.is_finite())
            || self.action_low.iter().chain(&self.action_high).any(|v| !v.is_finite())
        {
            return Err(CheckpointError::NonFinite);
        }
        Ok(())
    }

    pub fn network(&self) -> Mlp {
        Mlp::from_params(&self.sizes, self.params.clone()).expect("validated checkpoint")
    }

    /// Deterministic action in environment units.
    pub fn act(&self, net: &Mlp, obs: &[f64]) -> Vec<f64> {
        let input = match &self.obs_norm {
            Some(n) => n.normalize(obs),
            None => obs.to_vec(),
        };
        let unit = match self.head {
            PolicyHead::Gaussian { .. } => net.forward(&input, 1),
            PolicyHead::Tanh => actor_actions(net, &input, 1),
        };
        unit_to_env(&unit, &self.action_low, &self.action_high)
    }
}

/// Affine map of `[-1, 1]` onto `[low, high]`, clamped.
pub fn unit_to_env(unit: &[f64], low: &[f64], high: &[f64]) -> Vec<f64> {
    unit.iter()
        .zip(low.iter().zip(high))
        .map(|(u, (l, h))| (0.5 * (l + h) + 0.5 * (h - l) * u).clamp(*l, *h))
        .collect()
}
