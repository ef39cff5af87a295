use serde::{Deserialize, Serialize};

use crate::RlError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algo {
    Ppo,
    Td3,
}

impl Algo {
    pub fn as_str(self) -> &'static str {
        match self {
            Algo::Ppo => "ppo",
            Algo::Td3 => "td3",
        }
    }
}

impl std::str::FromStr for Algo {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "ppo" => Ok(Algo::Ppo),
            "td3" => Ok(Algo::Td3),
            other => Err(format!("unknown algorithm `{other}` (expected ppo or td3)")),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PpoConfig {
    pub lambda: f64,
    pub clip: f64,
    pub epochs: usize,
    pub minibatch: usize,
    pub horizon: usize,
    pub lr: f64,
    pub hidden: Vec<usize>,
    pub max_grad_norm: f64,
    pub init_log_std: f64,
    pub normalize_obs: bool,
}

impl Default for PpoConfig {
    fn default() -> Self {
        PpoConfig {
            lambda: 0.95,
            clip: 0.2,
            epochs: 10,
            minibatch: 64,
            horizon: 2048,
            lr: 3e-4,
            hidden: vec![64, 64],
            max_grad_norm: 0.5,
            init_log_std: 0.0,
            normalize_obs: true,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Td3Config {
    pub tau: f64,
    pub policy_delay: usize,
    pub target_noise: f64,
    pub noise_clip: f64,
    pub exploration_noise: f64,
    pub batch: usize,
    pub lr: f64,
    pub hidden: Vec<usize>,
    pub buffer_capacity: usize,
    /// Uniform-random steps before the first update.
    pub learning_starts: u64,
    /// Weight of the mean squared pre-tanh actor output in the actor loss.
    pub preactivation_penalty: f64,
}

impl Default for Td3Config {
    fn default() -> Self {
        Td3Config {
            tau: 0.005,
            policy_delay: 2,
            target_noise: 0.2,
            noise_clip: 0.5,
            exploration_noise: 0.1,
            batch: 256,
            lr: 1e-3,
            hidden: vec![256, 256],
            buffer_capacity: 100_000,
            learning_starts: 1000,
            preactivation_penalty: 0.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub algo: Algo,
    pub total_timesteps: u64,
    pub gamma: f64,
    pub seed: u64,
    /// Steps between learning-curve rows.
    pub curve_interval: u64,
    /// Episodes averaged per learning-curve row.
    pub curve_window: usize,
    pub ppo: PpoConfig,
    pub td3: Td3Config,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            algo: Algo::Ppo,
            total_timesteps: 100_000,
            gamma: 0.99,
            seed: 0,
            curve_interval: 2048,
            curve_window: 100,
            ppo: PpoConfig::default(),
            td3: Td3Config::default(),
        }
    }
}

fn positive(name: &str, v: f64) -> Result<(), RlError> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(RlError::InvalidConfig(format!("{name} must be positive, got {v}")))
    }
}

fn nonzero(name: &str, v: usize) -> Result<(), RlError> {
    if v > 0 {
        Ok(())
    } else {
        Err(RlError::InvalidConfig(format!("{name} must be at least 1")))
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), RlError> {
        if !(self.gamma > 0.0 && self.gamma <= 1.0) {
            return Err(RlError::InvalidConfig(format!(
                "gamma must be in (0, 1], got {}",
                self.gamma
            )));
        }
        nonzero("curve_window", self.curve_window)?;
        if self.curve_interval == 0 {
            return Err(RlError::InvalidConfig("curve_interval must be at least 1".into()));
        }
        let p = &self.ppo;
        if !(0.0..=1.0).contains(&p.lambda) {
            return Err(RlError::InvalidConfig(format!(
                "ppo.lambda must be in [0, 1], got {}",
                p.lambda
            )));
        }
        positive("ppo.clip", p.clip)?;
        positive("ppo.lr", p.lr)?;
        positive("ppo.max_grad_norm", p.max_grad_norm)?;
        nonzero("ppo.epochs", p.epochs)?;
        nonzero("ppo.minibatch", p.minibatch)?;
        nonzero("ppo.horizon", p.horizon)?;
        if !p.init_log_std.is_finite() {
            return Err(RlError::InvalidConfig("ppo.init_log_std must be finite".into()));
        }
        let t = &self.td3;
        if !(t.tau > 0.0 && t.tau <= 1.0) {
            return Err(RlError::InvalidConfig(format!(
                "td3.tau must be in (0, 1], got {}",
                t.tau
            )));
        }
        positive("td3.lr", t.lr)?;
        nonzero("td3.policy_delay", t.policy_delay)?;
        nonzero("td3.batch", t.batch)?;
        nonzero("td3.buffer_capacity", t.buffer_capacity)?;
        for (name, v) in [
            ("td3.target_noise", t.target_noise),
            ("td3.noise_clip", t.noise_clip),
            ("td3.exploration_noise", t.exploration_noise),
            ("td3.preactivation_penalty", t.preactivation_penalty),
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(RlError::InvalidConfig(format!("{name} must be non-negative")));
            }
        }
        for (name, hidden) in [("ppo.hidden", &p.hidden), ("td3.hidden", &t.hidden)] {
            if hidden.contains(&0) {
                return Err(RlError::InvalidConfig(format!("{name} sizes must be positive")));
            }
        }
        Ok(())
    }
}
