//! Model-free deep RL for rovergym environments: MLPs with explicit
//! backpropagation, Adam, PPO (clipped surrogate, GAE) and TD3 (twin
//! critics, delayed policy updates, target smoothing), plus the training
//! loop, learning curves, checkpoints and deterministic evaluation.
//!
//! Everything runs in `f64` on the CPU and is deterministic for a fixed
//! seed.

pub mod adam;
pub mod checkpoint;
pub mod config;
pub mod curve;
pub mod estimators;
pub mod evaluate;
pub mod gradcheck;
pub mod losses;
pub mod mlp;
pub mod normalizer;
pub mod ppo;
pub mod replay;
pub mod td3;
pub mod train;

use thiserror::Error;

pub use checkpoint::{Checkpoint, CheckpointError};
pub use config::{Algo, PpoConfig, Td3Config, TrainConfig};
pub use curve::{CurveRow, LearningCurve};
pub use estimators::{gae, ppo_surrogate, td3_target};
pub use evaluate::{evaluate, evaluate_checkpoint, evaluate_random, Evaluation, Policy};
pub use mlp::Mlp;
pub use train::{train, train_env, train_with, TrainOutcome};

#[derive(Debug, Error)]
pub enum RlError {
    #[error(transparent)]
    Env(#[from] rovergym_core::EnvError),
    #[error("non-finite gradient in {what} at parameter {index}")]
    NonFiniteGradient { what: String, index: usize },
    #[error("training diverged at step {step}: {reason}")]
    DivergedTraining { step: u64, reason: String },
    #[error("series lengths differ: {rewards} rewards, {values} values, {dones} done flags")]
    LengthMismatch {
        rewards: usize,
        values: usize,
        dones: usize,
    },
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("evaluation needs at least one episode")]
    EmptyEvaluation,
    #[error("invalid training config: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Checkpoint(#[from] CheckpointError),
}
