//! The gym-style environment contract.
//!
//! An environment moves through `Unreset -> Running -> Finished`; `reset` is
//! legal from any phase, `step` only while running. Terminal information is a
//! single `done` flag with the cause recorded under the `termination` info key.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dynamics::{DynamicsError, Twist};
use crate::episode::EpisodeLog;
use crate::space::{Action, BoxSpace, Observation};

pub type Info = BTreeMap<String, String>;

pub const TERMINATION_KEY: &str = "termination";

#[derive(Debug, Error, PartialEq)]
pub enum EnvError {
    #[error("unknown environment `{0}`")]
    UnknownEnvironment(String),
    #[error("environment has not been reset")]
    NotReset,
    #[error("step called after the episode finished; call reset first")]
    SteppedAfterDone,
    #[error("action component {index} is not finite")]
    NonFiniteAction { index: usize },
    #[error("action has {got} components, expected {expected}")]
    ActionDim { expected: usize, got: usize },
    #[error("invalid environment configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Termination {
    Success,
    Flipped,
    Timeout,
}

impl Termination {
    pub fn as_str(self) -> &'static str {
        match self {
            Termination::Success => "success",
            Termination::Flipped => "flipped",
            Termination::Timeout => "timeout",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "success" => Some(Termination::Success),
            "flipped" => Some(Termination::Flipped),
            "timeout" => Some(Termination::Timeout),
            _ => None,
        }
    }
}

impl fmt::Display for Termination {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct StepResult {
    pub observation: Observation,
    pub reward: f64,
    pub done: bool,
    pub info: Info,
}

impl StepResult {
    pub fn new(observation: Observation, reward: f64, termination: Option<Termination>) -> Self {
        let mut info = Info::new();
        if let Some(t) = termination {
            info.insert(TERMINATION_KEY.to_string(), t.as_str().to_string());
        }
        StepResult {
            observation,
            reward,
            done: termination.is_some(),
            info,
        }
    }

    pub fn termination(&self) -> Option<Termination> {
        self.info.get(TERMINATION_KEY).and_then(|s| Termination::parse(s))
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Pose {
    pub x: f64,
    pub y: f64,
    pub heading: f64,
    pub pitch: f64,
    pub roll: f64,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct LidarFrame {
    pub height: f64,
    pub distance: f64,
}

/// One renderable snapshot. This is also the telemetry message the teleop
/// service broadcasts, so the key set is part of the wire format.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RenderFrame {
    pub tick: u64,
    pub pose: Pose,
    pub suspension: [f64; 4],
    pub lidar: LidarFrame,
    pub terrain_slice: Vec<f64>,
    pub reward: f64,
    pub done: bool,
    pub termination: Option<Termination>,
}

impl RenderFrame {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("render frame serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }
}

/// A simulated world the agent acts in.
///
/// Instances are single-threaded; distinct instances are independent and can
/// live on different threads.
pub trait Env: Send {
    fn id(&self) -> &str;

    fn observation_space(&self) -> &BoxSpace;

    fn action_space(&self) -> &BoxSpace;

    /// Re-seed every random stream. Takes effect at the next `reset`.
    fn seed(&mut self, seed: u64);

    fn reset(&mut self) -> Observation;

    fn step(&mut self, action: &Action) -> Result<StepResult, EnvError>;

    /// Current observation. Pure: repeated calls return the same vector.
    fn get_observation(&self) -> Result<Observation, EnvError>;

    fn render(&self) -> Result<RenderFrame, EnvError>;

    /// Per-tick record of the current (or just finished) episode.
    fn episode_log(&self) -> &EpisodeLog;

    /// Build this environment's action from teleoperation inputs.
    fn teleop_action(&self, twist: &Twist, motors: &[f64; 4]) -> Action;
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Phase {
    Unreset,
    Running,
    Finished,
}

/// Episode state machine shared by the concrete environments.
#[derive(Clone, Debug)]
pub struct Lifecycle {
    phase: Phase,
}

impl Default for Lifecycle {
    fn default() -> Self {
        Lifecycle { phase: Phase::Unreset }
    }
}

impl Lifecycle {
    pub fn phase(&self) -> Phase {
        self.phase
    }

    pub fn on_reset(&mut self) {
        self.phase = Phase::Running;
    }

    pub fn check_step(&self) -> Result<(), EnvError> {
        match self.phase {
            Phase::Unreset => Err(EnvError::NotReset),
            Phase::Finished => Err(EnvError::SteppedAfterDone),
            Phase::Running => Ok(()),
        }
    }

    pub fn check_ready(&self) -> Result<(), EnvError> {
        match self.phase {
            Phase::Unreset => Err(EnvError::NotReset),
            _ => Ok(()),
        }
    }

    pub fn on_step(&mut self, done: bool) {
        if done {
            self.phase = Phase::Finished;
        }
    }
}

/// Validate an action against `space`: reject wrong length and non-finite
/// components, clip everything else into bounds.
pub fn prepare_action(space: &BoxSpace, action: &Action) -> Result<Vec<f64>, EnvError> {
    if action.len() != space.dim() {
        return Err(EnvError::ActionDim {
            expected: space.dim(),
            got: action.len(),
        });
    }
    if let Some(index) = action.iter().position(|v| !v.is_finite()) {
        return Err(EnvError::NonFiniteAction { index });
    }
    Ok(space.clip(action))
}
