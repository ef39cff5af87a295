use std::collections::VecDeque;

use rovergym_core::{make_with, Env, EnvOptions};

use crate::checkpoint::Checkpoint;
use crate::config::{Algo, TrainConfig};
use crate::curve::{CurveRow, LearningCurve};
use crate::{ppo, td3, RlError};

#[derive(Clone, Debug)]
pub struct TrainOutcome {
    pub curve: LearningCurve,
    pub checkpoint: Checkpoint,
    pub steps: u64,
    pub episodes: usize,
    /// Returns of the most recent `curve_window` completed episodes.
    pub recent_returns: Vec<f64>,
}

/// Step counting, episode returns and curve emission shared by both
/// algorithms.
pub(crate) struct Tracker<'a> {
    pub steps: u64,
    interval: u64,
    capacity: usize,
    window: VecDeque<f64>,
    current: f64,
    episodes: usize,
    curve: LearningCurve,
    on_row: &'a mut dyn FnMut(CurveRow),
}

impl<'a> Tracker<'a> {
    fn new(config: &TrainConfig, on_row: &'a mut dyn FnMut(CurveRow)) -> Self {
        Tracker {
            steps: 0,
            interval: config.curve_interval,
            capacity: config.curve_window,
            window: VecDeque::with_capacity(config.curve_window),
            current: 0.0,
            episodes: 0,
            curve: LearningCurve::new(),
            on_row,
        }
    }

    pub fn record(&mut self, reward: f64, done: bool) -> Result<(), RlError> {
        if !reward.is_finite() {
            return Err(RlError::DivergedTraining {
                step: self.steps,
                reason: format!("environment returned reward {reward}"),
            });
        }
        self.steps += 1;
        self.current += reward;
        if done {
            if self.window.len() == self.capacity {
                self.window.pop_front();
            }
            self.window.push_back(self.current);
            self.current = 0.0;
            self.episodes += 1;
        }
        // rows need at least one finished episode to average
        if self.steps.is_multiple_of(self.interval) && !self.window.is_empty() {
            let value = self.window.iter().sum::<f64>() / self.window.len() as f64;
            self.curve
                .push(self.steps, value)
                .expect("steps increase monotonically");
            (self.on_row)(CurveRow {
                step: self.steps,
                value,
            });
        }
        Ok(())
    }
}

/// Train on an already constructed environment. Only the env-core API is
/// used, so any registered environment works. The environment is re-seeded
/// with `config.seed`.
pub fn train(env: &mut dyn Env, config: &TrainConfig) -> Result<TrainOutcome, RlError> {
    train_with(env, config, &mut |_| {})
}

/// [`train`] with a callback for each learning-curve row as it is produced.
pub fn train_with(
    env: &mut dyn Env,
    config: &TrainConfig,
    on_row: &mut dyn FnMut(CurveRow),
) -> Result<TrainOutcome, RlError> {
    config.validate()?;
    env.seed(config.seed);
    let mut tracker = Tracker::new(config, on_row);
    let checkpoint = match config.algo {
        Algo::Ppo => ppo::run(env, config, &mut tracker)?,
        Algo::Td3 => td3::run(env, config, &mut tracker)?,
    };
    Ok(TrainOutcome {
        curve: tracker.curve,
        checkpoint,
        steps: tracker.steps,
        episodes: tracker.episodes,
        recent_returns: tracker.window.into_iter().collect(),
    })
}

/// Construct `env_id` from the registry and train on it.
pub fn train_env(env_id: &str, options: &EnvOptions, config: &TrainConfig) -> Result<TrainOutcome, RlError> {
    let mut env = make_with(env_id, config.seed, options)?;
    train(env.as_mut(), config)
}
