use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rovergym_core::episode::stability_series;
use rovergym_core::{make_with, Action, BoxSpace, Env, EnvOptions, Termination};
use serde::{Deserialize, Serialize};

use crate::checkpoint::Checkpoint;
use crate::mlp::Mlp;
use crate::RlError;

/// Maps an observation to an action in environment units.
pub trait Policy {
    fn act(&mut self, obs: &[f64]) -> Vec<f64>;
}

/// Deterministic policy from a checkpoint: the Gaussian mean or the tanh
/// actor, with no exploration noise.
pub struct CheckpointPolicy {
    checkpoint: Checkpoint,
    net: Mlp,
}

impl CheckpointPolicy {
    pub fn new(checkpoint: Checkpoint) -> Self {
        let net = checkpoint.network();
        CheckpointPolicy { checkpoint, net }
    }

    pub fn checkpoint(&self) -> &Checkpoint {
        &self.checkpoint
    }
}

impl Policy for CheckpointPolicy {
    fn act(&mut self, obs: &[f64]) -> Vec<f64> {
        self.checkpoint.act(&self.net, obs)
    }
}

/// Uniform samples from the action space.
pub struct RandomPolicy {
    space: BoxSpace,
    rng: ChaCha8Rng,
}

impl RandomPolicy {
    pub fn new(space: BoxSpace, seed: u64) -> Self {
        RandomPolicy {
            space,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }
}

impl Policy for RandomPolicy {
    fn act(&mut self, _obs: &[f64]) -> Vec<f64> {
        self.space.sample(&mut self.rng).into_inner()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub episodes: usize,
    pub successes: usize,
    pub success_rate: f64,
    pub mean_reward: f64,
    /// Mean over episodes of the per-episode RMS |roll rate|.
    pub longitudinal_rms: f64,
    /// Mean over episodes of the per-episode RMS |pitch rate|.
    pub lateral_rms: f64,
    /// The same two statistics restricted to successful episodes.
    pub success_longitudinal_rms: Option<f64>,
    pub success_lateral_rms: Option<f64>,
    pub terminations: BTreeMap<String, usize>,
}

fn mean(v: &[f64]) -> Option<f64> {
    (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64)
}

/// Roll out `episodes` full episodes with `policy`.
pub fn evaluate(policy: &mut dyn Policy, env: &mut dyn Env, episodes: usize) -> Result<Evaluation, RlError> {
    if episodes == 0 {
        return Err(RlError::EmptyEvaluation);
    }
    let mut returns = Vec::with_capacity(episodes);
    let (mut lon, mut lat, mut s_lon, mut s_lat) = (vec![], vec![], vec![], vec![]);
    let mut terminations = BTreeMap::new();
    for _ in 0..episodes {
        let mut obs = env.reset();
        let mut total = 0.0;
        let termination = loop {
            let action = policy.act(&obs);
            let r = env.step(&Action(action))?;
            total += r.reward;
            if let Some(t) = r.termination() {
                break t;
            }
            obs = r.observation;
        };
        let stability = stability_series(&env.episode_log().records).expect("episode has at least one step");
        lon.push(stability.longitudinal_rms);
        lat.push(stability.lateral_rms);
        if termination == Termination::Success {
            s_lon.push(stability.longitudinal_rms);
            s_lat.push(stability.lateral_rms);
        }
        *terminations.entry(termination.as_str().to_string()).or_insert(0) += 1;
        returns.push(total);
    }
    let successes = s_lon.len();
    Ok(Evaluation {
        episodes,
        successes,
        success_rate: successes as f64 / episodes as f64,
        mean_reward: mean(&returns).expect("non-empty"),
        longitudinal_rms: mean(&lon).expect("non-empty"),
        lateral_rms: mean(&lat).expect("non-empty"),
        success_longitudinal_rms: mean(&s_lon),
        success_lateral_rms: mean(&s_lat),
        terminations,
    })
}

pub fn check_shapes(checkpoint: &Checkpoint, env: &dyn Env) -> Result<(), RlError> {
    let od = env.observation_space().dim();
    let ad = env.action_space().dim();
    if checkpoint.observation_dim != od || checkpoint.action_dim() != ad {
        return Err(RlError::ShapeMismatch(format!(
            "checkpoint expects observation {} / action {}, `{}` has {od} / {ad}",
            checkpoint.observation_dim,
            checkpoint.action_dim(),
            env.id()
        )));
    }
    Ok(())
}

/// Deterministic evaluation of a checkpoint on a freshly made environment.
pub fn evaluate_checkpoint(
    checkpoint: &Checkpoint,
    env_id: &str,
    options: &EnvOptions,
    episodes: usize,
    seed: u64,
) -> Result<Evaluation, RlError> {
    if episodes == 0 {
        return Err(RlError::EmptyEvaluation);
    }
    let mut env = make_with(env_id, seed, options)?;
    check_shapes(checkpoint, env.as_ref())?;
    let mut policy = CheckpointPolicy::new(checkpoint.clone());
    evaluate(&mut policy, env.as_mut(), episodes)
}

/// Uniform-random baseline on a freshly made environment.
pub fn evaluate_random(env_id: &str, options: &EnvOptions, episodes: usize, seed: u64) -> Result<Evaluation, RlError> {
    let mut env = make_with(env_id, seed, options)?;
    let mut policy = RandomPolicy::new(env.action_space().clone(), seed);
    evaluate(&mut policy, env.as_mut(), episodes)
}
