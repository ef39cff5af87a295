//! Advantage estimation and the per-sample PPO and TD3 objectives.

use crate::RlError;

/// Generalized advantage estimation over one rollout.
///
/// `values[t]` is V(s_t), `last_value` is V of the state after the final
/// step (ignored when that step is terminal). `dones[t]` cuts bootstrapping
/// after step `t`. Returns `(advantages, returns)` with `returns = A + V`.
pub fn gae(
    rewards: &[f64],
    values: &[f64],
    last_value: f64,
    dones: &[bool],
    gamma: f64,
    lambda: f64,
) -> Result<(Vec<f64>, Vec<f64>), RlError> {
    let n = rewards.len();
    if values.len() != n || dones.len() != n {
        return Err(RlError::LengthMismatch {
            rewards: n,
            values: values.len(),
            dones: dones.len(),
        });
    }
    let mut adv = vec![0.0; n];
    let mut next_adv = 0.0;
    for t in (0..n).rev() {
        let next_value = if t + 1 < n { values[t + 1] } else { last_value };
        let live = if dones[t] { 0.0 } else { 1.0 };
        let delta = rewards[t] + gamma * next_value * live - values[t];
        next_adv = delta + gamma * lambda * live * next_adv;
        adv[t] = next_adv;
    }
    let returns = adv.iter().zip(values).map(|(a, v)| a + v).collect();
    Ok((adv, returns))
}

/// `min(ratio * A, clip(ratio, 1 - eps, 1 + eps) * A)`.
pub fn ppo_surrogate(ratio: f64, advantage: f64, eps: f64) -> f64 {
    let clipped = ratio.clamp(1.0 - eps, 1.0 + eps);
    (ratio * advantage).min(clipped * advantage)
}

/// Derivative of [`ppo_surrogate`] with respect to the ratio.
pub fn ppo_surrogate_grad(ratio: f64, advantage: f64, eps: f64) -> f64 {
    let clipped = ratio.clamp(1.0 - eps, 1.0 + eps);
    if ratio * advantage <= clipped * advantage {
        advantage
    } else {
        0.0
    }
}

/// `r + gamma * (1 - done) * min(q1, q2)`.
pub fn td3_target(reward: f64, done: bool, gamma: f64, q1: f64, q2: f64) -> f64 {
    if done {
        reward
    } else {
        reward + gamma * q1.min(q2)
    }
}

/// Target-policy smoothing noise, clipped to `±clip`.
pub fn clip_noise(sample: f64, clip: f64) -> f64 {
    sample.clamp(-clip, clip)
}
