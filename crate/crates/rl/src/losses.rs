//! Training objectives with exact gradients. Each function returns the
//! scalar loss and its gradient with respect to the trainable parameters,
//! so the same code path is exercised by the optimizers and by the
//! finite-difference checks.

use crate::estimators::{ppo_surrogate, ppo_surrogate_grad};
use crate::mlp::Mlp;

const LN_2PI: f64 = 1.837_877_066_409_345_5;

/// Diagonal Gaussian log-density of `action` (one row).
pub fn gaussian_log_prob(mean: &[f64], log_std: &[f64], action: &[f64]) -> f64 {
    mean.iter()
        .zip(log_std)
        .zip(action)
        .map(|((m, ls), a)| {
            let z = (a - m) / ls.exp();
            -0.5 * z * z - ls - 0.5 * LN_2PI
        })
        .sum()
}

/// A minibatch for the clipped-surrogate policy loss.
pub struct PolicyBatch<'a> {
    /// Network inputs (already normalized), `n x obs_dim`.
    pub obs: &'a [f64],
    /// Sampled (unclipped) actions in unit space, `n x act_dim`.
    pub actions: &'a [f64],
    pub old_log_prob: &'a [f64],
    pub advantages: &'a [f64],
}

#[derive(Clone, Debug, Default)]
pub struct PolicyLoss {
    pub loss: f64,
    pub grad_net: Vec<f64>,
    pub grad_log_std: Vec<f64>,
    /// Mean of `old_log_prob - log_prob`.
    pub approx_kl: f64,
    pub clip_fraction: f64,
}

/// `-mean(min(ratio * A, clip(ratio) * A))` for a Gaussian policy with
/// state-independent log standard deviations.
pub fn ppo_policy_loss(net: &Mlp, log_std: &[f64], batch: &PolicyBatch, clip: f64) -> PolicyLoss {
    let n = batch.advantages.len();
    let d = net.output_dim();
    let fwd = net.forward_cached(batch.obs, n);
    let means = fwd.output();
    let inv_n = 1.0 / n as f64;
    let mut upstream = vec![0.0; n * d];
    let mut grad_log_std = vec![0.0; d];
    let mut loss = 0.0;
    let mut kl = 0.0;
    let mut clipped = 0usize;
    for b in 0..n {
        let mean = &means[b * d..(b + 1) * d];
        let action = &batch.actions[b * d..(b + 1) * d];
        let logp = gaussian_log_prob(mean, log_std, action);
        let ratio = (logp - batch.old_log_prob[b]).exp();
        let adv = batch.advantages[b];
        loss -= ppo_surrogate(ratio, adv, clip) * inv_n;
        kl += (batch.old_log_prob[b] - logp) * inv_n;
        if (ratio - 1.0).abs() > clip {
            clipped += 1;
        }
        // d loss / d logp
        let g = -ppo_surrogate_grad(ratio, adv, clip) * ratio * inv_n;
        if g != 0.0 {
            for i in 0..d {
                let var = (2.0 * log_std[i]).exp();
                let diff = action[i] - mean[i];
                upstream[b * d + i] = g * diff / var;
                grad_log_std[i] += g * (diff * diff / var - 1.0);
            }
        }
    }
    let mut grad_net = vec![0.0; net.num_params()];
    net.backward(&fwd, &upstream, &mut grad_net);
    PolicyLoss {
        loss,
        grad_net,
        grad_log_std,
        approx_kl: kl,
        clip_fraction: clipped as f64 * inv_n,
    }
}

/// `0.5 * mean((V(s) - R)^2)`.
pub fn value_loss(net: &Mlp, obs: &[f64], returns: &[f64]) -> (f64, Vec<f64>) {
    let n = returns.len();
    let fwd = net.forward_cached(obs, n);
    let inv_n = 1.0 / n as f64;
    let mut loss = 0.0;
    let upstream: Vec<f64> = fwd
        .output()
        .iter()
        .zip(returns)
        .map(|(v, r)| {
            let e = v - r;
            loss += 0.5 * e * e * inv_n;
            e * inv_n
        })
        .collect();
    let mut grad = vec![0.0; net.num_params()];
    net.backward(&fwd, &upstream, &mut grad);
    (loss, grad)
}

/// Row-wise `[obs, action]` concatenation used as critic input.
pub fn critic_input(obs: &[f64], actions: &[f64], n: usize) -> Vec<f64> {
    let od = obs.len() / n.max(1);
    let ad = actions.len() / n.max(1);
    let mut out = Vec::with_capacity(n * (od + ad));
    for b in 0..n {
        out.extend_from_slice(&obs[b * od..(b + 1) * od]);
        out.extend_from_slice(&actions[b * ad..(b + 1) * ad]);
    }
    out
}

/// `mean((Q(s, a) - y)^2)`.
pub fn critic_loss(critic: &Mlp, obs: &[f64], actions: &[f64], targets: &[f64]) -> (f64, Vec<f64>) {
    let n = targets.len();
    let input = critic_input(obs, actions, n);
    let fwd = critic.forward_cached(&input, n);
    let inv_n = 1.0 / n as f64;
    let mut loss = 0.0;
    let upstream: Vec<f64> = fwd
        .output()
        .iter()
        .zip(targets)
        .map(|(q, y)| {
            let e = q - y;
            loss += e * e * inv_n;
            2.0 * e * inv_n
        })
        .collect();
    let mut grad = vec![0.0; critic.num_params()];
    critic.backward(&fwd, &upstream, &mut grad);
    (loss, grad)
}

/// Deterministic actor output `tanh(net(s))` in unit action space.
pub fn actor_actions(actor: &Mlp, obs: &[f64], n: usize) -> Vec<f64> {
    actor.forward(obs, n).into_iter().map(f64::tanh).collect()
}

/// `-mean(Q(s, tanh(z))) + penalty * mean(|z|^2)` with `z = actor(s)`, and
/// its gradient for the actor only. The penalty on the pre-squash output
/// keeps action dimensions out of tanh saturation.
pub fn actor_loss(actor: &Mlp, critic: &Mlp, obs: &[f64], n: usize, penalty: f64) -> (f64, Vec<f64>) {
    let d = actor.output_dim();
    let od = actor.input_dim();
    let afwd = actor.forward_cached(obs, n);
    let z = afwd.output();
    let actions: Vec<f64> = z.iter().map(|v| v.tanh()).collect();
    let input = critic_input(obs, &actions, n);
    let cfwd = critic.forward_cached(&input, n);
    let inv_n = 1.0 / n as f64;
    let loss = (-cfwd.output().iter().sum::<f64>() + penalty * z.iter().map(|v| v * v).sum::<f64>()) * inv_n;
    let mut scratch = vec![0.0; critic.num_params()];
    let dinput = critic.backward(&cfwd, &vec![-inv_n; n], &mut scratch);
    let mut upstream = vec![0.0; n * d];
    for b in 0..n {
        for i in 0..d {
            let k = b * d + i;
            let a = actions[k];
            upstream[k] = dinput[b * (od + d) + od + i] * (1.0 - a * a) + 2.0 * penalty * inv_n * z[k];
        }
    }
    let mut grad = vec![0.0; actor.num_params()];
    actor.backward(&afwd, &upstream, &mut grad);
    (loss, grad)
}
