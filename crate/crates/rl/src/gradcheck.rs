//! Central finite-difference checks of the analytic training gradients.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::losses::{actor_loss, critic_loss, gaussian_log_prob, ppo_policy_loss, value_loss, PolicyBatch};
use crate::mlp::Mlp;

pub const STEP: f64 = 1e-5;
/// Denominator floor so gradients that are zero up to rounding compare by
/// absolute error.
pub const FLOOR: f64 = 1e-7;

/// Central differences of `f` at `x`, one coordinate at a time.
pub fn central_difference(x: &[f64], h: f64, mut f: impl FnMut(&[f64]) -> f64) -> Vec<f64> {
    let mut probe = x.to_vec();
    (0..x.len())
        .map(|i| {
            let orig = probe[i];
            probe[i] = orig + h;
            let up = f(&probe);
            probe[i] = orig - h;
            let down = f(&probe);
            probe[i] = orig;
            (up - down) / (2.0 * h)
        })
        .collect()
}

/// `max_i |a_i - n_i| / max(|a_i|, |n_i|, FLOOR)`.
pub fn max_relative_error(analytic: &[f64], numeric: &[f64]) -> f64 {
    assert_eq!(analytic.len(), numeric.len());
    analytic
        .iter()
        .zip(numeric)
        .map(|(a, n)| (a - n).abs() / a.abs().max(n.abs()).max(FLOOR))
        .fold(0.0, f64::max)
}

#[derive(Clone, Debug, PartialEq)]
pub struct GradCheck {
    pub name: &'static str,
    pub points: usize,
    pub parameters: usize,
    pub max_relative_error: f64,
}

fn uniform(rng: &mut ChaCha8Rng, n: usize, scale: f64) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(-scale..scale)).collect()
}

const OBS: usize = 3;
const ACT: usize = 2;
const HIDDEN: [usize; 2] = [12, 12];
const BATCH: usize = 8;

fn sizes(input: usize, output: usize) -> Vec<usize> {
    [vec![input], HIDDEN.to_vec(), vec![output]].concat()
}

/// PPO clipped-surrogate loss with respect to the policy network and the
/// log standard deviations, at `points` random parameter points.
pub fn policy_loss(points: usize, seed: u64) -> GradCheck {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    let mut parameters = 0;
    for _ in 0..points {
        let net = Mlp::new(&sizes(OBS, ACT), 1.0, &mut rng);
        let log_std = uniform(&mut rng, ACT, 0.5);
        let obs = uniform(&mut rng, BATCH * OBS, 2.0);
        let actions = uniform(&mut rng, BATCH * ACT, 1.5);
        let means = net.forward(&obs, BATCH);
        // old policy differs from the current one so some samples clip
        let old: Vec<f64> = (0..BATCH)
            .map(|b| {
                let lp = gaussian_log_prob(
                    &means[b * ACT..(b + 1) * ACT],
                    &log_std,
                    &actions[b * ACT..(b + 1) * ACT],
                );
                lp + rng.random_range(-0.4..0.4)
            })
            .collect();
        let adv = uniform(&mut rng, BATCH, 2.0);
        let batch = PolicyBatch {
            obs: &obs,
            actions: &actions,
            old_log_prob: &old,
            advantages: &adv,
        };
        let out = ppo_policy_loss(&net, &log_std, &batch, 0.2);
        let split = net.num_params();
        let mut all = net.params().to_vec();
        all.extend_from_slice(&log_std);
        let numeric = central_difference(&all, STEP, |p| {
            let probe = Mlp::from_params(net.sizes(), p[..split].to_vec()).expect("same shape");
            ppo_policy_loss(&probe, &p[split..], &batch, 0.2).loss
        });
        let mut analytic = out.grad_net;
        analytic.extend_from_slice(&out.grad_log_std);
        worst = worst.max(max_relative_error(&analytic, &numeric));
        parameters = all.len();
    }
    GradCheck {
        name: "policy",
        points,
        parameters,
        max_relative_error: worst,
    }
}

/// PPO value regression loss.
pub fn value(points: usize, seed: u64) -> GradCheck {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    let mut parameters = 0;
    for _ in 0..points {
        let net = Mlp::new(&sizes(OBS, 1), 1.0, &mut rng);
        let obs = uniform(&mut rng, BATCH * OBS, 2.0);
        let returns = uniform(&mut rng, BATCH, 3.0);
        let (_, analytic) = value_loss(&net, &obs, &returns);
        let numeric = central_difference(net.params(), STEP, |p| {
            let probe = Mlp::from_params(net.sizes(), p.to_vec()).expect("same shape");
            value_loss(&probe, &obs, &returns).0
        });
        worst = worst.max(max_relative_error(&analytic, &numeric));
        parameters = net.num_params();
    }
    GradCheck {
        name: "value",
        points,
        parameters,
        max_relative_error: worst,
    }
}

/// TD3 critic regression toward fixed targets; `which` only labels the
/// report and offsets the seed, both critics share the architecture.
pub fn critic(which: usize, points: usize, seed: u64) -> GradCheck {
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(which as u64));
    let mut worst: f64 = 0.0;
    let mut parameters = 0;
    for _ in 0..points {
        let net = Mlp::new(&sizes(OBS + ACT, 1), 1.0, &mut rng);
        let obs = uniform(&mut rng, BATCH * OBS, 2.0);
        let actions = uniform(&mut rng, BATCH * ACT, 1.0);
        let targets = uniform(&mut rng, BATCH, 3.0);
        let (_, analytic) = critic_loss(&net, &obs, &actions, &targets);
        let numeric = central_difference(net.params(), STEP, |p| {
            let probe = Mlp::from_params(net.sizes(), p.to_vec()).expect("same shape");
            critic_loss(&probe, &obs, &actions, &targets).0
        });
        worst = worst.max(max_relative_error(&analytic, &numeric));
        parameters = net.num_params();
    }
    GradCheck {
        name: if which == 1 { "critic1" } else { "critic2" },
        points,
        parameters,
        max_relative_error: worst,
    }
}

/// TD3 deterministic policy loss `-Q1(s, tanh(actor(s)))` plus the
/// pre-squash penalty, actor parameters.
pub fn actor(points: usize, seed: u64) -> GradCheck {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    let mut parameters = 0;
    for _ in 0..points {
        let net = Mlp::new(&sizes(OBS, ACT), 1.0, &mut rng);
        let q = Mlp::new(&sizes(OBS + ACT, 1), 1.0, &mut rng);
        let obs = uniform(&mut rng, BATCH * OBS, 2.0);
        let (_, analytic) = actor_loss(&net, &q, &obs, BATCH, 0.1);
        let numeric = central_difference(net.params(), STEP, |p| {
            let probe = Mlp::from_params(net.sizes(), p.to_vec()).expect("same shape");
            actor_loss(&probe, &q, &obs, BATCH, 0.1).0
        });
        worst = worst.max(max_relative_error(&analytic, &numeric));
        parameters = net.num_params();
    }
    GradCheck {
        name: "actor",
        points,
        parameters,
        max_relative_error: worst,
    }
}

/// Every check at `points` random points.
pub fn all(points: usize, seed: u64) -> Vec<GradCheck> {
    vec![
        policy_loss(points, seed),
        value(points, seed + 1),
        critic(1, points, seed + 2),
        critic(2, points, seed + 3),
        actor(points, seed + 4),
    ]
}
