use rand::seq::SliceRandom;
use rand_distr::{Distribution, StandardNormal};
use rovergym_core::env::Termination;
use rovergym_core::rng::SeedTree;
use rovergym_core::{Action, Env};

use crate::adam::{clip_grad_norm, Adam};
use crate::checkpoint::{unit_to_env, Checkpoint, PolicyHead};
use crate::config::{Algo, TrainConfig};
use crate::estimators::gae;
use crate::losses::{gaussian_log_prob, ppo_policy_loss, value_loss, PolicyBatch};
use crate::mlp::{check_finite, Mlp};
use crate::normalizer::RunningNorm;
use crate::train::Tracker;
use crate::RlError;

pub struct PpoAgent {
    pub policy: Mlp,
    pub log_std: Vec<f64>,
    pub value: Mlp,
    pub norm: Option<RunningNorm>,
    policy_opt: Adam,
    log_std_opt: Adam,
    value_opt: Adam,
}

#[derive(Default)]
struct Rollout {
    obs: Vec<f64>,
    actions: Vec<f64>,
    log_probs: Vec<f64>,
    values: Vec<f64>,
    rewards: Vec<f64>,
    dones: Vec<bool>,
}

fn sizes(input: usize, hidden: &[usize], output: usize) -> Vec<usize> {
    let mut s = vec![input];
    s.extend_from_slice(hidden);
    s.push(output);
    s
}

impl PpoAgent {
    pub fn new(obs_dim: usize, act_dim: usize, config: &TrainConfig, seeds: &SeedTree) -> Self {
        let p = &config.ppo;
        let mut init = seeds.stream("ppo.init");
        let policy = Mlp::new(&sizes(obs_dim, &p.hidden, act_dim), 0.01, &mut init);
        let value = Mlp::new(&sizes(obs_dim, &p.hidden, 1), 1.0, &mut init);
        PpoAgent {
            policy_opt: Adam::new(policy.num_params(), p.lr),
            log_std_opt: Adam::new(act_dim, p.lr),
            value_opt: Adam::new(value.num_params(), p.lr),
            log_std: vec![p.init_log_std; act_dim],
            norm: p.normalize_obs.then(|| RunningNorm::new(obs_dim)),
            policy,
            value,
        }
    }

    fn input(&self, obs: &[f64]) -> Vec<f64> {
        match &self.norm {
            Some(n) => n.normalize(obs),
            None => obs.to_vec(),
        }
    }

    pub fn checkpoint(&self, env: &dyn Env) -> Checkpoint {
        let space = env.action_space();
        Checkpoint::new(
            Algo::Ppo,
            env.id(),
            &self.policy,
            PolicyHead::Gaussian {
                log_std: self.log_std.clone(),
            },
            self.norm.clone(),
            space.low().to_vec(),
            space.high().to_vec(),
        )
    }
}

pub(crate) fn run(env: &mut dyn Env, config: &TrainConfig, tracker: &mut Tracker) -> Result<Checkpoint, RlError> {
    let p = &config.ppo;
    let seeds = SeedTree::new(config.seed);
    let obs_dim = env.observation_space().dim();
    let act_dim = env.action_space().dim();
    let low = env.action_space().low().to_vec();
    let high = env.action_space().high().to_vec();
    let mut agent = PpoAgent::new(obs_dim, act_dim, config, &seeds);
    if config.total_timesteps == 0 {
        return Ok(agent.checkpoint(env));
    }
    let mut noise = seeds.stream("ppo.noise");
    let mut shuffle = seeds.stream("ppo.shuffle");
    let mut obs = env.reset();

    while tracker.steps < config.total_timesteps {
        let n = (p.horizon as u64).min(config.total_timesteps - tracker.steps) as usize;
        let mut ro = Rollout::default();
        for _ in 0..n {
            if let Some(norm) = agent.norm.as_mut() {
                norm.update(&obs);
            }
            let x = agent.input(&obs);
            let mean = agent.policy.forward(&x, 1);
            let action: Vec<f64> = mean
                .iter()
                .zip(&agent.log_std)
                .map(|(m, ls)| {
                    let z: f64 = StandardNormal.sample(&mut noise);
                    m + ls.exp() * z
                })
                .collect();
            let log_prob = gaussian_log_prob(&mean, &agent.log_std, &action);
            let value = agent.value.forward(&x, 1)[0];
            let result = env.step(&Action(unit_to_env(&action, &low, &high)))?;
            let mut reward = result.reward;
            if result.termination() == Some(Termination::Timeout) {
                // time limit, not a terminal state: bootstrap from the value
                let next = agent.input(&result.observation);
                reward += config.gamma * agent.value.forward(&next, 1)[0];
            }
            ro.obs.extend_from_slice(&x);
            ro.actions.extend_from_slice(&action);
            ro.log_probs.push(log_prob);
            ro.values.push(value);
            ro.rewards.push(reward);
            ro.dones.push(result.done);
            tracker.record(result.reward, result.done)?;
            obs = if result.done { env.reset() } else { result.observation };
        }
        let last_value = agent.value.forward(&agent.input(&obs), 1)[0];
        let (adv, returns) = gae(&ro.rewards, &ro.values, last_value, &ro.dones, config.gamma, p.lambda)?;
        update(&mut agent, config, &ro, &adv, &returns, &mut shuffle, tracker.steps)?;
    }
    Ok(agent.checkpoint(env))
}

fn update(
    agent: &mut PpoAgent,
    config: &TrainConfig,
    ro: &Rollout,
    adv: &[f64],
    returns: &[f64],
    rng: &mut impl rand::Rng,
    step: u64,
) -> Result<(), RlError> {
    let p = &config.ppo;
    let n = ro.rewards.len();
    let od = agent.policy.input_dim();
    let ad = agent.policy.output_dim();
    let mut order: Vec<usize> = (0..n).collect();
    let diverged = |e: RlError| match e {
        RlError::NonFiniteGradient { what, index } => RlError::DivergedTraining {
            step,
            reason: format!("non-finite {what} gradient at parameter {index}"),
        },
        other => other,
    };
    for _ in 0..p.epochs {
        order.shuffle(rng);
        for chunk in order.chunks(p.minibatch) {
            let m = chunk.len();
            let mut obs = Vec::with_capacity(m * od);
            let mut actions = Vec::with_capacity(m * ad);
            let mut old = Vec::with_capacity(m);
            let mut a = Vec::with_capacity(m);
            let mut r = Vec::with_capacity(m);
            for &i in chunk {
                obs.extend_from_slice(&ro.obs[i * od..(i + 1) * od]);
                actions.extend_from_slice(&ro.actions[i * ad..(i + 1) * ad]);
                old.push(ro.log_probs[i]);
                a.push(adv[i]);
                r.push(returns[i]);
            }
            if m > 1 {
                let mean = a.iter().sum::<f64>() / m as f64;
                let std = (a.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / m as f64).sqrt();
                a.iter_mut().for_each(|v| *v = (*v - mean) / (std + 1e-8));
            }
            let mut pl = ppo_policy_loss(
                &agent.policy,
                &agent.log_std,
                &PolicyBatch {
                    obs: &obs,
                    actions: &actions,
                    old_log_prob: &old,
                    advantages: &a,
                },
                p.clip,
            );
            if !pl.loss.is_finite() {
                return Err(RlError::DivergedTraining {
                    step,
                    reason: format!("policy loss {}", pl.loss),
                });
            }
            check_finite("policy", &pl.grad_net).map_err(diverged)?;
            check_finite("log_std", &pl.grad_log_std).map_err(diverged)?;
            clip_grad_norm(&mut [&mut pl.grad_net, &mut pl.grad_log_std], p.max_grad_norm);
            agent.policy_opt.step(agent.policy.params_mut(), &pl.grad_net);
            agent.log_std_opt.step(&mut agent.log_std, &pl.grad_log_std);

            let (vl, mut vg) = value_loss(&agent.value, &obs, &r);
            if !vl.is_finite() {
                return Err(RlError::DivergedTraining {
                    step,
                    reason: format!("value loss {vl}"),
                });
            }
            check_finite("value", &vg).map_err(diverged)?;
            clip_grad_norm(&mut [&mut vg], p.max_grad_norm);
            agent.value_opt.step(agent.value.params_mut(), &vg);
        }
    }
    Ok(())
}
