use rand::Rng;
use rand_distr::{Distribution, Normal};
use rovergym_core::env::Termination;
use rovergym_core::rng::SeedTree;
use rovergym_core::{Action, Env};

use crate::adam::Adam;
use crate::checkpoint::{unit_to_env, Checkpoint, PolicyHead};
use crate::config::{Algo, TrainConfig};
use crate::estimators::{clip_noise, td3_target};
use crate::losses::{actor_actions, actor_loss, critic_input, critic_loss};
use crate::mlp::{check_finite, Mlp};
use crate::replay::{Batch, ReplayBuffer, Transition};
use crate::train::Tracker;
use crate::RlError;

pub struct Td3Agent {
    pub actor: Mlp,
    pub critic1: Mlp,
    pub critic2: Mlp,
    pub actor_target: Mlp,
    pub critic1_target: Mlp,
    pub critic2_target: Mlp,
    actor_opt: Adam,
    critic1_opt: Adam,
    critic2_opt: Adam,
    updates: u64,
}

fn sizes(input: usize, hidden: &[usize], output: usize) -> Vec<usize> {
    let mut s = vec![input];
    s.extend_from_slice(hidden);
    s.push(output);
    s
}

impl Td3Agent {
    pub fn new(obs_dim: usize, act_dim: usize, config: &TrainConfig, seeds: &SeedTree) -> Self {
        let t = &config.td3;
        let mut init = seeds.stream("td3.init");
        let actor = Mlp::new(&sizes(obs_dim, &t.hidden, act_dim), 0.1, &mut init);
        let critic1 = Mlp::new(&sizes(obs_dim + act_dim, &t.hidden, 1), 1.0, &mut init);
        let critic2 = Mlp::new(&sizes(obs_dim + act_dim, &t.hidden, 1), 1.0, &mut init);
        Td3Agent {
            actor_opt: Adam::new(actor.num_params(), t.lr),
            critic1_opt: Adam::new(critic1.num_params(), t.lr),
            critic2_opt: Adam::new(critic2.num_params(), t.lr),
            actor_target: actor.clone(),
            critic1_target: critic1.clone(),
            critic2_target: critic2.clone(),
            actor,
            critic1,
            critic2,
            updates: 0,
        }
    }

    pub fn checkpoint(&self, env: &dyn Env) -> Checkpoint {
        let space = env.action_space();
        Checkpoint::new(
            Algo::Td3,
            env.id(),
            &self.actor,
            PolicyHead::Tanh,
            None,
            space.low().to_vec(),
            space.high().to_vec(),
        )
    }

    /// One critic step and, every `policy_delay` calls, an actor step plus
    /// polyak updates of all targets.
    pub fn update<R: Rng + ?Sized>(
        &mut self,
        batch: &Batch,
        config: &TrainConfig,
        rng: &mut R,
        step: u64,
    ) -> Result<(), RlError> {
        let t = &config.td3;
        let n = batch.reward.len();
        let diverged = |e: RlError| match e {
            RlError::NonFiniteGradient { what, index } => RlError::DivergedTraining {
                step,
                reason: format!("non-finite {what} gradient at parameter {index}"),
            },
            other => other,
        };

        let noise = Normal::new(0.0, t.target_noise).expect("validated noise scale");
        let mut next_actions = actor_actions(&self.actor_target, &batch.next_obs, n);
        for a in next_actions.iter_mut() {
            *a = (*a + clip_noise(noise.sample(rng), t.noise_clip)).clamp(-1.0, 1.0);
        }
        let next_input = critic_input(&batch.next_obs, &next_actions, n);
        let q1 = self.critic1_target.forward(&next_input, n);
        let q2 = self.critic2_target.forward(&next_input, n);
        let targets: Vec<f64> = (0..n)
            .map(|i| td3_target(batch.reward[i], batch.done[i], config.gamma, q1[i], q2[i]))
            .collect();

        for (critic, opt, name) in [
            (&mut self.critic1, &mut self.critic1_opt, "critic1"),
            (&mut self.critic2, &mut self.critic2_opt, "critic2"),
        ] {
            let (loss, grad) = critic_loss(critic, &batch.obs, &batch.action, &targets);
            if !loss.is_finite() {
                return Err(RlError::DivergedTraining {
                    step,
                    reason: format!("{name} loss {loss}"),
                });
            }
            check_finite(name, &grad).map_err(diverged)?;
            opt.step(critic.params_mut(), &grad);
        }

        self.updates += 1;
        if self.updates.is_multiple_of(t.policy_delay as u64) {
            let (_, grad) = actor_loss(&self.actor, &self.critic1, &batch.obs, n, t.preactivation_penalty);
            check_finite("actor", &grad).map_err(diverged)?;
            self.actor_opt.step(self.actor.params_mut(), &grad);
            self.actor_target.polyak_from(&self.actor, t.tau);
            self.critic1_target.polyak_from(&self.critic1, t.tau);
            self.critic2_target.polyak_from(&self.critic2, t.tau);
        }
        Ok(())
    }
}

pub(crate) fn run(env: &mut dyn Env, config: &TrainConfig, tracker: &mut Tracker) -> Result<Checkpoint, RlError> {
    let t = &config.td3;
    let seeds = SeedTree::new(config.seed);
    let obs_dim = env.observation_space().dim();
    let act_dim = env.action_space().dim();
    let low = env.action_space().low().to_vec();
    let high = env.action_space().high().to_vec();
    let mut agent = Td3Agent::new(obs_dim, act_dim, config, &seeds);
    if config.total_timesteps == 0 {
        return Ok(agent.checkpoint(env));
    }
    let mut explore = seeds.stream("td3.explore");
    let mut sampler = seeds.stream("td3.replay");
    let mut smoothing = seeds.stream("td3.target_noise");
    let noise = Normal::new(0.0, t.exploration_noise).expect("validated noise scale");
    let mut buffer = ReplayBuffer::new(t.buffer_capacity);
    let mut obs = env.reset();

    while tracker.steps < config.total_timesteps {
        let action: Vec<f64> = if tracker.steps < t.learning_starts {
            (0..act_dim).map(|_| explore.random_range(-1.0..=1.0)).collect()
        } else {
            actor_actions(&agent.actor, &obs, 1)
                .into_iter()
                .map(|a| (a + noise.sample(&mut explore)).clamp(-1.0, 1.0))
                .collect()
        };
        let result = env.step(&Action(unit_to_env(&action, &low, &high)))?;
        let terminal = result.done && result.termination() != Some(Termination::Timeout);
        buffer.push(Transition {
            obs: obs.to_vec(),
            action,
            reward: result.reward,
            next_obs: result.observation.to_vec(),
            done: terminal,
        });
        tracker.record(result.reward, result.done)?;
        obs = if result.done { env.reset() } else { result.observation };

        if tracker.steps > t.learning_starts {
            if let Some(batch) = buffer.sample(t.batch, &mut sampler) {
                agent.update(&batch, config, &mut smoothing, tracker.steps)?;
            }
        }
    }
    Ok(agent.checkpoint(env))
}
