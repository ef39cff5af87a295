//! `drive_to_target-v0`: the smallest task with a known optimum.
//!
//! The rover starts at rest facing a target a seeded distance ahead on flat
//! ground. Observation `[remaining distance]`, action `[linear]`. Reward is
//! progress toward the target minus a per-tick time cost, plus a bonus on
//! arrival, so driving at full speed is optimal.

use serde::{Deserialize, Serialize};

use super::{check_range, uniform_in, RoverCore};
use crate::dynamics::{DynamicsConfig, Rover, RoverGeometry, RoverState, Twist};
use crate::env::{prepare_action, Env, EnvError, RenderFrame, StepResult, Termination};
use crate::episode::EpisodeLog;
use crate::rng::{SeedTree, StreamRng};
use crate::sensors::LidarConfig;
use crate::space::{Action, BoxSpace, Observation};
use crate::terrain::Heightfield;

pub const ID: &str = "drive_to_target-v0";

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DriveConfig {
    pub max_steps: u64,
    pub target_range: [f64; 2],
    pub progress_weight: f64,
    pub time_penalty: f64,
    pub success_bonus: f64,
}

impl Default for DriveConfig {
    fn default() -> Self {
        DriveConfig {
            max_steps: 200,
            target_range: [1.0, 3.0],
            progress_weight: 10.0,
            time_penalty: 0.1,
            success_bonus: 10.0,
        }
    }
}

const BEHIND: f64 = 2.0;
const AHEAD_MARGIN: f64 = 2.0;

pub struct DriveEnv {
    config: DriveConfig,
    observation_space: BoxSpace,
    action_space: BoxSpace,
    target_rng: StreamRng,
    core: RoverCore,
    target: f64,
    observation: Observation,
}

impl DriveEnv {
    pub fn new(
        config: DriveConfig,
        geometry: RoverGeometry,
        dynamics: DynamicsConfig,
        seed: u64,
    ) -> Result<Self, EnvError> {
        check_range("target_range", config.target_range)?;
        if config.target_range[0] <= 0.0 || config.max_steps == 0 {
            return Err(EnvError::InvalidConfig(
                "target must lie ahead and max_steps be positive".into(),
            ));
        }
        let rover = Rover::new(geometry, dynamics)?;
        let far = config.target_range[1];
        let terrain = Heightfield::flat_arena(-BEHIND, -1.0, BEHIND + far + AHEAD_MARGIN, 2.0, 0.05)
            .map_err(|e| EnvError::InvalidConfig(e.to_string()))?;
        let observation_space =
            BoxSpace::new(vec![-BEHIND], vec![far + BEHIND]).map_err(|e| EnvError::InvalidConfig(e.to_string()))?;
        let action_space = BoxSpace::new(vec![-dynamics.v_max], vec![dynamics.v_max])
            .map_err(|e| EnvError::InvalidConfig(e.to_string()))?;
        Ok(DriveEnv {
            config,
            observation_space,
            action_space,
            target_rng: SeedTree::new(seed).stream("target"),
            core: RoverCore::new(rover, terrain, LidarConfig::default(), 32),
            target: 0.0,
            observation: Observation(vec![0.0]),
        })
    }

    pub fn with_defaults(seed: u64) -> Self {
        DriveEnv::new(
            DriveConfig::default(),
            RoverGeometry::default(),
            DynamicsConfig::default(),
            seed,
        )
        .expect("default configuration is valid")
    }

    pub fn target(&self) -> f64 {
        self.target
    }

    pub fn state(&self) -> &RoverState {
        &self.core.state
    }

    fn observe(&self) -> Observation {
        Observation(self.observation_space.clip(&[self.target - self.core.state.x]))
    }
}

impl Env for DriveEnv {
    fn id(&self) -> &str {
        ID
    }

    fn observation_space(&self) -> &BoxSpace {
        &self.observation_space
    }

    fn action_space(&self) -> &BoxSpace {
        &self.action_space
    }

    fn seed(&mut self, seed: u64) {
        self.target_rng = SeedTree::new(seed).stream("target");
    }

    fn reset(&mut self) -> Observation {
        self.target = uniform_in(&mut self.target_rng, self.config.target_range);
        self.core.begin(0.0, 0.0, 0.0).expect("start pose is inside the arena");
        self.observation = self.observe();
        self.observation.clone()
    }

    fn step(&mut self, action: &Action) -> Result<StepResult, EnvError> {
        self.core.lifecycle.check_step()?;
        let a = prepare_action(&self.action_space, action)?;
        let prev = self.core.advance(Twist::new(a[0], 0.0), [0.0; 4], None)?;
        let cur = self.core.state;
        let success = cur.x >= self.target;
        let progress = cur.x.min(self.target) - prev.x.min(self.target);
        let mut r = self.config.progress_weight * progress - self.config.time_penalty;
        let termination = if success {
            r += self.config.success_bonus;
            Some(Termination::Success)
        } else if cur.tick >= self.config.max_steps {
            Some(Termination::Timeout)
        } else {
            None
        };
        self.observation = self.observe();
        self.core.finish_step(a, r, termination);
        Ok(StepResult::new(self.observation.clone(), r, termination))
    }

    fn get_observation(&self) -> Result<Observation, EnvError> {
        self.core.lifecycle.check_ready()?;
        Ok(self.observation.clone())
    }

    fn render(&self) -> Result<RenderFrame, EnvError> {
        self.core.frame()
    }

    fn episode_log(&self) -> &EpisodeLog {
        &self.core.log
    }

    fn teleop_action(&self, twist: &Twist, _motors: &[f64; 4]) -> Action {
        Action(vec![twist.linear])
    }
}

/// Return of the full-speed policy for a target `distance` ahead.
pub fn optimal_return(config: &DriveConfig, dynamics: &DynamicsConfig, distance: f64) -> f64 {
    let per_tick = dynamics.v_max * dynamics.dt;
    let ticks = (distance / per_tick).ceil();
    config.progress_weight * distance - config.time_penalty * ticks + config.success_bonus
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn full_speed_matches_closed_form() {
        let mut env = DriveEnv::with_defaults(9);
        env.reset();
        let d = env.target();
        let mut total = 0.0;
        loop {
            let r = env.step(&Action(vec![1.5])).unwrap();
            total += r.reward;
            if r.done {
                assert_eq!(r.termination(), Some(Termination::Success));
                break;
            }
        }
        let expected = optimal_return(&DriveConfig::default(), &DynamicsConfig::default(), d);
        // Position accumulates in floating point; allow the arrival tick to
        // differ by one from the exact ceiling.
        assert!((total - expected).abs() <= 0.1 + 1e-9, "{total} vs {expected}");
    }

    #[test]
    fn standing_still_times_out() {
        let mut env = DriveEnv::with_defaults(1);
        env.reset();
        let mut steps = 0;
        loop {
            steps += 1;
            let r = env.step(&Action(vec![0.0])).unwrap();
            if r.done {
                assert_eq!(r.termination(), Some(Termination::Timeout));
                break;
            }
        }
        assert_eq!(steps, 200);
    }

    #[test]
    fn reversing_into_the_wall_is_safe() {
        let mut env = DriveEnv::with_defaults(1);
        env.reset();
        for _ in 0..199 {
            env.step(&Action(vec![-1.5])).unwrap();
        }
        assert!(env.state().x > -BEHIND);
    }
}
