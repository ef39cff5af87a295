//! `lsd_force_lidar-v0`: obstacle climbing with active suspension.
//!
//! Observation `[obstacle_height, pitch, obstacle_distance]` from the forward
//! lidar and IMU. Action `[m1, m2, m3, m4, linear, angular]`: four suspension
//! motor commands in `[-1, 1]` followed by a twist setpoint. The episode
//! succeeds once the chassis center passes the far edge of the obstacle.

use std::f64::consts::FRAC_PI_2;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{check_range, flipped, uniform_in, RewardWeights, RoverCore, SensorConfig};
use crate::dynamics::{DynamicsConfig, Obstacle, Rover, RoverGeometry, RoverState, Twist};
use crate::env::{prepare_action, Env, EnvError, RenderFrame, StepResult, Termination};
use crate::episode::EpisodeLog;
use crate::rng::{SeedTree, StreamRng};
use crate::sensors::imu_read;
use crate::space::{Action, BoxSpace, Observation};
use crate::terrain::Heightfield;

pub const ID: &str = "lsd_force_lidar-v0";

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EpisodeConfig {
    pub max_steps: u64,
    pub obstacle_height_range: [f64; 2],
    pub obstacle_depth_range: [f64; 2],
    /// Distance of the obstacle face ahead of the start position.
    pub obstacle_placement_range: [f64; 2],
    pub obstacle_width: f64,
    pub flip_threshold: f64,
    pub arena_length: f64,
    pub arena_width: f64,
    /// Terrain extent behind the start position.
    pub arena_back: f64,
    pub resolution: f64,
    pub slice_samples: usize,
}

impl Default for EpisodeConfig {
    fn default() -> Self {
        EpisodeConfig {
            max_steps: 1500,
            obstacle_height_range: [0.05, 0.25],
            obstacle_depth_range: [0.10, 0.50],
            obstacle_placement_range: [2.0, 4.0],
            obstacle_width: 4.0,
            flip_threshold: 0.6,
            arena_length: 20.0,
            arena_width: 4.0,
            arena_back: 2.0,
            resolution: 0.02,
            slice_samples: 64,
        }
    }
}

impl EpisodeConfig {
    pub fn validate(&self) -> Result<(), EnvError> {
        check_range("obstacle_height_range", self.obstacle_height_range)?;
        check_range("obstacle_depth_range", self.obstacle_depth_range)?;
        check_range("obstacle_placement_range", self.obstacle_placement_range)?;
        let bad = |msg: &str| Err(EnvError::InvalidConfig(msg.to_string()));
        if self.max_steps == 0 {
            return bad("max_steps must be positive");
        }
        if self.obstacle_height_range[0] < 0.0 || self.obstacle_depth_range[0] <= 0.0 {
            return bad("obstacle heights must be non-negative and depths positive");
        }
        if !(self.resolution > 0.0 && self.arena_length > 0.0 && self.arena_width > 0.0) {
            return bad("arena dimensions and resolution must be positive");
        }
        let far = self.obstacle_placement_range[1] + self.obstacle_depth_range[1];
        if self.obstacle_placement_range[0] <= 0.0 || far + 1.0 > self.arena_length - self.arena_back {
            return bad("obstacle placement must lie ahead of the start and inside the arena");
        }
        if !(self.flip_threshold > 0.0 && self.flip_threshold < FRAC_PI_2) {
            return bad("flip_threshold must be in (0, pi/2)");
        }
        Ok(())
    }

    pub fn sample_obstacle<R: Rng + ?Sized>(&self, rng: &mut R) -> Obstacle {
        let height = uniform_in(rng, self.obstacle_height_range);
        let depth = uniform_in(rng, self.obstacle_depth_range);
        let x_start = uniform_in(rng, self.obstacle_placement_range);
        Obstacle {
            x_start,
            height,
            depth,
            width: self.obstacle_width,
            y_center: 0.0,
        }
    }

    fn arena(&self) -> Result<Heightfield, EnvError> {
        Heightfield::flat_arena(
            -self.arena_back,
            -0.5 * self.arena_width,
            self.arena_length,
            self.arena_width,
            self.resolution,
        )
        .map_err(|e| EnvError::InvalidConfig(e.to_string()))
    }
}

/// `w_progress * dx - w_stability * (|pitch_rate| + |roll_rate|)
///  - w_effort * sum |motor| + success_bonus * [success]`.
pub fn reward(w: &RewardWeights, prev: &RoverState, cur: &RoverState, success: bool) -> f64 {
    let effort: f64 = cur.suspension.motor_commands.iter().map(|m| m.abs()).sum();
    let mut r = w.w_progress * (cur.x - prev.x)
        - w.w_stability * (cur.pitch_rate.abs() + cur.roll_rate.abs())
        - w.w_effort * effort;
    if success {
        r += w.success_bonus;
    }
    r
}

pub struct LsdEnv {
    config: EpisodeConfig,
    weights: RewardWeights,
    sensors: SensorConfig,
    observation_space: BoxSpace,
    action_space: BoxSpace,
    obstacle_rng: StreamRng,
    imu_rng: StreamRng,
    flat: Heightfield,
    core: RoverCore,
    obstacle: Obstacle,
    observation: Observation,
}

impl LsdEnv {
    pub fn new(
        config: EpisodeConfig,
        weights: RewardWeights,
        sensors: SensorConfig,
        geometry: RoverGeometry,
        dynamics: DynamicsConfig,
        seed: u64,
    ) -> Result<Self, EnvError> {
        config.validate()?;
        weights.validate()?;
        let rover = Rover::new(geometry, dynamics)?;
        let flat = config.arena()?;
        let max_range = sensors.lidar.max_range;
        let observation_space = BoxSpace::new(vec![0.0, -FRAC_PI_2, 0.0], vec![1.0, FRAC_PI_2, max_range])
            .map_err(|e| EnvError::InvalidConfig(e.to_string()))?;
        let (v, w) = (dynamics.v_max, dynamics.omega_max);
        let action_space = BoxSpace::new(vec![-1.0, -1.0, -1.0, -1.0, -v, -w], vec![1.0, 1.0, 1.0, 1.0, v, w])
            .map_err(|e| EnvError::InvalidConfig(e.to_string()))?;
        let seeds = SeedTree::new(seed);
        let obstacle = config.sample_obstacle(&mut seeds.stream("obstacle"));
        Ok(LsdEnv {
            config,
            weights,
            sensors,
            observation_space,
            action_space,
            obstacle_rng: seeds.stream("obstacle"),
            imu_rng: seeds.stream("imu"),
            core: RoverCore::new(rover, flat.clone(), sensors.lidar, config.slice_samples),
            flat,
            obstacle,
            observation: Observation(vec![0.0; 3]),
        })
    }

    pub fn with_defaults(seed: u64) -> Self {
        LsdEnv::new(
            EpisodeConfig::default(),
            RewardWeights::default(),
            SensorConfig::default(),
            RoverGeometry::default(),
            DynamicsConfig::default(),
            seed,
        )
        .expect("default configuration is valid")
    }

    pub fn obstacle(&self) -> &Obstacle {
        &self.obstacle
    }

    pub fn state(&self) -> &RoverState {
        &self.core.state
    }

    pub fn rover(&self) -> &Rover {
        &self.core.rover
    }

    pub fn terrain(&self) -> &Heightfield {
        &self.core.terrain
    }

    pub fn config(&self) -> &EpisodeConfig {
        &self.config
    }

    fn observe(&mut self) -> Result<Observation, EnvError> {
        let lidar = self.core.lidar_reading()?;
        let imu = imu_read(&self.core.state, self.sensors.imu_sigma, &mut self.imu_rng);
        Ok(Observation(self.observation_space.clip(&[
            lidar.obstacle_height,
            imu.pitch,
            lidar.obstacle_distance,
        ])))
    }
}

impl Env for LsdEnv {
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
        let seeds = SeedTree::new(seed);
        self.obstacle_rng = seeds.stream("obstacle");
        self.imu_rng = seeds.stream("imu");
    }

    fn reset(&mut self) -> Observation {
        self.obstacle = self.config.sample_obstacle(&mut self.obstacle_rng);
        let mut terrain = self.flat.clone();
        self.obstacle.stamp(&mut terrain);
        self.core.terrain = terrain;
        self.core
            .begin(0.0, 0.0, 0.0)
            .expect("validated arena contains the start pose");
        self.observation = self.observe().expect("start pose is inside the arena");
        self.observation.clone()
    }

    fn step(&mut self, action: &Action) -> Result<StepResult, EnvError> {
        self.core.lifecycle.check_step()?;
        let a = prepare_action(&self.action_space, action)?;
        let motors = [a[0], a[1], a[2], a[3]];
        let prev = self
            .core
            .advance(Twist::new(a[4], a[5]), motors, Some(&self.obstacle))?;
        let cur = self.core.state;

        let success = cur.x > self.obstacle.x_end();
        let termination = if flipped(&cur, self.config.flip_threshold) {
            Some(Termination::Flipped)
        } else if success {
            Some(Termination::Success)
        } else if cur.tick >= self.config.max_steps {
            Some(Termination::Timeout)
        } else {
            None
        };
        let r = reward(&self.weights, &prev, &cur, termination == Some(Termination::Success));
        self.observation = self.observe()?;
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

    fn teleop_action(&self, twist: &Twist, motors: &[f64; 4]) -> Action {
        Action(vec![
            motors[0],
            motors[1],
            motors[2],
            motors[3],
            twist.linear,
            twist.angular,
        ])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SeedTree;

    #[test]
    fn reward_examples() {
        let w = RewardWeights::default();
        let s = RoverState::default();
        assert_eq!(reward(&w, &s, &s, false), 0.0);
        let moved = RoverState { x: 0.02, ..s };
        assert!((reward(&w, &s, &moved, false) - 0.2).abs() < 1e-12);
        assert!((reward(&w, &s, &moved, true) - 100.2).abs() < 1e-12);
    }

    #[test]
    fn obstacle_draws_cover_configured_ranges() {
        let cfg = EpisodeConfig::default();
        let mut lo = [f64::INFINITY; 3];
        let mut hi = [f64::NEG_INFINITY; 3];
        for seed in 0..10_000u64 {
            let ob = cfg.sample_obstacle(&mut SeedTree::new(seed).stream("obstacle"));
            for (k, v) in [ob.height, ob.depth, ob.x_start].into_iter().enumerate() {
                lo[k] = lo[k].min(v);
                hi[k] = hi[k].max(v);
            }
        }
        let ranges = [
            cfg.obstacle_height_range,
            cfg.obstacle_depth_range,
            cfg.obstacle_placement_range,
        ];
        for k in 0..3 {
            let span = ranges[k][1] - ranges[k][0];
            assert!(lo[k] >= ranges[k][0] && hi[k] <= ranges[k][1]);
            assert!((lo[k] - ranges[k][0]).abs() <= 0.01 * span, "min {k}");
            assert!((hi[k] - ranges[k][1]).abs() <= 0.01 * span, "max {k}");
        }
    }

    #[test]
    fn invalid_config_rejected() {
        let cfg = EpisodeConfig {
            obstacle_height_range: [0.3, 0.1],
            ..EpisodeConfig::default()
        };
        assert!(matches!(cfg.validate(), Err(EnvError::InvalidConfig(_))));
        let cfg = EpisodeConfig {
            obstacle_placement_range: [2.0, 30.0],
            ..EpisodeConfig::default()
        };
        assert!(cfg.validate().is_err());
    }
}
