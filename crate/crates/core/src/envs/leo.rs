//! `leo_nav-v0`: drive to a goal across undulating terrain.
//!
//! Observation: a row-major depth raster from the mast camera followed by the
//! five IMU channels `[pitch, roll, pitch_rate, roll_rate, yaw_rate]`.
//! Action: `[linear, angular]` twist setpoint. The goal is placed ahead of
//! the start pose at a seeded distance.

use std::f64::consts::{FRAC_PI_2, TAU};

use serde::{Deserialize, Serialize};

use super::{check_range, flipped, uniform_in, RewardWeights, RoverCore, SensorConfig};
use crate::dynamics::{DynamicsConfig, Rover, RoverGeometry, RoverState, Twist};
use crate::env::{prepare_action, Env, EnvError, RenderFrame, StepResult, Termination};
use crate::episode::EpisodeLog;
use crate::rng::{SeedTree, StreamRng};
use crate::sensors::imu_read;
use crate::space::{Action, BoxSpace, Observation};
use crate::terrain::Heightfield;

pub const ID: &str = "leo_nav-v0";

const RATE_BOUND: f64 = 100.0;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LeoConfig {
    pub max_steps: u64,
    /// Side of the square arena centered on the start, m.
    pub arena_size: f64,
    pub resolution: f64,
    /// Peak height of the terrain undulation, m. Zero gives flat ground.
    pub terrain_amplitude: f64,
    pub terrain_wavelength: f64,
    pub goal_distance_range: [f64; 2],
    /// Sideways offset of the goal from the initial heading line.
    pub goal_lateral_range: [f64; 2],
    pub goal_radius: f64,
    pub flip_threshold: f64,
    pub slice_samples: usize,
}

impl Default for LeoConfig {
    fn default() -> Self {
        LeoConfig {
            max_steps: 1000,
            arena_size: 12.0,
            resolution: 0.05,
            terrain_amplitude: 0.04,
            terrain_wavelength: 2.0,
            goal_distance_range: [3.0, 5.0],
            goal_lateral_range: [0.0, 0.0],
            goal_radius: 0.3,
            flip_threshold: 0.6,
            slice_samples: 64,
        }
    }
}

impl LeoConfig {
    pub fn validate(&self) -> Result<(), EnvError> {
        check_range("goal_distance_range", self.goal_distance_range)?;
        check_range("goal_lateral_range", self.goal_lateral_range)?;
        let bad = |msg: &str| Err(EnvError::InvalidConfig(msg.to_string()));
        if self.max_steps == 0 || !(self.resolution > 0.0) || !(self.goal_radius > 0.0) {
            return bad("max_steps, resolution and goal_radius must be positive");
        }
        let reach =
            self.goal_distance_range[1].hypot(self.goal_lateral_range[0].abs().max(self.goal_lateral_range[1].abs()));
        if reach + 1.0 > 0.5 * self.arena_size {
            return bad("goal must lie at least 1 m inside the arena");
        }
        if !(self.terrain_amplitude >= 0.0 && self.terrain_wavelength > 0.0) {
            return bad("terrain amplitude must be non-negative and wavelength positive");
        }
        if !(self.flip_threshold > 0.0 && self.flip_threshold < FRAC_PI_2) {
            return bad("flip_threshold must be in (0, pi/2)");
        }
        Ok(())
    }
}

pub struct LeoEnv {
    config: LeoConfig,
    weights: RewardWeights,
    sensors: SensorConfig,
    observation_space: BoxSpace,
    action_space: BoxSpace,
    terrain_rng: StreamRng,
    goal_rng: StreamRng,
    imu_rng: StreamRng,
    core: RoverCore,
    goal: (f64, f64),
    observation: Observation,
}

impl LeoEnv {
    pub fn new(
        config: LeoConfig,
        weights: RewardWeights,
        sensors: SensorConfig,
        geometry: RoverGeometry,
        dynamics: DynamicsConfig,
        seed: u64,
    ) -> Result<Self, EnvError> {
        config.validate()?;
        weights.validate()?;
        let rover = Rover::new(geometry, dynamics)?;
        let pixels = sensors.camera.pixels();
        if pixels == 0 {
            return Err(EnvError::InvalidConfig("camera has no pixels".into()));
        }
        let mut low = vec![0.0; pixels];
        let mut high = vec![sensors.camera.max_depth; pixels];
        low.extend([-FRAC_PI_2, -FRAC_PI_2, -RATE_BOUND, -RATE_BOUND, -RATE_BOUND]);
        high.extend([FRAC_PI_2, FRAC_PI_2, RATE_BOUND, RATE_BOUND, RATE_BOUND]);
        let observation_space = BoxSpace::new(low, high).map_err(|e| EnvError::InvalidConfig(e.to_string()))?;
        let action_space = BoxSpace::new(
            vec![-dynamics.v_max, -dynamics.omega_max],
            vec![dynamics.v_max, dynamics.omega_max],
        )
        .map_err(|e| EnvError::InvalidConfig(e.to_string()))?;
        let half = 0.5 * config.arena_size;
        let terrain = Heightfield::flat_arena(-half, -half, config.arena_size, config.arena_size, config.resolution)
            .map_err(|e| EnvError::InvalidConfig(e.to_string()))?;
        let seeds = SeedTree::new(seed);
        let dim = observation_space.dim();
        Ok(LeoEnv {
            config,
            weights,
            sensors,
            observation_space,
            action_space,
            terrain_rng: seeds.stream("terrain"),
            goal_rng: seeds.stream("goal"),
            imu_rng: seeds.stream("imu"),
            core: RoverCore::new(rover, terrain, sensors.lidar, config.slice_samples),
            goal: (0.0, 0.0),
            observation: Observation(vec![0.0; dim]),
        })
    }

    pub fn with_defaults(seed: u64) -> Self {
        LeoEnv::new(
            LeoConfig::default(),
            RewardWeights::default(),
            SensorConfig::default(),
            RoverGeometry::default(),
            DynamicsConfig::default(),
            seed,
        )
        .expect("default configuration is valid")
    }

    pub fn goal(&self) -> (f64, f64) {
        self.goal
    }

    pub fn state(&self) -> &RoverState {
        &self.core.state
    }

    fn goal_distance(&self, s: &RoverState) -> f64 {
        (self.goal.0 - s.x).hypot(self.goal.1 - s.y)
    }

    fn generate_terrain(&mut self) -> Heightfield {
        let phases: [f64; 3] = [0, 1, 2].map(|_| uniform_in(&mut self.terrain_rng, [0.0, TAU]));
        let amp = self.config.terrain_amplitude;
        let k = TAU / self.config.terrain_wavelength;
        let half = 0.5 * self.config.arena_size;
        Heightfield::from_fn(
            -half,
            -half,
            self.config.resolution,
            self.core.terrain.length(),
            self.core.terrain.width(),
            |x, y| {
                amp * (0.6 * (k * x + phases[0]).sin() * (k * y + phases[1]).sin()
                    + 0.4 * (0.6 * k * (x + y) + phases[2]).sin())
            },
        )
        .expect("arena shape was validated")
    }

    fn observe(&mut self) -> Result<Observation, EnvError> {
        let mut values = self
            .sensors
            .camera
            .render(&self.core.rover, &self.core.state, &self.core.terrain)?;
        let imu = imu_read(&self.core.state, self.sensors.imu_sigma, &mut self.imu_rng);
        values.extend(imu.to_array());
        Ok(Observation(self.observation_space.clip(&values)))
    }
}

impl Env for LeoEnv {
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
        self.terrain_rng = seeds.stream("terrain");
        self.goal_rng = seeds.stream("goal");
        self.imu_rng = seeds.stream("imu");
    }

    fn reset(&mut self) -> Observation {
        self.core.terrain = self.generate_terrain();
        let distance = uniform_in(&mut self.goal_rng, self.config.goal_distance_range);
        let lateral = uniform_in(&mut self.goal_rng, self.config.goal_lateral_range);
        self.goal = (distance, lateral);
        self.core
            .begin(0.0, 0.0, 0.0)
            .expect("validated arena contains the start pose");
        self.observation = self.observe().expect("start pose is inside the arena");
        self.observation.clone()
    }

    fn step(&mut self, action: &Action) -> Result<StepResult, EnvError> {
        self.core.lifecycle.check_step()?;
        let a = prepare_action(&self.action_space, action)?;
        let prev = self.core.advance(Twist::new(a[0], a[1]), [0.0; 4], None)?;
        let cur = self.core.state;

        let success = self.goal_distance(&cur) <= self.config.goal_radius;
        let termination = if flipped(&cur, self.config.flip_threshold) {
            Some(Termination::Flipped)
        } else if success {
            Some(Termination::Success)
        } else if cur.tick >= self.config.max_steps {
            Some(Termination::Timeout)
        } else {
            None
        };
        let w = &self.weights;
        let mut r = w.w_progress * (self.goal_distance(&prev) - self.goal_distance(&cur))
            - w.w_stability * (cur.pitch_rate.abs() + cur.roll_rate.abs());
        if termination == Some(Termination::Success) {
            r += w.success_bonus;
        }
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

    fn teleop_action(&self, twist: &Twist, _motors: &[f64; 4]) -> Action {
        Action(vec![twist.linear, twist.angular])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spaces_have_documented_dims() {
        let env = LeoEnv::with_defaults(0);
        assert_eq!(env.observation_space().dim(), 32 * 24 + 5);
        assert_eq!(env.action_space().dim(), 2);
    }

    #[test]
    fn forward_drive_reaches_goal_ahead_on_flat_ground() {
        let config = LeoConfig {
            terrain_amplitude: 0.0,
            goal_distance_range: [4.0, 4.0],
            ..LeoConfig::default()
        };
        let mut env = LeoEnv::new(
            config,
            RewardWeights::default(),
            SensorConfig::default(),
            RoverGeometry::default(),
            DynamicsConfig::default(),
            3,
        )
        .unwrap();
        env.reset();
        // Closed form: the center covers 1.5 * 0.02 m per tick and must come
        // within 0.3 m of a goal 4 m ahead.
        let expected = ((4.0f64 - 0.3) / (1.5 * 0.02)).ceil() as u64;
        let mut last = None;
        for _ in 0..config.max_steps {
            let r = env.step(&Action(vec![1.5, 0.0])).unwrap();
            if r.done {
                last = Some(r);
                break;
            }
        }
        let last = last.expect("episode ended");
        assert_eq!(last.termination(), Some(Termination::Success));
        let ticks = env.state().tick;
        assert!(ticks.abs_diff(expected) <= 1, "{ticks} vs {expected}");
    }
}
