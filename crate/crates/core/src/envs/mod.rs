//! Concrete registered environments.
//!
//! * [`lsd::LsdEnv`] (`lsd_force_lidar-v0`): active-suspension rover that must
//!   climb one randomly generated box obstacle.
//! * [`leo::LeoEnv`] (`leo_nav-v0`): navigation to a goal on undulating
//!   terrain from a depth raster and IMU.
//! * [`drive::DriveEnv`] (`drive_to_target-v0`): one-dimensional smoke task
//!   with a known optimal policy, used to check that training works.

pub mod drive;
pub mod leo;
pub mod lsd;

use serde::{Deserialize, Serialize};

use crate::dynamics::{DynamicsError, Obstacle, Rover, RoverState, Twist};
use crate::env::{EnvError, LidarFrame, Lifecycle, Pose, RenderFrame, Termination};
use crate::episode::{EpisodeLog, LogRecord};
use crate::sensors::{lidar_scan, DepthCamera, LidarConfig, LidarReading};
use crate::terrain::Heightfield;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RewardWeights {
    /// Per meter of forward progress.
    pub w_progress: f64,
    /// Per rad/s of summed |pitch rate| + |roll rate|.
    pub w_stability: f64,
    /// Per unit of summed |motor command|.
    pub w_effort: f64,
    pub success_bonus: f64,
}

impl Default for RewardWeights {
    fn default() -> Self {
        RewardWeights {
            w_progress: 10.0,
            w_stability: 1.0,
            w_effort: 0.01,
            success_bonus: 100.0,
        }
    }
}

impl RewardWeights {
    pub fn validate(&self) -> Result<(), EnvError> {
        let all = [self.w_progress, self.w_stability, self.w_effort, self.success_bonus];
        if all.iter().all(|w| *w >= 0.0 && w.is_finite()) {
            Ok(())
        } else {
            Err(EnvError::InvalidConfig(
                "reward weights must be finite and non-negative".into(),
            ))
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SensorConfig {
    pub imu_sigma: f64,
    pub lidar: LidarConfig,
    pub camera: DepthCamera,
}

impl Default for SensorConfig {
    fn default() -> Self {
        SensorConfig {
            imu_sigma: 0.0,
            lidar: LidarConfig::default(),
            camera: DepthCamera::default(),
        }
    }
}

pub(crate) fn check_range(name: &str, range: [f64; 2]) -> Result<(), EnvError> {
    if range[0].is_finite() && range[1].is_finite() && range[0] <= range[1] {
        Ok(())
    } else {
        Err(EnvError::InvalidConfig(format!(
            "{name} must be a finite [low, high] pair with low <= high"
        )))
    }
}

pub(crate) fn uniform_in<R: rand::Rng + ?Sized>(rng: &mut R, range: [f64; 2]) -> f64 {
    let u: f64 = rng.random();
    range[0] + (range[1] - range[0]) * u
}

/// Rover, terrain and episode bookkeeping shared by every environment.
#[derive(Clone, Debug)]
pub(crate) struct RoverCore {
    pub rover: Rover,
    pub terrain: Heightfield,
    pub state: RoverState,
    pub lifecycle: Lifecycle,
    pub log: EpisodeLog,
    pub last_reward: f64,
    pub last_termination: Option<Termination>,
    pub lidar: LidarConfig,
    pub slice_samples: usize,
}

impl RoverCore {
    pub fn new(rover: Rover, terrain: Heightfield, lidar: LidarConfig, slice_samples: usize) -> Self {
        RoverCore {
            rover,
            terrain,
            state: RoverState::default(),
            lifecycle: Lifecycle::default(),
            log: EpisodeLog::default(),
            last_reward: 0.0,
            last_termination: None,
            lidar,
            slice_samples,
        }
    }

    pub fn begin(&mut self, x: f64, y: f64, heading: f64) -> Result<(), DynamicsError> {
        self.state = self.rover.spawn(&self.terrain, x, y, heading)?;
        self.lifecycle.on_reset();
        self.log.start(self.state);
        self.last_reward = 0.0;
        self.last_termination = None;
        Ok(())
    }

    /// One physics tick. The arena edge acts as a wall: a move that would
    /// carry the footprint off the terrain is replaced by turning in place
    /// with zero forward speed.
    pub fn advance(
        &mut self,
        twist: Twist,
        motors: [f64; 4],
        obstacle: Option<&Obstacle>,
    ) -> Result<RoverState, EnvError> {
        let dt = self.rover.config.dt;
        let prev = self.state;
        let next = match self.rover.integrate(&prev, twist, motors, &self.terrain, obstacle, dt) {
            Err(DynamicsError::OutOfTerrain { .. }) => {
                let stopped = Twist::new(0.0, 0.0);
                self.rover
                    .integrate(&prev, stopped, motors, &self.terrain, obstacle, dt)?
            }
            other => other?,
        };
        self.state = next;
        Ok(prev)
    }

    pub fn finish_step(&mut self, action: Vec<f64>, reward: f64, termination: Option<Termination>) {
        let done = termination.is_some();
        self.last_reward = reward;
        self.last_termination = termination;
        self.lifecycle.on_step(done);
        self.log.push(LogRecord {
            tick: self.state.tick,
            state: self.state,
            action,
            reward,
            done,
        });
    }

    pub fn lidar_reading(&self) -> Result<LidarReading, DynamicsError> {
        lidar_scan(&self.rover, &self.state, &self.terrain, &self.lidar)
    }

    /// Heights along the heading from 1 m behind to 4 m ahead of the chassis.
    pub fn terrain_slice(&self) -> Vec<f64> {
        let n = self.slice_samples.max(2);
        let (s, c) = self.state.heading.sin_cos();
        (0..n)
            .map(|k| {
                let d = -1.0 + 5.0 * k as f64 / (n - 1) as f64;
                self.terrain.height_clamped(self.state.x + c * d, self.state.y + s * d)
            })
            .collect()
    }

    pub fn frame(&self) -> Result<RenderFrame, EnvError> {
        self.lifecycle.check_ready()?;
        let lidar = self.lidar_reading()?;
        let s = &self.state;
        Ok(RenderFrame {
            tick: s.tick,
            pose: Pose {
                x: s.x,
                y: s.y,
                heading: s.heading,
                pitch: s.pitch,
                roll: s.roll,
            },
            suspension: s.suspension.joint_angles,
            lidar: LidarFrame {
                height: lidar.obstacle_height,
                distance: lidar.obstacle_distance,
            },
            terrain_slice: self.terrain_slice(),
            reward: self.last_reward,
            done: self.last_termination.is_some(),
            termination: self.last_termination,
        })
    }
}

pub(crate) fn flipped(state: &RoverState, threshold: f64) -> bool {
    state.pitch.abs() > threshold || state.roll.abs() > threshold
}
