//! IMU, forward lidar and depth-camera models.

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::dynamics::{DynamicsError, Rover, RoverState};
use crate::terrain::Heightfield;

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ImuReading {
    pub pitch: f64,
    pub roll: f64,
    pub pitch_rate: f64,
    pub roll_rate: f64,
    pub yaw_rate: f64,
}

impl ImuReading {
    pub fn to_array(&self) -> [f64; 5] {
        [self.pitch, self.roll, self.pitch_rate, self.roll_rate, self.yaw_rate]
    }
}

/// Attitude and body rates, with independent `N(0, sigma^2)` noise per
/// channel when `sigma > 0`.
pub fn imu_read<R: Rng + ?Sized>(state: &RoverState, sigma: f64, rng: &mut R) -> ImuReading {
    let exact = ImuReading {
        pitch: state.pitch,
        roll: state.roll,
        pitch_rate: state.pitch_rate,
        roll_rate: state.roll_rate,
        yaw_rate: state.yaw_rate,
    };
    if !(sigma > 0.0) {
        return exact;
    }
    let noise = Normal::new(0.0, sigma).expect("sigma is positive and finite");
    ImuReading {
        pitch: exact.pitch + noise.sample(rng),
        roll: exact.roll + noise.sample(rng),
        pitch_rate: exact.pitch_rate + noise.sample(rng),
        roll_rate: exact.roll_rate + noise.sample(rng),
        yaw_rate: exact.yaw_rate + noise.sample(rng),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LidarConfig {
    pub max_range: f64,
    /// Minimum rise above the current contact height that counts as an obstacle.
    pub step_threshold: f64,
    /// Distance past the detected face over which the obstacle height is taken.
    pub height_window: f64,
}

impl Default for LidarConfig {
    fn default() -> Self {
        LidarConfig {
            max_range: 5.0,
            step_threshold: 0.02,
            height_window: 0.5,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LidarReading {
    pub obstacle_height: f64,
    pub obstacle_distance: f64,
}

/// Horizontal ray from the front axle center along the heading, marched at
/// terrain resolution. The first sample rising more than `step_threshold`
/// above the front contact height is the obstacle face; its height is the
/// highest terrain within `height_window` beyond the face. No face within
/// range (or before the terrain edge) reads `(0, max_range)`.
pub fn lidar_scan(
    rover: &Rover,
    state: &RoverState,
    terrain: &Heightfield,
    config: &LidarConfig,
) -> Result<LidarReading, DynamicsError> {
    let contacts = rover.wheel_contacts(terrain, state.x, state.y, state.heading)?;
    let contact = 0.5 * (contacts[0] + contacts[1]);
    let (fx, fy) = rover.front_axle(state.x, state.y, state.heading);
    let (s, c) = state.heading.sin_cos();
    let res = terrain.resolution();
    let steps = (config.max_range / res).floor() as usize;
    let none = LidarReading {
        obstacle_height: 0.0,
        obstacle_distance: config.max_range,
    };
    for k in 1..=steps {
        let d = k as f64 * res;
        let Ok(h) = terrain.height_at(fx + c * d, fy + s * d) else {
            return Ok(none);
        };
        if h > contact + config.step_threshold {
            let window = (config.height_window / res).round() as usize;
            let mut top = h;
            for w in 1..=window {
                let dw = d + w as f64 * res;
                if let Ok(hw) = terrain.height_at(fx + c * dw, fy + s * dw) {
                    top = top.max(hw);
                }
            }
            return Ok(LidarReading {
                obstacle_height: top - contact,
                obstacle_distance: d,
            });
        }
    }
    Ok(none)
}

/// Mast-mounted pinhole depth camera rendered by ray marching the heightfield.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DepthCamera {
    pub cols: usize,
    pub rows: usize,
    pub horizontal_fov: f64,
    pub vertical_fov: f64,
    /// Downward tilt of the optical axis, rad.
    pub tilt: f64,
    /// Camera height above the chassis, m.
    pub mast_height: f64,
    pub max_depth: f64,
    /// March step, m.
    pub step: f64,
}

impl Default for DepthCamera {
    fn default() -> Self {
        DepthCamera {
            cols: 32,
            rows: 24,
            horizontal_fov: 1.2,
            vertical_fov: 0.9,
            tilt: 0.35,
            mast_height: 0.4,
            max_depth: 6.0,
            step: 0.05,
        }
    }
}

impl DepthCamera {
    pub fn pixels(&self) -> usize {
        self.cols * self.rows
    }

    /// Row-major depth image (row 0 at the top, column 0 at the left), meters.
    /// Rays that leave the terrain or exceed `max_depth` read `max_depth`.
    pub fn render(&self, rover: &Rover, state: &RoverState, terrain: &Heightfield) -> Result<Vec<f64>, DynamicsError> {
        let eye_z = rover.chassis_height(terrain, state)? + self.mast_height;
        let mut image = Vec::with_capacity(self.pixels());
        for row in 0..self.rows {
            let v = 0.5 - (row as f64 + 0.5) / self.rows as f64;
            let elevation = state.pitch - self.tilt + v * self.vertical_fov;
            let (sin_e, cos_e) = elevation.sin_cos();
            for col in 0..self.cols {
                let u = 0.5 - (col as f64 + 0.5) / self.cols as f64;
                let azimuth = state.heading + u * self.horizontal_fov;
                let (sin_a, cos_a) = azimuth.sin_cos();
                image.push(self.march(
                    terrain,
                    (state.x, state.y, eye_z),
                    (cos_e * cos_a, cos_e * sin_a, sin_e),
                ));
            }
        }
        Ok(image)
    }

    fn march(&self, terrain: &Heightfield, eye: (f64, f64, f64), dir: (f64, f64, f64)) -> f64 {
        let mut t = self.step;
        while t <= self.max_depth {
            let (x, y, z) = (eye.0 + dir.0 * t, eye.1 + dir.1 * t, eye.2 + dir.2 * t);
            match terrain.height_at(x, y) {
                Ok(h) if z <= h => return t,
                Ok(_) => {}
                Err(_) => return self.max_depth,
            }
            t += self.step;
        }
        self.max_depth
    }
}
