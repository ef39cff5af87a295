//! Fixed-timestep kinematic rover model.
//!
//! The rover is a four-corner differential-drive chassis. Each corner carries
//! an actively driven suspension joint that lifts its wheel relative to the
//! chassis. Pose follows a semi-implicit unicycle update; pitch and roll are
//! recomputed each tick from the four wheel contact heights and the suspension
//! lift (quasi-static contact, no forces). Rough steps slow the rover through
//! [`Rover::climb_gate`].
//!
//! Body frame: x forward, y left, z up. Wheels are indexed
//! `[front-left, front-right, rear-left, rear-right]`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::terrain::{Heightfield, TerrainError};

#[derive(Debug, Error, PartialEq)]
pub enum DynamicsError {
    #[error("rover footprint left the terrain at ({x}, {y})")]
    OutOfTerrain { x: f64, y: f64 },
    #[error("timestep must be positive and finite, got {0}")]
    BadTimestep(f64),
    #[error("invalid rover geometry: {0}")]
    BadGeometry(&'static str),
}

impl From<TerrainError> for DynamicsError {
    fn from(e: TerrainError) -> Self {
        match e {
            TerrainError::OutOfTerrain { x, y } => DynamicsError::OutOfTerrain { x, y },
            _ => DynamicsError::BadGeometry("terrain"),
        }
    }
}

/// Body velocity command: forward speed (m/s) and yaw rate (rad/s).
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Twist {
    pub linear: f64,
    pub angular: f64,
}

impl Twist {
    pub fn new(linear: f64, angular: f64) -> Self {
        Twist { linear, angular }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RoverGeometry {
    /// Lateral distance between left and right wheel centers, m.
    pub track_width: f64,
    pub wheel_radius: f64,
    /// Longitudinal distance between front and rear axles, m.
    pub wheelbase: f64,
    pub chassis_length: f64,
    /// kg
    pub mass: f64,
}

impl Default for RoverGeometry {
    fn default() -> Self {
        RoverGeometry {
            track_width: 0.4,
            wheel_radius: 0.1,
            wheelbase: 0.5,
            chassis_length: 0.6,
            mass: 6.0,
        }
    }
}

impl RoverGeometry {
    pub fn validate(&self) -> Result<(), DynamicsError> {
        let fields = [
            (self.track_width, "track_width must be positive"),
            (self.wheel_radius, "wheel_radius must be positive"),
            (self.wheelbase, "wheelbase must be positive"),
            (self.chassis_length, "chassis_length must be positive"),
            (self.mass, "mass must be positive"),
        ];
        for (value, msg) in fields {
            if !(value > 0.0 && value.is_finite()) {
                return Err(DynamicsError::BadGeometry(msg));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DynamicsConfig {
    pub v_max: f64,
    pub omega_max: f64,
    /// Joint speed at full motor command, rad/s.
    pub motor_gain: f64,
    /// Hard cap on joint speed, rad/s.
    pub slew_limit: f64,
    /// Symmetric mechanical joint limit, rad.
    pub joint_limit: f64,
    /// Lever arm converting joint angle to wheel lift, m.
    pub arm_length: f64,
    /// Chassis height above the wheel centers with the suspension at zero, m.
    pub ride_height: f64,
    /// A step taller than `block_height_factor * wheel_radius` stops an
    /// unassisted wheel completely.
    pub block_height_factor: f64,
    pub lift_tolerance: f64,
    pub dt: f64,
}

impl Default for DynamicsConfig {
    fn default() -> Self {
        DynamicsConfig {
            v_max: 1.5,
            omega_max: 2.0,
            motor_gain: 1.5,
            slew_limit: 2.0,
            joint_limit: 0.6,
            arm_length: 0.4,
            ride_height: 0.15,
            block_height_factor: 1.5,
            lift_tolerance: 0.005,
            dt: 0.02,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SuspensionState {
    pub joint_angles: [f64; 4],
    pub joint_targets: [f64; 4],
    pub motor_commands: [f64; 4],
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RoverState {
    pub x: f64,
    pub y: f64,
    /// (-pi, pi]
    pub heading: f64,
    /// Nose-up positive.
    pub pitch: f64,
    /// Left-side-up positive.
    pub roll: f64,
    pub pitch_rate: f64,
    pub roll_rate: f64,
    pub yaw_rate: f64,
    pub wheel_left: f64,
    pub wheel_right: f64,
    pub suspension: SuspensionState,
    pub tick: u64,
}

/// Axis-aligned box step lying across the direction of travel.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Obstacle {
    pub x_start: f64,
    pub height: f64,
    /// Extent along x.
    pub depth: f64,
    /// Extent along y, centered on `y_center`.
    pub width: f64,
    pub y_center: f64,
}

impl Obstacle {
    pub fn x_end(&self) -> f64 {
        self.x_start + self.depth
    }

    pub fn covers_y(&self, y: f64) -> bool {
        (y - self.y_center).abs() <= 0.5 * self.width
    }

    pub fn stamp(&self, terrain: &mut Heightfield) {
        terrain.stamp_box(
            self.x_start,
            self.x_end(),
            self.y_center - 0.5 * self.width,
            self.y_center + 0.5 * self.width,
            self.height,
        );
    }
}

/// Wrap an angle into (-pi, pi].
pub fn normalize_angle(a: f64) -> f64 {
    let mut w = a.rem_euclid(2.0 * PI);
    if w > PI {
        w -= 2.0 * PI;
    }
    w
}

/// Differential-drive inverse kinematics: `(left, right)` wheel speeds, rad/s.
pub fn wheel_speeds_from_twist(t: Twist, g: &RoverGeometry) -> (f64, f64) {
    let half = 0.5 * t.angular * g.track_width;
    ((t.linear - half) / g.wheel_radius, (t.linear + half) / g.wheel_radius)
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Rover {
    pub geometry: RoverGeometry,
    pub config: DynamicsConfig,
}

impl Rover {
    pub fn new(geometry: RoverGeometry, config: DynamicsConfig) -> Result<Self, DynamicsError> {
        geometry.validate()?;
        Ok(Rover { geometry, config })
    }

    pub fn clamp_twist(&self, t: Twist) -> Twist {
        Twist {
            linear: t.linear.clamp(-self.config.v_max, self.config.v_max),
            angular: t.angular.clamp(-self.config.omega_max, self.config.omega_max),
        }
    }

    /// Body-frame wheel center offsets.
    pub fn wheel_offsets(&self) -> [(f64, f64); 4] {
        let hx = 0.5 * self.geometry.wheelbase;
        let hy = 0.5 * self.geometry.track_width;
        [(hx, hy), (hx, -hy), (-hx, hy), (-hx, -hy)]
    }

    pub fn wheel_positions(&self, x: f64, y: f64, heading: f64) -> [(f64, f64); 4] {
        let (s, c) = heading.sin_cos();
        self.wheel_offsets()
            .map(|(bx, by)| (x + c * bx - s * by, y + s * bx + c * by))
    }

    /// Midpoint of the front axle.
    pub fn front_axle(&self, x: f64, y: f64, heading: f64) -> (f64, f64) {
        let hx = 0.5 * self.geometry.wheelbase;
        (x + hx * heading.cos(), y + hx * heading.sin())
    }

    /// Lowest wheel-bottom height at which a wheel centered over `(wx, wy)`
    /// does not intersect the terrain profile along the heading.
    pub fn wheel_contact(&self, terrain: &Heightfield, wx: f64, wy: f64, heading: f64) -> Result<f64, DynamicsError> {
        let r = self.geometry.wheel_radius;
        let res = terrain.resolution();
        let n = (r / res).ceil() as i64;
        let (s, c) = heading.sin_cos();
        let mut contact = f64::NEG_INFINITY;
        for k in -n..=n {
            let dx = (k as f64 * res).clamp(-r, r);
            let ground = terrain.height_at(wx + c * dx, wy + s * dx)?;
            let rise = (r * r - dx * dx).max(0.0).sqrt();
            contact = contact.max(ground - r + rise);
        }
        Ok(contact)
    }

    pub fn wheel_contacts(
        &self,
        terrain: &Heightfield,
        x: f64,
        y: f64,
        heading: f64,
    ) -> Result<[f64; 4], DynamicsError> {
        let wheels = self.wheel_positions(x, y, heading);
        let mut out = [0.0; 4];
        for (slot, (wx, wy)) in out.iter_mut().zip(wheels) {
            *slot = self.wheel_contact(terrain, wx, wy, heading)?;
        }
        Ok(out)
    }

    /// Vertical wheel lift produced by each suspension joint.
    pub fn lifts(&self, suspension: &SuspensionState) -> [f64; 4] {
        suspension.joint_angles.map(|a| self.config.arm_length * a.sin())
    }

    /// Chassis corner heights above the contacts.
    pub fn corner_heights(&self, contacts: &[f64; 4], suspension: &SuspensionState) -> [f64; 4] {
        let lifts = self.lifts(suspension);
        let base = self.geometry.wheel_radius + self.config.ride_height;
        [0, 1, 2, 3].map(|i| contacts[i] + base - lifts[i])
    }

    /// `(pitch, roll)` of the plane through the four chassis corners.
    pub fn attitude(&self, contacts: &[f64; 4], suspension: &SuspensionState) -> (f64, f64) {
        let z = self.corner_heights(contacts, suspension);
        let front = 0.5 * (z[0] + z[1]);
        let rear = 0.5 * (z[2] + z[3]);
        let left = 0.5 * (z[0] + z[2]);
        let right = 0.5 * (z[1] + z[3]);
        (
            (front - rear).atan2(self.geometry.wheelbase),
            (left - right).atan2(self.geometry.track_width),
        )
    }

    /// Mean chassis corner height.
    pub fn chassis_height(&self, terrain: &Heightfield, state: &RoverState) -> Result<f64, DynamicsError> {
        let contacts = self.wheel_contacts(terrain, state.x, state.y, state.heading)?;
        let z = self.corner_heights(&contacts, &state.suspension);
        Ok(0.25 * z.iter().sum::<f64>())
    }

    /// At-rest state at the given pose, attitude settled on the terrain.
    pub fn spawn(&self, terrain: &Heightfield, x: f64, y: f64, heading: f64) -> Result<RoverState, DynamicsError> {
        let heading = normalize_angle(heading);
        let suspension = SuspensionState::default();
        let contacts = self.wheel_contacts(terrain, x, y, heading)?;
        let (pitch, roll) = self.attitude(&contacts, &suspension);
        Ok(RoverState {
            x,
            y,
            heading,
            pitch,
            roll,
            suspension,
            ..RoverState::default()
        })
    }

    /// Forward-speed scale in `[0, 1]` imposed by a step face in front of a
    /// wheel. A wheel is at the face when the face lies within one wheel radius
    /// ahead of its center. It passes freely when its joint lift clears the
    /// step, `lift >= h - r (1 - cos pitch) - tolerance`; otherwise it crawls
    /// at `max(0, 1 - h / h_block)`. The slowest wheel sets the scale.
    pub fn climb_gate(&self, state: &RoverState, obstacle: Option<&Obstacle>, suspension: &SuspensionState) -> f64 {
        let Some(ob) = obstacle else {
            return 1.0;
        };
        if state.heading.cos() <= 0.0 {
            return 1.0;
        }
        let r = self.geometry.wheel_radius;
        let h_block = self.config.block_height_factor * r;
        let lifts = self.lifts(suspension);
        let wheels = self.wheel_positions(state.x, state.y, state.heading);
        let mut scale: f64 = 1.0;
        for ((wx, wy), lift) in wheels.into_iter().zip(lifts) {
            let gap = ob.x_start - wx;
            if !(gap > 0.0 && gap <= r) || !ob.covers_y(wy) {
                continue;
            }
            let required = ob.height - r * (1.0 - state.pitch.cos()) - self.config.lift_tolerance;
            let wheel_scale = if lift >= required {
                1.0
            } else {
                (1.0 - ob.height / h_block).max(0.0)
            };
            scale = scale.min(wheel_scale);
        }
        scale
    }

    /// Advance one tick of length `dt`.
    ///
    /// Suspension first (rate-limited joint motion toward this tick's
    /// setpoint), then the climb gate on the resulting lift, then heading and
    /// position (position uses the updated heading), then attitude from the
    /// new contacts and rates by backward difference. Pure in its inputs.
    pub fn integrate(
        &self,
        state: &RoverState,
        twist: Twist,
        motor_commands: [f64; 4],
        terrain: &Heightfield,
        obstacle: Option<&Obstacle>,
        dt: f64,
    ) -> Result<RoverState, DynamicsError> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(DynamicsError::BadTimestep(dt));
        }
        let cfg = &self.config;
        let twist = self.clamp_twist(twist);

        let mut suspension = state.suspension;
        for i in 0..4 {
            let cmd = motor_commands[i].clamp(-1.0, 1.0);
            let max_step = cfg.slew_limit * dt;
            let step = (cfg.motor_gain * cmd * dt).clamp(-max_step, max_step);
            let target = (suspension.joint_angles[i] + step).clamp(-cfg.joint_limit, cfg.joint_limit);
            suspension.motor_commands[i] = cmd;
            suspension.joint_targets[i] = target;
            suspension.joint_angles[i] = target;
        }

        let gate = if twist.linear > 0.0 {
            self.climb_gate(state, obstacle, &suspension)
        } else {
            1.0
        };
        let v = twist.linear * gate;

        let heading = normalize_angle(state.heading + twist.angular * dt);
        let x = state.x + v * heading.cos() * dt;
        let y = state.y + v * heading.sin() * dt;

        let contacts = self.wheel_contacts(terrain, x, y, heading)?;
        let (pitch, roll) = self.attitude(&contacts, &suspension);
        let (wheel_left, wheel_right) = wheel_speeds_from_twist(Twist::new(v, twist.angular), &self.geometry);

        Ok(RoverState {
            x,
            y,
            heading,
            pitch,
            roll,
            pitch_rate: (pitch - state.pitch) / dt,
            roll_rate: (roll - state.roll) / dt,
            yaw_rate: normalize_angle(heading - state.heading) / dt,
            wheel_left,
            wheel_right,
            suspension,
            tick: state.tick + 1,
        })
    }
}
