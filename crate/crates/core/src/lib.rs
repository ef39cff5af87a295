//! Rover simulation core.
//!
//! A gym-style environment contract ([`env::Env`]) backed by a deterministic
//! fixed-timestep kinematic rover model on heightfield terrain, the concrete
//! rover environments, and a parser for a URDF subset that supplies rover
//! geometry.

pub mod dynamics;
pub mod env;
pub mod envs;
pub mod episode;
pub mod registry;
pub mod rng;
pub mod robot;
pub mod sensors;
pub mod space;
pub mod terrain;

pub use dynamics::{Obstacle, Rover, RoverGeometry, RoverState, Twist};
pub use env::{Env, EnvError, RenderFrame, StepResult, Termination};
pub use registry::{make, make_with, EnvOptions, EnvRegistry};
pub use space::{Action, BoxSpace, Observation};
pub use terrain::Heightfield;
