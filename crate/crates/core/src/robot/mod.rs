//! Robot descriptions in a URDF subset.
//!
//! Supported: `<robot>` with `<link>` (`<inertial>`, `<visual>` geometry and
//! color, `<collision>` geometry), `<joint>` (fixed, revolute, continuous)
//! and robot-level `<material>` definitions. Geometry is limited to box,
//! cylinder and sphere primitives. Anything else is skipped with a warning.
//!
//! A parsed [`RobotModel`] can be validated as a kinematic tree, extended
//! with sensor/controller plugin attachments, and reduced to the
//! [`RoverGeometry`](crate::dynamics::RoverGeometry) the simulator consumes.

mod model;
mod parse;
mod plugins;
mod transform;
mod validate;
mod write;

pub use model::{Geometry, Inertia, Joint, JointKind, Limits, Link, Origin, PluginAttachment, PluginKind, RobotModel};
pub use parse::{parse, ParseError, Parsed};
pub use plugins::{attach_plugins, derive_geometry, PluginError, PluginSpec};
pub use validate::{validate, Violation};
pub use write::to_urdf;
