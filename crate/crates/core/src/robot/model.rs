use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// Link/joint tree plus plugin attachments. `.rmodel.json` is the serde
/// serialization of this type.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RobotModel {
    pub name: String,
    pub links: Vec<Link>,
    pub joints: Vec<Joint>,
    #[serde(default)]
    pub plugins: Vec<PluginAttachment>,
}

impl RobotModel {
    pub fn link(&self, name: &str) -> Option<&Link> {
        self.links.iter().find(|l| l.name == name)
    }

    pub fn joint(&self, name: &str) -> Option<&Joint> {
        self.joints.iter().find(|j| j.name == name)
    }

    /// Joint whose child is `link`, if any.
    pub fn parent_joint(&self, link: &str) -> Option<&Joint> {
        self.joints.iter().find(|j| j.child == link && j.parent != link)
    }

    /// The unique link that is never a child, when there is exactly one.
    pub fn root(&self) -> Option<&Link> {
        let mut roots = self
            .links
            .iter()
            .filter(|l| !self.joints.iter().any(|j| j.child == l.name));
        let first = roots.next()?;
        roots.next().is_none().then_some(first)
    }

    pub fn total_mass(&self) -> f64 {
        self.links.iter().map(|l| l.mass).sum()
    }

    pub fn plugin(&self, kind: PluginKind) -> Option<&PluginAttachment> {
        self.plugins.iter().find(|p| p.kind == kind)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("robot model serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Inertia {
    pub ixx: f64,
    pub ixy: f64,
    pub ixz: f64,
    pub iyy: f64,
    pub iyz: f64,
    pub izz: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum Geometry {
    Box { size: [f64; 3] },
    Cylinder { radius: f64, length: f64 },
    Sphere { radius: f64 },
}

pub const DEFAULT_COLOR: [f64; 4] = [1.0, 1.0, 1.0, 1.0];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Link {
    pub name: String,
    /// kg; zero when the link has no `<inertial>`.
    pub mass: f64,
    pub inertia: Inertia,
    /// Visual geometry.
    pub geometry: Option<Geometry>,
    pub collision: Option<Geometry>,
    /// RGBA
    pub color: [f64; 4],
}

impl Link {
    pub fn new(name: impl Into<String>) -> Self {
        Link {
            name: name.into(),
            mass: 0.0,
            inertia: Inertia::default(),
            geometry: None,
            collision: None,
            color: DEFAULT_COLOR,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum JointKind {
    Fixed,
    Revolute,
    Continuous,
}

impl JointKind {
    pub fn as_str(self) -> &'static str {
        match self {
            JointKind::Fixed => "fixed",
            JointKind::Revolute => "revolute",
            JointKind::Continuous => "continuous",
        }
    }
}

impl FromStr for JointKind {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, ()> {
        match s {
            "fixed" => Ok(JointKind::Fixed),
            "revolute" => Ok(JointKind::Revolute),
            "continuous" => Ok(JointKind::Continuous),
            _ => Err(()),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Origin {
    pub xyz: [f64; 3],
    pub rpy: [f64; 3],
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Limits {
    pub lower: f64,
    pub upper: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Joint {
    pub name: String,
    pub kind: JointKind,
    pub parent: String,
    pub child: String,
    pub origin: Origin,
    pub axis: [f64; 3],
    /// Present for revolute joints only.
    pub limits: Option<Limits>,
}

impl Joint {
    pub fn new(name: impl Into<String>, kind: JointKind, parent: impl Into<String>, child: impl Into<String>) -> Self {
        Joint {
            name: name.into(),
            kind,
            parent: parent.into(),
            child: child.into(),
            origin: Origin::default(),
            axis: [1.0, 0.0, 0.0],
            limits: (kind == JointKind::Revolute).then_some(Limits { lower: 0.0, upper: 0.0 }),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PluginKind {
    DiffDrive,
    Imu,
    Gps,
    Sonar,
    Lidar,
    /// Stored only; nothing in the simulator reads it.
    MagneticField,
}

impl PluginKind {
    pub fn as_str(self) -> &'static str {
        match self {
            PluginKind::DiffDrive => "diff_drive",
            PluginKind::Imu => "imu",
            PluginKind::Gps => "gps",
            PluginKind::Sonar => "sonar",
            PluginKind::Lidar => "lidar",
            PluginKind::MagneticField => "magnetic_field",
        }
    }
}

impl fmt::Display for PluginKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PluginKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Ok(match s {
            "diff_drive" => PluginKind::DiffDrive,
            "imu" => PluginKind::Imu,
            "gps" => PluginKind::Gps,
            "sonar" => PluginKind::Sonar,
            "lidar" => PluginKind::Lidar,
            "magnetic_field" => PluginKind::MagneticField,
            other => return Err(format!("unknown plugin kind `{other}`")),
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PluginAttachment {
    pub kind: PluginKind,
    pub params: BTreeMap<String, String>,
}
