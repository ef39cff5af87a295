use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::model::{Geometry, JointKind, PluginAttachment, PluginKind, RobotModel};
use super::transform::joint_position;
use crate::dynamics::RoverGeometry;

/// Requested attachment. Drive specs need `left_joint` and `right_joint`;
/// sensor specs take an optional `link` (default: the root link). Every other
/// parameter must be numeric. `track_width`, `wheel_radius` and `wheelbase`
/// are derived from the model when not supplied.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PluginSpec {
    pub kind: PluginKind,
    #[serde(default)]
    pub params: BTreeMap<String, String>,
}

impl PluginSpec {
    pub fn new(kind: PluginKind) -> Self {
        PluginSpec {
            kind,
            params: BTreeMap::new(),
        }
    }

    pub fn param(mut self, key: &str, value: impl ToString) -> Self {
        self.params.insert(key.to_string(), value.to_string());
        self
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PluginError {
    #[error("{plugin}: unknown joint `{joint}`")]
    UnknownJoint { plugin: PluginKind, joint: String },
    #[error("{plugin}: unknown link `{link}`")]
    UnknownLink { plugin: PluginKind, link: String },
    #[error("{plugin}: missing parameter `{param}`")]
    MissingParam { plugin: PluginKind, param: &'static str },
    #[error("{plugin}: parameter `{param}` must be a finite number, got `{value}`")]
    BadParam {
        plugin: PluginKind,
        param: String,
        value: String,
    },
    #[error("{plugin}: incompatible geometry: {reason}")]
    IncompatibleGeometry { plugin: PluginKind, reason: String },
    #[error("model has no diff_drive attachment")]
    NoDriveAttachment,
}

const TARGET_KEYS: [&str; 3] = ["link", "left_joint", "right_joint"];

fn numeric(kind: PluginKind, key: &str, value: &str) -> Result<f64, PluginError> {
    value
        .parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| PluginError::BadParam {
            plugin: kind,
            param: key.to_string(),
            value: value.to_string(),
        })
}

fn target_key(p: &PluginAttachment) -> Option<&str> {
    match p.kind {
        PluginKind::DiffDrive => None,
        _ => p.params.get("link").map(String::as_str),
    }
}

/// Attach plugins to a copy of `model`. Re-attaching the same kind to the
/// same target replaces the earlier attachment, so applying a spec list twice
/// gives the same model as applying it once.
pub fn attach_plugins(model: &RobotModel, specs: &[PluginSpec]) -> Result<RobotModel, PluginError> {
    let mut out = model.clone();
    for spec in specs {
        let attachment = resolve(model, spec)?;
        let key = target_key(&attachment).map(str::to_string);
        match out
            .plugins
            .iter_mut()
            .find(|p| p.kind == attachment.kind && target_key(p).map(str::to_string) == key)
        {
            Some(slot) => *slot = attachment,
            None => out.plugins.push(attachment),
        }
    }
    Ok(out)
}

fn resolve(model: &RobotModel, spec: &PluginSpec) -> Result<PluginAttachment, PluginError> {
    let kind = spec.kind;
    let mut params = spec.params.clone();
    for (k, v) in &params {
        if !TARGET_KEYS.contains(&k.as_str()) {
            numeric(kind, k, v)?;
        }
    }
    if kind == PluginKind::DiffDrive {
        derive_drive(model, &mut params)?;
    } else {
        let link = match params.get("link") {
            Some(l) => l.clone(),
            None => model
                .root()
                .map(|l| l.name.clone())
                .ok_or_else(|| PluginError::IncompatibleGeometry {
                    plugin: kind,
                    reason: "model has no unique root link to mount on".into(),
                })?,
        };
        if model.link(&link).is_none() {
            return Err(PluginError::UnknownLink { plugin: kind, link });
        }
        params.insert("link".into(), link);
    }
    Ok(PluginAttachment { kind, params })
}

fn derive_drive(model: &RobotModel, params: &mut BTreeMap<String, String>) -> Result<(), PluginError> {
    let kind = PluginKind::DiffDrive;
    let incompatible = |reason: String| PluginError::IncompatibleGeometry { plugin: kind, reason };
    let mut wheels = Vec::new();
    for param in ["left_joint", "right_joint"] {
        let name = params
            .get(param)
            .ok_or(PluginError::MissingParam { plugin: kind, param })?;
        let joint = model.joint(name).ok_or_else(|| PluginError::UnknownJoint {
            plugin: kind,
            joint: name.clone(),
        })?;
        let pos = joint_position(model, name)
            .ok_or_else(|| incompatible(format!("joint `{name}` is not connected to the root")))?;
        wheels.push((joint, pos));
    }
    let (left, lpos) = wheels[0];
    let (_, rpos) = wheels[1];

    if !params.contains_key("track_width") {
        let track = (lpos[1] - rpos[1]).abs();
        if !(track > 0.0) {
            return Err(incompatible("left and right wheels share a lateral position".into()));
        }
        params.insert("track_width".into(), format!("{track:?}"));
    }
    if !params.contains_key("wheel_radius") {
        let radius = match model.link(&left.child).and_then(|l| l.geometry.or(l.collision)) {
            Some(Geometry::Cylinder { radius, .. }) => radius,
            _ => {
                return Err(incompatible(format!(
                    "wheel link `{}` has no cylinder geometry",
                    left.child
                )))
            }
        };
        params.insert("wheel_radius".into(), format!("{radius:?}"));
    }
    if !params.contains_key("wheelbase") {
        let xs: Vec<f64> = model
            .joints
            .iter()
            .filter(|j| j.kind == JointKind::Continuous)
            .filter(|j| {
                matches!(
                    model.link(&j.child).and_then(|l| l.geometry.or(l.collision)),
                    Some(Geometry::Cylinder { .. })
                )
            })
            .filter_map(|j| joint_position(model, &j.name).map(|p| p[0]))
            .collect();
        let lo = xs.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let wheelbase = hi - lo;
        if !(wheelbase > 0.0) {
            return Err(incompatible(
                "wheels span no longitudinal distance; give `wheelbase`".into(),
            ));
        }
        params.insert("wheelbase".into(), format!("{wheelbase:?}"));
    }
    Ok(())
}

/// Reduce a model with a drive attachment to simulator geometry. Mass is the
/// sum of link masses; chassis length is the root box length when there is
/// one, otherwise wheelbase plus one wheel diameter.
pub fn derive_geometry(model: &RobotModel) -> Result<RoverGeometry, PluginError> {
    let drive = model
        .plugin(PluginKind::DiffDrive)
        .ok_or(PluginError::NoDriveAttachment)?;
    let get = |key: &'static str| -> Result<f64, PluginError> {
        let v = drive.params.get(key).ok_or(PluginError::MissingParam {
            plugin: PluginKind::DiffDrive,
            param: key,
        })?;
        numeric(PluginKind::DiffDrive, key, v)
    };
    let track_width = get("track_width")?;
    let wheel_radius = get("wheel_radius")?;
    let wheelbase = get("wheelbase")?;
    let chassis_length = match model.root().and_then(|l| l.geometry.or(l.collision)) {
        Some(Geometry::Box { size }) => size[0],
        _ => wheelbase + 2.0 * wheel_radius,
    };
    let geometry = RoverGeometry {
        track_width,
        wheel_radius,
        wheelbase,
        chassis_length,
        mass: model.total_mass(),
    };
    geometry.validate().map_err(|e| PluginError::IncompatibleGeometry {
        plugin: PluginKind::DiffDrive,
        reason: e.to_string(),
    })?;
    Ok(geometry)
}
