//! Rigid transforms for joint origins (URDF fixed-axis roll-pitch-yaw).

use super::model::{Origin, RobotModel};

#[derive(Clone, Copy, Debug, PartialEq)]
pub(crate) struct Transform {
    rot: [[f64; 3]; 3],
    pos: [f64; 3],
}

impl Transform {
    pub const IDENTITY: Transform = Transform {
        rot: [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]],
        pos: [0.0; 3],
    };

    /// `R = Rz(yaw) * Ry(pitch) * Rx(roll)`, translation `xyz`.
    pub fn from_origin(o: &Origin) -> Self {
        let (sr, cr) = o.rpy[0].sin_cos();
        let (sp, cp) = o.rpy[1].sin_cos();
        let (sy, cy) = o.rpy[2].sin_cos();
        Transform {
            rot: [
                [cy * cp, cy * sp * sr - sy * cr, cy * sp * cr + sy * sr],
                [sy * cp, sy * sp * sr + cy * cr, sy * sp * cr - cy * sr],
                [-sp, cp * sr, cp * cr],
            ],
            pos: o.xyz,
        }
    }

    pub fn apply(&self, p: [f64; 3]) -> [f64; 3] {
        let r = &self.rot;
        [0, 1, 2].map(|i| r[i][0] * p[0] + r[i][1] * p[1] + r[i][2] * p[2] + self.pos[i])
    }

    pub fn then(&self, inner: &Transform) -> Transform {
        let a = &self.rot;
        let b = &inner.rot;
        let mut rot = [[0.0; 3]; 3];
        for (i, row) in rot.iter_mut().enumerate() {
            for (j, cell) in row.iter_mut().enumerate() {
                *cell = (0..3).map(|k| a[i][k] * b[k][j]).sum();
            }
        }
        Transform {
            rot,
            pos: self.apply(inner.pos),
        }
    }
}

/// Pose of `link`'s frame in the root frame, or `None` when the chain to the
/// root is broken or cyclic.
pub(crate) fn link_in_root(model: &RobotModel, link: &str) -> Option<Transform> {
    let mut chain = Vec::new();
    let mut current = link;
    while let Some(joint) = model.parent_joint(current) {
        if chain.len() > model.joints.len() {
            return None;
        }
        chain.push(joint);
        current = &joint.parent;
    }
    model.link(current)?;
    Some(chain.iter().rev().fold(Transform::IDENTITY, |acc, j| {
        acc.then(&Transform::from_origin(&j.origin))
    }))
}

/// Position of a joint's origin in the root frame.
pub(crate) fn joint_position(model: &RobotModel, joint: &str) -> Option<[f64; 3]> {
    let j = model.joint(joint)?;
    let parent = link_in_root(model, &j.parent)?;
    Some(parent.apply(j.origin.xyz))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn yaw_quarter_turn() {
        let t = Transform::from_origin(&Origin {
            xyz: [1.0, 0.0, 0.0],
            rpy: [0.0, 0.0, std::f64::consts::FRAC_PI_2],
        });
        let p = t.apply([1.0, 0.0, 0.0]);
        assert!((p[0] - 1.0).abs() < 1e-12 && (p[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn composition_matches_sequential_application() {
        let a = Transform::from_origin(&Origin {
            xyz: [0.1, 0.2, 0.3],
            rpy: [0.3, -0.2, 0.9],
        });
        let b = Transform::from_origin(&Origin {
            xyz: [-0.4, 0.5, 0.0],
            rpy: [-1.0, 0.4, 0.2],
        });
        let p = [0.7, -0.1, 0.25];
        let direct = a.apply(b.apply(p));
        let composed = a.then(&b).apply(p);
        for i in 0..3 {
            assert!((direct[i] - composed[i]).abs() < 1e-12);
        }
    }
}
