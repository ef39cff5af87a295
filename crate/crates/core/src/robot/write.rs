use std::fmt::Write;

use super::model::{Geometry, RobotModel};

fn esc(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            c => out.push(c),
        }
    }
    out
}

fn list(values: &[f64]) -> String {
    values.iter().map(|v| format!("{v:?}")).collect::<Vec<_>>().join(" ")
}

fn geometry(out: &mut String, g: &Geometry) {
    out.push_str("      <geometry>");
    match g {
        Geometry::Box { size } => write!(out, "<box size=\"{}\"/>", list(size)),
        Geometry::Cylinder { radius, length } => {
            write!(out, "<cylinder radius=\"{radius:?}\" length=\"{length:?}\"/>")
        }
        Geometry::Sphere { radius } => write!(out, "<sphere radius=\"{radius:?}\"/>"),
    }
    .expect("write to string");
    out.push_str("</geometry>\n");
}

/// Serialize to the URDF subset accepted by [`parse`](super::parse).
/// Plugin attachments are not part of URDF and are dropped.
pub fn to_urdf(model: &RobotModel) -> String {
    let mut out = String::new();
    out.push_str("<?xml version=\"1.0\"?>\n");
    let _ = writeln!(out, "<robot name=\"{}\">", esc(&model.name));
    for link in &model.links {
        let _ = writeln!(out, "  <link name=\"{}\">", esc(&link.name));
        let i = &link.inertia;
        let _ = writeln!(
            out,
            "    <inertial>\n      <mass value=\"{:?}\"/>\n      <inertia ixx=\"{:?}\" ixy=\"{:?}\" ixz=\"{:?}\" iyy=\"{:?}\" iyz=\"{:?}\" izz=\"{:?}\"/>\n    </inertial>",
            link.mass, i.ixx, i.ixy, i.ixz, i.iyy, i.iyz, i.izz
        );
        out.push_str("    <visual>\n");
        if let Some(g) = &link.geometry {
            geometry(&mut out, g);
        }
        let _ = writeln!(
            out,
            "      <material name=\"{}_color\"><color rgba=\"{}\"/></material>\n    </visual>",
            esc(&link.name),
            list(&link.color)
        );
        if let Some(g) = &link.collision {
            out.push_str("    <collision>\n");
            geometry(&mut out, g);
            out.push_str("    </collision>\n");
        }
        out.push_str("  </link>\n");
    }
    for joint in &model.joints {
        let _ = writeln!(
            out,
            "  <joint name=\"{}\" type=\"{}\">\n    <parent link=\"{}\"/>\n    <child link=\"{}\"/>\n    <origin xyz=\"{}\" rpy=\"{}\"/>\n    <axis xyz=\"{}\"/>",
            esc(&joint.name),
            joint.kind.as_str(),
            esc(&joint.parent),
            esc(&joint.child),
            list(&joint.origin.xyz),
            list(&joint.origin.rpy),
            list(&joint.axis)
        );
        if let Some(l) = &joint.limits {
            let _ = writeln!(out, "    <limit lower=\"{:?}\" upper=\"{:?}\"/>", l.lower, l.upper);
        }
        out.push_str("  </joint>\n");
    }
    out.push_str("</robot>\n");
    out
}
