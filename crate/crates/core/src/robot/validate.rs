use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;
use thiserror::Error;

use super::model::{JointKind, PluginKind, RobotModel};

const AXIS_TOLERANCE: f64 = 1e-6;

/// One problem found by [`validate`].
#[derive(Debug, Error, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    #[error("model has no links")]
    NoLinks,
    #[error("joint `{joint}` references unknown link `{link}`")]
    UnknownLink { joint: String, link: String },
    #[error("joint `{joint}` connects a link to itself")]
    SelfJoint { joint: String },
    #[error("link `{link}` has several parent joints: {joints:?}")]
    MultipleParents { link: String, joints: Vec<String> },
    #[error("links form a cycle: {links:?}")]
    CyclicTree { links: Vec<String> },
    #[error("more than one root link: {roots:?}")]
    MultipleRoots { roots: Vec<String> },
    #[error("link `{link}` is movable but has non-positive mass")]
    NonPositiveMass { link: String },
    #[error("link `{link}` has a non-positive principal inertia")]
    NonPositiveInertia { link: String },
    #[error("link `{link}` inertia violates the triangle inequality")]
    InertiaTriangle { link: String },
    #[error("link `{link}` color components must lie in [0, 1]")]
    BadColor { link: String },
    #[error("joint `{joint}` axis is not unit length")]
    NonUnitAxis { joint: String },
    #[error("joint `{joint}` limits need lower < upper")]
    InvalidLimits { joint: String },
    #[error("{plugin} plugin targets unknown {target_kind} `{name}`")]
    UnknownPluginTarget {
        plugin: PluginKind,
        target_kind: &'static str,
        name: String,
    },
}

impl Violation {
    pub fn kind(&self) -> &'static str {
        match self {
            Violation::NoLinks => "no_links",
            Violation::UnknownLink { .. } => "unknown_link",
            Violation::SelfJoint { .. } => "self_joint",
            Violation::MultipleParents { .. } => "multiple_parents",
            Violation::CyclicTree { .. } => "cyclic_tree",
            Violation::MultipleRoots { .. } => "multiple_roots",
            Violation::NonPositiveMass { .. } => "non_positive_mass",
            Violation::NonPositiveInertia { .. } => "non_positive_inertia",
            Violation::InertiaTriangle { .. } => "inertia_triangle",
            Violation::BadColor { .. } => "bad_color",
            Violation::NonUnitAxis { .. } => "non_unit_axis",
            Violation::InvalidLimits { .. } => "invalid_limits",
            Violation::UnknownPluginTarget { .. } => "unknown_plugin_target",
        }
    }

    pub const ALL_KINDS: [&'static str; 13] = [
        "no_links",
        "unknown_link",
        "self_joint",
        "multiple_parents",
        "cyclic_tree",
        "multiple_roots",
        "non_positive_mass",
        "non_positive_inertia",
        "inertia_triangle",
        "bad_color",
        "non_unit_axis",
        "invalid_limits",
        "unknown_plugin_target",
    ];
}

/// Check that the model is a single rooted tree with physically plausible
/// links. Returns every violation found; empty means valid.
pub fn validate(model: &RobotModel) -> Vec<Violation> {
    let mut out = Vec::new();
    if model.links.is_empty() {
        out.push(Violation::NoLinks);
        return out;
    }
    let names: BTreeSet<&str> = model.links.iter().map(|l| l.name.as_str()).collect();

    // Edges that survive the reference checks form the graph.
    let mut parents: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
    let mut edges = Vec::new();
    for j in &model.joints {
        let mut ok = true;
        for end in [&j.parent, &j.child] {
            if !names.contains(end.as_str()) {
                out.push(Violation::UnknownLink {
                    joint: j.name.clone(),
                    link: end.clone(),
                });
                ok = false;
            }
        }
        if j.parent == j.child {
            out.push(Violation::SelfJoint { joint: j.name.clone() });
            ok = false;
        }
        if ok {
            parents.entry(j.child.as_str()).or_default().push(j.name.as_str());
            edges.push((j.parent.as_str(), j.child.as_str()));
        }
    }
    for (link, joints) in &parents {
        if joints.len() > 1 {
            out.push(Violation::MultipleParents {
                link: link.to_string(),
                joints: joints.iter().map(|s| s.to_string()).collect(),
            });
        }
    }

    // Kahn's algorithm; whatever cannot be peeled off sits on or behind a cycle.
    let mut indegree: BTreeMap<&str, usize> = names.iter().map(|n| (*n, 0)).collect();
    for (_, c) in &edges {
        *indegree.get_mut(c).expect("known link") += 1;
    }
    let mut queue: Vec<&str> = indegree.iter().filter(|(_, d)| **d == 0).map(|(n, _)| *n).collect();
    let roots = queue.clone();
    let mut removed = BTreeSet::new();
    while let Some(n) = queue.pop() {
        removed.insert(n);
        for (p, c) in &edges {
            if *p == n {
                let d = indegree.get_mut(c).expect("known link");
                *d -= 1;
                if *d == 0 {
                    queue.push(c);
                }
            }
        }
    }
    if removed.len() < names.len() {
        out.push(Violation::CyclicTree {
            links: names
                .iter()
                .filter(|n| !removed.contains(*n))
                .map(|s| s.to_string())
                .collect(),
        });
    }
    if roots.len() > 1 {
        out.push(Violation::MultipleRoots {
            roots: roots.iter().map(|s| s.to_string()).collect(),
        });
    }

    let movable: BTreeSet<&str> = model
        .joints
        .iter()
        .filter(|j| j.kind != JointKind::Fixed)
        .map(|j| j.child.as_str())
        .collect();
    for link in &model.links {
        let dynamic = link.mass != 0.0 || movable.contains(link.name.as_str());
        if dynamic {
            if !(link.mass > 0.0) {
                out.push(Violation::NonPositiveMass {
                    link: link.name.clone(),
                });
            }
            let i = &link.inertia;
            let diag = [i.ixx, i.iyy, i.izz];
            if diag.iter().any(|d| !(*d > 0.0)) {
                out.push(Violation::NonPositiveInertia {
                    link: link.name.clone(),
                });
            } else {
                let slack = 1e-12 * diag.iter().sum::<f64>();
                let ok = (0..3).all(|k| diag[k] <= diag[(k + 1) % 3] + diag[(k + 2) % 3] + slack);
                if !ok {
                    out.push(Violation::InertiaTriangle {
                        link: link.name.clone(),
                    });
                }
            }
        }
        if link.color.iter().any(|c| !(0.0..=1.0).contains(c)) {
            out.push(Violation::BadColor {
                link: link.name.clone(),
            });
        }
    }

    for j in &model.joints {
        if j.kind != JointKind::Fixed {
            let norm = j.axis.iter().map(|a| a * a).sum::<f64>().sqrt();
            if !((norm - 1.0).abs() <= AXIS_TOLERANCE) {
                out.push(Violation::NonUnitAxis { joint: j.name.clone() });
            }
        }
        if j.kind == JointKind::Revolute {
            let ok = matches!(j.limits, Some(l) if l.lower.is_finite() && l.upper.is_finite() && l.lower < l.upper);
            if !ok {
                out.push(Violation::InvalidLimits { joint: j.name.clone() });
            }
        }
    }

    for p in &model.plugins {
        for (key, value) in &p.params {
            let target_kind = match key.as_str() {
                "link" => "link",
                "left_joint" | "right_joint" => "joint",
                _ => continue,
            };
            let known = match target_kind {
                "link" => names.contains(value.as_str()),
                _ => model.joint(value).is_some(),
            };
            if !known {
                out.push(Violation::UnknownPluginTarget {
                    plugin: p.kind,
                    target_kind,
                    name: value.clone(),
                });
            }
        }
    }
    out
}
