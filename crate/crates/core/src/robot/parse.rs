use std::collections::{BTreeMap, HashSet};

use roxmltree::{Document, Node};
use thiserror::Error;

use super::model::{Geometry, Inertia, Joint, JointKind, Limits, Link, Origin, RobotModel, DEFAULT_COLOR};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ParseError {
    #[error("malformed XML at {line}:{column}: {message}")]
    MalformedXml { line: u32, column: u32, message: String },
    #[error("line {line}: <{element}> is missing required element <{child}>")]
    MissingElement { element: String, child: String, line: u32 },
    #[error("line {line}: <{element}> is missing required attribute `{attribute}`")]
    MissingAttribute {
        element: String,
        attribute: String,
        line: u32,
    },
    #[error("line {line}: <{element}> attribute `{attribute}` is not a valid number list: `{value}`")]
    BadNumber {
        element: String,
        attribute: String,
        value: String,
        line: u32,
    },
    #[error("line {line}: duplicate {what} name `{name}`")]
    DuplicateName {
        what: &'static str,
        name: String,
        line: u32,
    },
    #[error("line {line}: unsupported value `{value}` for <{element}> `{attribute}`")]
    UnsupportedValue {
        element: String,
        attribute: String,
        value: String,
        line: u32,
    },
}

/// Parse output: the model plus warnings for skipped content.
#[derive(Clone, Debug, PartialEq)]
pub struct Parsed {
    pub model: RobotModel,
    pub warnings: Vec<String>,
}

struct Ctx<'a> {
    doc: &'a Document<'a>,
    warnings: Vec<String>,
    materials: BTreeMap<String, [f64; 4]>,
}

impl Ctx<'_> {
    fn line(&self, node: Node) -> u32 {
        self.doc.text_pos_at(node.range().start).row
    }

    fn warn(&mut self, node: Node, what: &str) {
        let line = self.line(node);
        self.warnings.push(format!("line {line}: ignored {what}"));
    }

    fn attr<'n>(&self, node: Node<'n, '_>, name: &str) -> Result<&'n str, ParseError> {
        node.attribute(name).ok_or_else(|| ParseError::MissingAttribute {
            element: node.tag_name().name().to_string(),
            attribute: name.to_string(),
            line: self.line(node),
        })
    }

    fn numbers<const N: usize>(&self, node: Node, name: &str, text: &str) -> Result<[f64; N], ParseError> {
        let bad = || ParseError::BadNumber {
            element: node.tag_name().name().to_string(),
            attribute: name.to_string(),
            value: text.to_string(),
            line: self.line(node),
        };
        let mut out = [0.0; N];
        let mut parts = text.split_ascii_whitespace();
        for slot in out.iter_mut() {
            let v: f64 = parts.next().ok_or_else(bad)?.parse().map_err(|_| bad())?;
            if !v.is_finite() {
                return Err(bad());
            }
            *slot = v;
        }
        if parts.next().is_some() {
            return Err(bad());
        }
        Ok(out)
    }

    fn number(&self, node: Node, name: &str) -> Result<f64, ParseError> {
        let text = self.attr(node, name)?;
        Ok(self.numbers::<1>(node, name, text)?[0])
    }

    fn opt_numbers<const N: usize>(&self, node: Node, name: &str, default: [f64; N]) -> Result<[f64; N], ParseError> {
        match node.attribute(name) {
            Some(text) => self.numbers(node, name, text),
            None => Ok(default),
        }
    }

    fn required_child<'n, 'i>(&self, node: Node<'n, 'i>, tag: &str) -> Result<Node<'n, 'i>, ParseError> {
        child(node, tag).ok_or_else(|| ParseError::MissingElement {
            element: node.tag_name().name().to_string(),
            child: tag.to_string(),
            line: self.line(node),
        })
    }
}

fn child<'n, 'i>(node: Node<'n, 'i>, tag: &str) -> Option<Node<'n, 'i>> {
    node.children().find(|c| c.is_element() && c.tag_name().name() == tag)
}

fn elements<'n, 'i>(node: Node<'n, 'i>) -> impl Iterator<Item = Node<'n, 'i>> {
    node.children().filter(|c| c.is_element())
}

/// Parse a URDF-subset document.
pub fn parse(text: &str) -> Result<Parsed, ParseError> {
    let doc = Document::parse(text).map_err(|e| {
        let pos = e.pos();
        ParseError::MalformedXml {
            line: pos.row,
            column: pos.col,
            message: e.to_string(),
        }
    })?;
    let mut ctx = Ctx {
        doc: &doc,
        warnings: Vec::new(),
        materials: BTreeMap::new(),
    };
    let root = doc.root_element();
    if root.tag_name().name() != "robot" {
        return Err(ParseError::UnsupportedValue {
            element: "document".into(),
            attribute: "root".into(),
            value: root.tag_name().name().to_string(),
            line: ctx.line(root),
        });
    }
    let name = ctx.attr(root, "name")?.to_string();

    // Robot-level materials can be referenced before their definition.
    for node in elements(root).filter(|n| n.tag_name().name() == "material") {
        let mat_name = ctx.attr(node, "name")?.to_string();
        if let Some(color) = child(node, "color") {
            let rgba = ctx.numbers::<4>(color, "rgba", ctx.attr(color, "rgba")?)?;
            ctx.materials.insert(mat_name, rgba);
        } else {
            ctx.warn(node, "material without <color>");
        }
    }

    let mut links = Vec::new();
    let mut joints = Vec::new();
    let mut link_names = HashSet::new();
    let mut joint_names = HashSet::new();
    for node in elements(root) {
        match node.tag_name().name() {
            "link" => {
                let link = parse_link(&mut ctx, node)?;
                if !link_names.insert(link.name.clone()) {
                    return Err(ParseError::DuplicateName {
                        what: "link",
                        name: link.name,
                        line: ctx.line(node),
                    });
                }
                links.push(link);
            }
            "joint" => {
                let joint = parse_joint(&mut ctx, node)?;
                if !joint_names.insert(joint.name.clone()) {
                    return Err(ParseError::DuplicateName {
                        what: "joint",
                        name: joint.name,
                        line: ctx.line(node),
                    });
                }
                joints.push(joint);
            }
            "material" => {}
            other => {
                let what = format!("element <{other}>");
                ctx.warn(node, &what);
            }
        }
    }
    Ok(Parsed {
        model: RobotModel {
            name,
            links,
            joints,
            plugins: Vec::new(),
        },
        warnings: ctx.warnings,
    })
}

fn parse_geometry(ctx: &mut Ctx, node: Node) -> Result<Option<Geometry>, ParseError> {
    let Some(shape) = elements(node).next() else {
        ctx.warn(node, "empty <geometry>");
        return Ok(None);
    };
    Ok(Some(match shape.tag_name().name() {
        "box" => Geometry::Box {
            size: ctx.numbers(shape, "size", ctx.attr(shape, "size")?)?,
        },
        "cylinder" => Geometry::Cylinder {
            radius: ctx.number(shape, "radius")?,
            length: ctx.number(shape, "length")?,
        },
        "sphere" => Geometry::Sphere {
            radius: ctx.number(shape, "radius")?,
        },
        other => {
            let what = format!("geometry <{other}>");
            ctx.warn(shape, &what);
            return Ok(None);
        }
    }))
}

fn parse_link(ctx: &mut Ctx, node: Node) -> Result<Link, ParseError> {
    let mut link = Link::new(ctx.attr(node, "name")?);
    let mut seen_visual = false;
    let mut seen_collision = false;
    for el in elements(node) {
        match el.tag_name().name() {
            "inertial" => {
                let mass = ctx.required_child(el, "mass")?;
                link.mass = ctx.number(mass, "value")?;
                if let Some(i) = child(el, "inertia") {
                    link.inertia = Inertia {
                        ixx: ctx.number(i, "ixx")?,
                        ixy: ctx.number(i, "ixy")?,
                        ixz: ctx.number(i, "ixz")?,
                        iyy: ctx.number(i, "iyy")?,
                        iyz: ctx.number(i, "iyz")?,
                        izz: ctx.number(i, "izz")?,
                    };
                }
            }
            "visual" if !seen_visual => {
                seen_visual = true;
                if let Some(g) = child(el, "geometry") {
                    link.geometry = parse_geometry(ctx, g)?;
                }
                if let Some(m) = child(el, "material") {
                    link.color = parse_material(ctx, m)?;
                }
            }
            "collision" if !seen_collision => {
                seen_collision = true;
                if let Some(g) = child(el, "geometry") {
                    link.collision = parse_geometry(ctx, g)?;
                }
            }
            "visual" | "collision" => ctx.warn(el, "additional visual/collision element"),
            other => {
                let what = format!("element <{other}> in link");
                ctx.warn(el, &what);
            }
        }
    }
    Ok(link)
}

fn parse_material(ctx: &mut Ctx, node: Node) -> Result<[f64; 4], ParseError> {
    if let Some(color) = child(node, "color") {
        let rgba = ctx.numbers::<4>(color, "rgba", ctx.attr(color, "rgba")?)?;
        if let Some(name) = node.attribute("name") {
            ctx.materials.insert(name.to_string(), rgba);
        }
        return Ok(rgba);
    }
    match node.attribute("name").and_then(|n| ctx.materials.get(n)) {
        Some(rgba) => Ok(*rgba),
        None => {
            ctx.warn(node, "material reference without a known color");
            Ok(DEFAULT_COLOR)
        }
    }
}

fn parse_joint(ctx: &mut Ctx, node: Node) -> Result<Joint, ParseError> {
    let name = ctx.attr(node, "name")?;
    let kind_text = ctx.attr(node, "type")?;
    let kind: JointKind = kind_text.parse().map_err(|_| ParseError::UnsupportedValue {
        element: "joint".into(),
        attribute: "type".into(),
        value: kind_text.to_string(),
        line: ctx.line(node),
    })?;
    let parent = ctx.attr(ctx.required_child(node, "parent")?, "link")?;
    let child_link = ctx.attr(ctx.required_child(node, "child")?, "link")?;
    let mut joint = Joint::new(name, kind, parent, child_link);
    if let Some(o) = child(node, "origin") {
        joint.origin = Origin {
            xyz: ctx.opt_numbers(o, "xyz", [0.0; 3])?,
            rpy: ctx.opt_numbers(o, "rpy", [0.0; 3])?,
        };
    }
    if let Some(a) = child(node, "axis") {
        joint.axis = ctx.opt_numbers(a, "xyz", [1.0, 0.0, 0.0])?;
    }
    if let Some(l) = child(node, "limit") {
        if kind == JointKind::Revolute {
            joint.limits = Some(Limits {
                lower: ctx.opt_numbers::<1>(l, "lower", [0.0])?[0],
                upper: ctx.opt_numbers::<1>(l, "upper", [0.0])?[0],
            });
        }
    }
    for el in elements(node) {
        let tag = el.tag_name().name();
        if !matches!(tag, "parent" | "child" | "origin" | "axis" | "limit") {
            let what = format!("element <{tag}> in joint");
            ctx.warn(el, &what);
        }
    }
    Ok(joint)
}
