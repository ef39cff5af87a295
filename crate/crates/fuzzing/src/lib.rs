//! Decoder checks shared by the cargo-fuzz targets and the corpus replay
//! test. Each check accepts arbitrary bytes, must never panic on rejected
//! input, and asserts an encode/decode round trip on accepted input.

use rovergym_cli::config::{apply_override, CliConfig};
use rovergym_core::robot::{parse, to_urdf, RobotModel};
use rovergym_core::{Heightfield, RenderFrame};
use rovergym_rl::{Checkpoint, LearningCurve};
use rovergym_teleop::CommandMessage;
use serde_json::Value;

pub type Target = fn(&[u8]);

/// Every fuzz target by name, in corpus directory order.
pub const TARGETS: &[(&str, Target)] = &[
    ("checkpoint", checkpoint),
    ("cli_config", cli_config),
    ("command", command),
    ("curve_csv", curve_csv),
    ("model_json", model_json),
    ("render_frame", render_frame),
    ("terrain_text", terrain_text),
    ("urdf", urdf),
];

fn text(data: &[u8]) -> Option<&str> {
    std::str::from_utf8(data).ok()
}

pub fn urdf(data: &[u8]) {
    let Some(text) = text(data) else { return };
    let Ok(parsed) = parse(text) else { return };
    let written = to_urdf(&parsed.model);
    let again = parse(&written).expect("written URDF parses");
    assert_eq!(again.model, parsed.model);
    assert_eq!(to_urdf(&again.model), written);
}

pub fn model_json(data: &[u8]) {
    let Some(text) = text(data) else { return };
    let Ok(model) = RobotModel::from_json(text) else { return };
    let again = RobotModel::from_json(&model.to_json()).expect("written model parses");
    assert_eq!(again, model);
}

pub fn command(data: &[u8]) {
    let Some(text) = text(data) else { return };
    let Ok(cmd) = CommandMessage::parse(text) else { return };
    let again = CommandMessage::parse(&cmd.to_json()).expect("written command parses");
    assert_eq!(again, cmd);
}

pub fn render_frame(data: &[u8]) {
    let Some(text) = text(data) else { return };
    let Ok(frame) = RenderFrame::from_json(text) else {
        return;
    };
    let again = RenderFrame::from_json(&frame.to_json()).expect("written frame parses");
    assert_eq!(again, frame);
}

pub fn checkpoint(data: &[u8]) {
    let Some(text) = text(data) else { return };
    let Ok(ck) = Checkpoint::from_json(text) else { return };
    let again = Checkpoint::from_json(&ck.to_json()).expect("written checkpoint parses");
    assert_eq!(again, ck);
}

/// First line is a JSON config document; each further line is a
/// `path=value` override.
pub fn cli_config(data: &[u8]) {
    let Some(text) = text(data) else { return };
    let mut lines = text.lines();
    let Ok(mut root) = serde_json::from_str::<Value>(lines.next().unwrap_or("{}")) else {
        return;
    };
    for line in lines {
        let _ = apply_override(&mut root, line);
    }
    let Ok(config) = CliConfig::from_value(root) else {
        return;
    };
    let again = CliConfig::from_value(config.to_value()).expect("written config decodes");
    assert_eq!(again.hash(), config.hash());
    assert_eq!(again.to_value(), config.to_value());
}

pub fn curve_csv(data: &[u8]) {
    let Some(text) = text(data) else { return };
    let Ok(curve) = LearningCurve::from_csv(text) else {
        return;
    };
    let again = LearningCurve::from_csv(&curve.to_csv()).expect("written curve parses");
    assert_eq!(again, curve);
}

pub fn terrain_text(data: &[u8]) {
    let Some(text) = text(data) else { return };
    let Ok(field) = Heightfield::from_text(text, -1.0, -2.0, 0.05) else {
        return;
    };
    let again = Heightfield::from_text(&field.to_text(), -1.0, -2.0, 0.05).expect("written terrain parses");
    assert_eq!(again, field);
}
