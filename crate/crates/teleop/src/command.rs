//! Inbound command schema and the fixed replies.

use serde::{Deserialize, Serialize};
use serde_json::json;
use thiserror::Error;

/// Reply to any message that fails to parse or validate.
pub const BAD_COMMAND: &str = r#"{"error":"bad_command"}"#;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TwistCommand {
    pub linear: f64,
    pub angular: f64,
}

/// One client message. Exactly the fields of its `kind` are accepted.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum CommandMessage {
    Twist { twist: TwistCommand },
    Suspension { motors: [f64; 4] },
    Reset {},
    Stop {},
}

#[derive(Debug, Error)]
pub enum CommandError {
    #[error("malformed command: {0}")]
    Schema(#[from] serde_json::Error),
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
}

impl CommandMessage {
    pub fn parse(text: &str) -> Result<Self, CommandError> {
        let msg: CommandMessage = serde_json::from_str(text)?;
        match msg {
            CommandMessage::Twist { twist } if !(twist.linear.is_finite() && twist.angular.is_finite()) => {
                Err(CommandError::NonFinite("twist"))
            }
            CommandMessage::Suspension { motors } if !motors.iter().all(|m| m.is_finite()) => {
                Err(CommandError::NonFinite("motors"))
            }
            ok => Ok(ok),
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CommandMessage::Twist { .. } => "twist",
            CommandMessage::Suspension { .. } => "suspension",
            CommandMessage::Reset {} => "reset",
            CommandMessage::Stop {} => "stop",
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("command serializes")
    }

    /// `{"ack": kind}`, sent once the command has been handed to the loop.
    pub fn ack(&self) -> String {
        json!({ "ack": self.kind() }).to_string()
    }
}
