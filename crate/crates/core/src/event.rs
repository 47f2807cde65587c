use serde::{Deserialize, Serialize};

use crate::command::Command;
use crate::effect::Effect;

/// One accepted command. `seq` equals the workspace clock after application.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Event {
    pub seq: u64,
    pub command: Command,
    pub effects: Vec<Effect>,
    /// Wall-clock metadata (RFC 3339); never part of workspace state.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wall_time: Option<String>,
}

impl Event {
    pub fn kind(&self) -> &'static str {
        self.command.kind()
    }
}
