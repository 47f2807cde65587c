//! Built-in focus templates and the file format for custom ones.
//!
//! A template is JSON:
//!
//! ```json
//! {
//!   "focus_name": "Security",
//!   "principles": ["Risk: ...", "Vulnerabilities: ..."],
//!   "example_xtags": [{ "title": "Assess injection risk", "principles": [0, 1] }]
//! }
//! ```
//!
//! `example_xtags[].principles` are indices into `principles`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::command::Command;
use crate::engine::{execute, TransitionResult};
use crate::model::Workspace;

const BUILTIN: [(&str, &str); 3] = [
    ("security", include_str!("../presets/security.json")),
    ("sustainability", include_str!("../presets/sustainability.json")),
    ("performance", include_str!("../presets/performance.json")),
];

#[derive(Debug, Error)]
pub enum PresetError {
    #[error("unknown preset {0:?}")]
    UnknownPreset(String),
    #[error("invalid template: {0}")]
    Invalid(String),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExampleXtag {
    pub title: String,
    pub principles: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FocusTemplate {
    pub focus_name: String,
    pub principles: Vec<String>,
    #[serde(default)]
    pub example_xtags: Vec<ExampleXtag>,
}

impl FocusTemplate {
    pub fn from_json(text: &str) -> Result<Self, PresetError> {
        let t: FocusTemplate =
            serde_json::from_str(text).map_err(|e| PresetError::Invalid(e.to_string()))?;
        t.check()?;
        Ok(t)
    }

    pub fn check(&self) -> Result<(), PresetError> {
        if self.focus_name.trim().is_empty() {
            return Err(PresetError::Invalid("focus_name is empty".into()));
        }
        if self.principles.is_empty() || self.principles.iter().any(|p| p.trim().is_empty()) {
            return Err(PresetError::Invalid("principles must be non-empty".into()));
        }
        for x in &self.example_xtags {
            if x.principles.is_empty() || x.principles.iter().any(|&i| i >= self.principles.len()) {
                return Err(PresetError::Invalid(format!(
                    "example {:?} must reference valid principle indices",
                    x.title
                )));
            }
        }
        Ok(())
    }

    /// The single `add_focus` command that installs this template.
    pub fn to_command(&self) -> Command {
        Command::AddFocus {
            name: self.focus_name.clone(),
            principles: self.principles.clone(),
            columns: None,
        }
    }

    /// Principle statement for an example X-Tag's first reference.
    pub fn principle_of(&self, example: &ExampleXtag) -> &str {
        &self.principles[example.principles[0]]
    }
}

pub fn list_presets() -> Vec<&'static str> {
    BUILTIN.iter().map(|(n, _)| *n).collect()
}

pub fn load_preset(name: &str) -> Result<FocusTemplate, PresetError> {
    let key = name.trim().to_ascii_lowercase();
    let (_, text) = BUILTIN
        .iter()
        .find(|(n, _)| *n == key)
        .ok_or_else(|| PresetError::UnknownPreset(name.to_owned()))?;
    FocusTemplate::from_json(text)
}

/// Installs the template as an ordinary `add_focus` command.
pub fn apply_preset(ws: &mut Workspace, template: &FocusTemplate, wall_time: Option<String>) -> TransitionResult {
    execute(ws, &template.to_command(), wall_time)
}
