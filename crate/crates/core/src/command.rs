use serde::{Deserialize, Serialize};

use crate::ids::{BoardId, CardId, PrincipleId};
use crate::model::{ColumnSpec, CompletionPolicy, WipPolicy};

/// A change produced by the analysis of a completed X-Tag.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChangeSpec {
    pub title: String,
    #[serde(default)]
    pub description: String,
}

impl ChangeSpec {
    pub fn new(title: impl Into<String>, description: impl Into<String>) -> Self {
        Self {
            title: title.into(),
            description: description.into(),
        }
    }
}

/// Every state change is one of these. Serialized with a `kind` tag, which is
/// also the wire format accepted by the HTTP service.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Command {
    CreateTask {
        title: String,
        #[serde(default)]
        description: String,
    },
    AddFocus {
        name: String,
        principles: Vec<String>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        columns: Option<Vec<ColumnSpec>>,
    },
    AddPrinciple {
        focus: BoardId,
        statement: String,
    },
    RevisePrinciple {
        principle: PrincipleId,
        statement: String,
    },
    RetirePrinciple {
        principle: PrincipleId,
    },
    ExtractXtag {
        task: CardId,
        focus: BoardId,
        title: String,
        #[serde(default)]
        description: String,
        principles: Vec<PrincipleId>,
    },
    LinkMark {
        dev_card: CardId,
        xtag: CardId,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        note: Option<String>,
    },
    UnlinkMark {
        dev_card: CardId,
        xtag: CardId,
    },
    StartTask {
        task: CardId,
    },
    MoveCard {
        card: CardId,
        column: String,
    },
    CompleteXtag {
        xtag: CardId,
        #[serde(default)]
        changes: Vec<ChangeSpec>,
    },
    CompleteTask {
        task: CardId,
    },
    SetPolicy {
        wip_policy: WipPolicy,
        #[serde(default)]
        completion_policy: CompletionPolicy,
    },
}

impl Command {
    pub fn kind(&self) -> &'static str {
        match self {
            Command::CreateTask { .. } => "create_task",
            Command::AddFocus { .. } => "add_focus",
            Command::AddPrinciple { .. } => "add_principle",
            Command::RevisePrinciple { .. } => "revise_principle",
            Command::RetirePrinciple { .. } => "retire_principle",
            Command::ExtractXtag { .. } => "extract_xtag",
            Command::LinkMark { .. } => "link_mark",
            Command::UnlinkMark { .. } => "unlink_mark",
            Command::StartTask { .. } => "start_task",
            Command::MoveCard { .. } => "move_card",
            Command::CompleteXtag { .. } => "complete_xtag",
            Command::CompleteTask { .. } => "complete_task",
            Command::SetPolicy { .. } => "set_policy",
        }
    }

    pub fn create_task(title: impl Into<String>) -> Self {
        Command::CreateTask {
            title: title.into(),
            description: String::new(),
        }
    }

    pub fn add_focus<S: Into<String>>(name: impl Into<String>, principles: impl IntoIterator<Item = S>) -> Self {
        Command::AddFocus {
            name: name.into(),
            principles: principles.into_iter().map(Into::into).collect(),
            columns: None,
        }
    }

    pub fn extract_xtag<P: Into<PrincipleId>>(
        task: impl Into<CardId>,
        focus: impl Into<BoardId>,
        title: impl Into<String>,
        principles: impl IntoIterator<Item = P>,
    ) -> Self {
        Command::ExtractXtag {
            task: task.into(),
            focus: focus.into(),
            title: title.into(),
            description: String::new(),
            principles: principles.into_iter().map(Into::into).collect(),
        }
    }

    pub fn link_mark(dev_card: impl Into<CardId>, xtag: impl Into<CardId>) -> Self {
        Command::LinkMark {
            dev_card: dev_card.into(),
            xtag: xtag.into(),
            note: None,
        }
    }

    pub fn start_task(task: impl Into<CardId>) -> Self {
        Command::StartTask { task: task.into() }
    }

    pub fn move_card(card: impl Into<CardId>, column: impl Into<String>) -> Self {
        Command::MoveCard {
            card: card.into(),
            column: column.into(),
        }
    }

    pub fn complete_xtag(xtag: impl Into<CardId>, changes: Vec<ChangeSpec>) -> Self {
        Command::CompleteXtag {
            xtag: xtag.into(),
            changes,
        }
    }

    pub fn complete_task(task: impl Into<CardId>) -> Self {
        Command::CompleteTask { task: task.into() }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wire_format_uses_kind_tag() {
        let json = serde_json::to_string(&Command::start_task("T1")).unwrap();
        assert_eq!(json, r#"{"kind":"start_task","task":"T1"}"#);
        let back: Command = serde_json::from_str(&json).unwrap();
        assert_eq!(back, Command::start_task("T1"));
    }

    #[test]
    fn unknown_fields_are_rejected() {
        let err = serde_json::from_str::<Command>(r#"{"kind":"start_task","task":"T1","x":1}"#);
        assert!(err.is_err());
    }
}
