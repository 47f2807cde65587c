//! Opaque identifiers.
//!
//! Identifiers are assigned by the engine from per-kind counters, so replaying
//! the same log always produces the same ids: tasks are `T1, T2, ...`, X-Tags
//! `X1, ...`, change tasks `C1, ...`, focus boards `F1, ...` and principles
//! `P1, ...`. The development board is always `dev`.

use std::fmt;

use serde::{Deserialize, Serialize};

macro_rules! string_id {
    ($(#[$meta:meta])* $name:ident) => {
        $(#[$meta])*
        #[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
        #[serde(transparent)]
        pub struct $name(String);

        impl $name {
            pub fn new(id: impl Into<String>) -> Self {
                Self(id.into())
            }

            pub fn as_str(&self) -> &str {
                &self.0
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(&self.0)
            }
        }

        impl From<&str> for $name {
            fn from(s: &str) -> Self {
                Self(s.to_owned())
            }
        }

        impl From<String> for $name {
            fn from(s: String) -> Self {
                Self(s)
            }
        }
    };
}

string_id!(
    /// Identifies a workspace; also the name of its directory on disk.
    WorkspaceId
);
string_id!(
    /// Identifies a board. Focus boards share their id with the focus.
    BoardId
);
string_id!(CardId);
string_id!(PrincipleId);

/// Focus boards are addressed by their board id.
pub type FocusId = BoardId;

impl BoardId {
    pub const DEV: &'static str = "dev";

    pub fn dev() -> Self {
        Self(Self::DEV.to_owned())
    }

    pub fn is_dev(&self) -> bool {
        self.0 == Self::DEV
    }
}
