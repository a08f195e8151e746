//! Wire protocol v1: one compact JSON object per LF-terminated line, tagged
//! by its `t` field.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::conversation::{ChannelMode, Intervention};
use crate::events::ViewMode;
use crate::grammar::{ActGrammar, Category};
use crate::ids::{ActivityId, ChannelId, ConceptId, InterventionId, ObjectId, UserId};
use crate::peers::{MatchResult, PeerGraph, Presence};

pub const PROTOCOL_VERSION: u32 = 1;
/// Longest accepted frame, newline excluded.
pub const MAX_FRAME_BYTES: usize = 64 * 1024;

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PostContext {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub activity: Option<ActivityId>,
    #[serde(default, skip_serializing_if = "BTreeSet::is_empty")]
    pub concepts: BTreeSet<ConceptId>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "t", rename_all = "snake_case")]
pub enum ClientFrame {
    Hello {
        user: UserId,
        version: u32,
    },
    /// Join a channel. On forum channels, `subscribe` asks for pushed
    /// events; otherwise the client fetches on demand.
    Join {
        channel: ChannelId,
        #[serde(default)]
        subscribe: bool,
    },
    Create {
        channel: ChannelId,
        mode: ChannelMode,
    },
    Fetch {
        channel: ChannelId,
    },
    Post {
        channel: ChannelId,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        parent: Option<InterventionId>,
        act: String,
        body: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        ctx: Option<PostContext>,
    },
    ActMenu {
        channel: ChannelId,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        node: Option<InterventionId>,
    },
    ContextOpen {
        object: ObjectId,
    },
    Open {
        message: InterventionId,
        mode: ViewMode,
    },
    PeerQuery {
        #[serde(default)]
        tags: Vec<String>,
        k: usize,
    },
    OffersSet {
        tags: Vec<String>,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ActEntry {
    pub id: String,
    pub label: String,
    pub category: Category,
}

impl ActEntry {
    pub fn list(grammar: &ActGrammar, ids: &BTreeSet<String>) -> Vec<ActEntry> {
        // grammar order, so menus read the same way every time
        grammar
            .acts()
            .iter()
            .filter(|a| ids.contains(&a.id))
            .map(|a| ActEntry {
                id: a.id.clone(),
                label: a.label.clone(),
                category: a.category,
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "t", rename_all = "snake_case")]
pub enum ServerFrame {
    Welcome {
        seq: u64,
    },
    Ack {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        id: Option<InterventionId>,
        seq: u64,
    },
    Event {
        intervention: Intervention,
    },
    Acts {
        channel: ChannelId,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        node: Option<InterventionId>,
        list: Vec<ActEntry>,
    },
    Views {
        object: ObjectId,
        activity: Vec<InterventionId>,
        content: Vec<InterventionId>,
    },
    Presence {
        user: UserId,
        state: Presence,
    },
    Peers {
        results: Vec<MatchResult>,
        graph: PeerGraph,
    },
    History {
        channel: ChannelId,
        mode: ChannelMode,
        interventions: Vec<Intervention>,
    },
    Error {
        code: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        detail: Option<String>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        allowed: Option<Vec<String>>,
    },
}

impl ServerFrame {
    pub fn error(code: &str, detail: impl Into<String>) -> Self {
        ServerFrame::Error {
            code: code.to_string(),
            detail: Some(detail.into()),
            allowed: None,
        }
    }

    pub fn is_error(&self) -> bool {
        matches!(self, ServerFrame::Error { .. })
    }

    pub fn error_code(&self) -> Option<&str> {
        match self {
            ServerFrame::Error { code, .. } => Some(code),
            _ => None,
        }
    }
}

/// Parse one line (a trailing `\n` or `\r\n` is ignored).
pub fn parse_client_frame(line: &str) -> Result<ClientFrame, String> {
    let line = line.strip_suffix('\n').unwrap_or(line);
    let line = line.strip_suffix('\r').unwrap_or(line);
    if line.len() > MAX_FRAME_BYTES {
        return Err(format!("frame exceeds {MAX_FRAME_BYTES} bytes"));
    }
    serde_json::from_str(line).map_err(|e| e.to_string())
}

/// Compact encoding plus the LF terminator.
pub fn encode_frame<T: Serialize>(frame: &T) -> String {
    let mut s = serde_json::to_string(frame).expect("frames serialize");
    s.push('\n');
    s
}
