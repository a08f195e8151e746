//! Browser demo over the core crate: an act menu driven thread, its session
//! grid, and peer matching against a directory. The JSON functions are the
//! whole API; the `wasm` wrappers only move strings across the boundary.

use std::time::Duration;

use dialogos_core::conversation::{ConversationTree, Post};
use dialogos_core::forum::build_session_grid;
use dialogos_core::grammar::ActGrammar;
use dialogos_core::ids::{InterventionId, UserId};
use dialogos_core::peers::{peer_graph_model, Directory};
use serde::Serialize;
use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

const MINUTE_MS: i64 = 60_000;

#[derive(Debug, Serialize)]
pub struct MenuItem {
    pub act: String,
    pub label: String,
}

fn error(code: &str, message: impl std::fmt::Display) -> Value {
    json!({"error": {"code": code, "message": message.to_string()}})
}

/// One forum thread set under the SPLACH grammar, timestamped in minutes.
pub struct DemoForum {
    grammar: ActGrammar,
    tree: ConversationTree,
    seq: u64,
}

impl Default for DemoForum {
    fn default() -> Self {
        Self::new()
    }
}

impl DemoForum {
    pub fn new() -> Self {
        DemoForum {
            grammar: ActGrammar::splach(),
            tree: ConversationTree::new("demo"),
            seq: 0,
        }
    }

    /// `{"items":[{act,label}]}` for `author` replying to `parent`, 0 meaning
    /// a new thread.
    pub fn menu(&self, parent: u64, author: &str) -> Value {
        let parent = (parent != 0).then_some(InterventionId(parent));
        match self.tree.act_menu(&self.grammar, parent, &UserId::new(author)) {
            Ok(acts) => {
                let items: Vec<MenuItem> = acts
                    .into_iter()
                    .map(|a| MenuItem {
                        label: self.grammar.act(&a).map_or(a.clone(), |s| s.label.clone()),
                        act: a,
                    })
                    .collect();
                json!({ "items": items })
            }
            Err(e) => error(e.code(), e),
        }
    }

    /// `{"id":n}` or `{"error":..}`; nothing changes on error.
    pub fn post(&mut self, parent: u64, act: &str, author: &str, body: &str, minute: i64) -> Value {
        let parent = (parent != 0).then_some(InterventionId(parent));
        let post = Post::new(parent, act, author, body, minute * MINUTE_MS);
        match self.tree.insert(&self.grammar, post, self.seq + 1) {
            Ok(m) => {
                self.seq += 1;
                json!({ "id": m.id })
            }
            Err(e) => error(e.code(), e),
        }
    }

    /// Messages in thread order with their depth, for drawing.
    pub fn messages(&self) -> Value {
        let depth = |mut id: InterventionId| {
            let mut d = 0;
            while let Some(p) = self.tree.get(id).and_then(|m| m.parent) {
                d += 1;
                id = p;
            }
            d
        };
        let rows: Vec<Value> = self
            .tree
            .linearize()
            .into_iter()
            .filter_map(|id| self.tree.get(id))
            .map(|m| {
                json!({
                    "id": m.id, "parent": m.parent, "act": m.act, "author": m.author,
                    "body": m.body, "minute": m.ts / MINUTE_MS, "depth": depth(m.id),
                })
            })
            .collect();
        json!({ "messages": rows })
    }

    pub fn grid(&self, delta_minutes: u64) -> Value {
        if delta_minutes == 0 {
            return error("INVALID_DELTA", "window must be at least one minute");
        }
        match build_session_grid(&self.tree, Duration::from_secs(delta_minutes * 60)) {
            Ok(g) => json!({ "grid": g }),
            Err(e) => error(e.code(), e),
        }
    }
}

/// Rank the directory for `requester` against comma separated `tags` and
/// return the graph model to draw.
pub fn match_peers_json(directory: &str, requester: &str, tags: &str, k: usize) -> Value {
    let dir = match Directory::from_json(directory) {
        Ok(d) => d,
        Err(e) => return error(e.code(), e),
    };
    let query: Vec<&str> = tags.split(',').map(str::trim).filter(|t| !t.is_empty()).collect();
    let me = UserId::new(requester);
    let ranked = match dir.match_peers(&me, &query, k) {
        Ok(r) => r,
        Err(e) => return error(e.code(), e),
    };
    match peer_graph_model(&dir, &ranked, &me) {
        Ok(graph) => json!({ "results": ranked, "graph": graph }),
        Err(e) => error(e.code(), e),
    }
}

#[wasm_bindgen]
pub struct Forum(DemoForum);

#[wasm_bindgen]
impl Forum {
    #[wasm_bindgen(constructor)]
    pub fn new() -> Forum {
        Forum(DemoForum::new())
    }

    pub fn menu(&self, parent: u32, author: &str) -> String {
        self.0.menu(parent.into(), author).to_string()
    }

    pub fn post(&mut self, parent: u32, act: &str, author: &str, body: &str, minute: i32) -> String {
        self.0.post(parent.into(), act, author, body, minute.into()).to_string()
    }

    pub fn messages(&self) -> String {
        self.0.messages().to_string()
    }

    pub fn grid(&self, delta_minutes: u32) -> String {
        self.0.grid(delta_minutes.into()).to_string()
    }
}

impl Default for Forum {
    fn default() -> Self {
        Self::new()
    }
}

#[wasm_bindgen]
pub fn match_peers(directory: &str, requester: &str, tags: &str, k: u32) -> String {
    match_peers_json(directory, requester, tags, k as usize).to_string()
}
