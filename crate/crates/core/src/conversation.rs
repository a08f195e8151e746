//! Act-typed conversation forests, one per channel.
//!
//! The same structure backs synchronous chat and asynchronous forums; the
//! channel mode only matters to the server's push policy.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::grammar::{ActGrammar, ActRef, GrammarError};
use crate::ids::{ChannelId, InterventionId, Timestamp, UserId};

pub const MAX_BODY_BYTES: usize = 16 * 1024;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ConversationError {
    #[error("unknown parent {0}")]
    UnknownParent(InterventionId),
    #[error("act `{act}` is not allowed here")]
    ActForbidden {
        act: String,
        allowed: BTreeSet<String>,
    },
    #[error("unknown act `{0}`")]
    UnknownAct(String),
    #[error("empty message body")]
    EmptyBody,
    #[error("message body exceeds {MAX_BODY_BYTES} bytes")]
    BodyTooLarge,
    #[error("unknown node {0}")]
    UnknownNode(InterventionId),
    #[error("sequence number {seq} does not follow {last}")]
    StaleSeq { seq: u64, last: u64 },
}

impl ConversationError {
    pub fn code(&self) -> &'static str {
        match self {
            ConversationError::UnknownParent(_) => "UNKNOWN_PARENT",
            ConversationError::ActForbidden { .. } => "ACT_FORBIDDEN",
            ConversationError::UnknownAct(_) => "UNKNOWN_ACT",
            ConversationError::EmptyBody => "EMPTY_BODY",
            ConversationError::BodyTooLarge => "BODY_TOO_LARGE",
            ConversationError::UnknownNode(_) => "UNKNOWN_NODE",
            ConversationError::StaleSeq { .. } => "STALE_SEQ",
        }
    }
}

impl From<GrammarError> for ConversationError {
    fn from(e: GrammarError) -> Self {
        match e {
            GrammarError::UnknownAct(a) | GrammarError::UnknownActRef(a) => {
                ConversationError::UnknownAct(a)
            }
            other => ConversationError::UnknownAct(other.to_string()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChannelMode {
    Chat,
    Forum,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Intervention {
    pub id: InterventionId,
    pub channel: ChannelId,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub parent: Option<InterventionId>,
    pub act: String,
    pub author: UserId,
    pub body: String,
    pub ts: Timestamp,
    pub seq: u64,
}

/// A request to add an intervention, before it has been sequenced.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Post {
    pub parent: Option<InterventionId>,
    pub act: String,
    pub author: UserId,
    pub body: String,
    pub ts: Timestamp,
}

impl Post {
    pub fn new(
        parent: Option<InterventionId>,
        act: impl Into<String>,
        author: impl Into<UserId>,
        body: impl Into<String>,
        ts: Timestamp,
    ) -> Self {
        Post {
            parent,
            act: act.into(),
            author: author.into(),
            body: body.into(),
            ts,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConversationTree {
    channel: ChannelId,
    nodes: BTreeMap<InterventionId, Intervention>,
    roots: Vec<InterventionId>,
    children: BTreeMap<InterventionId, Vec<InterventionId>>,
    last_seq: u64,
}

impl ConversationTree {
    pub fn new(channel: impl Into<ChannelId>) -> Self {
        ConversationTree {
            channel: channel.into(),
            nodes: BTreeMap::new(),
            roots: Vec::new(),
            children: BTreeMap::new(),
            last_seq: 0,
        }
    }

    pub fn channel(&self) -> &ChannelId {
        &self.channel
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn get(&self, id: InterventionId) -> Option<&Intervention> {
        self.nodes.get(&id)
    }

    pub fn roots(&self) -> &[InterventionId] {
        &self.roots
    }

    pub fn children(&self, id: InterventionId) -> &[InterventionId] {
        self.children.get(&id).map(Vec::as_slice).unwrap_or(&[])
    }

    /// All interventions in ascending seq order.
    pub fn messages(&self) -> impl Iterator<Item = &Intervention> {
        // ids are seqs, so key order is seq order
        self.nodes.values()
    }

    pub fn last_seq(&self) -> u64 {
        self.last_seq
    }

    /// Where a reply to `parent` would attach in the grammar, and whether
    /// `author` wrote that parent.
    pub fn parent_ref(
        &self,
        parent: Option<InterventionId>,
        author: &UserId,
    ) -> Result<(ActRef, bool), ConversationError> {
        match parent {
            None => Ok((ActRef::Root, false)),
            Some(pid) => {
                let p = self
                    .nodes
                    .get(&pid)
                    .ok_or(ConversationError::UnknownParent(pid))?;
                Ok((ActRef::Act(p.act.clone()), &p.author == author))
            }
        }
    }

    /// Legal acts for `user` replying to `parent` (or opening a thread).
    pub fn act_menu(
        &self,
        grammar: &ActGrammar,
        parent: Option<InterventionId>,
        user: &UserId,
    ) -> Result<BTreeSet<String>, ConversationError> {
        let (pref, same) = self.parent_ref(parent, user)?;
        Ok(grammar.successors(&pref, same)?)
    }

    /// Run every insertion check without mutating the tree.
    pub fn check(&self, grammar: &ActGrammar, post: &Post) -> Result<(), ConversationError> {
        let (pref, same) = self.parent_ref(post.parent, &post.author)?;
        if post.body.trim().is_empty() {
            return Err(ConversationError::EmptyBody);
        }
        if post.body.len() > MAX_BODY_BYTES {
            return Err(ConversationError::BodyTooLarge);
        }
        if !grammar.contains(&post.act) {
            return Err(ConversationError::UnknownAct(post.act.clone()));
        }
        let allowed = grammar.successors(&pref, same)?;
        if !allowed.contains(&post.act) {
            return Err(ConversationError::ActForbidden {
                act: post.act.clone(),
                allowed,
            });
        }
        Ok(())
    }

    /// Validate and append `post`, stamping it with `seq` (which also becomes
    /// its id). `seq` must exceed every seq already in the tree.
    pub fn insert(
        &mut self,
        grammar: &ActGrammar,
        post: Post,
        seq: u64,
    ) -> Result<&Intervention, ConversationError> {
        if seq <= self.last_seq {
            return Err(ConversationError::StaleSeq {
                seq,
                last: self.last_seq,
            });
        }
        self.check(grammar, &post)?;
        let id = InterventionId(seq);
        match post.parent {
            Some(p) => self.children.entry(p).or_default().push(id),
            None => self.roots.push(id),
        }
        self.last_seq = seq;
        let node = Intervention {
            id,
            channel: self.channel.clone(),
            parent: post.parent,
            act: post.act,
            author: post.author,
            body: post.body,
            ts: post.ts,
            seq,
        };
        Ok(self.nodes.entry(id).or_insert(node))
    }

    /// Depth-first pre-order: roots by seq, children by seq.
    pub fn linearize(&self) -> Vec<InterventionId> {
        let mut out = Vec::with_capacity(self.nodes.len());
        let mut stack: Vec<InterventionId> = self.roots.iter().rev().copied().collect();
        while let Some(id) = stack.pop() {
            out.push(id);
            stack.extend(self.children(id).iter().rev().copied());
        }
        out
    }

    pub fn thread_of(&self, id: InterventionId) -> Result<InterventionId, ConversationError> {
        let mut cur = self.nodes.get(&id).ok_or(ConversationError::UnknownNode(id))?;
        while let Some(p) = cur.parent {
            cur = &self.nodes[&p];
        }
        Ok(cur.id)
    }

    /// Re-check every stored node against the grammar.
    pub fn audit(&self, grammar: &ActGrammar) -> Result<(), ConversationError> {
        for n in self.nodes.values() {
            let (pref, same) = self.parent_ref(n.parent, &n.author)?;
            if !grammar.validate_succession(&pref, &n.act, same)?.is_allowed() {
                return Err(ConversationError::ActForbidden {
                    act: n.act.clone(),
                    allowed: grammar.successors(&pref, same)?,
                });
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn splach() -> ActGrammar {
        ActGrammar::splach()
    }

    #[test]
    fn root_insert() {
        let g = splach();
        let mut t = ConversationTree::new("c");
        let n = t
            .insert(&g, Post::new(None, "demander", "u1", "Comment faire ?", 0), 1)
            .unwrap();
        assert_eq!(n.id, InterventionId(1));
        assert_eq!(n.parent, None);
        assert_eq!(t.roots(), &[InterventionId(1)]);
    }

    #[test]
    fn other_author_cannot_self_react() {
        let g = splach();
        let mut t = ConversationTree::new("c");
        t.insert(&g, Post::new(None, "demander", "u1", "Comment faire ?", 0), 1)
            .unwrap();
        let err = t
            .insert(
                &g,
                Post::new(Some(InterventionId(1)), "preciser", "u2", "en fait", 1),
                2,
            )
            .unwrap_err();
        match err {
            ConversationError::ActForbidden { allowed, .. } => {
                assert_eq!(allowed, ["repondre".to_string()].into_iter().collect())
            }
            other => panic!("{other:?}"),
        }
        assert_eq!(t.len(), 1);
        // the author may
        t.insert(
            &g,
            Post::new(Some(InterventionId(1)), "preciser", "u1", "en fait", 1),
            2,
        )
        .unwrap();
    }

    #[test]
    fn body_checks() {
        let g = splach();
        let mut t = ConversationTree::new("c");
        t.insert(&g, Post::new(None, "demander", "u1", "?", 0), 1).unwrap();
        let e = t
            .insert(&g, Post::new(Some(InterventionId(1)), "repondre", "u2", "", 0), 2)
            .unwrap_err();
        assert_eq!(e, ConversationError::EmptyBody);
        let big = "x".repeat(MAX_BODY_BYTES + 1);
        let e = t
            .insert(&g, Post::new(Some(InterventionId(1)), "repondre", "u2", big, 0), 2)
            .unwrap_err();
        assert_eq!(e, ConversationError::BodyTooLarge);
        let exact = "x".repeat(MAX_BODY_BYTES);
        t.insert(&g, Post::new(Some(InterventionId(1)), "repondre", "u2", exact, 0), 2)
            .unwrap();
    }

    #[test]
    fn unknown_parent_and_stale_seq() {
        let g = splach();
        let mut t = ConversationTree::new("c");
        assert_eq!(
            t.insert(&g, Post::new(Some(InterventionId(9)), "repondre", "u", "x", 0), 1)
                .unwrap_err(),
            ConversationError::UnknownParent(InterventionId(9))
        );
        t.insert(&g, Post::new(None, "saluer", "u", "salut", 0), 5).unwrap();
        assert_eq!(
            t.insert(&g, Post::new(None, "saluer", "u", "salut", 0), 5)
                .unwrap_err()
                .code(),
            "STALE_SEQ"
        );
        assert_eq!(
            t.insert(&g, Post::new(None, "inconnu", "u", "x", 0), 6)
                .unwrap_err(),
            ConversationError::UnknownAct("inconnu".into())
        );
    }

    #[test]
    fn linearize_examples() {
        let g = splach();
        assert!(ConversationTree::new("c").linearize().is_empty());

        let mut t = ConversationTree::new("c");
        t.insert(&g, Post::new(None, "demander", "a", "q", 0), 1).unwrap();
        t.insert(&g, Post::new(Some(InterventionId(1)), "repondre", "b", "r", 0), 2)
            .unwrap();
        t.insert(&g, Post::new(Some(InterventionId(1)), "repondre", "c", "r", 0), 3)
            .unwrap();
        assert_eq!(
            t.linearize(),
            vec![InterventionId(1), InterventionId(2), InterventionId(3)]
        );

        let mut t = ConversationTree::new("c");
        t.insert(&g, Post::new(None, "demander", "a", "q", 0), 1).unwrap();
        t.insert(&g, Post::new(None, "affirmer", "b", "q", 0), 2).unwrap();
        t.insert(&g, Post::new(Some(InterventionId(1)), "repondre", "b", "r", 0), 3)
            .unwrap();
        assert_eq!(
            t.linearize(),
            vec![InterventionId(1), InterventionId(3), InterventionId(2)]
        );
    }

    #[test]
    fn thread_of_walks_to_root() {
        let g = splach();
        let mut t = ConversationTree::new("c");
        t.insert(&g, Post::new(None, "demander", "a", "q", 0), 1).unwrap();
        t.insert(&g, Post::new(Some(InterventionId(1)), "repondre", "b", "r", 0), 2)
            .unwrap();
        t.insert(&g, Post::new(Some(InterventionId(2)), "questionner", "a", "r", 0), 3)
            .unwrap();
        assert_eq!(t.thread_of(InterventionId(1)), Ok(InterventionId(1)));
        assert_eq!(t.thread_of(InterventionId(3)), Ok(InterventionId(1)));
        assert_eq!(
            t.thread_of(InterventionId(4)),
            Err(ConversationError::UnknownNode(InterventionId(4)))
        );
    }
}
