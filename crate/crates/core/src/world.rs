//! World state: every channel's conversation tree, context attachments and
//! the peer directory, built by folding log records.
//!
//! The live server and [`replay`] go through the same [`World::apply`], so a
//! replayed log reproduces the live state exactly.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::conversation::{ChannelMode, ConversationError, ConversationTree, Intervention, Post};
use crate::events::{Event, EventRecord, LogError};
use crate::forum::{contextual_view, ContextIndex, CourseManifest, ForumError, ViewTab};
use crate::grammar::ActGrammar;
use crate::ids::{ChannelId, InterventionId, ObjectId};
use crate::peers::{Directory, PeerError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum WorldError {
    #[error(transparent)]
    Conversation(#[from] ConversationError),
    #[error(transparent)]
    Forum(#[from] ForumError),
    #[error(transparent)]
    Peer(#[from] PeerError),
    #[error("unknown channel `{0}`")]
    UnknownChannel(ChannelId),
    #[error("channel `{0}` already exists")]
    ChannelExists(ChannelId),
    #[error("no course manifest loaded")]
    NoManifest,
    #[error("record seq {got} does not follow {last}")]
    SeqGap { last: u64, got: u64 },
}

impl WorldError {
    pub fn code(&self) -> &'static str {
        match self {
            WorldError::Conversation(e) => e.code(),
            WorldError::Forum(e) => e.code(),
            WorldError::Peer(e) => e.code(),
            WorldError::UnknownChannel(_) => "UNKNOWN_CHANNEL",
            WorldError::ChannelExists(_) => "CHANNEL_EXISTS",
            WorldError::NoManifest => "DANGLING_REF",
            WorldError::SeqGap { .. } => "SEQ_GAP",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Channel {
    pub mode: ChannelMode,
    pub tree: ConversationTree,
}

#[derive(Debug, Clone)]
pub struct World {
    grammar: Arc<ActGrammar>,
    manifest: Option<Arc<CourseManifest>>,
    seq: u64,
    channels: BTreeMap<ChannelId, Channel>,
    locator: BTreeMap<InterventionId, ChannelId>,
    contexts: ContextIndex,
    directory: Directory,
}

impl World {
    pub fn new(grammar: Arc<ActGrammar>, manifest: Option<Arc<CourseManifest>>) -> Self {
        World {
            grammar,
            manifest,
            seq: 0,
            channels: BTreeMap::new(),
            locator: BTreeMap::new(),
            contexts: ContextIndex::new(),
            directory: Directory::new(),
        }
    }

    pub fn grammar(&self) -> &ActGrammar {
        &self.grammar
    }

    pub fn manifest(&self) -> Option<&CourseManifest> {
        self.manifest.as_deref()
    }

    /// Seq of the last applied record.
    pub fn seq(&self) -> u64 {
        self.seq
    }

    pub fn channels(&self) -> &BTreeMap<ChannelId, Channel> {
        &self.channels
    }

    pub fn channel(&self, id: &ChannelId) -> Result<&Channel, WorldError> {
        self.channels
            .get(id)
            .ok_or_else(|| WorldError::UnknownChannel(id.clone()))
    }

    pub fn contexts(&self) -> &ContextIndex {
        &self.contexts
    }

    pub fn directory(&self) -> &Directory {
        &self.directory
    }

    pub fn intervention(&self, id: InterventionId) -> Option<&Intervention> {
        let ch = self.locator.get(&id)?;
        self.channels[ch].tree.get(id)
    }

    fn manifest_or_err(&self) -> Result<&CourseManifest, WorldError> {
        self.manifest.as_deref().ok_or(WorldError::NoManifest)
    }

    fn tree_of(&self, id: InterventionId) -> Result<&ConversationTree, WorldError> {
        let ch = self
            .locator
            .get(&id)
            .ok_or(ForumError::UnknownNode(id))?;
        Ok(&self.channels[ch].tree)
    }

    /// Would `event` apply cleanly on top of the current state?
    pub fn check(&self, event: &Event) -> Result<(), WorldError> {
        match event {
            Event::ChannelCreated { channel, .. } => {
                if self.channels.contains_key(channel) {
                    return Err(WorldError::ChannelExists(channel.clone()));
                }
            }
            Event::InterventionPosted {
                channel,
                parent,
                act,
                author,
                body,
                ..
            } => {
                let ch = self.channel(channel)?;
                let post = Post::new(*parent, act.clone(), author.clone(), body.clone(), 0);
                ch.tree.check(&self.grammar, &post)?;
            }
            Event::ContextAttached {
                intervention,
                activity,
                concepts,
            } => {
                let m = self.manifest_or_err()?;
                let tree = self.tree_of(*intervention)?;
                ContextIndex::check(m, tree, *intervention, activity.as_ref(), concepts)?;
            }
            Event::ContextOpened { object, .. } => {
                self.manifest_or_err()?.object(object)?;
            }
            Event::MessageOpened { message, .. } => {
                self.tree_of(*message)?;
            }
            Event::ProfileUpserted { profile } => {
                profile.clone().normalized()?;
            }
            Event::OffersSet { user, .. } | Event::PresenceChanged { user, .. } => {
                self.directory.profile(user)?;
            }
            Event::DocumentUpserted { document } => {
                document.clone().normalized()?;
            }
        }
        Ok(())
    }

    /// Fold one record into the state. Records must arrive in seq order
    /// with no gaps; a failing record leaves the state untouched.
    pub fn apply(&mut self, rec: &EventRecord) -> Result<(), WorldError> {
        if rec.seq != self.seq + 1 {
            return Err(WorldError::SeqGap {
                last: self.seq,
                got: rec.seq,
            });
        }
        self.check(&rec.event)?;
        match &rec.event {
            Event::ChannelCreated { channel, mode } => {
                self.channels.insert(
                    channel.clone(),
                    Channel {
                        mode: *mode,
                        tree: ConversationTree::new(channel.clone()),
                    },
                );
            }
            Event::InterventionPosted {
                channel,
                parent,
                act,
                author,
                body,
                ..
            } => {
                let ch = self
                    .channels
                    .get_mut(channel)
                    .ok_or_else(|| WorldError::UnknownChannel(channel.clone()))?;
                let post = Post::new(*parent, act.clone(), author.clone(), body.clone(), rec.ts);
                let node = ch.tree.insert(&self.grammar, post, rec.seq)?;
                self.locator.insert(node.id, channel.clone());
            }
            Event::ContextAttached {
                intervention,
                activity,
                concepts,
            } => {
                let m = self.manifest.clone().ok_or(WorldError::NoManifest)?;
                let ch = self.locator[intervention].clone();
                self.contexts.attach(
                    &m,
                    &self.channels[&ch].tree,
                    *intervention,
                    activity.clone(),
                    concepts.clone(),
                )?;
            }
            Event::ContextOpened { .. } | Event::MessageOpened { .. } => {}
            Event::ProfileUpserted { profile } => {
                self.directory.upsert(profile.clone())?;
            }
            Event::OffersSet { user, offers } => {
                self.directory.set_offers(user, offers)?;
            }
            Event::PresenceChanged { user, state } => {
                self.directory.set_presence(user, *state)?;
            }
            Event::DocumentUpserted { document } => {
                self.directory.upsert_document(document.clone())?;
            }
        }
        self.seq = rec.seq;
        Ok(())
    }

    /// Contextual view across every channel, ascending seq.
    pub fn contextual_view(
        &self,
        object: &ObjectId,
        tab: ViewTab,
    ) -> Result<Vec<InterventionId>, WorldError> {
        let m = self.manifest_or_err()?;
        m.object(object)?;
        let mut out = Vec::new();
        for ch in self.channels.values() {
            out.extend(contextual_view(&self.contexts, m, &ch.tree, object, tab)?);
        }
        out.sort();
        Ok(out)
    }

    fn canonical(&self) -> Value {
        #[derive(Serialize)]
        struct ChannelView<'a> {
            mode: ChannelMode,
            interventions: Vec<&'a Intervention>,
        }
        let channels: BTreeMap<&ChannelId, ChannelView> = self
            .channels
            .iter()
            .map(|(id, ch)| {
                (
                    id,
                    ChannelView {
                        mode: ch.mode,
                        interventions: ch.tree.messages().collect(),
                    },
                )
            })
            .collect();
        let attachments: Vec<_> = self.contexts.iter().collect();
        let profiles: BTreeMap<_, _> = self.directory.profiles().map(|p| (&p.user, p)).collect();
        let documents: BTreeMap<_, _> = self.directory.documents().map(|d| (&d.id, d)).collect();
        serde_json::json!({
            "seq": self.seq,
            "channels": channels,
            "attachments": attachments,
            "profiles": profiles,
            "documents": documents,
        })
    }
}

fn write_canonical(v: &Value, out: &mut String) {
    match v {
        Value::Object(map) => {
            let mut keys: Vec<&String> = map.keys().collect();
            keys.sort();
            out.push('{');
            for (i, k) in keys.into_iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                out.push_str(&Value::String(k.clone()).to_string());
                out.push(':');
                write_canonical(&map[k], out);
            }
            out.push('}');
        }
        Value::Array(items) => {
            out.push('[');
            for (i, item) in items.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                write_canonical(item, out);
            }
            out.push(']');
        }
        other => out.push_str(&other.to_string()),
    }
}

/// Canonical serialization of the world: sorted keys, entities ordered by id.
pub fn canonical_json(world: &World) -> String {
    let mut out = String::new();
    write_canonical(&world.canonical(), &mut out);
    out
}

/// SHA-256 hex digest of [`canonical_json`].
pub fn state_hash(world: &World) -> String {
    hex::encode(Sha256::digest(canonical_json(world).as_bytes()))
}

/// Rebuild the world from a log. The first record that fails to apply is
/// reported as corrupt.
pub fn replay(
    records: &[EventRecord],
    grammar: Arc<ActGrammar>,
    manifest: Option<Arc<CourseManifest>>,
) -> Result<World, LogError> {
    let mut world = World::new(grammar, manifest);
    for (i, rec) in records.iter().enumerate() {
        world.apply(rec).map_err(|e| LogError::CorruptLog {
            seq: i as u64 + 1,
            line: i + 1,
            reason: e.to_string(),
        })?;
    }
    Ok(world)
}
