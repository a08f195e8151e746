//! Frame handling and fan-out.
//!
//! [`handle_frame`] is a pure function of the frame, the connection state
//! and a world snapshot: every state change it wants is expressed as events.
//! [`Hub`] is the single sequencer that appends those events, folds them
//! into the world and routes the resulting frames.

use std::collections::{BTreeMap, BTreeSet};

use dialogos_core::conversation::{ChannelMode, Intervention};
use dialogos_core::events::{Event, EventLog, ViewMode};
use dialogos_core::forum::ViewTab;
use dialogos_core::ids::{ChannelId, InterventionId, Timestamp, UserId};
use dialogos_core::peers::{normalize_tags, peer_graph_model, Directory, PeerProfile, Presence};
use dialogos_core::protocol::{
    parse_client_frame, ActEntry, ClientFrame, PostContext, ServerFrame, PROTOCOL_VERSION,
};
use dialogos_core::world::{World, WorldError};

pub type ConnId = u64;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConnectionState {
    pub id: ConnId,
    pub user: Option<UserId>,
    /// Joined channels and whether the connection subscribed to pushes.
    pub channels: BTreeMap<ChannelId, bool>,
    pub version: Option<u32>,
}

impl ConnectionState {
    pub fn new(id: ConnId) -> Self {
        ConnectionState {
            id,
            user: None,
            channels: BTreeMap::new(),
            version: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Broadcast {
    /// Routed through [`broadcast_policy`] for the channel.
    Channel { channel: ChannelId, frame: ServerFrame },
    /// Every authenticated connection.
    All(ServerFrame),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub events: Vec<Event>,
    pub replies: Vec<ServerFrame>,
    pub broadcasts: Vec<Broadcast>,
    pub state: ConnectionState,
}

impl Outcome {
    fn new(state: &ConnectionState) -> Self {
        Outcome {
            events: Vec::new(),
            replies: Vec::new(),
            broadcasts: Vec::new(),
            state: state.clone(),
        }
    }

    fn error(state: &ConnectionState, frame: ServerFrame) -> Self {
        let mut o = Outcome::new(state);
        o.replies.push(frame);
        o
    }
}

fn world_error(e: &WorldError) -> ServerFrame {
    use dialogos_core::conversation::ConversationError;
    let allowed = match e {
        WorldError::Conversation(ConversationError::ActForbidden { allowed, .. }) => {
            Some(allowed.iter().cloned().collect())
        }
        _ => None,
    };
    ServerFrame::Error {
        code: e.code().to_string(),
        detail: Some(e.to_string()),
        allowed,
    }
}

/// Decide what a frame does. `now` stamps any events produced; their seqs
/// are the ones the log will assign next, starting at `world.seq() + 1`.
pub fn handle_frame(
    line: &str,
    conn: &ConnectionState,
    world: &World,
    now: Timestamp,
) -> Outcome {
    let frame = match parse_client_frame(line) {
        Ok(f) => f,
        Err(e) => return Outcome::error(conn, ServerFrame::error("BAD_FRAME", e)),
    };
    let user = match (&frame, &conn.user) {
        (ClientFrame::Hello { .. }, _) => None,
        (_, Some(u)) => Some(u.clone()),
        (_, None) => {
            return Outcome::error(
                conn,
                ServerFrame::error("UNAUTHENTICATED", "send hello first"),
            )
        }
    };
    let next_seq = world.seq() + 1;
    let mut out = Outcome::new(conn);

    match frame {
        ClientFrame::Hello { user, version } => {
            if conn.user.is_some() {
                return Outcome::error(conn, ServerFrame::error("BAD_FRAME", "already authenticated"));
            }
            if version != PROTOCOL_VERSION {
                return Outcome::error(
                    conn,
                    ServerFrame::error("BAD_FRAME", format!("unsupported protocol version {version}")),
                );
            }
            if user.as_str().trim().is_empty() {
                return Outcome::error(conn, ServerFrame::error("BAD_FRAME", "empty user"));
            }
            let known = world.directory().profile(&user).ok();
            if known.is_none() {
                out.events.push(Event::ProfileUpserted {
                    profile: PeerProfile::new(user.clone(), user.to_string()),
                });
            }
            if known.map(|p| p.presence) != Some(Presence::Connected) {
                out.events.push(Event::PresenceChanged {
                    user: user.clone(),
                    state: Presence::Connected,
                });
                out.broadcasts.push(Broadcast::All(ServerFrame::Presence {
                    user: user.clone(),
                    state: Presence::Connected,
                }));
            }
            out.replies.push(ServerFrame::Welcome {
                seq: world.seq() + out.events.len() as u64,
            });
            out.state.user = Some(user);
            out.state.version = Some(version);
        }
        ClientFrame::Create { channel, mode } => {
            let ev = Event::ChannelCreated { channel, mode };
            if let Err(e) = ev.validate() {
                return Outcome::error(conn, ServerFrame::error("BAD_FRAME", e.to_string()));
            }
            if let Err(e) = world.check(&ev) {
                return Outcome::error(conn, world_error(&e));
            }
            out.events.push(ev);
            out.replies.push(ServerFrame::Ack {
                id: None,
                seq: next_seq,
            });
        }
        ClientFrame::Join { channel, subscribe } => {
            let ch = match world.channel(&channel) {
                Ok(ch) => ch,
                Err(e) => return Outcome::error(conn, world_error(&e)),
            };
            if conn.channels.contains_key(&channel) {
                return Outcome::error(
                    conn,
                    ServerFrame::error("ALREADY_JOINED", format!("already in `{channel}`")),
                );
            }
            out.replies.push(ServerFrame::History {
                channel: channel.clone(),
                mode: ch.mode,
                interventions: ch.tree.messages().cloned().collect(),
            });
            out.state.channels.insert(channel, subscribe);
        }
        ClientFrame::Fetch { channel } => match world.channel(&channel) {
            Ok(ch) => out.replies.push(ServerFrame::History {
                channel,
                mode: ch.mode,
                interventions: ch.tree.messages().cloned().collect(),
            }),
            Err(e) => return Outcome::error(conn, world_error(&e)),
        },
        ClientFrame::Post {
            channel,
            parent,
            act,
            body,
            ctx,
        } => {
            let author = user.expect("authenticated");
            if let Err(e) = world.channel(&channel) {
                return Outcome::error(conn, world_error(&e));
            }
            if !conn.channels.contains_key(&channel) {
                return Outcome::error(
                    conn,
                    ServerFrame::error("NOT_JOINED", format!("join `{channel}` first")),
                );
            }
            let ctx = ctx.filter(|c| c.activity.is_some() || !c.concepts.is_empty());
            let ev = Event::InterventionPosted {
                channel: channel.clone(),
                parent,
                act: act.clone(),
                author: author.clone(),
                body: body.clone(),
                mode: if ctx.is_some() {
                    ViewMode::Contextual
                } else {
                    ViewMode::Global
                },
            };
            if let Err(e) = ev.validate() {
                return Outcome::error(conn, ServerFrame::error("BAD_FRAME", e.to_string()));
            }
            if let Err(e) = world.check(&ev) {
                return Outcome::error(conn, world_error(&e));
            }
            let id = InterventionId(next_seq);
            out.events.push(ev);
            if let Some(PostContext { activity, concepts }) = ctx {
                let Some(m) = world.manifest() else {
                    return Outcome::error(conn, world_error(&WorldError::NoManifest));
                };
                if let Err(e) = m.check_refs(activity.as_ref(), &concepts) {
                    return Outcome::error(conn, world_error(&e.into()));
                }
                out.events.push(Event::ContextAttached {
                    intervention: id,
                    activity,
                    concepts,
                });
            }
            out.replies.push(ServerFrame::Ack {
                id: Some(id),
                seq: next_seq,
            });
            out.broadcasts.push(Broadcast::Channel {
                channel: channel.clone(),
                frame: ServerFrame::Event {
                    intervention: Intervention {
                        id,
                        channel,
                        parent,
                        act,
                        author,
                        body,
                        ts: now,
                        seq: next_seq,
                    },
                },
            });
        }
        ClientFrame::ActMenu { channel, node } => {
            let me = user.expect("authenticated");
            let ch = match world.channel(&channel) {
                Ok(ch) => ch,
                Err(e) => return Outcome::error(conn, world_error(&e)),
            };
            match ch.tree.act_menu(world.grammar(), node, &me) {
                Ok(ids) => out.replies.push(ServerFrame::Acts {
                    channel,
                    node,
                    list: ActEntry::list(world.grammar(), &ids),
                }),
                Err(e) => return Outcome::error(conn, world_error(&e.into())),
            }
        }
        ClientFrame::ContextOpen { object } => {
            let me = user.expect("authenticated");
            let views = world
                .contextual_view(&object, ViewTab::Activity)
                .and_then(|a| Ok((a, world.contextual_view(&object, ViewTab::Content)?)));
            let (activity, content) = match views {
                Ok(v) => v,
                Err(WorldError::NoManifest) => {
                    return Outcome::error(
                        conn,
                        ServerFrame::error("UNKNOWN_OBJECT", format!("unknown learning object `{object}`")),
                    )
                }
                Err(e) => return Outcome::error(conn, world_error(&e)),
            };
            out.events.push(Event::ContextOpened {
                user: me,
                object: object.clone(),
            });
            out.replies.push(ServerFrame::Views {
                object,
                activity,
                content,
            });
        }
        ClientFrame::Open { message, mode } => {
            let me = user.expect("authenticated");
            let ev = Event::MessageOpened {
                user: me,
                message,
                mode,
            };
            if let Err(e) = world.check(&ev) {
                return Outcome::error(conn, world_error(&e));
            }
            out.events.push(ev);
            out.replies.push(ServerFrame::Ack {
                id: Some(message),
                seq: next_seq,
            });
        }
        ClientFrame::PeerQuery { tags, k } => {
            let me = user.expect("authenticated");
            let dir = world.directory();
            let query: BTreeSet<String> = if tags.is_empty() {
                dir.profile(&me)
                    .map(|p| p.competences.clone())
                    .unwrap_or_default()
            } else {
                match normalize_tags(&tags) {
                    Ok(t) => t,
                    Err(e) => return Outcome::error(conn, world_error(&e.into())),
                }
            };
            let results = match dir.match_peers(&me, &query, k) {
                Ok(r) => r,
                Err(e) => return Outcome::error(conn, world_error(&e.into())),
            };
            let graph = match peer_graph_model(dir, &results, &me) {
                Ok(g) => g,
                Err(e) => return Outcome::error(conn, world_error(&e.into())),
            };
            out.replies.push(ServerFrame::Peers { results, graph });
        }
        ClientFrame::OffersSet { tags } => {
            let me = user.expect("authenticated");
            let offers = match normalize_tags(&tags) {
                Ok(t) => t,
                Err(e) => return Outcome::error(conn, world_error(&e.into())),
            };
            let ev = Event::OffersSet { user: me, offers };
            if let Err(e) = world.check(&ev) {
                return Outcome::error(conn, world_error(&e));
            }
            out.events.push(ev);
            out.replies.push(ServerFrame::Ack {
                id: None,
                seq: next_seq,
            });
        }
    }
    out
}

/// Who receives a frame about `channel`: everyone joined on chat channels,
/// only subscribers on forum channels.
pub fn broadcast_policy<'a>(
    mode: ChannelMode,
    channel: &ChannelId,
    connections: impl IntoIterator<Item = &'a ConnectionState>,
) -> BTreeSet<ConnId> {
    connections
        .into_iter()
        .filter(|c| match (mode, c.channels.get(channel)) {
            (_, None) => false,
            (ChannelMode::Chat, Some(_)) => true,
            (ChannelMode::Forum, Some(&subscribed)) => subscribed,
        })
        .map(|c| c.id)
        .collect()
}

/// A frame addressed to one connection.
pub type Delivery = (ConnId, ServerFrame);

/// The sequencer: owns the world, the log and every connection's state.
#[derive(Debug)]
pub struct Hub {
    world: World,
    log: EventLog,
    conns: BTreeMap<ConnId, ConnectionState>,
    next_conn: ConnId,
}

impl Hub {
    /// `world` must be the replay of `log`.
    pub fn new(world: World, log: EventLog) -> Self {
        assert_eq!(world.seq(), log.last_seq(), "world and log out of step");
        Hub {
            world,
            log,
            conns: BTreeMap::new(),
            next_conn: 1,
        }
    }

    pub fn world(&self) -> &World {
        &self.world
    }

    pub fn log(&self) -> &EventLog {
        &self.log
    }

    pub fn connection(&self, id: ConnId) -> Option<&ConnectionState> {
        self.conns.get(&id)
    }

    pub fn connect(&mut self) -> ConnId {
        let id = self.next_conn;
        self.next_conn += 1;
        self.conns.insert(id, ConnectionState::new(id));
        id
    }

    /// Mark every user the log still shows as connected as offline. Used
    /// at startup, before any connection exists.
    pub fn reset_presence(&mut self, now: Timestamp) -> Result<(), String> {
        let stale: Vec<UserId> = self
            .world
            .directory()
            .profiles()
            .filter(|p| p.presence == Presence::Connected)
            .map(|p| p.user.clone())
            .collect();
        for user in stale {
            self.commit(
                vec![Event::PresenceChanged {
                    user,
                    state: Presence::Offline,
                }],
                now,
            )?;
        }
        Ok(())
    }

    /// Append upserts for bootstrap profiles and documents the world does
    /// not know yet. Returns how many events were written.
    pub fn seed_directory(&mut self, seed: &Directory, now: Timestamp) -> Result<usize, String> {
        let known = self.world.directory();
        let mut events: Vec<Event> = seed
            .profiles()
            .filter(|p| !known.contains(&p.user))
            .map(|p| Event::ProfileUpserted { profile: p.clone() })
            .collect();
        events.extend(
            seed.documents()
                .filter(|d| known.documents().all(|k| k.id != d.id))
                .map(|d| Event::DocumentUpserted { document: d.clone() }),
        );
        let n = events.len();
        self.commit(events, now)?;
        Ok(n)
    }

    fn commit(&mut self, events: Vec<Event>, now: Timestamp) -> Result<(), String> {
        for ev in events {
            // check before writing, so a rejected event never reaches the log
            self.world.check(&ev).map_err(|e| e.to_string())?;
            let rec = self
                .log
                .append(ev, now)
                .map_err(|e| e.to_string())?
                .clone();
            self.world.apply(&rec).map_err(|e| e.to_string())?;
        }
        Ok(())
    }

    fn route(&self, broadcasts: Vec<Broadcast>, out: &mut Vec<Delivery>) {
        for b in broadcasts {
            match b {
                Broadcast::Channel { channel, frame } => {
                    let Ok(ch) = self.world.channel(&channel) else {
                        continue;
                    };
                    for id in broadcast_policy(ch.mode, &channel, self.conns.values()) {
                        out.push((id, frame.clone()));
                    }
                }
                Broadcast::All(frame) => {
                    for c in self.conns.values().filter(|c| c.user.is_some()) {
                        out.push((c.id, frame.clone()));
                    }
                }
            }
        }
    }

    /// Process one line from `conn`. The sender's replies come first, then
    /// broadcasts in recipient order.
    pub fn receive(&mut self, conn: ConnId, line: &str, now: Timestamp) -> Vec<Delivery> {
        let Some(state) = self.conns.get(&conn) else {
            return Vec::new();
        };
        let outcome = handle_frame(line, state, &self.world, now);
        if let Err(e) = self.commit(outcome.events, now) {
            return vec![(conn, ServerFrame::error("STORAGE_FAILURE", e))];
        }
        self.conns.insert(conn, outcome.state);
        let mut out: Vec<Delivery> = outcome.replies.into_iter().map(|f| (conn, f)).collect();
        self.route(outcome.broadcasts, &mut out);
        out
    }

    /// Drop a connection; its user goes offline once no other connection
    /// of theirs remains.
    pub fn disconnect(&mut self, conn: ConnId, now: Timestamp) -> Vec<Delivery> {
        let Some(state) = self.conns.remove(&conn) else {
            return Vec::new();
        };
        let Some(user) = state.user else {
            return Vec::new();
        };
        let still_here = self
            .conns
            .values()
            .any(|c| c.user.as_ref() == Some(&user));
        if still_here {
            return Vec::new();
        }
        let ev = Event::PresenceChanged {
            user: user.clone(),
            state: Presence::Offline,
        };
        if self.commit(vec![ev], now).is_err() {
            return Vec::new();
        }
        let mut out = Vec::new();
        self.route(
            vec![Broadcast::All(ServerFrame::Presence {
                user,
                state: Presence::Offline,
            })],
            &mut out,
        );
        out
    }
}
