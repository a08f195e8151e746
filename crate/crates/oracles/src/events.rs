//! Random event streams folded the way the live server folds them:
//! check against the current world, append, apply. Roughly a fifth of the
//! proposals are invalid and get rejected without touching the log.

use std::collections::BTreeSet;
use std::sync::Arc;

use dialogos_core::conversation::ChannelMode;
use dialogos_core::events::{Event, EventLog, ViewMode};
use dialogos_core::forum::CourseManifest;
use dialogos_core::grammar::ActGrammar;
use dialogos_core::ids::{InterventionId, UserId};
use dialogos_core::peers::{Document, PeerProfile, Presence};
use dialogos_core::world::World;
use rand::seq::SliceRandom;
use rand::Rng;

use crate::peers::TAG_POOL;

const CHANNELS: [&str; 4] = ["general", "tp1", "tp2", "aide"];
const USERS: [&str; 6] = ["alice", "bruno", "chloe", "didier", "emma", "farid"];
const ACTIVITIES: [&str; 3] = ["A1", "A2", "A9"];
const CONCEPTS: [&str; 5] = ["c1", "c2", "c3", "c4", "c9"];
const OBJECTS: [&str; 4] = ["O1", "O2", "O3", "O9"];
const BODIES: [&str; 6] = [
    "Bonjour à tous",
    "Comment calcule-t-on le rendement ?",
    "Je propose de commencer par la pile",
    "D'accord",
    "  ",
    "énergie → chaleur ✓",
];

pub struct LiveRun {
    pub world: World,
    pub log: EventLog,
    pub rejected: usize,
}

fn interventions(world: &World) -> Vec<(String, InterventionId, UserId)> {
    world
        .channels()
        .iter()
        .flat_map(|(c, ch)| {
            ch.tree
                .messages()
                .map(move |m| (c.to_string(), m.id, m.author.clone()))
        })
        .collect()
}

fn pick<'a, R: Rng>(rng: &mut R, xs: &[&'a str]) -> &'a str {
    xs.choose(rng).expect("non-empty")
}

fn random_tags<R: Rng>(rng: &mut R) -> BTreeSet<String> {
    let mut t: BTreeSet<String> = TAG_POOL
        .iter()
        .filter(|_| rng.gen_bool(0.2))
        .map(|t| t.to_string())
        .collect();
    if rng.gen_bool(0.05) {
        t.insert("   ".into());
    }
    t
}

/// One proposal shaped by the current world.
pub fn propose<R: Rng>(rng: &mut R, world: &World) -> Event {
    let user = UserId::from(pick(rng, &USERS));
    let existing = interventions(world);
    let any_id = |rng: &mut R| match existing.choose(rng) {
        Some((_, id, _)) if rng.gen_bool(0.9) => *id,
        _ => InterventionId(rng.gen_range(1..5000)),
    };
    match rng.gen_range(0..20) {
        0 => Event::ChannelCreated {
            channel: pick(rng, &CHANNELS).into(),
            mode: if rng.gen_bool(0.5) {
                ChannelMode::Chat
            } else {
                ChannelMode::Forum
            },
        },
        1 | 2 => {
            let mut profile = PeerProfile::new(user.clone(), user.to_string().to_uppercase());
            profile.competences = random_tags(rng);
            profile.offers = random_tags(rng);
            profile.presence = if rng.gen_bool(0.5) {
                Presence::Connected
            } else {
                Presence::Offline
            };
            profile.contacts = USERS
                .iter()
                .filter(|_| rng.gen_bool(0.2))
                .map(|u| UserId::from(*u))
                .collect();
            if rng.gen_bool(0.1) {
                profile.progress.insert("chimie".into(), rng.gen_range(0.0..1.5));
            }
            Event::ProfileUpserted { profile }
        }
        3..=11 => {
            let in_channel: Vec<&(String, InterventionId, UserId)> = existing.iter().collect();
            let (channel, parent) = match in_channel.choose(rng) {
                Some((c, id, _)) if rng.gen_bool(0.7) => (c.clone(), Some(*id)),
                _ => {
                    let c = match world.channels().keys().collect::<Vec<_>>().choose(rng) {
                        Some(c) if rng.gen_bool(0.95) => c.to_string(),
                        _ => pick(rng, &CHANNELS).to_string(),
                    };
                    (c, None)
                }
            };
            let author = if let (Some(p), true) = (parent, rng.gen_bool(0.3)) {
                existing
                    .iter()
                    .find(|(_, id, _)| *id == p)
                    .map(|(_, _, a)| a.clone())
                    .unwrap_or(user)
            } else {
                user
            };
            let act = match world.channel(&channel.as_str().into()) {
                Ok(ch) if rng.gen_bool(0.9) => ch
                    .tree
                    .act_menu(world.grammar(), parent, &author)
                    .ok()
                    .and_then(|m| m.into_iter().collect::<Vec<_>>().choose(rng).cloned())
                    .unwrap_or_else(|| "saluer".into()),
                _ => world
                    .grammar()
                    .acts()
                    .choose(rng)
                    .map(|a| a.id.clone())
                    .expect("acts"),
            };
            Event::InterventionPosted {
                channel: channel.as_str().into(),
                parent,
                act,
                author,
                body: pick(rng, &BODIES).to_string(),
                mode: if rng.gen_bool(0.6) {
                    ViewMode::Contextual
                } else {
                    ViewMode::Global
                },
            }
        }
        12 | 13 => Event::ContextAttached {
            intervention: any_id(rng),
            activity: rng.gen_bool(0.6).then(|| pick(rng, &ACTIVITIES).into()),
            concepts: CONCEPTS
                .iter()
                .filter(|c| rng.gen_bool(if **c == "c9" { 0.05 } else { 0.3 }))
                .map(|c| (*c).into())
                .collect(),
        },
        14 => Event::ContextOpened {
            user,
            object: pick(rng, &OBJECTS).into(),
        },
        15 | 16 => Event::MessageOpened {
            user,
            message: any_id(rng),
            mode: if rng.gen_bool(0.5) {
                ViewMode::Contextual
            } else {
                ViewMode::Global
            },
        },
        17 => Event::OffersSet {
            user,
            offers: random_tags(rng),
        },
        18 => Event::PresenceChanged {
            user,
            state: if rng.gen_bool(0.5) {
                Presence::Connected
            } else {
                Presence::Offline
            },
        },
        _ => Event::DocumentUpserted {
            document: Document {
                id: format!("doc{}", rng.gen_range(0..5)).into(),
                title: "Fiche méthode".into(),
                tags: random_tags(rng),
            },
        },
    }
}

/// Propose `steps` events, keeping the ones the world accepts.
pub fn live_run<R: Rng>(
    rng: &mut R,
    steps: usize,
    grammar: Arc<ActGrammar>,
    manifest: Option<Arc<CourseManifest>>,
) -> LiveRun {
    let mut world = World::new(grammar, manifest);
    let mut log = EventLog::in_memory();
    let mut rejected = 0;
    let mut ts = 1_700_000_000_000i64;
    for _ in 0..steps {
        let ev = propose(rng, &world);
        ts += rng.gen_range(0..120_000);
        if world.check(&ev).is_err() || ev.validate().is_err() {
            rejected += 1;
            continue;
        }
        let rec = log.append(ev, ts).expect("in-memory append").clone();
        world.apply(&rec).expect("checked event applies");
    }
    LiveRun {
        world,
        log,
        rejected,
    }
}
