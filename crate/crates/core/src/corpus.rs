//! Seeded synthetic forum corpora with a chosen share of consecutive
//! same-author messages.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::conversation::{ChannelMode, ConversationTree, Post};
use crate::events::{Event, EventRecord, ViewMode};
use crate::forum::{consecutive_fraction, DEFAULT_SESSION_DELTA};
use crate::grammar::{ActGrammar, ActRef};
use crate::ids::{ChannelId, InterventionId, UserId};
use crate::peers::PeerProfile;

pub const CORPUS_CHANNEL: &str = "general";
const BASE_TS: i64 = 1_700_000_000_000;
const MINUTE: i64 = 60_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CorpusError {
    #[error("need at least one user")]
    NoUsers,
    #[error("need at least one message")]
    NoMessages,
    #[error("consecutive fraction must lie in [0,1], got {0}")]
    BadFraction(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorpusSpec {
    pub users: usize,
    pub messages: usize,
    pub consecutive: f64,
    pub seed: u64,
}

#[derive(Debug, Clone)]
pub struct Corpus {
    pub records: Vec<EventRecord>,
    /// Consecutive fraction the corpus measures at the default window.
    pub achieved: f64,
    /// Number of consecutive messages planted.
    pub consecutive_count: usize,
}

fn user_name(i: usize) -> UserId {
    UserId::new(format!("u{:02}", i + 1))
}

/// Closest achievable count of consecutive messages: the first message can
/// never continue a session, and a single author continues every time.
pub fn target_count(spec: &CorpusSpec) -> usize {
    let max = spec.messages - 1;
    if spec.users == 1 {
        return max;
    }
    ((spec.consecutive * spec.messages as f64).round() as usize).min(max)
}

pub fn generate(spec: &CorpusSpec, grammar: &ActGrammar) -> Result<Corpus, CorpusError> {
    if spec.users == 0 {
        return Err(CorpusError::NoUsers);
    }
    if spec.messages == 0 {
        return Err(CorpusError::NoMessages);
    }
    if !(0.0..=1.0).contains(&spec.consecutive) {
        return Err(CorpusError::BadFraction(spec.consecutive));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let k = target_count(spec);

    let mut slots: Vec<usize> = (1..spec.messages).collect();
    slots.shuffle(&mut rng);
    let mut same = vec![false; spec.messages];
    for &i in &slots[..k] {
        same[i] = true;
    }

    let mut authors: Vec<usize> = Vec::with_capacity(spec.messages);
    for &stay in &same {
        let next = match authors.last() {
            Some(&prev) if stay || spec.users == 1 => prev,
            Some(&prev) => {
                let r = rng.gen_range(0..spec.users - 1);
                if r >= prev {
                    r + 1
                } else {
                    r
                }
            }
            None => rng.gen_range(0..spec.users),
        };
        authors.push(next);
    }

    let channel = ChannelId::from(CORPUS_CHANNEL);
    let mut records = Vec::new();
    let mut ts = BASE_TS;
    let push = |records: &mut Vec<EventRecord>, ts: i64, event: Event| {
        let seq = records.len() as u64 + 1;
        records.push(EventRecord { seq, ts, event });
        seq
    };
    push(
        &mut records,
        ts,
        Event::ChannelCreated {
            channel: channel.clone(),
            mode: ChannelMode::Forum,
        },
    );
    for i in 0..spec.users {
        let u = user_name(i);
        push(
            &mut records,
            ts,
            Event::ProfileUpserted {
                profile: PeerProfile::new(u.clone(), u.to_string()),
            },
        );
    }

    let mut tree = ConversationTree::new(channel.clone());
    let mut ids: Vec<InterventionId> = Vec::new();
    for (i, &a) in authors.iter().enumerate() {
        ts += rng.gen_range(1..=10) * MINUTE;
        let author = user_name(a);
        let mut parent = if ids.is_empty() || rng.gen_bool(0.3) {
            None
        } else {
            Some(ids[rng.gen_range(0..ids.len())])
        };
        let mut acts = tree
            .act_menu(grammar, parent, &author)
            .expect("parent drawn from the tree");
        if acts.is_empty() {
            parent = None;
            acts = grammar
                .successors(&ActRef::Root, false)
                .expect("root is always known");
        }
        let acts: Vec<String> = acts.into_iter().collect();
        let act = acts[rng.gen_range(0..acts.len())].clone();
        let body = format!("message {} by {}", i + 1, author);
        let mode = if rng.gen_bool(0.5) {
            ViewMode::Contextual
        } else {
            ViewMode::Global
        };
        let seq = records.len() as u64 + 1;
        tree.insert(grammar, Post::new(parent, act.clone(), author.clone(), body.clone(), ts), seq)
            .expect("generated post satisfies the grammar");
        ids.push(InterventionId(seq));
        push(
            &mut records,
            ts,
            Event::InterventionPosted {
                channel: channel.clone(),
                parent,
                act,
                author,
                body,
                mode,
            },
        );
    }

    let achieved = consecutive_fraction(tree.messages(), DEFAULT_SESSION_DELTA)
        .expect("tree messages are seq-ordered");
    Ok(Corpus {
        records,
        achieved,
        consecutive_count: k,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(users: usize, messages: usize, consecutive: f64, seed: u64) -> CorpusSpec {
        CorpusSpec {
            users,
            messages,
            consecutive,
            seed,
        }
    }

    #[test]
    fn four_messages_quarter() {
        let c = generate(&spec(3, 4, 0.25, 1), &ActGrammar::splach()).unwrap();
        assert_eq!(c.achieved, 0.25);
    }

    #[test]
    fn zero_fraction_alternates() {
        let c = generate(&spec(2, 20, 0.0, 7), &ActGrammar::splach()).unwrap();
        assert_eq!(c.achieved, 0.0);
        let authors: Vec<&UserId> = c
            .records
            .iter()
            .filter_map(|r| match &r.event {
                Event::InterventionPosted { author, .. } => Some(author),
                _ => None,
            })
            .collect();
        assert!(authors.windows(2).all(|w| w[0] != w[1]));
    }

    #[test]
    fn same_seed_same_corpus() {
        let g = ActGrammar::splach();
        let a = generate(&spec(5, 50, 0.3, 42), &g).unwrap();
        let b = generate(&spec(5, 50, 0.3, 42), &g).unwrap();
        assert_eq!(a.records, b.records);
        let c = generate(&spec(5, 50, 0.3, 43), &g).unwrap();
        assert_ne!(a.records, c.records);
    }

    #[test]
    fn single_user_and_full_fraction() {
        let g = ActGrammar::splach();
        let c = generate(&spec(1, 10, 0.0, 1), &g).unwrap();
        assert_eq!(c.achieved, 0.9);
        let c = generate(&spec(4, 10, 1.0, 1), &g).unwrap();
        assert_eq!(c.achieved, 0.9);
    }

    #[test]
    fn argument_errors() {
        let g = ActGrammar::splach();
        assert_eq!(generate(&spec(0, 1, 0.0, 1), &g).unwrap_err(), CorpusError::NoUsers);
        assert_eq!(generate(&spec(1, 0, 0.0, 1), &g).unwrap_err(), CorpusError::NoMessages);
        assert!(matches!(
            generate(&spec(1, 1, 1.5, 1), &g),
            Err(CorpusError::BadFraction(_))
        ));
    }
}
