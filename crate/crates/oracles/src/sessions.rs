//! Session splitting, thread lookup and grid bucketing over plain records.

use std::collections::{BTreeMap, HashMap};

use dialogos_core::conversation::{ConversationTree, Post};
use dialogos_core::grammar::ActGrammar;
use dialogos_core::ids::{InterventionId, UserId};
use rand::seq::SliceRandom;
use rand::Rng;

pub const MINUTE: i64 = 60_000;

/// One forum message as the generator recorded it.
#[derive(Debug, Clone, PartialEq)]
pub struct Msg {
    pub id: u64,
    pub parent: Option<u64>,
    pub author: String,
    pub ts: i64,
}

/// Session index of every message, in input order. Message `i` joins the
/// session of `i-1` iff same author and `ts[i] - ts[i-1] <= delta_ms`.
pub fn session_labels(msgs: &[Msg], delta_ms: i64) -> Vec<usize> {
    let mut labels = Vec::with_capacity(msgs.len());
    for i in 0..msgs.len() {
        let label = if i == 0 {
            0
        } else {
            let same = msgs[i].author == msgs[i - 1].author
                && msgs[i].ts - msgs[i - 1].ts <= delta_ms;
            labels[i - 1] + usize::from(!same)
        };
        labels.push(label);
    }
    labels
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleSession {
    pub author: String,
    pub members: Vec<u64>,
    pub start_ts: i64,
    pub end_ts: i64,
}

pub fn sessions(msgs: &[Msg], delta_ms: i64) -> Vec<OracleSession> {
    let labels = session_labels(msgs, delta_ms);
    let count = labels.last().map_or(0, |l| l + 1);
    (0..count)
        .map(|s| {
            let members: Vec<&Msg> = msgs
                .iter()
                .zip(&labels)
                .filter(|(_, l)| **l == s)
                .map(|(m, _)| m)
                .collect();
            OracleSession {
                author: members[0].author.clone(),
                members: members.iter().map(|m| m.id).collect(),
                start_ts: members.iter().map(|m| m.ts).min().expect("non-empty"),
                end_ts: members.iter().map(|m| m.ts).max().expect("non-empty"),
            }
        })
        .collect()
}

pub fn consecutive_fraction(msgs: &[Msg], delta_ms: i64) -> f64 {
    if msgs.is_empty() {
        return 0.0;
    }
    let s = sessions(msgs, delta_ms);
    let continued: usize = s.iter().map(|s| s.members.len() - 1).sum();
    continued as f64 / msgs.len() as f64
}

/// Walk parent links up to the thread root.
pub fn thread_root(msgs: &[Msg], id: u64) -> u64 {
    let parent: HashMap<u64, Option<u64>> = msgs.iter().map(|m| (m.id, m.parent)).collect();
    let mut cur = id;
    while let Some(Some(p)) = parent.get(&cur) {
        cur = *p;
    }
    cur
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleGrid {
    pub rows: Vec<u64>,
    pub columns: Vec<OracleSession>,
    pub cells: BTreeMap<(usize, usize), Vec<u64>>,
}

pub fn grid(msgs: &[Msg], delta_ms: i64) -> OracleGrid {
    let mut rows: Vec<u64> = msgs.iter().filter(|m| m.parent.is_none()).map(|m| m.id).collect();
    rows.sort_unstable();
    let mut columns = sessions(msgs, delta_ms);
    columns.sort_by_key(|s| (s.start_ts, s.members[0]));
    let mut cells: BTreeMap<(usize, usize), Vec<u64>> = BTreeMap::new();
    for m in msgs {
        let root = thread_root(msgs, m.id);
        let r = rows.iter().position(|x| *x == root).expect("root is a row");
        let c = columns
            .iter()
            .position(|s| s.members.contains(&m.id))
            .expect("every message has a session");
        cells.entry((r, c)).or_default().push(m.id);
    }
    for v in cells.values_mut() {
        v.sort_unstable();
    }
    OracleGrid {
        rows,
        columns,
        cells,
    }
}

/// Build a grammar-valid forum of `n` messages. Gaps are mostly short,
/// sometimes beyond an hour and occasionally negative (clock skew).
pub fn random_forum<R: Rng>(
    rng: &mut R,
    grammar: &ActGrammar,
    n: usize,
    users: usize,
    stickiness: f64,
) -> (ConversationTree, Vec<Msg>) {
    let mut tree = ConversationTree::new("f");
    let mut msgs: Vec<Msg> = Vec::with_capacity(n);
    let mut ts = 1_700_000_000_000i64;
    let mut seq = 0u64;
    let names: Vec<String> = (0..users.max(1)).map(|i| format!("u{i}")).collect();
    for _ in 0..n {
        seq += rng.gen_range(1..=3);
        ts += match rng.gen_range(0..10) {
            0 => -rng.gen_range(0..5 * MINUTE),
            1 | 2 => rng.gen_range(60 * MINUTE..6 * 60 * MINUTE),
            _ => rng.gen_range(0..=60 * MINUTE),
        };
        let author = match msgs.last() {
            Some(prev) if rng.gen_bool(stickiness) => prev.author.clone(),
            _ => names.choose(rng).expect("users").clone(),
        };
        let mut parent = match msgs.choose(rng) {
            Some(m) if rng.gen_bool(0.7) => Some(m.id),
            _ => None,
        };
        let user = UserId::from(author.as_str());
        let mut menu = tree
            .act_menu(grammar, parent.map(InterventionId), &user)
            .expect("known parent");
        if menu.is_empty() {
            parent = None;
            menu = tree.act_menu(grammar, None, &user).expect("root");
        }
        let menu: Vec<String> = menu.into_iter().collect();
        let act = menu.choose(rng).expect("non-empty menu").clone();
        let post = Post::new(parent.map(InterventionId), act, user, format!("m{seq}"), ts);
        tree.insert(grammar, post, seq).expect("generated post is valid");
        msgs.push(Msg {
            id: seq,
            parent,
            author,
            ts,
        });
    }
    (tree, msgs)
}
