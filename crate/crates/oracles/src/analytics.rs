//! Participation counts, profile scores and usage ratios by rescanning the
//! log.

use std::collections::BTreeMap;

use dialogos_core::events::{Event, EventRecord, ViewMode};

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Counts {
    pub total: u64,
    pub acts: BTreeMap<String, u64>,
}

fn actor(e: &Event) -> Option<String> {
    let u = match e {
        Event::InterventionPosted { author, .. } => author,
        Event::ContextOpened { user, .. } => user,
        Event::MessageOpened { user, .. } => user,
        Event::OffersSet { user, .. } => user,
        Event::PresenceChanged { user, .. } => user,
        Event::ProfileUpserted { profile } => &profile.user,
        _ => return None,
    };
    Some(u.to_string())
}

pub fn counts(log: &[EventRecord]) -> BTreeMap<String, Counts> {
    let mut out: BTreeMap<String, Counts> = BTreeMap::new();
    for rec in log {
        if let Some(u) = actor(&rec.event) {
            out.entry(u).or_default();
        }
    }
    for (user, c) in out.iter_mut() {
        for rec in log {
            if let Event::InterventionPosted { author, act, .. } = &rec.event {
                if author.as_str() == user {
                    c.total += 1;
                    *c.acts.entry(act.clone()).or_default() += 1;
                }
            }
        }
    }
    out
}

fn share(c: &Counts, acts: &[&str]) -> f64 {
    if c.total == 0 {
        return 0.0;
    }
    let n: u64 = acts.iter().map(|a| c.acts.get(*a).copied().unwrap_or(0)).sum();
    n as f64 / c.total as f64
}

/// `[animateur, verificateur, queteur, independant]` scores and the winner.
pub fn profile(all: &BTreeMap<String, Counts>, user: &str) -> ([f64; 4], &'static str) {
    let max_t = all.values().map(|c| c.total).max().unwrap_or(0);
    let c = &all[user];
    let activity = if max_t == 0 {
        0.0
    } else {
        c.total as f64 / max_t as f64
    };
    let init = share(c, &["proposer", "affirmer"]);
    let eval = share(c, &["approuver", "desapprouver"]);
    let quest = share(c, &["demander", "questionner"]);
    let scores = [
        0.5 * activity + 0.5 * init,
        eval,
        quest,
        1.0 - activity,
    ];
    let best = scores.iter().copied().fold(f64::MIN, f64::max);
    let name = if scores[2] == best {
        "queteur"
    } else if scores[1] == best {
        "verificateur"
    } else if scores[0] == best {
        "animateur"
    } else {
        "independant"
    };
    (scores, name)
}

/// `(contextual, global)` counts of opens and of sends.
pub fn mode_counts(log: &[EventRecord]) -> ((u64, u64), (u64, u64)) {
    let mut opened = (0, 0);
    let mut sent = (0, 0);
    for rec in log {
        let (slot, mode) = match &rec.event {
            Event::MessageOpened { mode, .. } => (&mut opened, mode),
            Event::InterventionPosted { mode, .. } => (&mut sent, mode),
            _ => continue,
        };
        match mode {
            ViewMode::Contextual => slot.0 += 1,
            ViewMode::Global => slot.1 += 1,
        }
    }
    (opened, sent)
}
