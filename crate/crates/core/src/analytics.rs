//! Participation statistics, behavioural profiles and view-mode usage ratios
//! computed from log slices.
//!
//! Profile scores (T = a user's interventions, max_T = the most any user
//! posted):
//!
//! | profile       | score                                   |
//! |---------------|-----------------------------------------|
//! | animateur     | 0.5·T/max_T + 0.5·(proposer+affirmer)/T |
//! | verificateur  | (approuver+desapprouver)/T              |
//! | queteur       | (demander+questionner)/T                |
//! | independant   | 1 − T/max_T                             |
//!
//! Shares are 0 when T = 0, and T/max_T is 0 when max_T = 0. The highest
//! score wins; ties go to queteur, then verificateur, animateur,
//! independant.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::events::{Event, EventRecord, ViewMode};
use crate::ids::UserId;

/// Every profile report opens with this caveat.
pub const PROFILE_DISCLAIMER: &str =
    "profiles describe une conversation médiatisée par un outil; they are not general behaviour traits";

const INIT_ACTS: [&str; 2] = ["proposer", "affirmer"];
const EVAL_ACTS: [&str; 2] = ["approuver", "desapprouver"];
const QUEST_ACTS: [&str; 2] = ["demander", "questionner"];

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AnalyticsError {
    #[error("unknown user `{0}`")]
    UnknownUser(UserId),
}

impl AnalyticsError {
    pub fn code(&self) -> &'static str {
        "UNKNOWN_USER"
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct UserStats {
    pub total: u64,
    pub per_act: BTreeMap<String, u64>,
}

impl UserStats {
    fn count(&self, acts: &[&str]) -> u64 {
        acts.iter().map(|a| self.per_act.get(*a).copied().unwrap_or(0)).sum()
    }

    fn share(&self, acts: &[&str]) -> f64 {
        if self.total == 0 {
            0.0
        } else {
            self.count(acts) as f64 / self.total as f64
        }
    }

    pub fn init(&self) -> f64 {
        self.share(&INIT_ACTS)
    }

    pub fn eval(&self) -> f64 {
        self.share(&EVAL_ACTS)
    }

    pub fn quest(&self) -> f64 {
        self.share(&QUEST_ACTS)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ParticipationStats {
    pub users: BTreeMap<UserId, UserStats>,
    /// Largest T over users.
    pub max_total: u64,
    /// Mean T over users with at least one intervention.
    pub mean_total: f64,
}

/// Count interventions per user and act. Every user who acts in the slice
/// is listed, including those who never posted.
pub fn participation_stats(log: &[EventRecord]) -> ParticipationStats {
    let mut users: BTreeMap<UserId, UserStats> = BTreeMap::new();
    for rec in log {
        let Some(actor) = rec.event.actor() else {
            continue;
        };
        let entry = users.entry(actor.clone()).or_default();
        if let Event::InterventionPosted { act, .. } = &rec.event {
            entry.total += 1;
            *entry.per_act.entry(act.clone()).or_default() += 1;
        }
    }
    let active: Vec<u64> = users.values().map(|u| u.total).filter(|&t| t > 0).collect();
    let max_total = active.iter().copied().max().unwrap_or(0);
    let mean_total = if active.is_empty() {
        0.0
    } else {
        active.iter().sum::<u64>() as f64 / active.len() as f64
    };
    ParticipationStats {
        users,
        max_total,
        mean_total,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Profile {
    Animateur,
    Verificateur,
    Queteur,
    Independant,
}

impl Profile {
    pub fn as_str(self) -> &'static str {
        match self {
            Profile::Animateur => "animateur",
            Profile::Verificateur => "verificateur",
            Profile::Queteur => "queteur",
            Profile::Independant => "independant",
        }
    }
}

impl fmt::Display for Profile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProfileScores {
    pub animateur: f64,
    pub verificateur: f64,
    pub queteur: f64,
    pub independant: f64,
}

impl ProfileScores {
    /// Highest score, ties resolved queteur > verificateur > animateur >
    /// independant.
    pub fn winner(&self) -> Profile {
        let ranked = [
            (Profile::Queteur, self.queteur),
            (Profile::Verificateur, self.verificateur),
            (Profile::Animateur, self.animateur),
            (Profile::Independant, self.independant),
        ];
        let mut best = ranked[0];
        for cand in &ranked[1..] {
            if cand.1 > best.1 {
                best = *cand;
            }
        }
        best.0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BehaviorProfile {
    pub user: UserId,
    pub profile: Profile,
    pub scores: ProfileScores,
}

pub fn compute_profile(
    stats: &ParticipationStats,
    user: &UserId,
) -> Result<BehaviorProfile, AnalyticsError> {
    let u = stats
        .users
        .get(user)
        .ok_or_else(|| AnalyticsError::UnknownUser(user.clone()))?;
    let activity = if stats.max_total == 0 {
        0.0
    } else {
        u.total as f64 / stats.max_total as f64
    };
    let scores = ProfileScores {
        animateur: 0.5 * activity + 0.5 * u.init(),
        verificateur: u.eval(),
        queteur: u.quest(),
        independant: 1.0 - activity,
    };
    Ok(BehaviorProfile {
        user: user.clone(),
        profile: scores.winner(),
        scores,
    })
}

pub fn all_profiles(stats: &ParticipationStats) -> Vec<BehaviorProfile> {
    stats
        .users
        .keys()
        .map(|u| compute_profile(stats, u).expect("user taken from stats"))
        .collect()
}

/// Contextual-to-global ratio. `Inf` when only the contextual side is
/// non-zero, `NotAvailable` when both are zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Ratio {
    Value(f64),
    Inf,
    NotAvailable,
}

impl Ratio {
    pub fn of(numerator: u64, denominator: u64) -> Self {
        match (numerator, denominator) {
            (0, 0) => Ratio::NotAvailable,
            (_, 0) => Ratio::Inf,
            (n, d) => Ratio::Value(n as f64 / d as f64),
        }
    }
}

impl fmt::Display for Ratio {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Ratio::Value(v) => f.write_str(&format_ratio(*v)),
            Ratio::Inf => f.write_str("INF"),
            Ratio::NotAvailable => f.write_str("NA"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeUsage {
    pub opened_ratio: Ratio,
    pub sent_ratio: Ratio,
}

pub fn mode_usage_ratio(log: &[EventRecord]) -> ModeUsage {
    let mut opened = [0u64; 2];
    let mut sent = [0u64; 2];
    let slot = |m: ViewMode| match m {
        ViewMode::Contextual => 0,
        ViewMode::Global => 1,
    };
    for rec in log {
        match &rec.event {
            Event::MessageOpened { mode, .. } => opened[slot(*mode)] += 1,
            Event::InterventionPosted { mode, .. } => sent[slot(*mode)] += 1,
            _ => {}
        }
    }
    ModeUsage {
        opened_ratio: Ratio::of(opened[0], opened[1]),
        sent_ratio: Ratio::of(sent[0], sent[1]),
    }
}

/// Four decimals, ties rounded half to even on the exact binary value.
pub fn format_ratio(v: f64) -> String {
    format!("{v:.4}")
}

pub const PROFILE_COLUMNS: [&str; 10] = [
    "user", "T", "init", "eval", "quest", "s_anim", "s_verif", "s_quet", "s_indep", "profile",
];

/// TSV report: a `#` disclaimer line, the header row, one row per user.
pub fn profile_report(stats: &ParticipationStats) -> String {
    let mut out = format!("# {PROFILE_DISCLAIMER}\n{}\n", PROFILE_COLUMNS.join("\t"));
    for p in all_profiles(stats) {
        let u = &stats.users[&p.user];
        let cols = [
            p.user.to_string(),
            u.total.to_string(),
            format_ratio(u.init()),
            format_ratio(u.eval()),
            format_ratio(u.quest()),
            format_ratio(p.scores.animateur),
            format_ratio(p.scores.verificateur),
            format_ratio(p.scores.queteur),
            format_ratio(p.scores.independant),
            p.profile.to_string(),
        ];
        out.push_str(&cols.join("\t"));
        out.push('\n');
    }
    out
}

/// Users named in the slice, for callers that need the set only.
pub fn users_in(log: &[EventRecord]) -> BTreeSet<UserId> {
    log.iter().filter_map(|r| r.event.actor().cloned()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ids::InterventionId;
    use crate::peers::PeerProfile;

    fn post(seq: u64, author: &str, act: &str) -> EventRecord {
        EventRecord {
            seq,
            ts: 0,
            event: Event::InterventionPosted {
                channel: "c".into(),
                parent: None,
                act: act.into(),
                author: author.into(),
                body: "x".into(),
                mode: ViewMode::Global,
            },
        }
    }

    fn opened(seq: u64, mode: ViewMode) -> EventRecord {
        EventRecord {
            seq,
            ts: 0,
            event: Event::MessageOpened {
                user: "r".into(),
                message: InterventionId(1),
                mode,
            },
        }
    }

    fn eight_message_user() -> Vec<EventRecord> {
        let acts = [
            "proposer", "proposer", "proposer", "proposer", "affirmer", "affirmer", "approuver",
            "approuver",
        ];
        acts.iter()
            .enumerate()
            .map(|(i, a)| post(i as u64 + 1, "u", a))
            .collect()
    }

    #[test]
    fn empty_log() {
        let s = participation_stats(&[]);
        assert!(s.users.is_empty());
        assert_eq!((s.max_total, s.mean_total), (0, 0.0));
        assert_eq!(
            profile_report(&s),
            format!("# {PROFILE_DISCLAIMER}\n{}\n", PROFILE_COLUMNS.join("\t"))
        );
    }

    #[test]
    fn hand_counted_user() {
        let s = participation_stats(&eight_message_user());
        let u = &s.users[&UserId::from("u")];
        assert_eq!(u.total, 8);
        assert_eq!((u.init(), u.eval(), u.quest()), (0.75, 0.25, 0.0));
        let p = compute_profile(&s, &"u".into()).unwrap();
        assert_eq!(p.scores.animateur, 0.875);
        assert_eq!(p.scores.verificateur, 0.25);
        assert_eq!(p.scores.queteur, 0.0);
        assert_eq!(p.scores.independant, 0.0);
        assert_eq!(p.profile, Profile::Animateur);
    }

    #[test]
    fn silent_user_is_independant() {
        let mut log = eight_message_user();
        log.push(EventRecord {
            seq: 9,
            ts: 0,
            event: Event::ProfileUpserted {
                profile: PeerProfile::new("quiet", "Quiet"),
            },
        });
        let s = participation_stats(&log);
        let p = compute_profile(&s, &"quiet".into()).unwrap();
        assert_eq!(p.scores.independant, 1.0);
        assert!(p.scores.animateur <= 0.5);
        assert_eq!(p.profile, Profile::Independant);
        assert_eq!(s.mean_total, 8.0);
    }

    #[test]
    fn all_demands_is_queteur() {
        let log: Vec<_> = (1..=10).map(|i| post(i, "q", "demander")).collect();
        let s = participation_stats(&log);
        let p = compute_profile(&s, &"q".into()).unwrap();
        assert_eq!(p.scores.queteur, 1.0);
        // animateur also scores 0.5 + 0 = 0.5; queteur wins outright
        assert_eq!(p.profile, Profile::Queteur);
    }

    #[test]
    fn ties_follow_priority() {
        let s = ProfileScores {
            animateur: 0.5,
            verificateur: 0.5,
            queteur: 0.5,
            independant: 0.5,
        };
        assert_eq!(s.winner(), Profile::Queteur);
        let s = ProfileScores { queteur: 0.1, ..s };
        assert_eq!(s.winner(), Profile::Verificateur);
        let s = ProfileScores { verificateur: 0.1, ..s };
        assert_eq!(s.winner(), Profile::Animateur);
    }

    #[test]
    fn unknown_user() {
        assert_eq!(
            compute_profile(&participation_stats(&[]), &"x".into()).unwrap_err(),
            AnalyticsError::UnknownUser("x".into())
        );
    }

    #[test]
    fn usage_ratios() {
        let mut log = Vec::new();
        for _ in 0..9 {
            log.push(opened(0, ViewMode::Contextual));
        }
        for _ in 0..2 {
            log.push(opened(0, ViewMode::Global));
        }
        let m = mode_usage_ratio(&log);
        assert_eq!(m.opened_ratio, Ratio::Value(4.5));
        assert_eq!(m.sent_ratio, Ratio::NotAvailable);

        let none = mode_usage_ratio(&[]);
        assert_eq!(none.opened_ratio.to_string(), "NA");
        assert_eq!(Ratio::of(3, 0).to_string(), "INF");
        assert_eq!(Ratio::of(15, 2), Ratio::Value(7.5));
    }

    #[test]
    fn ratios_round_half_even() {
        assert_eq!(format_ratio(0.25), "0.2500");
        assert_eq!(format_ratio(1.0 / 3.0), "0.3333");
        assert_eq!(format_ratio(2.0 / 3.0), "0.6667");
        // exact binary ties
        assert_eq!(format_ratio(0.03125), "0.0312");
        assert_eq!(format_ratio(0.09375), "0.0938");
        assert_eq!(format_ratio(0.15625), "0.1562");
    }

    #[test]
    fn report_rows() {
        let s = participation_stats(&eight_message_user());
        let r = profile_report(&s);
        let row = r.lines().nth(2).unwrap();
        assert_eq!(
            row,
            "u\t8\t0.7500\t0.2500\t0.0000\t0.8750\t0.2500\t0.0000\t0.0000\tanimateur"
        );
    }
}
