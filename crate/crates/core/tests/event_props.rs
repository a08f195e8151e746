use std::sync::Arc;

use dialogos_core::events::{emit_log, parse_log, Event, EventLog, LogError};
use dialogos_core::forum::CourseManifest;
use dialogos_core::grammar::ActGrammar;
use dialogos_core::world::{canonical_json, replay, state_hash, World};
use dialogos_oracles::events::live_run;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const EMPTY_DIGEST: &str = "c452877bcd24f9c6ec1c819589b69808262ae28c06ceef2e6c8e78992e0ad38a";

fn grammar() -> Arc<ActGrammar> {
    Arc::new(ActGrammar::splach())
}

fn manifest() -> Option<Arc<CourseManifest>> {
    Some(Arc::new(CourseManifest::fixture()))
}

#[test]
fn empty_world_digest_is_published_value() {
    let w = replay(&[], grammar(), manifest()).unwrap();
    assert_eq!(state_hash(&w), EMPTY_DIGEST);
    assert_eq!(
        canonical_json(&w),
        r#"{"attachments":[],"channels":{},"documents":{},"profiles":{},"seq":0}"#
    );
}

#[test]
fn one_body_byte_changes_the_digest() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let run = live_run(&mut rng, 300, grammar(), manifest());
    let mut records = run.log.records().to_vec();
    let i = records
        .iter()
        .position(|r| matches!(r.event, Event::InterventionPosted { .. }))
        .expect("a post");
    if let Event::InterventionPosted { body, .. } = &mut records[i].event {
        body.push('!');
    }
    let changed = replay(&records, grammar(), manifest()).unwrap();
    assert_ne!(state_hash(&changed), state_hash(&run.world));
}

#[test]
fn file_log_survives_reopen() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("x.events.jsonl");
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let run = live_run(&mut rng, 200, grammar(), manifest());
    {
        let mut log = EventLog::open(&path).unwrap();
        for r in run.log.records() {
            log.append(r.event.clone(), r.ts).unwrap();
        }
    }
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.starts_with(r#"{"kind":"log_meta","version":"1"}"#));
    let reopened = EventLog::open(&path).unwrap();
    assert_eq!(reopened.records(), run.log.records());
    let w = replay(reopened.records(), grammar(), manifest()).unwrap();
    assert_eq!(state_hash(&w), state_hash(&run.world));
}

#[test]
fn append_rejects_bad_payload_and_keeps_log() {
    let mut log = EventLog::in_memory();
    let r = log.append(
        Event::ChannelCreated {
            channel: "c".into(),
            mode: dialogos_core::ChannelMode::Chat,
        },
        0,
    );
    assert_eq!(r.unwrap().seq, 1);
    let bad = log.append(
        Event::ChannelCreated {
            channel: " ".into(),
            mode: dialogos_core::ChannelMode::Chat,
        },
        0,
    );
    assert_eq!(bad.unwrap_err().code(), "SCHEMA_VIOLATION");
    assert_eq!(log.last_seq(), 1);
}

fn corrupt_line(text: &str, line_index: usize, with: &str) -> String {
    text.lines()
        .enumerate()
        .map(|(i, l)| if i == line_index { with.to_string() } else { l.to_string() })
        .collect::<Vec<_>>()
        .join("\n")
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn replay_equals_live_fold(seed in any::<u64>(), steps in 0usize..1000) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let run = live_run(&mut rng, steps, grammar(), manifest());
        let a = replay(run.log.records(), grammar(), manifest()).unwrap();
        let b = replay(run.log.records(), grammar(), manifest()).unwrap();
        let live = state_hash(&run.world);
        prop_assert_eq!(state_hash(&a), live.clone());
        prop_assert_eq!(state_hash(&b), live);
        prop_assert_eq!(a.seq(), run.log.last_seq());

        let text = emit_log(run.log.records());
        let parsed = parse_log(&text).unwrap();
        prop_assert_eq!(parsed.as_slice(), run.log.records());
    }

    #[test]
    fn corruption_names_first_bad_seq(seed in any::<u64>(), steps in 20usize..300) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let run = live_run(&mut rng, steps, grammar(), manifest());
        let n = run.log.records().len();
        prop_assume!(n >= 2);
        let text = emit_log(run.log.records());
        // line 0 is the header; record with seq s sits on line s
        let bad = rng.gen_range(1..=n);
        let broken = match rng.gen_range(0..3) {
            0 => corrupt_line(&text, bad, "{not json"),
            1 => corrupt_line(&text, bad, &format!(r#"{{"seq":{bad},"ts":0,"kind":"mystery","payload":{{}}}}"#)),
            _ => corrupt_line(&text, bad, ""),
        };
        match parse_log(&broken) {
            Err(LogError::CorruptLog { seq, line, .. }) if bad < n || broken.lines().count() > bad => {
                prop_assert_eq!(seq, bad as u64);
                prop_assert_eq!(line, bad + 1);
            }
            // blanking the last line just truncates the log
            Ok(recs) => prop_assert_eq!(recs.len(), n - 1),
            other => prop_assert!(false, "{:?}", other.map(|r| r.len())),
        }
    }
}

#[test]
fn replay_reports_semantic_failure_seq() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let run = live_run(&mut rng, 200, grammar(), manifest());
    let mut records = run.log.records().to_vec();
    let i = records
        .iter()
        .position(|r| matches!(r.event, Event::InterventionPosted { parent: Some(_), .. }))
        .expect("a reply");
    if let Event::InterventionPosted { parent, .. } = &mut records[i].event {
        *parent = Some(dialogos_core::InterventionId(999_999));
    }
    match replay(&records, grammar(), manifest()) {
        Err(LogError::CorruptLog { seq, .. }) => assert_eq!(seq, records[i].seq),
        other => panic!("{:?}", other.map(|w| w.seq())),
    }
    let mut gap = run.log.records().to_vec();
    gap.remove(3);
    match replay(&gap, grammar(), manifest()) {
        Err(LogError::CorruptLog { seq, .. }) => assert_eq!(seq, 4),
        other => panic!("{:?}", other.map(|w| w.seq())),
    }
    let _ = World::new(grammar(), None);
}
