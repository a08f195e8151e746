use std::sync::Arc;

use dialogos_core::events::EventLog;
use dialogos_core::forum::CourseManifest;
use dialogos_core::grammar::ActGrammar;
use dialogos_core::world::{state_hash, World};
use dialogos_server::sim::malformed_frame;
use dialogos_server::Hub;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn seeded_hub() -> (Hub, u64, u64) {
    let world = World::new(
        Arc::new(ActGrammar::splach()),
        Some(Arc::new(CourseManifest::fixture())),
    );
    let mut hub = Hub::new(world, EventLog::in_memory());
    let anon = hub.connect();
    let authed = hub.connect();
    for line in [
        r#"{"t":"hello","user":"u1","version":1}"#,
        r#"{"t":"create","channel":"c","mode":"chat"}"#,
        r#"{"t":"join","channel":"c","subscribe":true}"#,
        r#"{"t":"post","channel":"c","act":"demander","body":"?"}"#,
    ] {
        let out = hub.receive(authed, line, 1);
        assert!(!out[0].1.is_error(), "{line}: {:?}", out[0].1);
    }
    (hub, anon, authed)
}

#[test]
fn ten_thousand_malformed_frames_yield_errors_only() {
    let (mut hub, anon, authed) = seeded_hub();
    let before = state_hash(hub.world());
    let seq = hub.log().last_seq();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for i in 0..10_000 {
        let line = malformed_frame(&mut rng);
        assert!(!line.contains('\n'));
        let conn = if i % 2 == 0 { authed } else { anon };
        let out = hub.receive(conn, &line, 2);
        assert_eq!(out.len(), 1, "{line:.200}");
        assert_eq!(out[0].0, conn);
        let code = out[0].1.error_code();
        assert!(
            matches!(code, Some("BAD_FRAME") | Some("UNAUTHENTICATED")),
            "{line:.200} -> {:?}",
            out[0].1
        );
    }
    assert_eq!(hub.log().last_seq(), seq);
    assert_eq!(state_hash(hub.world()), before);
    // the connection still works afterwards
    let out = hub.receive(authed, r#"{"t":"act_menu","channel":"c"}"#, 3);
    assert!(!out[0].1.is_error());
}

proptest! {
    #[test]
    fn arbitrary_text_never_panics_or_mutates(line in "\\PC{0,200}") {
        let (mut hub, anon, authed) = seeded_hub();
        let seq = hub.log().last_seq();
        let out = hub.receive(anon, &line, 2);
        prop_assert_eq!(out.len(), 1);
        prop_assert!(out[0].1.is_error());
        prop_assert_eq!(hub.log().last_seq(), seq);
        let out = hub.receive(authed, &line, 2);
        prop_assert!(!out.is_empty());
    }

    #[test]
    fn arbitrary_bytes_as_post_bodies_are_accepted_or_rejected_cleanly(
        body in "\\PC{0,100}",
        act in prop::sample::select(vec!["demander", "repondre", "preciser", "affirmer", "bogus"]),
    ) {
        let (mut hub, _, authed) = seeded_hub();
        let frame = serde_json::json!({"t":"post","channel":"c","act":act,"body":body}).to_string();
        let seq = hub.log().last_seq();
        let out = hub.receive(authed, &frame, 2);
        let accepted = !out[0].1.is_error();
        let root_act = matches!(act, "demander" | "affirmer");
        prop_assert_eq!(accepted, root_act && !body.trim().is_empty());
        prop_assert_eq!(hub.log().last_seq(), if accepted { seq + 1 } else { seq });
    }
}
