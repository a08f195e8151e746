use std::time::Duration;

use dialogos_core::forum::{build_session_grid, consecutive_fraction, group_sessions};
use dialogos_core::grammar::ActGrammar;
use dialogos_oracles::sessions::{self, random_forum, MINUTE};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn ids(v: &[dialogos_core::ids::InterventionId]) -> Vec<u64> {
    v.iter().map(|i| i.0).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn sessions_and_grid_match_oracles(
        seed in any::<u64>(),
        n in 0usize..300,
        users in 1usize..6,
        delta_min in 1u64..240,
        stickiness in 0.0f64..0.9,
    ) {
        let g = ActGrammar::splach();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (tree, msgs) = random_forum(&mut rng, &g, n, users, stickiness);
        let delta = Duration::from_secs(delta_min * 60);
        let dms = delta_min as i64 * MINUTE;

        let got = group_sessions(tree.messages(), delta).unwrap();
        let want = sessions::sessions(&msgs, dms);
        prop_assert_eq!(got.len(), want.len());
        for (a, b) in got.iter().zip(&want) {
            prop_assert_eq!(a.author.as_str(), b.author.as_str());
            prop_assert_eq!(ids(&a.members), b.members.clone());
            prop_assert_eq!((a.start_ts, a.end_ts), (b.start_ts, b.end_ts));
        }
        let total: usize = got.iter().map(|s| s.members.len()).sum();
        prop_assert_eq!(total, n);

        let f = consecutive_fraction(tree.messages(), delta).unwrap();
        prop_assert_eq!(f, sessions::consecutive_fraction(&msgs, dms));

        let grid = build_session_grid(&tree, delta).unwrap();
        let og = sessions::grid(&msgs, dms);
        prop_assert_eq!(ids(&grid.rows), og.rows.clone());
        prop_assert_eq!(grid.columns.len(), og.columns.len());
        for (a, b) in grid.columns.iter().zip(&og.columns) {
            prop_assert_eq!(ids(&a.members), b.members.clone());
        }
        let cells: std::collections::BTreeMap<(usize, usize), Vec<u64>> =
            grid.cells.iter().map(|(k, v)| (*k, ids(v))).collect();
        prop_assert_eq!(cells, og.cells);
        prop_assert_eq!(grid.message_count(), n);
    }

    #[test]
    fn wider_window_never_adds_sessions(seed in any::<u64>(), a in 1u64..600, b in 1u64..600) {
        let g = ActGrammar::splach();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (tree, _) = random_forum(&mut rng, &g, 150, 3, 0.6);
        let (lo, hi) = (a.min(b), a.max(b));
        let few = group_sessions(tree.messages(), Duration::from_secs(hi * 60)).unwrap();
        let many = group_sessions(tree.messages(), Duration::from_secs(lo * 60)).unwrap();
        prop_assert!(few.len() <= many.len());
    }
}

#[test]
fn session_spanning_two_threads_fills_one_column_twice() {
    use dialogos_core::conversation::{ConversationTree, Post};
    use dialogos_core::ids::InterventionId;
    let g = ActGrammar::splach();
    let mut t = ConversationTree::new("f");
    let p = |parent: Option<u64>, act: &str, who: &str, ts: i64| {
        Post::new(parent.map(InterventionId), act, who, "x", ts)
    };
    t.insert(&g, p(None, "demander", "a", 0), 1).unwrap();
    t.insert(&g, p(None, "affirmer", "b", MINUTE), 2).unwrap();
    t.insert(&g, p(Some(1), "repondre", "c", 2 * MINUTE), 3).unwrap();
    t.insert(&g, p(Some(2), "questionner", "c", 3 * MINUTE), 4).unwrap();
    let grid = build_session_grid(&t, Duration::from_secs(3600)).unwrap();
    assert_eq!(grid.columns.len(), 3);
    assert_eq!(grid.cell(0, 2), [InterventionId(3)]);
    assert_eq!(grid.cell(1, 2), [InterventionId(4)]);
}
