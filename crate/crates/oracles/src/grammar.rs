//! The shipped SPLACH succession table, transcribed by hand, and random
//! grammar documents.

use dialogos_core::grammar::{Category, GrammarDoc, SpeechAct};
use rand::seq::SliceRandom;
use rand::Rng;

pub const SPLACH_ACTS: [&str; 10] = [
    "saluer",
    "demander",
    "proposer",
    "affirmer",
    "repondre",
    "questionner",
    "approuver",
    "desapprouver",
    "preciser",
    "rectifier",
];

pub const SPLACH_ROOT: [&str; 4] = ["saluer", "demander", "proposer", "affirmer"];

pub const SPLACH_AUTO: [&str; 2] = ["preciser", "rectifier"];

pub const SPLACH_EDGES: [(&str, &[&str]); 10] = [
    ("saluer", &["saluer", "demander", "proposer", "affirmer"]),
    ("demander", &["repondre"]),
    ("proposer", &["approuver", "desapprouver"]),
    ("affirmer", &["questionner"]),
    ("repondre", &["questionner", "approuver", "desapprouver"]),
    ("questionner", &["repondre"]),
    ("approuver", &["questionner"]),
    ("desapprouver", &["questionner", "proposer"]),
    ("preciser", &["questionner"]),
    ("rectifier", &["questionner"]),
];

/// May `act` follow `parent` (`None` = new discussion) in SPLACH?
pub fn splach_allows(parent: Option<&str>, act: &str, same_author: bool) -> bool {
    match parent {
        None => SPLACH_ROOT.contains(&act),
        Some(p) => {
            let listed = SPLACH_EDGES
                .iter()
                .any(|(from, to)| *from == p && to.contains(&act));
            listed || (same_author && SPLACH_AUTO.contains(&act))
        }
    }
}

/// Same rule read straight off a config document. An auto-reactive act
/// needs the same author even where an edge lists it.
pub fn doc_allows(doc: &GrammarDoc, parent: Option<&str>, act: &str, same_author: bool) -> bool {
    if doc.auto_reactive.iter().any(|a| a == act) && !same_author {
        return false;
    }
    match parent {
        None => doc.root.iter().any(|a| a == act),
        Some(p) => {
            let listed = doc
                .edges
                .get(p)
                .is_some_and(|to| to.iter().any(|a| a == act));
            listed || (same_author && doc.auto_reactive.iter().any(|a| a == act))
        }
    }
}

fn act_id(i: usize) -> String {
    let mut s = String::from("act_");
    let mut n = i;
    loop {
        s.push((b'a' + (n % 26) as u8) as char);
        n /= 26;
        if n == 0 {
            break s;
        }
    }
}

/// A valid grammar document with 1 to 14 acts.
pub fn random_grammar_doc<R: Rng>(rng: &mut R) -> GrammarDoc {
    let n = rng.gen_range(1..=14);
    let ids: Vec<String> = (0..n).map(act_id).collect();
    let acts = ids
        .iter()
        .enumerate()
        .map(|(i, id)| SpeechAct {
            id: id.clone(),
            label: format!("Acte n°{i} « {id} »"),
            category: *Category::ALL.choose(rng).expect("five categories"),
            section: rng.gen_bool(0.2).then(|| format!("Section {}", i % 3)),
            opener: rng.gen_bool(0.3).then(|| format!("Je {id} ...")),
            placeholder: rng.gen_bool(0.1),
        })
        .collect();
    let mut auto: Vec<String> = ids.iter().filter(|_| rng.gen_bool(0.25)).cloned().collect();
    // one act must stay eligible for the root
    if auto.len() == ids.len() {
        auto.pop();
    }
    let eligible: Vec<&String> = ids.iter().filter(|i| !auto.contains(i)).collect();
    let mut root: Vec<String> = eligible
        .iter()
        .filter(|_| rng.gen_bool(0.5))
        .map(|s| (*s).clone())
        .collect();
    if root.is_empty() {
        root.push((*eligible.choose(rng).expect("non-empty")).clone());
    }
    let mut edges = std::collections::BTreeMap::new();
    for id in &ids {
        if rng.gen_bool(0.8) {
            let to: Vec<String> = ids.iter().filter(|_| rng.gen_bool(0.3)).cloned().collect();
            edges.insert(id.clone(), to);
        }
    }
    GrammarDoc {
        name: format!("random_{n}"),
        acts,
        root,
        edges,
        auto_reactive: auto,
    }
}
