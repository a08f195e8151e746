//! Exhaustive peer ranking and random directories.

use std::collections::{BTreeSet, HashSet};

use dialogos_core::peers::{Directory, Document, PeerProfile, Presence};
use rand::seq::SliceRandom;
use rand::Rng;

pub const TAG_POOL: [&str; 10] = [
    "tableur",
    "energie",
    "chimie",
    "optique",
    "python",
    "redaction",
    "statistiques",
    "electricite",
    "mecanique",
    "anglais",
];

pub fn jaccard(a: &[String], b: &[String]) -> f64 {
    let a: HashSet<&String> = a.iter().collect();
    let b: HashSet<&String> = b.iter().collect();
    let both = a.iter().filter(|t| b.contains(*t)).count();
    let either = a.len() + b.len() - both;
    if either == 0 {
        0.0
    } else {
        both as f64 / either as f64
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Ranked {
    pub entity: String,
    pub score: f64,
    pub class: &'static str,
}

/// Score everyone, then sort by the full key and cut.
pub fn rank(
    profiles: &[PeerProfile],
    documents: &[Document],
    requester: &str,
    query: &[String],
    k: usize,
) -> Vec<Ranked> {
    let me = profiles
        .iter()
        .find(|p| p.user.as_str() == requester)
        .expect("requester listed");
    // (score, tier, id, class)
    let mut all: Vec<(f64, u8, String, &'static str)> = Vec::new();
    for p in profiles {
        if p.user.as_str() == requester {
            continue;
        }
        let tags: Vec<String> = p.competences.iter().chain(&p.offers).cloned().collect();
        let s = jaccard(query, &tags);
        let class = match (p.presence, me.contacts.contains(&p.user)) {
            (Presence::Connected, _) => "connected",
            (Presence::Offline, true) => "contact_offline",
            (Presence::Offline, false) => "stranger",
        };
        let tier = if p.presence == Presence::Connected { 0 } else { 1 };
        all.push((s, tier, p.user.to_string(), class));
    }
    for d in documents {
        let tags: Vec<String> = d.tags.iter().cloned().collect();
        all.push((jaccard(query, &tags), 2, d.id.to_string(), "document"));
    }
    all.retain(|x| x.0 > 0.0);
    all.sort_by(|a, b| {
        b.0.partial_cmp(&a.0)
            .expect("finite")
            .then(a.1.cmp(&b.1))
            .then(a.2.cmp(&b.2))
    });
    all.into_iter()
        .take(k)
        .map(|(score, _, entity, class)| Ranked {
            entity,
            score,
            class,
        })
        .collect()
}

fn tags<R: Rng>(rng: &mut R, p: f64) -> BTreeSet<String> {
    TAG_POOL
        .iter()
        .filter(|_| rng.gen_bool(p))
        .map(|t| t.to_string())
        .collect()
}

pub struct RandomDirectory {
    pub directory: Directory,
    pub profiles: Vec<PeerProfile>,
    pub documents: Vec<Document>,
}

pub fn random_directory<R: Rng>(rng: &mut R) -> RandomDirectory {
    let n = rng.gen_range(2..=40);
    let ids: Vec<String> = (0..n).map(|i| format!("p{i:02}")).collect();
    let mut profiles = Vec::new();
    for id in &ids {
        let mut p = PeerProfile::new(id.as_str(), format!("Personne {id}"));
        p.competences = tags(rng, 0.25);
        p.offers = tags(rng, 0.1);
        p.presence = if rng.gen_bool(0.4) {
            Presence::Connected
        } else {
            Presence::Offline
        };
        p.contacts = ids
            .iter()
            .filter(|c| *c != id && rng.gen_bool(0.2))
            .map(|c| c.as_str().into())
            .collect();
        profiles.push(p);
    }
    let documents: Vec<Document> = (0..rng.gen_range(0..8))
        .map(|i| Document {
            id: format!("doc{i}").into(),
            title: format!("Fiche {i}"),
            tags: tags(rng, 0.3),
        })
        .collect();
    let mut directory = Directory::new();
    let mut order: Vec<&PeerProfile> = profiles.iter().collect();
    order.shuffle(rng);
    for p in order {
        directory.upsert(p.clone()).expect("valid profile");
    }
    for d in &documents {
        directory.upsert_document(d.clone()).expect("valid document");
    }
    RandomDirectory {
        directory,
        profiles,
        documents,
    }
}

pub fn random_query<R: Rng>(rng: &mut R) -> Vec<String> {
    let n = rng.gen_range(1..=4);
    TAG_POOL
        .choose_multiple(rng, n)
        .map(|t| t.to_string())
        .collect()
}
