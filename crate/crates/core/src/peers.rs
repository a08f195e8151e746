//! Peer-help directory: learner profiles, what they offer, tag similarity
//! search over peers and documents, and the graph model the client draws.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ids::{DocumentId, UserId};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PeerError {
    #[error("unknown user `{0}`")]
    UnknownUser(UserId),
    #[error("invalid tag {0:?}")]
    InvalidTag(String),
    #[error("progress for `{course}` out of [0,1]: {value}")]
    InvalidProgress { course: String, value: f64 },
    #[error("user `{0}` lists themselves as a contact")]
    SelfContact(UserId),
    #[error("result count must be at least 1")]
    InvalidK,
    #[error("malformed directory: {0}")]
    MalformedDoc(String),
}

impl PeerError {
    pub fn code(&self) -> &'static str {
        match self {
            PeerError::UnknownUser(_) => "UNKNOWN_USER",
            PeerError::InvalidTag(_) => "INVALID_TAG",
            PeerError::InvalidProgress { .. } => "INVALID_PROGRESS",
            PeerError::SelfContact(_) => "SELF_CONTACT",
            PeerError::InvalidK => "INVALID_K",
            PeerError::MalformedDoc(_) => "MALFORMED_DOC",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Presence {
    Connected,
    #[default]
    Offline,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PeerProfile {
    pub user: UserId,
    pub name: String,
    #[serde(default)]
    pub competences: BTreeSet<String>,
    #[serde(default)]
    pub offers: BTreeSet<String>,
    #[serde(default)]
    pub progress: BTreeMap<String, f64>,
    #[serde(default)]
    pub presence: Presence,
    #[serde(default)]
    pub contacts: BTreeSet<UserId>,
}

impl PeerProfile {
    pub fn new(user: impl Into<UserId>, name: impl Into<String>) -> Self {
        PeerProfile {
            user: user.into(),
            name: name.into(),
            competences: BTreeSet::new(),
            offers: BTreeSet::new(),
            progress: BTreeMap::new(),
            presence: Presence::Offline,
            contacts: BTreeSet::new(),
        }
    }

    /// Normalize tags and check the profile invariants.
    pub fn normalized(mut self) -> Result<Self, PeerError> {
        self.competences = normalize_tags(&self.competences)?;
        self.offers = normalize_tags(&self.offers)?;
        if let Some((course, &value)) = self
            .progress
            .iter()
            .find(|(_, v)| !(0.0..=1.0).contains(*v))
        {
            return Err(PeerError::InvalidProgress {
                course: course.clone(),
                value,
            });
        }
        if self.contacts.contains(&self.user) {
            return Err(PeerError::SelfContact(self.user));
        }
        Ok(self)
    }

    /// Tags a query is matched against.
    pub fn searchable_tags(&self) -> BTreeSet<String> {
        self.competences.union(&self.offers).cloned().collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Document {
    pub id: DocumentId,
    pub title: String,
    #[serde(default)]
    pub tags: BTreeSet<String>,
}

impl Document {
    pub fn normalized(mut self) -> Result<Self, PeerError> {
        self.tags = normalize_tags(&self.tags)?;
        Ok(self)
    }
}

/// Lowercase and trim every tag; empty tags are rejected.
pub fn normalize_tags<I, S>(tags: I) -> Result<BTreeSet<String>, PeerError>
where
    I: IntoIterator<Item = S>,
    S: AsRef<str>,
{
    tags.into_iter()
        .map(|t| {
            let n = t.as_ref().trim().to_lowercase();
            if n.is_empty() {
                Err(PeerError::InvalidTag(t.as_ref().to_string()))
            } else {
                Ok(n)
            }
        })
        .collect()
}

/// |a ∩ b| / |a ∪ b|, and 0 when both sets are empty.
pub fn jaccard<T: Ord>(a: &BTreeSet<T>, b: &BTreeSet<T>) -> f64 {
    let inter = a.intersection(b).count();
    let union = a.len() + b.len() - inter;
    if union == 0 {
        0.0
    } else {
        inter as f64 / union as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DisplayClass {
    #[serde(rename = "self")]
    Me,
    Connected,
    ContactOffline,
    Stranger,
    Document,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EntityKind {
    User,
    Document,
}

/// Connected people are highlighted whether or not they are contacts;
/// offline contacts and offline strangers are told apart.
pub fn classify(
    kind: EntityKind,
    is_self: bool,
    presence: Presence,
    is_contact: bool,
) -> DisplayClass {
    match kind {
        EntityKind::Document => DisplayClass::Document,
        EntityKind::User if is_self => DisplayClass::Me,
        EntityKind::User => match (presence, is_contact) {
            (Presence::Connected, _) => DisplayClass::Connected,
            (Presence::Offline, true) => DisplayClass::ContactOffline,
            (Presence::Offline, false) => DisplayClass::Stranger,
        },
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatchResult {
    pub entity: String,
    pub kind: EntityKind,
    pub score: f64,
    pub display_class: DisplayClass,
}

impl MatchResult {
    fn presence_rank(&self) -> u8 {
        match self.display_class {
            DisplayClass::Me | DisplayClass::Connected => 0,
            DisplayClass::ContactOffline | DisplayClass::Stranger => 1,
            DisplayClass::Document => 2,
        }
    }
}

/// Result order: score descending, connected before offline (documents
/// last), then id ascending.
pub fn result_order(a: &MatchResult, b: &MatchResult) -> Ordering {
    b.score
        .total_cmp(&a.score)
        .then(a.presence_rank().cmp(&b.presence_rank()))
        .then_with(|| a.entity.cmp(&b.entity))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct DirectoryDoc {
    #[serde(default)]
    profiles: Vec<PeerProfile>,
    #[serde(default)]
    documents: Vec<Document>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Directory {
    profiles: BTreeMap<UserId, PeerProfile>,
    documents: BTreeMap<DocumentId, Document>,
}

impl Directory {
    pub fn new() -> Self {
        Self::default()
    }

    /// Parse a bootstrap file: `{"profiles": [...], "documents": [...]}`.
    pub fn from_json(doc: &str) -> Result<Self, PeerError> {
        let doc: DirectoryDoc =
            serde_json::from_str(doc).map_err(|e| PeerError::MalformedDoc(e.to_string()))?;
        let mut dir = Directory::new();
        for p in doc.profiles {
            dir.upsert(p)?;
        }
        for d in doc.documents {
            dir.upsert_document(d)?;
        }
        Ok(dir)
    }

    pub fn profiles(&self) -> impl Iterator<Item = &PeerProfile> {
        self.profiles.values()
    }

    pub fn documents(&self) -> impl Iterator<Item = &Document> {
        self.documents.values()
    }

    pub fn profile(&self, user: &UserId) -> Result<&PeerProfile, PeerError> {
        self.profiles
            .get(user)
            .ok_or_else(|| PeerError::UnknownUser(user.clone()))
    }

    pub fn contains(&self, user: &UserId) -> bool {
        self.profiles.contains_key(user)
    }

    pub fn upsert(&mut self, profile: PeerProfile) -> Result<&PeerProfile, PeerError> {
        let p = profile.normalized()?;
        let key = p.user.clone();
        self.profiles.insert(key.clone(), p);
        Ok(&self.profiles[&key])
    }

    pub fn upsert_document(&mut self, doc: Document) -> Result<&Document, PeerError> {
        let d = doc.normalized()?;
        let key = d.id.clone();
        self.documents.insert(key.clone(), d);
        Ok(&self.documents[&key])
    }

    pub fn set_offers<I, S>(&mut self, user: &UserId, offers: I) -> Result<&PeerProfile, PeerError>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let offers = normalize_tags(offers)?;
        let p = self
            .profiles
            .get_mut(user)
            .ok_or_else(|| PeerError::UnknownUser(user.clone()))?;
        p.offers = offers;
        Ok(p)
    }

    pub fn set_presence(&mut self, user: &UserId, presence: Presence) -> Result<(), PeerError> {
        let p = self
            .profiles
            .get_mut(user)
            .ok_or_else(|| PeerError::UnknownUser(user.clone()))?;
        p.presence = presence;
        Ok(())
    }

    /// Score every other user and every document against `query`, keep
    /// positive scores, sort by [`result_order`] and keep the first `k`.
    pub fn match_peers<I, S>(
        &self,
        requester: &UserId,
        query: I,
        k: usize,
    ) -> Result<Vec<MatchResult>, PeerError>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let me = self.profile(requester)?;
        if k == 0 {
            return Err(PeerError::InvalidK);
        }
        let query = normalize_tags(query)?;
        let mut out: Vec<MatchResult> = Vec::new();
        for p in self.profiles.values().filter(|p| &p.user != requester) {
            let score = jaccard(&query, &p.searchable_tags());
            if score > 0.0 {
                out.push(MatchResult {
                    entity: p.user.to_string(),
                    kind: EntityKind::User,
                    score,
                    display_class: classify(
                        EntityKind::User,
                        false,
                        p.presence,
                        me.contacts.contains(&p.user),
                    ),
                });
            }
        }
        for d in self.documents.values() {
            let score = jaccard(&query, &d.tags);
            if score > 0.0 {
                out.push(MatchResult {
                    entity: d.id.to_string(),
                    kind: EntityKind::Document,
                    score,
                    display_class: DisplayClass::Document,
                });
            }
        }
        out.sort_by(result_order);
        out.truncate(k);
        Ok(out)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryCard {
    pub name: String,
    pub top_competences: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub presence: Option<Presence>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphNode {
    pub id: String,
    pub kind: EntityKind,
    pub display_class: DisplayClass,
    pub card: SummaryCard,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphEdge {
    pub from: String,
    pub to: String,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeerGraph {
    pub nodes: Vec<GraphNode>,
    pub edges: Vec<GraphEdge>,
}

const CARD_TAGS: usize = 3;

fn user_card(p: &PeerProfile) -> SummaryCard {
    SummaryCard {
        name: p.name.clone(),
        top_competences: p.competences.iter().take(CARD_TAGS).cloned().collect(),
        presence: Some(p.presence),
    }
}

/// The requester as a `self` node plus one node and one weighted edge per
/// result.
pub fn peer_graph_model(
    directory: &Directory,
    results: &[MatchResult],
    requester: &UserId,
) -> Result<PeerGraph, PeerError> {
    let me = directory.profile(requester)?;
    let mut nodes = vec![GraphNode {
        id: requester.to_string(),
        kind: EntityKind::User,
        display_class: DisplayClass::Me,
        card: user_card(me),
    }];
    let mut edges = Vec::with_capacity(results.len());
    for r in results {
        let card = match r.kind {
            EntityKind::User => directory
                .profiles
                .get(r.entity.as_str())
                .map(user_card)
                .unwrap_or_else(|| SummaryCard {
                    name: r.entity.clone(),
                    top_competences: Vec::new(),
                    presence: None,
                }),
            EntityKind::Document => {
                let d = directory.documents.get(r.entity.as_str());
                SummaryCard {
                    name: d.map_or_else(|| r.entity.clone(), |d| d.title.clone()),
                    top_competences: d
                        .map(|d| d.tags.iter().take(CARD_TAGS).cloned().collect())
                        .unwrap_or_default(),
                    presence: None,
                }
            }
        };
        nodes.push(GraphNode {
            id: r.entity.clone(),
            kind: r.kind,
            display_class: r.display_class,
            card,
        });
        edges.push(GraphEdge {
            from: requester.to_string(),
            to: r.entity.clone(),
            weight: r.score,
        });
    }
    Ok(PeerGraph { nodes, edges })
}
