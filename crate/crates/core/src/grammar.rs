//! Speech-act vocabularies and the succession graph that decides which act
//! may answer which.
//!
//! A grammar is loaded from a JSON config document (see [`load_grammar`]) and
//! is immutable afterwards, so it can be shared freely behind an `Arc`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// The SPLACH grammar shipped with the crate.
pub const SPLACH_JSON: &str = include_str!("../data/splach.grammar.json");
/// The C-Chene sentence-opener grammar shipped with the crate.
pub const CCHENE_JSON: &str = include_str!("../data/cchene.grammar.json");

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GrammarError {
    #[error("malformed grammar document: {0}")]
    MalformedDoc(String),
    #[error("grammar references unknown act `{0}`")]
    UnknownActRef(String),
    #[error("grammar has an empty root successor set")]
    EmptyRoot,
    #[error("unknown act `{0}`")]
    UnknownAct(String),
}

impl GrammarError {
    pub fn code(&self) -> &'static str {
        match self {
            GrammarError::MalformedDoc(_) => "MALFORMED_DOC",
            GrammarError::UnknownActRef(_) => "UNKNOWN_ACT_REF",
            GrammarError::EmptyRoot => "EMPTY_ROOT",
            GrammarError::UnknownAct(_) => "UNKNOWN_ACT",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Category {
    Salutation,
    Initiatif,
    Reactif,
    Evaluatif,
    AutoReactif,
}

impl Category {
    pub const ALL: [Category; 5] = [
        Category::Salutation,
        Category::Initiatif,
        Category::Reactif,
        Category::Evaluatif,
        Category::AutoReactif,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Category::Salutation => "salutation",
            Category::Initiatif => "initiatif",
            Category::Reactif => "reactif",
            Category::Evaluatif => "evaluatif",
            Category::AutoReactif => "auto_reactif",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpeechAct {
    pub id: String,
    pub label: String,
    pub category: Category,
    /// Section title for grammars that group acts visually (C-Chene).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub section: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub opener: Option<String>,
    #[serde(default, skip_serializing_if = "is_false")]
    pub placeholder: bool,
}

fn is_false(b: &bool) -> bool {
    !*b
}

/// Where a new intervention attaches: the start of a discussion or an
/// existing intervention carrying some act.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum ActRef {
    Root,
    Act(String),
}

impl ActRef {
    pub fn act(id: impl Into<String>) -> Self {
        ActRef::Act(id.into())
    }
}

impl fmt::Display for ActRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ActRef::Root => f.write_str("ROOT"),
            ActRef::Act(id) => f.write_str(id),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Allowed,
    Forbidden,
}

impl Verdict {
    pub fn is_allowed(self) -> bool {
        self == Verdict::Allowed
    }
}

/// The on-disk shape of a grammar config.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GrammarDoc {
    pub name: String,
    pub acts: Vec<SpeechAct>,
    pub root: Vec<String>,
    #[serde(default)]
    pub edges: BTreeMap<String, Vec<String>>,
    #[serde(default)]
    pub auto_reactive: Vec<String>,
}

/// A validated act vocabulary with its succession graph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ActGrammar {
    name: String,
    acts: Vec<SpeechAct>,
    index: BTreeMap<String, usize>,
    root: BTreeSet<String>,
    edges: BTreeMap<String, BTreeSet<String>>,
    auto_reactive: BTreeSet<String>,
}

fn valid_act_id(id: &str) -> bool {
    !id.is_empty() && id.bytes().all(|b| b.is_ascii_lowercase() || b == b'_')
}

/// Parse and validate a grammar config document.
pub fn load_grammar(doc: &str) -> Result<ActGrammar, GrammarError> {
    let doc: GrammarDoc =
        serde_json::from_str(doc).map_err(|e| GrammarError::MalformedDoc(e.to_string()))?;
    ActGrammar::from_doc(doc)
}

impl ActGrammar {
    pub fn from_doc(doc: GrammarDoc) -> Result<Self, GrammarError> {
        if doc.name.trim().is_empty() {
            return Err(GrammarError::MalformedDoc("empty grammar name".into()));
        }
        let mut index = BTreeMap::new();
        for (i, act) in doc.acts.iter().enumerate() {
            if !valid_act_id(&act.id) {
                return Err(GrammarError::MalformedDoc(format!(
                    "act id `{}` must match [a-z_]+",
                    act.id
                )));
            }
            if index.insert(act.id.clone(), i).is_some() {
                return Err(GrammarError::MalformedDoc(format!(
                    "duplicate act id `{}`",
                    act.id
                )));
            }
        }
        let check = |id: &String| {
            if index.contains_key(id) {
                Ok(())
            } else {
                Err(GrammarError::UnknownActRef(id.clone()))
            }
        };

        for id in &doc.root {
            check(id)?;
        }
        let mut edges = BTreeMap::new();
        for (from, to) in &doc.edges {
            check(from)?;
            for id in to {
                check(id)?;
            }
            edges.insert(from.clone(), to.iter().cloned().collect::<BTreeSet<_>>());
        }
        for id in &doc.auto_reactive {
            check(id)?;
        }
        let root: BTreeSet<String> = doc.root.into_iter().collect();
        if root.is_empty() {
            return Err(GrammarError::EmptyRoot);
        }
        let auto_reactive: BTreeSet<String> = doc.auto_reactive.into_iter().collect();
        if let Some(id) = auto_reactive.intersection(&root).next() {
            return Err(GrammarError::MalformedDoc(format!(
                "auto-reactive act `{id}` cannot start a discussion"
            )));
        }

        Ok(ActGrammar {
            name: doc.name,
            acts: doc.acts,
            index,
            root,
            edges,
            auto_reactive,
        })
    }

    pub fn splach() -> Self {
        load_grammar(SPLACH_JSON).expect("shipped splach grammar is valid")
    }

    pub fn cchene() -> Self {
        load_grammar(CCHENE_JSON).expect("shipped cchene grammar is valid")
    }

    /// Serialize back into the config format. `load_grammar` of the result
    /// yields an equal grammar.
    pub fn to_doc(&self) -> GrammarDoc {
        GrammarDoc {
            name: self.name.clone(),
            acts: self.acts.clone(),
            root: self.root.iter().cloned().collect(),
            edges: self
                .edges
                .iter()
                .map(|(k, v)| (k.clone(), v.iter().cloned().collect()))
                .collect(),
            auto_reactive: self.auto_reactive.iter().cloned().collect(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_doc()).expect("grammar doc serializes")
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn acts(&self) -> &[SpeechAct] {
        &self.acts
    }

    pub fn act(&self, id: &str) -> Option<&SpeechAct> {
        self.index.get(id).map(|&i| &self.acts[i])
    }

    pub fn contains(&self, id: &str) -> bool {
        self.index.contains_key(id)
    }

    pub fn root_successors(&self) -> &BTreeSet<String> {
        &self.root
    }

    pub fn auto_reactive(&self) -> &BTreeSet<String> {
        &self.auto_reactive
    }

    pub fn edges(&self) -> &BTreeMap<String, BTreeSet<String>> {
        &self.edges
    }

    pub fn edge_count(&self) -> usize {
        self.edges.values().map(BTreeSet::len).sum()
    }

    pub fn categories(&self) -> BTreeSet<Category> {
        self.acts.iter().map(|a| a.category).collect()
    }

    pub fn sections(&self) -> BTreeSet<&str> {
        self.acts.iter().filter_map(|a| a.section.as_deref()).collect()
    }

    /// Acts that may follow `parent`. Auto-reactive acts are only offered
    /// when the author is replying to their own intervention.
    pub fn successors(
        &self,
        parent: &ActRef,
        same_author: bool,
    ) -> Result<BTreeSet<String>, GrammarError> {
        match parent {
            ActRef::Root => Ok(self.root.clone()),
            ActRef::Act(id) => {
                if !self.contains(id) {
                    return Err(GrammarError::UnknownAct(id.clone()));
                }
                let mut out = self.edges.get(id).cloned().unwrap_or_default();
                if same_author {
                    out.extend(self.auto_reactive.iter().cloned());
                } else {
                    for a in &self.auto_reactive {
                        out.remove(a);
                    }
                }
                Ok(out)
            }
        }
    }

    pub fn validate_succession(
        &self,
        parent: &ActRef,
        act: &str,
        same_author: bool,
    ) -> Result<Verdict, GrammarError> {
        if !self.contains(act) {
            return Err(GrammarError::UnknownAct(act.to_string()));
        }
        let allowed = self.successors(parent, same_author)?.contains(act);
        Ok(if allowed {
            Verdict::Allowed
        } else {
            Verdict::Forbidden
        })
    }

    /// Acts with no successor at all, even counting same-author edges.
    pub fn terminal_acts(&self) -> Vec<&str> {
        self.acts
            .iter()
            .filter(|a| {
                self.successors(&ActRef::Act(a.id.clone()), true)
                    .map(|s| s.is_empty())
                    .unwrap_or(false)
            })
            .map(|a| a.id.as_str())
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(ids: &[&str]) -> BTreeSet<String> {
        ids.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn splach_has_ten_acts_in_five_categories() {
        let g = ActGrammar::splach();
        assert_eq!(g.acts().len(), 10);
        assert_eq!(g.categories().len(), 5);
        assert_eq!(g.auto_reactive(), &set(&["preciser", "rectifier"]));
    }

    #[test]
    fn splach_root_acts() {
        let g = ActGrammar::splach();
        assert_eq!(
            g.successors(&ActRef::Root, false).unwrap(),
            set(&["saluer", "demander", "proposer", "affirmer"])
        );
        assert_eq!(
            g.successors(&ActRef::Root, true).unwrap(),
            set(&["saluer", "demander", "proposer", "affirmer"])
        );
    }

    #[test]
    fn reply_to_demand_excludes_self_reactions_for_others() {
        let g = ActGrammar::splach();
        let s = g.successors(&ActRef::act("demander"), false).unwrap();
        assert!(s.contains("repondre"));
        assert!(!s.contains("preciser"));
    }

    #[test]
    fn own_proposal_offers_evaluation_and_self_reaction() {
        let g = ActGrammar::splach();
        let s = g.successors(&ActRef::act("proposer"), true).unwrap();
        for a in ["approuver", "desapprouver", "preciser", "rectifier"] {
            assert!(s.contains(a), "{a}");
        }
    }

    #[test]
    fn validate_examples() {
        let g = ActGrammar::splach();
        assert_eq!(
            g.validate_succession(&ActRef::act("affirmer"), "questionner", false),
            Ok(Verdict::Allowed)
        );
        assert_eq!(
            g.validate_succession(&ActRef::Root, "repondre", false),
            Ok(Verdict::Forbidden)
        );
        assert_eq!(
            g.validate_succession(&ActRef::act("demander"), "preciser", false),
            Ok(Verdict::Forbidden)
        );
        assert_eq!(
            g.validate_succession(&ActRef::act("nope"), "repondre", false),
            Err(GrammarError::UnknownAct("nope".into()))
        );
        assert_eq!(
            g.validate_succession(&ActRef::Root, "nope", false),
            Err(GrammarError::UnknownAct("nope".into()))
        );
    }

    #[test]
    fn splach_has_no_terminal_act() {
        assert!(ActGrammar::splach().terminal_acts().is_empty());
    }

    #[test]
    fn unknown_edge_target() {
        let doc = r#"{"name":"g","acts":[{"id":"demander","label":"Demander","category":"initiatif"}],
            "root":["demander"],"edges":{"demander":["xyz"]},"auto_reactive":[]}"#;
        assert_eq!(
            load_grammar(doc),
            Err(GrammarError::UnknownActRef("xyz".into()))
        );
    }

    #[test]
    fn load_errors() {
        assert_eq!(load_grammar("{").unwrap_err().code(), "MALFORMED_DOC");
        let empty_root = r#"{"name":"g","acts":[{"id":"a","label":"A","category":"initiatif"}],"root":[]}"#;
        assert_eq!(load_grammar(empty_root), Err(GrammarError::EmptyRoot));
        let bad_id = r#"{"name":"g","acts":[{"id":"A1","label":"A","category":"initiatif"}],"root":["A1"]}"#;
        assert_eq!(load_grammar(bad_id).unwrap_err().code(), "MALFORMED_DOC");
        let dup = r#"{"name":"g","acts":[{"id":"a","label":"A","category":"initiatif"},
            {"id":"a","label":"B","category":"reactif"}],"root":["a"]}"#;
        assert_eq!(load_grammar(dup).unwrap_err().code(), "MALFORMED_DOC");
        let bad_cat = r#"{"name":"g","acts":[{"id":"a","label":"A","category":"other"}],"root":["a"]}"#;
        assert_eq!(load_grammar(bad_cat).unwrap_err().code(), "MALFORMED_DOC");
        let auto_root = r#"{"name":"g","acts":[{"id":"a","label":"A","category":"auto_reactif"}],
            "root":["a"],"auto_reactive":["a"]}"#;
        assert_eq!(load_grammar(auto_root).unwrap_err().code(), "MALFORMED_DOC");
        let missing_root = r#"{"name":"g","acts":[{"id":"a","label":"A","category":"initiatif"}],"root":["b"]}"#;
        assert_eq!(
            load_grammar(missing_root),
            Err(GrammarError::UnknownActRef("b".into()))
        );
    }

    #[test]
    fn cchene_openers_and_sections() {
        let g = ActGrammar::cchene();
        assert_eq!(g.acts().len(), 24);
        assert_eq!(g.sections().len(), 4);
        assert_eq!(g.categories().len(), 4);
        let openers: Vec<&str> = g.acts().iter().filter_map(|a| a.opener.as_deref()).collect();
        assert_eq!(
            openers,
            [
                "Je propose de ...",
                "Pourquoi ?",
                "D'accord",
                "Es-tu d'accord ?",
                "Attends",
                "Par quoi on commence ?",
                "Regarde l'expérience",
                "Lis la feuille"
            ]
        );
        assert_eq!(g.acts().iter().filter(|a| a.placeholder).count(), 16);
        assert!(g.acts().iter().all(|a| a.placeholder != a.opener.is_some()));
        // fully connected
        for a in g.acts() {
            assert_eq!(g.successors(&ActRef::act(a.id.as_str()), false).unwrap().len(), 24);
        }
    }

    #[test]
    fn shipped_grammars_round_trip() {
        for g in [ActGrammar::splach(), ActGrammar::cchene()] {
            assert_eq!(load_grammar(&g.to_json()).unwrap(), g);
        }
    }

    #[test]
    fn terminal_act_is_reported() {
        let doc = r#"{"name":"g","acts":[{"id":"a","label":"A","category":"initiatif"},
            {"id":"b","label":"B","category":"reactif"}],"root":["a"],"edges":{"a":["b"]}}"#;
        assert_eq!(load_grammar(doc).unwrap().terminal_acts(), vec!["b"]);
    }
}
