//! Forum structuring: temporal sessions (runs of consecutive messages by one
//! author), the thread × session grid, and course-context views.

use std::collections::{BTreeMap, BTreeSet};
use std::time::Duration;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::conversation::{ConversationTree, Intervention};
use crate::ids::{ActivityId, ConceptId, InterventionId, ObjectId, Timestamp, UserId};

pub const DEFAULT_SESSION_DELTA: Duration = Duration::from_secs(60 * 60);

/// The fixture course manifest shipped with the crate.
pub const COURSE_MANIFEST_JSON: &str = include_str!("../data/course.manifest.json");

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ForumError {
    #[error("messages are not in ascending seq order at position {0}")]
    UnsortedInput(usize),
    #[error("session window must be positive")]
    InvalidDelta,
    #[error("malformed manifest: {0}")]
    MalformedDoc(String),
    #[error("dangling reference: {0}")]
    DanglingRef(String),
    #[error("unknown node {0}")]
    UnknownNode(InterventionId),
    #[error("unknown learning object `{0}`")]
    UnknownObject(ObjectId),
}

impl ForumError {
    pub fn code(&self) -> &'static str {
        match self {
            ForumError::UnsortedInput(_) => "UNSORTED_INPUT",
            ForumError::InvalidDelta => "INVALID_DELTA",
            ForumError::MalformedDoc(_) => "MALFORMED_DOC",
            ForumError::DanglingRef(_) => "DANGLING_REF",
            ForumError::UnknownNode(_) => "UNKNOWN_NODE",
            ForumError::UnknownObject(_) => "UNKNOWN_OBJECT",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ForumSession {
    pub author: UserId,
    pub members: Vec<InterventionId>,
    pub start_ts: Timestamp,
    pub end_ts: Timestamp,
}

impl ForumSession {
    fn first_seq(&self) -> InterventionId {
        self.members[0]
    }
}

fn delta_ms(delta: Duration) -> Result<i64, ForumError> {
    if delta.is_zero() {
        return Err(ForumError::InvalidDelta);
    }
    Ok(i64::try_from(delta.as_millis()).unwrap_or(i64::MAX))
}

fn sorted<'a>(
    messages: impl IntoIterator<Item = &'a Intervention>,
) -> Result<Vec<&'a Intervention>, ForumError> {
    let msgs: Vec<&Intervention> = messages.into_iter().collect();
    if let Some(i) = msgs.windows(2).position(|w| w[0].seq >= w[1].seq) {
        return Err(ForumError::UnsortedInput(i + 1));
    }
    Ok(msgs)
}

/// `true` when `cur` continues `prev`'s session.
fn continues(prev: &Intervention, cur: &Intervention, delta_ms: i64) -> bool {
    prev.author == cur.author && cur.ts.saturating_sub(prev.ts) <= delta_ms
}

/// Split a channel's messages (ascending seq) into maximal same-author runs
/// whose consecutive gaps stay within `delta`.
pub fn group_sessions<'a>(
    messages: impl IntoIterator<Item = &'a Intervention>,
    delta: Duration,
) -> Result<Vec<ForumSession>, ForumError> {
    let delta = delta_ms(delta)?;
    let msgs = sorted(messages)?;
    let mut out: Vec<ForumSession> = Vec::new();
    let mut prev: Option<&Intervention> = None;
    for m in msgs {
        match (prev, out.last_mut()) {
            (Some(p), Some(s)) if continues(p, m, delta) => {
                s.members.push(m.id);
                s.start_ts = s.start_ts.min(m.ts);
                s.end_ts = s.end_ts.max(m.ts);
            }
            _ => out.push(ForumSession {
                author: m.author.clone(),
                members: vec![m.id],
                start_ts: m.ts,
                end_ts: m.ts,
            }),
        }
        prev = Some(m);
    }
    Ok(out)
}

/// Share of messages that directly continue the previous message's session.
pub fn consecutive_fraction<'a>(
    messages: impl IntoIterator<Item = &'a Intervention>,
    delta: Duration,
) -> Result<f64, ForumError> {
    let delta = delta_ms(delta)?;
    let msgs = sorted(messages)?;
    if msgs.is_empty() {
        return Ok(0.0);
    }
    let hits = msgs
        .windows(2)
        .filter(|w| continues(w[0], w[1], delta))
        .count();
    Ok(hits as f64 / msgs.len() as f64)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SessionGrid {
    /// Thread roots, ascending seq.
    pub rows: Vec<InterventionId>,
    /// Sessions ordered by start time, ties by first seq.
    pub columns: Vec<ForumSession>,
    /// `(row index, column index)` → messages, ascending seq. Empty cells
    /// are absent.
    #[serde(serialize_with = "serialize_cells")]
    pub cells: BTreeMap<(usize, usize), Vec<InterventionId>>,
}

fn serialize_cells<S: serde::Serializer>(
    cells: &BTreeMap<(usize, usize), Vec<InterventionId>>,
    s: S,
) -> Result<S::Ok, S::Error> {
    #[derive(Serialize)]
    struct Cell<'a> {
        row: usize,
        column: usize,
        messages: &'a [InterventionId],
    }
    s.collect_seq(cells.iter().map(|(&(row, column), m)| Cell {
        row,
        column,
        messages: m,
    }))
}

impl SessionGrid {
    pub fn cell(&self, row: usize, column: usize) -> &[InterventionId] {
        self.cells
            .get(&(row, column))
            .map(Vec::as_slice)
            .unwrap_or(&[])
    }

    pub fn message_count(&self) -> usize {
        self.cells.values().map(Vec::len).sum()
    }
}

pub fn build_session_grid(
    tree: &ConversationTree,
    delta: Duration,
) -> Result<SessionGrid, ForumError> {
    let mut columns = group_sessions(tree.messages(), delta)?;
    columns.sort_by_key(|s| (s.start_ts, s.first_seq()));
    let rows = tree.roots().to_vec();
    let row_of: BTreeMap<InterventionId, usize> =
        rows.iter().enumerate().map(|(i, r)| (*r, i)).collect();

    let mut cells: BTreeMap<(usize, usize), Vec<InterventionId>> = BTreeMap::new();
    for (col, session) in columns.iter().enumerate() {
        for &m in &session.members {
            let root = tree
                .thread_of(m)
                .map_err(|_| ForumError::UnknownNode(m))?;
            cells.entry((row_of[&root], col)).or_default().push(m);
        }
    }
    Ok(SessionGrid {
        rows,
        columns,
        cells,
    })
}

// ---- course manifest ----

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Activity {
    pub id: ActivityId,
    pub title: String,
    #[serde(default)]
    pub children: Vec<Activity>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LearningObject {
    pub activity: ActivityId,
    #[serde(default)]
    pub concepts: BTreeSet<ConceptId>,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum ActivitiesDoc {
    One(Activity),
    Many(Vec<Activity>),
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ManifestDoc {
    activities: Option<ActivitiesDoc>,
    #[serde(default)]
    objects: BTreeMap<ObjectId, LearningObject>,
    #[serde(default)]
    concepts: Vec<ConceptId>,
    #[serde(default)]
    concept_edges: Vec<(ConceptId, ConceptId)>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CourseManifest {
    pub root: Activity,
    pub objects: BTreeMap<ObjectId, LearningObject>,
    pub concepts: BTreeSet<ConceptId>,
    pub concept_edges: Vec<(ConceptId, ConceptId)>,
    parent: BTreeMap<ActivityId, Option<ActivityId>>,
}

pub fn load_manifest(doc: &str) -> Result<CourseManifest, ForumError> {
    let doc: ManifestDoc =
        serde_json::from_str(doc).map_err(|e| ForumError::MalformedDoc(e.to_string()))?;
    let root = match doc.activities {
        Some(ActivitiesDoc::One(a)) => a,
        Some(ActivitiesDoc::Many(mut v)) if v.len() == 1 => v.remove(0),
        Some(ActivitiesDoc::Many(v)) if v.is_empty() => {
            return Err(ForumError::MalformedDoc("empty activities".into()))
        }
        Some(ActivitiesDoc::Many(_)) => {
            return Err(ForumError::MalformedDoc(
                "activities must form a single rooted tree".into(),
            ))
        }
        None => return Err(ForumError::MalformedDoc("missing activities".into())),
    };

    let mut parent = BTreeMap::new();
    let mut stack = vec![(&root, None::<ActivityId>)];
    while let Some((a, p)) = stack.pop() {
        if a.id.as_str().is_empty() {
            return Err(ForumError::MalformedDoc("empty activity id".into()));
        }
        if parent.insert(a.id.clone(), p).is_some() {
            return Err(ForumError::MalformedDoc(format!(
                "duplicate activity id `{}`",
                a.id
            )));
        }
        for c in &a.children {
            stack.push((c, Some(a.id.clone())));
        }
    }

    let concepts: BTreeSet<ConceptId> = doc.concepts.into_iter().collect();
    for (oid, obj) in &doc.objects {
        if !parent.contains_key(&obj.activity) {
            return Err(ForumError::DanglingRef(format!(
                "object `{oid}` names missing activity `{}`",
                obj.activity
            )));
        }
        if let Some(c) = obj.concepts.iter().find(|c| !concepts.contains(*c)) {
            return Err(ForumError::DanglingRef(format!(
                "object `{oid}` names missing concept `{c}`"
            )));
        }
    }
    for (a, b) in &doc.concept_edges {
        for c in [a, b] {
            if !concepts.contains(c) {
                return Err(ForumError::DanglingRef(format!(
                    "concept edge names missing concept `{c}`"
                )));
            }
        }
    }

    Ok(CourseManifest {
        root,
        objects: doc.objects,
        concepts,
        concept_edges: doc.concept_edges,
        parent,
    })
}

impl CourseManifest {
    pub fn fixture() -> Self {
        load_manifest(COURSE_MANIFEST_JSON).expect("shipped manifest is valid")
    }

    pub fn has_activity(&self, id: &ActivityId) -> bool {
        self.parent.contains_key(id)
    }

    pub fn activity_count(&self) -> usize {
        self.parent.len()
    }

    /// `true` when `activity` is `ancestor` or lies beneath it.
    pub fn is_within(&self, activity: &ActivityId, ancestor: &ActivityId) -> bool {
        let mut cur = Some(activity);
        while let Some(a) = cur {
            if a == ancestor {
                return true;
            }
            cur = self.parent.get(a).and_then(Option::as_ref);
        }
        false
    }

    pub fn object(&self, id: &ObjectId) -> Result<&LearningObject, ForumError> {
        self.objects
            .get(id)
            .ok_or_else(|| ForumError::UnknownObject(id.clone()))
    }

    /// Check that an optional activity and a concept set exist.
    pub fn check_refs(
        &self,
        activity: Option<&ActivityId>,
        concepts: &BTreeSet<ConceptId>,
    ) -> Result<(), ForumError> {
        if let Some(a) = activity {
            if !self.has_activity(a) {
                return Err(ForumError::DanglingRef(format!("unknown activity `{a}`")));
            }
        }
        if let Some(c) = concepts.iter().find(|c| !self.concepts.contains(*c)) {
            return Err(ForumError::DanglingRef(format!("unknown concept `{c}`")));
        }
        Ok(())
    }
}

// ---- contextual attachments ----

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContextAttachment {
    pub intervention: InterventionId,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub activity: Option<ActivityId>,
    #[serde(default)]
    pub concepts: BTreeSet<ConceptId>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ViewTab {
    Activity,
    Content,
}

/// At most one attachment per intervention; re-attaching overwrites.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ContextIndex {
    attachments: BTreeMap<InterventionId, ContextAttachment>,
}

impl ContextIndex {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, id: InterventionId) -> Option<&ContextAttachment> {
        self.attachments.get(&id)
    }

    pub fn len(&self) -> usize {
        self.attachments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.attachments.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &ContextAttachment> {
        self.attachments.values()
    }

    /// Validate an attachment without storing it.
    pub fn check(
        manifest: &CourseManifest,
        tree: &ConversationTree,
        intervention: InterventionId,
        activity: Option<&ActivityId>,
        concepts: &BTreeSet<ConceptId>,
    ) -> Result<(), ForumError> {
        if tree.get(intervention).is_none() {
            return Err(ForumError::UnknownNode(intervention));
        }
        manifest.check_refs(activity, concepts)
    }

    pub fn attach(
        &mut self,
        manifest: &CourseManifest,
        tree: &ConversationTree,
        intervention: InterventionId,
        activity: Option<ActivityId>,
        concepts: BTreeSet<ConceptId>,
    ) -> Result<&ContextAttachment, ForumError> {
        Self::check(manifest, tree, intervention, activity.as_ref(), &concepts)?;
        let rec = ContextAttachment {
            intervention,
            activity,
            concepts,
        };
        self.attachments.insert(intervention, rec);
        Ok(&self.attachments[&intervention])
    }

    /// Does `attachment` belong in `tab` for `object`?
    pub fn matches(
        manifest: &CourseManifest,
        object: &LearningObject,
        tab: ViewTab,
        attachment: &ContextAttachment,
    ) -> bool {
        match tab {
            ViewTab::Activity => attachment
                .activity
                .as_ref()
                .is_some_and(|a| manifest.is_within(a, &object.activity)),
            ViewTab::Content => !attachment.concepts.is_disjoint(&object.concepts),
        }
    }
}

/// Messages of `tree` relevant to the opened learning object, ascending seq.
pub fn contextual_view(
    index: &ContextIndex,
    manifest: &CourseManifest,
    tree: &ConversationTree,
    object: &ObjectId,
    tab: ViewTab,
) -> Result<Vec<InterventionId>, ForumError> {
    let obj = manifest.object(object)?;
    Ok(tree
        .messages()
        .filter(|m| {
            index
                .get(m.id)
                .is_some_and(|a| ContextIndex::matches(manifest, obj, tab, a))
        })
        .map(|m| m.id)
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grammar::ActGrammar;
    use crate::ids::ChannelId;

    const MIN: i64 = 60_000;

    fn msg(seq: u64, author: &str, ts: i64) -> Intervention {
        Intervention {
            id: InterventionId(seq),
            channel: ChannelId::from("f"),
            parent: None,
            act: "affirmer".into(),
            author: author.into(),
            body: "x".into(),
            ts,
            seq,
        }
    }

    fn corpus_aaba() -> Vec<Intervention> {
        vec![
            msg(1, "a", 0),
            msg(2, "a", 5 * MIN),
            msg(3, "b", 10 * MIN),
            msg(4, "a", 12 * MIN),
        ]
    }

    #[test]
    fn sessions_break_on_author_change() {
        let s = group_sessions(&corpus_aaba(), DEFAULT_SESSION_DELTA).unwrap();
        let sizes: Vec<(String, usize)> = s
            .iter()
            .map(|s| (s.author.to_string(), s.members.len()))
            .collect();
        assert_eq!(
            sizes,
            vec![("a".into(), 2), ("b".into(), 1), ("a".into(), 1)]
        );
        assert_eq!((s[0].start_ts, s[0].end_ts), (0, 5 * MIN));
    }

    #[test]
    fn sessions_break_on_gap() {
        let m = vec![msg(1, "a", 0), msg(2, "a", 120 * MIN)];
        assert_eq!(group_sessions(&m, DEFAULT_SESSION_DELTA).unwrap().len(), 2);
        let exact = vec![msg(1, "a", 0), msg(2, "a", 60 * MIN)];
        assert_eq!(group_sessions(&exact, DEFAULT_SESSION_DELTA).unwrap().len(), 1);
    }

    #[test]
    fn empty_and_invalid_inputs() {
        let none: Vec<Intervention> = vec![];
        assert!(group_sessions(&none, DEFAULT_SESSION_DELTA).unwrap().is_empty());
        assert_eq!(consecutive_fraction(&none, DEFAULT_SESSION_DELTA), Ok(0.0));
        let unsorted = vec![msg(2, "a", 0), msg(1, "a", 0)];
        assert_eq!(
            group_sessions(&unsorted, DEFAULT_SESSION_DELTA),
            Err(ForumError::UnsortedInput(1))
        );
        assert_eq!(
            consecutive_fraction(&unsorted, DEFAULT_SESSION_DELTA).unwrap_err().code(),
            "UNSORTED_INPUT"
        );
        assert_eq!(
            group_sessions(&corpus_aaba(), Duration::ZERO),
            Err(ForumError::InvalidDelta)
        );
    }

    #[test]
    fn quarter_of_messages_are_consecutive() {
        assert_eq!(
            consecutive_fraction(&corpus_aaba(), DEFAULT_SESSION_DELTA),
            Ok(0.25)
        );
        let distinct = vec![msg(1, "a", 0), msg(2, "b", 0), msg(3, "c", 0)];
        assert_eq!(consecutive_fraction(&distinct, DEFAULT_SESSION_DELTA), Ok(0.0));
    }

    fn tree_two_threads() -> ConversationTree {
        use crate::conversation::Post;
        let g = ActGrammar::splach();
        let mut t = ConversationTree::new("f");
        t.insert(&g, Post::new(None, "demander", "a", "q1", 0), 1).unwrap();
        t.insert(&g, Post::new(None, "demander", "b", "q2", MIN), 2).unwrap();
        // c answers both threads in one sitting
        t.insert(&g, Post::new(Some(InterventionId(1)), "repondre", "c", "r1", 2 * MIN), 3)
            .unwrap();
        t.insert(&g, Post::new(Some(InterventionId(2)), "repondre", "c", "r2", 3 * MIN), 4)
            .unwrap();
        t
    }

    #[test]
    fn session_spanning_two_threads() {
        let t = tree_two_threads();
        let g = build_session_grid(&t, DEFAULT_SESSION_DELTA).unwrap();
        assert_eq!(g.rows, vec![InterventionId(1), InterventionId(2)]);
        assert_eq!(g.columns.len(), 3);
        assert_eq!(g.cell(0, 2), &[InterventionId(3)]);
        assert_eq!(g.cell(1, 2), &[InterventionId(4)]);
        assert_eq!(g.message_count(), 4);
    }

    #[test]
    fn single_session_grid() {
        use crate::conversation::Post;
        let gr = ActGrammar::splach();
        let mut t = ConversationTree::new("f");
        t.insert(&gr, Post::new(None, "affirmer", "a", "x", 0), 1).unwrap();
        t.insert(&gr, Post::new(Some(InterventionId(1)), "preciser", "a", "y", 1), 2)
            .unwrap();
        let g = build_session_grid(&t, DEFAULT_SESSION_DELTA).unwrap();
        assert_eq!((g.rows.len(), g.columns.len()), (1, 1));
        assert_eq!(g.cell(0, 0), &[InterventionId(1), InterventionId(2)]);
    }

    #[test]
    fn columns_sorted_by_start_time() {
        // clients may lag: later seq, earlier ts
        use crate::conversation::Post;
        let gr = ActGrammar::splach();
        let mut t = ConversationTree::new("f");
        t.insert(&gr, Post::new(None, "affirmer", "a", "x", 10 * MIN), 1).unwrap();
        t.insert(&gr, Post::new(None, "affirmer", "b", "y", 2 * MIN), 2).unwrap();
        let g = build_session_grid(&t, DEFAULT_SESSION_DELTA).unwrap();
        assert_eq!(g.columns[0].author, UserId::from("b"));
        assert_eq!(g.cell(1, 0), &[InterventionId(2)]);
    }

    #[test]
    fn fixture_manifest_shape() {
        let m = CourseManifest::fixture();
        assert_eq!(m.activity_count(), 2);
        assert_eq!(m.objects.len(), 3);
        assert_eq!(m.concepts.len(), 4);
        assert!(m.is_within(&"A2".into(), &"A1".into()));
        assert!(!m.is_within(&"A1".into(), &"A2".into()));
    }

    #[test]
    fn manifest_errors() {
        let dangling = r#"{"activities":{"id":"A1","title":"t","children":[]},
            "objects":{"O1":{"activity":"A1","concepts":["zz"]}},"concepts":["c1"]}"#;
        assert_eq!(load_manifest(dangling).unwrap_err().code(), "DANGLING_REF");
        let bad_act = r#"{"activities":{"id":"A1","title":"t"},
            "objects":{"O1":{"activity":"A9","concepts":[]}},"concepts":[]}"#;
        assert_eq!(load_manifest(bad_act).unwrap_err().code(), "DANGLING_REF");
        let empty = r#"{"activities":[],"objects":{},"concepts":[]}"#;
        assert_eq!(load_manifest(empty).unwrap_err().code(), "MALFORMED_DOC");
        let missing = r#"{"objects":{},"concepts":[]}"#;
        assert_eq!(load_manifest(missing).unwrap_err().code(), "MALFORMED_DOC");
        let dup = r#"{"activities":{"id":"A1","title":"t","children":[{"id":"A1","title":"u"}]}}"#;
        assert_eq!(load_manifest(dup).unwrap_err().code(), "MALFORMED_DOC");
        assert_eq!(load_manifest("nope").unwrap_err().code(), "MALFORMED_DOC");
    }

    fn forum() -> (ConversationTree, ContextIndex, CourseManifest) {
        use crate::conversation::Post;
        let g = ActGrammar::splach();
        let m = CourseManifest::fixture();
        let mut t = ConversationTree::new("f");
        for seq in 1..=3 {
            t.insert(&g, Post::new(None, "affirmer", "u", "x", 0), seq).unwrap();
        }
        let mut idx = ContextIndex::new();
        idx.attach(&m, &t, InterventionId(1), Some("A1".into()), BTreeSet::new())
            .unwrap();
        idx.attach(&m, &t, InterventionId(2), None, ["c1".into()].into())
            .unwrap();
        (t, idx, m)
    }

    #[test]
    fn contextual_tabs() {
        let (t, idx, m) = forum();
        let o1 = ObjectId::from("O1");
        assert_eq!(
            contextual_view(&idx, &m, &t, &o1, ViewTab::Activity).unwrap(),
            vec![InterventionId(1)]
        );
        assert_eq!(
            contextual_view(&idx, &m, &t, &o1, ViewTab::Content).unwrap(),
            vec![InterventionId(2)]
        );
        assert_eq!(
            contextual_view(&idx, &m, &t, &"O9".into(), ViewTab::Content).unwrap_err(),
            ForumError::UnknownObject("O9".into())
        );
        let empty = ConversationTree::new("e");
        assert!(contextual_view(&ContextIndex::new(), &m, &empty, &o1, ViewTab::Activity)
            .unwrap()
            .is_empty());
    }

    #[test]
    fn activity_tab_includes_descendants() {
        let (t, mut idx, m) = forum();
        idx.attach(&m, &t, InterventionId(3), Some("A2".into()), BTreeSet::new())
            .unwrap();
        assert_eq!(
            contextual_view(&idx, &m, &t, &"O1".into(), ViewTab::Activity).unwrap(),
            vec![InterventionId(1), InterventionId(3)]
        );
        // O2 sits on A2, which does not contain A1
        assert_eq!(
            contextual_view(&idx, &m, &t, &"O2".into(), ViewTab::Activity).unwrap(),
            vec![InterventionId(3)]
        );
    }

    #[test]
    fn attach_errors_and_overwrite() {
        let (t, mut idx, m) = forum();
        assert_eq!(
            idx.attach(&m, &t, InterventionId(3), Some("A_missing".into()), BTreeSet::new())
                .unwrap_err()
                .code(),
            "DANGLING_REF"
        );
        assert_eq!(
            idx.attach(&m, &t, InterventionId(42), None, BTreeSet::new())
                .unwrap_err(),
            ForumError::UnknownNode(InterventionId(42))
        );
        idx.attach(&m, &t, InterventionId(1), None, ["c3".into()].into())
            .unwrap();
        assert_eq!(idx.len(), 2);
        assert_eq!(idx.get(InterventionId(1)).unwrap().activity, None);
    }
}
