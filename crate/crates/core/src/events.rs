//! Append-only event log, stored as newline-delimited JSON.
//!
//! One record per line: `{"seq":N,"ts":MS,"kind":"...","payload":{...}}`.
//! The first line may be a `{"kind":"log_meta","version":"1"}` header.

use std::collections::BTreeSet;
use std::fs::{File, OpenOptions};
use std::io::{Seek, SeekFrom, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::conversation::ChannelMode;
use crate::ids::{ActivityId, ChannelId, ConceptId, InterventionId, ObjectId, Timestamp, UserId};
use crate::peers::{Document, PeerProfile, Presence};

pub const LOG_FORMAT_VERSION: &str = "1";

#[derive(Debug, Error)]
pub enum LogError {
    #[error("schema violation: {0}")]
    SchemaViolation(String),
    #[error("storage failure: {0}")]
    StorageFailure(#[from] std::io::Error),
    #[error("corrupt log at line {line}: first bad seq {seq}: {reason}")]
    CorruptLog { seq: u64, line: usize, reason: String },
}

impl LogError {
    pub fn code(&self) -> &'static str {
        match self {
            LogError::SchemaViolation(_) => "SCHEMA_VIOLATION",
            LogError::StorageFailure(_) => "STORAGE_FAILURE",
            LogError::CorruptLog { .. } => "CORRUPT_LOG",
        }
    }
}

/// Whether a message was read or written from the contextual (course
/// object) view or the global forum view.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ViewMode {
    Contextual,
    #[default]
    Global,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "payload", rename_all = "snake_case", deny_unknown_fields)]
pub enum Event {
    ChannelCreated {
        channel: ChannelId,
        mode: ChannelMode,
    },
    InterventionPosted {
        channel: ChannelId,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        parent: Option<InterventionId>,
        act: String,
        author: UserId,
        body: String,
        #[serde(default)]
        mode: ViewMode,
    },
    ContextAttached {
        intervention: InterventionId,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        activity: Option<ActivityId>,
        #[serde(default)]
        concepts: BTreeSet<ConceptId>,
    },
    ContextOpened {
        user: UserId,
        object: ObjectId,
    },
    MessageOpened {
        user: UserId,
        message: InterventionId,
        mode: ViewMode,
    },
    ProfileUpserted {
        profile: PeerProfile,
    },
    OffersSet {
        user: UserId,
        offers: BTreeSet<String>,
    },
    PresenceChanged {
        user: UserId,
        state: Presence,
    },
    DocumentUpserted {
        document: Document,
    },
}

fn non_empty(what: &str, s: &str) -> Result<(), LogError> {
    if s.trim().is_empty() {
        Err(LogError::SchemaViolation(format!("empty {what}")))
    } else {
        Ok(())
    }
}

impl Event {
    pub fn kind(&self) -> &'static str {
        match self {
            Event::ChannelCreated { .. } => "channel_created",
            Event::InterventionPosted { .. } => "intervention_posted",
            Event::ContextAttached { .. } => "context_attached",
            Event::ContextOpened { .. } => "context_opened",
            Event::MessageOpened { .. } => "message_opened",
            Event::ProfileUpserted { .. } => "profile_upserted",
            Event::OffersSet { .. } => "offers_set",
            Event::PresenceChanged { .. } => "presence_changed",
            Event::DocumentUpserted { .. } => "document_upserted",
        }
    }

    /// Build an event from a kind name and a payload document.
    pub fn from_parts(kind: &str, payload: Value) -> Result<Self, LogError> {
        let ev: Event = serde_json::from_value(serde_json::json!({
            "kind": kind,
            "payload": payload,
        }))
        .map_err(|e| LogError::SchemaViolation(format!("{kind}: {e}")))?;
        ev.validate()?;
        Ok(ev)
    }

    /// Payload checks that do not need world state.
    pub fn validate(&self) -> Result<(), LogError> {
        match self {
            Event::ChannelCreated { channel, .. } => non_empty("channel", channel.as_str()),
            Event::InterventionPosted {
                channel,
                act,
                author,
                ..
            } => {
                non_empty("channel", channel.as_str())?;
                non_empty("act", act)?;
                non_empty("author", author.as_str())
            }
            Event::ContextAttached { .. } => Ok(()),
            Event::ContextOpened { user, object } => {
                non_empty("user", user.as_str())?;
                non_empty("object", object.as_str())
            }
            Event::MessageOpened { user, .. } | Event::PresenceChanged { user, .. } => {
                non_empty("user", user.as_str())
            }
            Event::ProfileUpserted { profile } => {
                non_empty("user", profile.user.as_str())?;
                profile
                    .clone()
                    .normalized()
                    .map(|_| ())
                    .map_err(|e| LogError::SchemaViolation(e.to_string()))
            }
            Event::OffersSet { user, offers } => {
                non_empty("user", user.as_str())?;
                offers.iter().try_for_each(|t| non_empty("tag", t))
            }
            Event::DocumentUpserted { document } => {
                non_empty("document id", document.id.as_str())?;
                document.tags.iter().try_for_each(|t| non_empty("tag", t))
            }
        }
    }

    /// The user this event is attributed to, if any.
    pub fn actor(&self) -> Option<&UserId> {
        match self {
            Event::InterventionPosted { author, .. } => Some(author),
            Event::ContextOpened { user, .. }
            | Event::MessageOpened { user, .. }
            | Event::OffersSet { user, .. }
            | Event::PresenceChanged { user, .. } => Some(user),
            Event::ProfileUpserted { profile } => Some(&profile.user),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EventRecord {
    pub seq: u64,
    pub ts: Timestamp,
    pub event: Event,
}

#[derive(Serialize, Deserialize)]
struct RawRecord {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    seq: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    ts: Option<Timestamp>,
    kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    payload: Option<Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    version: Option<String>,
}

impl EventRecord {
    /// One compact JSON line, without the trailing newline.
    pub fn to_line(&self) -> String {
        let tagged = serde_json::to_value(&self.event).expect("events serialize");
        let payload = tagged.get("payload").cloned();
        let raw = RawRecord {
            seq: Some(self.seq),
            ts: Some(self.ts),
            kind: self.event.kind().to_string(),
            payload,
            version: None,
        };
        serde_json::to_string(&raw).expect("records serialize")
    }
}

fn header_line() -> String {
    serde_json::json!({"kind": "log_meta", "version": LOG_FORMAT_VERSION}).to_string()
}

/// Serialize a whole log, header included.
pub fn emit_log(records: &[EventRecord]) -> String {
    let mut out = header_line();
    out.push('\n');
    for r in records {
        out.push_str(&r.to_line());
        out.push('\n');
    }
    out
}

/// Parse and structurally check a log: every line a valid record, seqs
/// gapless from 1. Errors name the first bad seq.
pub fn parse_log(text: &str) -> Result<Vec<EventRecord>, LogError> {
    let mut out: Vec<EventRecord> = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line_no = i + 1;
        let expected = out.len() as u64 + 1;
        let corrupt = |reason: String| LogError::CorruptLog {
            seq: expected,
            line: line_no,
            reason,
        };
        if line.trim().is_empty() {
            // tolerate a blank trailing line only
            if text.lines().skip(i).all(|l| l.trim().is_empty()) {
                break;
            }
            return Err(corrupt("blank line".into()));
        }
        let raw: RawRecord =
            serde_json::from_str(line).map_err(|e| corrupt(format!("unparseable: {e}")))?;
        if raw.kind == "log_meta" {
            if i != 0 {
                return Err(corrupt("log_meta header after first line".into()));
            }
            if raw.version.as_deref() != Some(LOG_FORMAT_VERSION) {
                return Err(corrupt(format!(
                    "unsupported log format version {:?}",
                    raw.version
                )));
            }
            continue;
        }
        let seq = raw.seq.ok_or_else(|| corrupt("missing seq".into()))?;
        if seq != expected {
            return Err(corrupt(format!("expected seq {expected}, found {seq}")));
        }
        let ts = raw.ts.ok_or_else(|| corrupt("missing ts".into()))?;
        let event = Event::from_parts(&raw.kind, raw.payload.unwrap_or(Value::Null))
            .map_err(|e| corrupt(e.to_string()))?;
        out.push(EventRecord { seq, ts, event });
    }
    Ok(out)
}

/// The append-only log. Records live in memory; when opened on a file,
/// each append is written and synced before it is acknowledged.
#[derive(Debug, Default)]
pub struct EventLog {
    records: Vec<EventRecord>,
    sink: Option<File>,
}

impl EventLog {
    pub fn in_memory() -> Self {
        Self::default()
    }

    pub fn from_records(records: Vec<EventRecord>) -> Result<Self, LogError> {
        for (i, r) in records.iter().enumerate() {
            if r.seq != i as u64 + 1 {
                return Err(LogError::CorruptLog {
                    seq: i as u64 + 1,
                    line: i + 1,
                    reason: format!("expected seq {}, found {}", i + 1, r.seq),
                });
            }
        }
        Ok(EventLog {
            records,
            sink: None,
        })
    }

    /// Open (or create) a log file for appending, loading what it holds.
    pub fn open(path: impl AsRef<Path>) -> Result<Self, LogError> {
        let path = path.as_ref();
        let text = match std::fs::read_to_string(path) {
            Ok(t) => t,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => String::new(),
            Err(e) => return Err(e.into()),
        };
        let records = parse_log(&text)?;
        let mut file = OpenOptions::new().create(true).append(true).open(path)?;
        if text.is_empty() {
            writeln!(file, "{}", header_line())?;
            file.sync_data()?;
        } else if !text.ends_with('\n') {
            writeln!(file)?;
        }
        Ok(EventLog {
            records,
            sink: Some(file),
        })
    }

    pub fn records(&self) -> &[EventRecord] {
        &self.records
    }

    pub fn last_seq(&self) -> u64 {
        self.records.len() as u64
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn append(&mut self, event: Event, ts: Timestamp) -> Result<&EventRecord, LogError> {
        event.validate()?;
        let rec = EventRecord {
            seq: self.last_seq() + 1,
            ts,
            event,
        };
        if let Some(file) = self.sink.as_mut() {
            let mut line = rec.to_line();
            line.push('\n');
            let before = file.seek(SeekFrom::End(0))?;
            if let Err(e) = file.write_all(line.as_bytes()).and_then(|_| file.sync_data()) {
                let _ = file.set_len(before);
                return Err(e.into());
            }
        }
        self.records.push(rec);
        Ok(self.records.last().expect("just pushed"))
    }

    /// Append from an untyped kind/payload pair.
    pub fn append_raw(
        &mut self,
        kind: &str,
        payload: Value,
        ts: Timestamp,
    ) -> Result<&EventRecord, LogError> {
        let ev = Event::from_parts(kind, payload)?;
        self.append(ev, ts)
    }

    pub fn emit(&self) -> String {
        emit_log(&self.records)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    fn created(ch: &str) -> Event {
        Event::ChannelCreated {
            channel: ch.into(),
            mode: ChannelMode::Chat,
        }
    }

    #[test]
    fn seqs_start_at_one() {
        let mut log = EventLog::in_memory();
        assert_eq!(log.append(created("a"), 10).unwrap().seq, 1);
        assert_eq!(log.append(created("b"), 11).unwrap().seq, 2);
    }

    #[test]
    fn invalid_payload_leaves_log_unchanged() {
        let mut log = EventLog::in_memory();
        log.append(created("a"), 0).unwrap();
        let e = log
            .append_raw("channel_created", json!({"channel": "x"}), 0)
            .unwrap_err();
        assert_eq!(e.code(), "SCHEMA_VIOLATION");
        let e = log.append_raw("no_such_kind", json!({}), 0).unwrap_err();
        assert_eq!(e.code(), "SCHEMA_VIOLATION");
        let e = log.append(created(" "), 0).unwrap_err();
        assert_eq!(e.code(), "SCHEMA_VIOLATION");
        assert_eq!(log.len(), 1);
    }

    #[test]
    fn line_format() {
        let mut log = EventLog::in_memory();
        log.append(created("a"), 5).unwrap();
        assert_eq!(
            log.records()[0].to_line(),
            r#"{"seq":1,"ts":5,"kind":"channel_created","payload":{"channel":"a","mode":"chat"}}"#
        );
        assert!(log.emit().starts_with(r#"{"kind":"log_meta","version":"1"}"#));
    }

    #[test]
    fn corrupt_lines_name_first_bad_seq() {
        let mut log = EventLog::in_memory();
        for i in 0..8 {
            log.append(created(&format!("c{i}")), i).unwrap();
        }
        let mut lines: Vec<String> = log.emit().lines().map(String::from).collect();
        // line 7 (header is line 1) holds seq 6
        lines[6] = "{not json".into();
        let text = lines.join("\n");
        match parse_log(&text).unwrap_err() {
            LogError::CorruptLog { seq, line, .. } => assert_eq!((seq, line), (6, 7)),
            other => panic!("{other:?}"),
        }

        let gap = log
            .emit()
            .lines()
            .enumerate()
            .filter(|(i, _)| *i != 3)
            .map(|(_, l)| l)
            .collect::<Vec<_>>()
            .join("\n");
        match parse_log(&gap).unwrap_err() {
            LogError::CorruptLog { seq, .. } => assert_eq!(seq, 3),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn header_is_optional() {
        let text = r#"{"seq":1,"ts":0,"kind":"channel_created","payload":{"channel":"a","mode":"forum"}}"#;
        assert_eq!(parse_log(text).unwrap().len(), 1);
        let bad = r#"{"kind":"log_meta","version":"2"}"#;
        assert!(parse_log(bad).is_err());
    }

    #[test]
    fn file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("x.events.jsonl");
        {
            let mut log = EventLog::open(&path).unwrap();
            log.append(created("a"), 1).unwrap();
            log.append(created("b"), 2).unwrap();
        }
        let mut log = EventLog::open(&path).unwrap();
        assert_eq!(log.len(), 2);
        log.append(created("c"), 3).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(parse_log(&text).unwrap(), log.records());
        assert_eq!(text, log.emit());
    }
}
