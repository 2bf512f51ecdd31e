//! The contribution-event log: the contract between ingestion and scoring.
//!
//! Each line of a log file is one JSON object with the keys `kind`,
//! `engineer_id`, `file_path`, `timestamp_ms`, `magnitude` and `commit_ref`.

use std::collections::HashSet;
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::identity::EngineerId;
use crate::{Error, Result};

/// UTC instant as milliseconds since the Unix epoch.
pub type TimestampMs = i64;

pub const MS_PER_DAY: f64 = 86_400_000.0;

/// Fractional days between an event and the analysis instant.
pub fn age_days(as_of: TimestampMs, timestamp: TimestampMs) -> f64 {
    (as_of - timestamp) as f64 / MS_PER_DAY
}

/// Exponential knowledge decay `exp(-age / s)`.
pub fn decay(age_days: f64, s: f64) -> Result<f64> {
    if s.is_nan() || s <= 0.0 {
        return Err(Error::InvalidParam {
            name: "decay_days".to_owned(),
            constraint: "must be > 0".to_owned(),
        });
    }
    if age_days.is_nan() || age_days < 0.0 {
        return Err(Error::NegativeAge(age_days));
    }
    Ok((-age_days / s).exp())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    FirstAuthorship,
    Commit,
    Review,
    Meeting,
}

impl EventKind {
    pub fn as_str(self) -> &'static str {
        match self {
            EventKind::FirstAuthorship => "first_authorship",
            EventKind::Commit => "commit",
            EventKind::Review => "review",
            EventKind::Meeting => "meeting",
        }
    }

    fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "first_authorship" => EventKind::FirstAuthorship,
            "commit" => EventKind::Commit,
            "review" => EventKind::Review,
            "meeting" => EventKind::Meeting,
            _ => return None,
        })
    }
}

/// Historical identity of a file: every path it has lived under, each paired
/// with the commit that introduced that path. The last entry is the path at
/// the branch head.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct FileKey {
    rename_chain: Vec<(String, String)>,
}

impl FileKey {
    pub fn new(path: impl Into<String>, commit: impl Into<String>) -> Self {
        Self {
            rename_chain: vec![(path.into(), commit.into())],
        }
    }

    /// Appends a rename. Renaming to the current path is a no-op.
    pub fn rename(&mut self, path: impl Into<String>, commit: impl Into<String>) {
        let path = path.into();
        if path != self.head_path() {
            self.rename_chain.push((path, commit.into()));
        }
    }

    pub fn head_path(&self) -> &str {
        &self.rename_chain.last().expect("rename chain is never empty").0
    }

    pub fn rename_chain(&self) -> &[(String, String)] {
        &self.rename_chain
    }
}

/// One knowledge-bearing event bound to an engineer and a head-snapshot file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContributionEvent {
    pub kind: EventKind,
    #[serde(rename = "engineer_id")]
    pub engineer: EngineerId,
    #[serde(rename = "file_path")]
    pub file: String,
    pub timestamp_ms: TimestampMs,
    /// Meeting minutes for [`EventKind::Meeting`], 1.0 otherwise.
    pub magnitude: f64,
    pub commit_ref: String,
}

impl ContributionEvent {
    pub fn new(
        kind: EventKind,
        engineer: EngineerId,
        file: impl Into<String>,
        timestamp_ms: TimestampMs,
        commit_ref: impl Into<String>,
    ) -> Self {
        Self {
            kind,
            engineer,
            file: file.into(),
            timestamp_ms,
            magnitude: 1.0,
            commit_ref: commit_ref.into(),
        }
    }

    pub fn meeting(
        engineer: EngineerId,
        file: impl Into<String>,
        timestamp_ms: TimestampMs,
        minutes: f64,
        commit_ref: impl Into<String>,
    ) -> Self {
        Self {
            magnitude: minutes,
            ..Self::new(EventKind::Meeting, engineer, file, timestamp_ms, commit_ref)
        }
    }

    fn magnitude_error(&self) -> Option<&'static str> {
        match self.kind {
            EventKind::Meeting if !(self.magnitude > 0.0 && self.magnitude.is_finite()) => {
                Some("meeting minutes must be a finite number > 0")
            }
            EventKind::Meeting => None,
            _ if self.magnitude != 1.0 => Some("must be 1.0 for non-meeting events"),
            _ => None,
        }
    }
}

/// Canonical event order: timestamp, engineer, file, kind, commit.
pub fn sort_events(events: &mut [ContributionEvent]) {
    events.sort_by(|a, b| {
        a.timestamp_ms
            .cmp(&b.timestamp_ms)
            .then_with(|| a.engineer.cmp(&b.engineer))
            .then_with(|| a.file.cmp(&b.file))
            .then_with(|| a.kind.cmp(&b.kind))
            .then_with(|| a.commit_ref.cmp(&b.commit_ref))
            .then_with(|| a.magnitude.total_cmp(&b.magnitude))
    });
}

pub fn write_event_log<W: Write>(events: &[ContributionEvent], mut sink: W) -> Result<()> {
    for event in events {
        serde_json::to_writer(&mut sink, event).map_err(std::io::Error::from)?;
        sink.write_all(b"\n")?;
    }
    sink.flush()?;
    Ok(())
}

fn field_error(line: usize, field: &str, message: impl ToString) -> Error {
    Error::EventLog {
        line,
        field: field.to_owned(),
        message: message.to_string(),
    }
}

fn str_field(obj: &Map<String, Value>, line: usize, field: &str) -> Result<String> {
    match obj.get(field) {
        Some(Value::String(s)) if !s.is_empty() => Ok(s.clone()),
        Some(Value::String(_)) => Err(field_error(line, field, "must not be empty")),
        Some(_) => Err(field_error(line, field, "expected a string")),
        None => Err(field_error(line, field, "missing")),
    }
}

fn parse_line(text: &str, line: usize) -> Result<ContributionEvent> {
    let value: Value =
        serde_json::from_str(text).map_err(|e| field_error(line, "<record>", e))?;
    let Value::Object(obj) = value else {
        return Err(field_error(line, "<record>", "expected a JSON object"));
    };
    if let Some(extra) = obj.keys().find(|k| {
        !matches!(
            k.as_str(),
            "kind" | "engineer_id" | "file_path" | "timestamp_ms" | "magnitude" | "commit_ref"
        )
    }) {
        return Err(field_error(line, extra, "unknown field"));
    }

    let kind_text = str_field(&obj, line, "kind")?;
    let kind = EventKind::parse(&kind_text)
        .ok_or_else(|| field_error(line, "kind", format!("unknown kind `{kind_text}`")))?;
    let engineer = EngineerId::new(str_field(&obj, line, "engineer_id")?);
    let file = str_field(&obj, line, "file_path")?;
    let timestamp_ms = obj
        .get("timestamp_ms")
        .ok_or_else(|| field_error(line, "timestamp_ms", "missing"))?
        .as_i64()
        .ok_or_else(|| field_error(line, "timestamp_ms", "expected an integer"))?;
    let magnitude = obj
        .get("magnitude")
        .ok_or_else(|| field_error(line, "magnitude", "missing"))?
        .as_f64()
        .ok_or_else(|| field_error(line, "magnitude", "expected a number"))?;
    let commit_ref = str_field(&obj, line, "commit_ref")?;

    let event = ContributionEvent {
        kind,
        engineer,
        file,
        timestamp_ms,
        magnitude,
        commit_ref,
    };
    if let Some(msg) = event.magnitude_error() {
        return Err(field_error(line, "magnitude", msg));
    }
    Ok(event)
}

/// Reads and validates a log. Blank lines are skipped; line numbers are 1-based.
pub fn read_event_log<R: BufRead>(source: R) -> Result<Vec<ContributionEvent>> {
    let mut events = Vec::new();
    let mut first_authored: HashSet<String> = HashSet::new();
    for (idx, text) in source.lines().enumerate() {
        let line = idx + 1;
        let text = text?;
        if text.trim().is_empty() {
            continue;
        }
        let event = parse_line(&text, line)?;
        if event.kind == EventKind::FirstAuthorship && !first_authored.insert(event.file.clone()) {
            return Err(field_error(
                line,
                "kind",
                format!("second first_authorship event for `{}`", event.file),
            ));
        }
        events.push(event);
    }
    Ok(events)
}
