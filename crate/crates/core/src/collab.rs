//! Code-review and meeting ingestion.
//!
//! Both inputs are JSON arrays exported from whatever collaboration platform
//! the team uses. Actors are referenced by `{"email": ..}` and/or
//! `{"profile_ref": ..}`.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use chrono::{DateTime, Utc};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::event::{sort_events, ContributionEvent, EventKind, TimestampMs, MS_PER_DAY};
use crate::identity::{ActorRef, EngineerId, IdentityMap, RawActor};
use crate::vcs::CommitIndex;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReviewRecord {
    pub id: String,
    pub reviewers: Vec<ActorRef>,
    pub commit_ids: Vec<String>,
    pub completed_at: DateTime<Utc>,
    pub state: String,
}

impl ReviewRecord {
    pub fn is_merged(&self) -> bool {
        self.state.eq_ignore_ascii_case("merged")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeetingRecord {
    pub id: String,
    pub participants: Vec<ActorRef>,
    pub start: DateTime<Utc>,
    pub duration_minutes: f64,
    pub title: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
}

/// Events plus the non-fatal problems met while producing them.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Emitted {
    pub events: Vec<ContributionEvent>,
    pub warnings: Vec<String>,
}

impl Emitted {
    fn warn(&mut self, msg: String) {
        log::warn!("{msg}");
        self.warnings.push(msg);
    }
}

fn read_array<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::input(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::input(path, e))
}

pub fn load_reviews(path: &Path) -> Result<Vec<ReviewRecord>> {
    let reviews: Vec<ReviewRecord> = read_array(path)?;
    for r in &reviews {
        if r.is_merged() && r.commit_ids.is_empty() {
            return Err(Error::input(path, format!("merged review `{}` lists no commits", r.id)));
        }
    }
    Ok(reviews)
}

pub fn load_meetings(path: &Path) -> Result<Vec<MeetingRecord>> {
    let meetings: Vec<MeetingRecord> = read_array(path)?;
    for m in &meetings {
        if !(m.duration_minutes > 0.0 && m.duration_minutes.is_finite()) {
            return Err(Error::input(
                path,
                format!("meeting `{}`: duration_minutes must be > 0", m.id),
            ));
        }
    }
    Ok(meetings)
}

/// Identity links contributed by actor references that carry an email.
pub fn collab_actors(reviews: &[ReviewRecord], meetings: &[MeetingRecord]) -> Vec<RawActor> {
    reviews
        .iter()
        .flat_map(|r| r.reviewers.iter())
        .chain(meetings.iter().flat_map(|m| m.participants.iter()))
        .filter_map(ActorRef::as_raw)
        .collect()
}

/// Keeps reviews that were merged into the codebase.
pub fn filter_reviews(reviews: &[ReviewRecord]) -> Vec<ReviewRecord> {
    reviews.iter().filter(|r| r.is_merged()).cloned().collect()
}

/// Drops meetings whose title or description mentions an excluded keyword.
pub fn filter_meetings(meetings: &[MeetingRecord], exclude_keywords: &[String]) -> Vec<MeetingRecord> {
    meetings
        .iter()
        .filter(|m| {
            let text = format!(
                "{}\n{}",
                m.title.to_lowercase(),
                m.description.as_deref().unwrap_or_default().to_lowercase()
            );
            !exclude_keywords.iter().any(|k| text.contains(k.as_str()))
        })
        .cloned()
        .collect()
}

fn resolve_actors(
    actors: &[ActorRef],
    identities: &IdentityMap,
    context: &str,
    out: &mut Emitted,
) -> BTreeSet<EngineerId> {
    let mut resolved = BTreeSet::new();
    for actor in actors {
        match identities.resolve(actor) {
            Some(id) => {
                resolved.insert(id.clone());
            }
            None => out.warn(format!("{context}: cannot resolve {}, skipped", actor.describe())),
        }
    }
    resolved
}

/// One `Review` event per (reviewer, commit, file) unless the reviewer wrote
/// the commit.
pub fn emit_review_events(reviews: &[ReviewRecord], commits: &CommitIndex, identities: &IdentityMap) -> Emitted {
    let mut out = Emitted::default();
    for review in reviews {
        let context = format!("review {}", review.id);
        let reviewers = resolve_actors(&review.reviewers, identities, &context, &mut out);
        let completed: TimestampMs = review.completed_at.timestamp_millis();
        for commit_id in &review.commit_ids {
            let Some(commit) = commits.get(commit_id) else {
                out.warn(format!("{context}: unknown commit {commit_id}, skipped"));
                continue;
            };
            for reviewer in reviewers.iter().filter(|r| **r != commit.author) {
                for file in &commit.files {
                    out.events.push(ContributionEvent::new(
                        EventKind::Review,
                        reviewer.clone(),
                        file.clone(),
                        completed,
                        commit_id.clone(),
                    ));
                }
            }
        }
    }
    sort_events(&mut out.events);
    out
}

/// Credits meeting minutes towards commits whose author attended a meeting
/// within `window_days` (inclusive, either side) of the commit.
///
/// Every participant receives one `Meeting` event per head file of each
/// related commit. A meeting may relate to several commits.
pub fn associate_meetings(
    meetings: &[MeetingRecord],
    commits: &CommitIndex,
    identities: &IdentityMap,
    window_days: u32,
) -> Emitted {
    let mut out = Emitted::default();
    let window_ms = (f64::from(window_days) * MS_PER_DAY) as i64;

    let mut by_author: BTreeMap<&EngineerId, Vec<(TimestampMs, &str)>> = BTreeMap::new();
    for (id, commit) in commits {
        if !commit.files.is_empty() {
            by_author.entry(&commit.author).or_default().push((commit.timestamp_ms, id));
        }
    }
    for list in by_author.values_mut() {
        list.sort_unstable();
    }

    for meeting in meetings {
        let context = format!("meeting {}", meeting.id);
        let participants = resolve_actors(&meeting.participants, identities, &context, &mut out);
        let start = meeting.start.timestamp_millis();
        let mut related: BTreeSet<&str> = BTreeSet::new();
        for participant in &participants {
            let Some(list) = by_author.get(participant) else { continue };
            let lo = list.partition_point(|(ts, _)| *ts < start - window_ms);
            related.extend(
                list[lo..]
                    .iter()
                    .take_while(|(ts, _)| *ts <= start + window_ms)
                    .map(|(_, id)| *id),
            );
        }
        for commit_id in related {
            let commit = &commits[commit_id];
            for participant in &participants {
                for file in &commit.files {
                    out.events.push(ContributionEvent::meeting(
                        participant.clone(),
                        file.clone(),
                        start,
                        meeting.duration_minutes,
                        commit_id,
                    ));
                }
            }
        }
    }
    sort_events(&mut out.events);
    out
}
