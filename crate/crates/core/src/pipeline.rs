//! End-to-end analysis of one branch: ingestion, scoring and reporting.

use std::collections::BTreeSet;

use crate::collab::{self, MeetingRecord, ReviewRecord};
use crate::config::{format_instant, AlgorithmChoice, RunConfig};
use crate::engine::{analyze, Algorithm, Analysis};
use crate::event::{sort_events, ContributionEvent, TimestampMs};
use crate::identity::IdentityMap;
use crate::report::{Comparison, EngineerReport, FileReport, Report, ReportDocument};
use crate::vcs::{self, BranchSnapshot, GitRepo};
use crate::Result;

/// Everything the engine needs, independent of the algorithm.
#[derive(Debug, Clone)]
pub struct Ingested {
    pub project: String,
    pub snapshot: BranchSnapshot,
    pub identities: IdentityMap,
    pub events: Vec<ContributionEvent>,
    pub warnings: Vec<String>,
}

impl Ingested {
    /// Latest of the head commit time and the newest event.
    pub fn default_as_of(&self) -> TimestampMs {
        self.events
            .iter()
            .map(|e| e.timestamp_ms)
            .chain(self.snapshot.head_timestamp_ms)
            .max()
            .unwrap_or(0)
    }
}

fn project_name(config: &RunConfig) -> String {
    let path = std::fs::canonicalize(&config.repo_path).unwrap_or_else(|_| config.repo_path.clone());
    path.file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}

pub fn ingest(config: &RunConfig) -> Result<Ingested> {
    let repo = GitRepo::open(&config.repo_path)?;
    let (branch_name, head) = repo.resolve_branch(config.branch.as_deref())?;
    let snapshot = repo.snapshot_at(branch_name, head)?;
    let commits = repo.traverse_from(head)?;

    let reviews: Vec<ReviewRecord> = match &config.reviews_path {
        Some(p) => collab::load_reviews(p)?,
        None => Vec::new(),
    };
    let meetings: Vec<MeetingRecord> = match &config.meetings_path {
        Some(p) => collab::load_meetings(p)?,
        None => Vec::new(),
    };

    let mut actors = vcs::commit_actors(&commits);
    actors.extend(collab::collab_actors(&reviews, &meetings));
    let mut identities = IdentityMap::from_actors(&actors);

    let vcs_out = vcs::emit_vcs_events(&commits, &mut identities, &snapshot);
    let mut warnings = vcs_out.warnings;
    let mut events = vcs_out.events;

    let reviews = collab::filter_reviews(&reviews);
    let review_out = collab::emit_review_events(&reviews, &vcs_out.commit_index, &identities);
    let meetings = collab::filter_meetings(&meetings, &config.params.meeting_exclude_keywords);
    let meeting_out = collab::associate_meetings(
        &meetings,
        &vcs_out.commit_index,
        &identities,
        config.params.meeting_window_days,
    );
    for out in [review_out, meeting_out] {
        events.extend(out.events);
        warnings.extend(out.warnings);
    }
    sort_events(&mut events);

    Ok(Ingested {
        project: project_name(config),
        snapshot,
        identities,
        events,
        warnings,
    })
}

pub fn build_report(
    ingested: &Ingested,
    analysis: &Analysis,
    config: &RunConfig,
    as_of: TimestampMs,
) -> Report {
    let files = ingested
        .snapshot
        .live_files
        .iter()
        .map(|path| FileReport {
            path: path.clone(),
            authors: analysis
                .authorship
                .get(path)
                .map(|a| a.keys().cloned().collect())
                .unwrap_or_default(),
            top_doa: analysis.table.max_raw(path),
        })
        .collect();
    let engineers = analysis
        .result
        .key_engineers
        .iter()
        .map(|id| {
            let known = ingested.identities.get(id);
            EngineerReport {
                id: id.clone(),
                names: known.map(|e| e.names.iter().cloned().collect()).unwrap_or_default(),
                emails: known.map(|e| e.emails.iter().cloned().collect()).unwrap_or_default(),
            }
        })
        .collect();
    let mut warnings = ingested.warnings.clone();
    warnings.extend(analysis.result.warnings.iter().cloned());
    Report {
        project: ingested.project.clone(),
        branch: ingested.snapshot.branch_name.clone(),
        as_of: format_instant(as_of),
        algorithm: analysis.table.algorithm,
        bus_factor: analysis.result.bus_factor,
        key_engineers: analysis.result.key_engineers.clone(),
        coverage_trace: analysis.result.coverage_trace.clone(),
        file_count: analysis.result.file_count,
        files,
        params: config.params.clone(),
        warnings,
        engineers,
    }
}

fn run_one(ingested: &Ingested, config: &RunConfig, as_of: TimestampMs, algorithm: Algorithm) -> Result<Report> {
    let live: &BTreeSet<String> = &ingested.snapshot.live_files;
    let analysis = analyze(&ingested.events, live, &config.params, as_of, algorithm)?;
    Ok(build_report(ingested, &analysis, config, as_of))
}

/// Scores an already ingested branch.
pub fn report(ingested: &Ingested, config: &RunConfig) -> Result<ReportDocument> {
    config.params.validate()?;
    let as_of = config.as_of.unwrap_or_else(|| ingested.default_as_of());
    Ok(match config.algorithm {
        AlgorithmChoice::Multimodal => {
            ReportDocument::Single(run_one(ingested, config, as_of, Algorithm::Multimodal)?)
        }
        AlgorithmChoice::Baseline => {
            ReportDocument::Single(run_one(ingested, config, as_of, Algorithm::Baseline)?)
        }
        AlgorithmChoice::Both => ReportDocument::Both(Comparison {
            multimodal: run_one(ingested, config, as_of, Algorithm::Multimodal)?,
            baseline: run_one(ingested, config, as_of, Algorithm::Baseline)?,
        }),
    })
}

pub fn run_analysis(config: &RunConfig) -> Result<ReportDocument> {
    config.params.validate()?;
    let ingested = ingest(config)?;
    report(&ingested, config)
}
