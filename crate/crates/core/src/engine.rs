//! Degree-of-authorship scoring and the greedy bus-factor loop.
//!
//! Two scorers are provided. The multimodal scorer blends first authorship,
//! commits, reviews and meeting minutes, each weighted by exponential decay
//! of its age. The baseline scorer is the undecayed commit-only model
//! `3.293 + 1.098·FA + 0.164·DL − 0.321·ln(1 + AC)`.
//!
//! Authorship is frozen once computed: the greedy loop only removes
//! engineers, it never rescores files.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::event::{age_days, decay, ContributionEvent, EventKind, TimestampMs};
use crate::identity::EngineerId;
use crate::params::AlgorithmParams;
use crate::{Error, Result};

/// Free term of the baseline model; also its absolute authorship threshold.
pub const BASELINE_INTERCEPT: f64 = 3.293;
const BASELINE_FA: f64 = 1.098;
const BASELINE_DL: f64 = 0.164;
const BASELINE_AC: f64 = 0.321;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Multimodal,
    Baseline,
}

impl Algorithm {
    pub fn as_str(self) -> &'static str {
        match self {
            Algorithm::Multimodal => "multimodal",
            Algorithm::Baseline => "baseline",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Algorithm {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "multimodal" => Ok(Algorithm::Multimodal),
            "baseline" => Ok(Algorithm::Baseline),
            other => Err(format!("unknown algorithm `{other}`")),
        }
    }
}

/// Per-file accumulation of timestamps, grouped by engineer.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct FileLedger {
    pub file: String,
    pub first_author: Option<(EngineerId, TimestampMs)>,
    pub commits: BTreeMap<EngineerId, Vec<TimestampMs>>,
    pub reviews: BTreeMap<EngineerId, Vec<TimestampMs>>,
    /// engineer → commit → (timestamp, minutes)
    pub meetings: BTreeMap<EngineerId, BTreeMap<String, Vec<(TimestampMs, f64)>>>,
}

impl FileLedger {
    pub fn new(file: impl Into<String>) -> Self {
        Self {
            file: file.into(),
            ..Self::default()
        }
    }

    pub fn push(&mut self, event: &ContributionEvent) {
        let who = event.engineer.clone();
        let ts = event.timestamp_ms;
        match event.kind {
            EventKind::FirstAuthorship => self.first_author = Some((who, ts)),
            EventKind::Commit => self.commits.entry(who).or_default().push(ts),
            EventKind::Review => self.reviews.entry(who).or_default().push(ts),
            EventKind::Meeting => self
                .meetings
                .entry(who)
                .or_default()
                .entry(event.commit_ref.clone())
                .or_default()
                .push((ts, event.magnitude)),
        }
    }

    /// Engineers with at least one event of any kind on this file.
    pub fn engineers(&self) -> BTreeSet<EngineerId> {
        self.first_author
            .iter()
            .map(|(e, _)| e.clone())
            .chain(self.commits.keys().cloned())
            .chain(self.reviews.keys().cloned())
            .chain(self.meetings.keys().cloned())
            .collect()
    }

    fn timestamps(&self) -> impl Iterator<Item = TimestampMs> + '_ {
        self.first_author
            .iter()
            .map(|(_, t)| *t)
            .chain(self.commits.values().flatten().copied())
            .chain(self.reviews.values().flatten().copied())
            .chain(
                self.meetings
                    .values()
                    .flat_map(|m| m.values().flatten().map(|(t, _)| *t)),
            )
    }

    pub fn check_as_of(&self, as_of: TimestampMs) -> Result<()> {
        match self.timestamps().max() {
            Some(latest) if latest > as_of => Err(Error::ClockSkew {
                timestamp_ms: latest,
                as_of_ms: as_of,
            }),
            _ => Ok(()),
        }
    }
}

/// Groups events into one ledger per file.
pub fn build_ledgers(events: &[ContributionEvent]) -> BTreeMap<String, FileLedger> {
    let mut ledgers: BTreeMap<String, FileLedger> = BTreeMap::new();
    for event in events {
        ledgers
            .entry(event.file.clone())
            .or_insert_with(|| FileLedger::new(event.file.clone()))
            .push(event);
    }
    ledgers
}

fn decayed_sum(timestamps: &[TimestampMs], as_of: TimestampMs, s: f64) -> Result<f64> {
    timestamps
        .iter()
        .map(|&t| decay(age_days(as_of, t), s))
        .sum()
}

fn per_engineer_sums(
    map: &BTreeMap<EngineerId, Vec<TimestampMs>>,
    as_of: TimestampMs,
    s: f64,
) -> Result<BTreeMap<&EngineerId, f64>> {
    map.iter()
        .map(|(e, ts)| Ok((e, decayed_sum(ts, as_of, s)?)))
        .collect()
}

/// Sum over every engineer, and over every engineer except `who`. Both sums
/// run in the same order so they agree bit-for-bit when `who` is absent.
fn total_and_others(sums: &BTreeMap<&EngineerId, f64>, who: &EngineerId) -> (f64, f64) {
    let total = sums.values().sum();
    let others = sums
        .iter()
        .filter(|(e, _)| **e != who)
        .map(|(_, v)| *v)
        .sum();
    (total, others)
}

/// Multimodal degree of authorship of `engineer` on the ledger's file.
pub fn doa_multimodal(
    engineer: &EngineerId,
    ledger: &FileLedger,
    params: &AlgorithmParams,
    as_of: TimestampMs,
) -> Result<f64> {
    ledger.check_as_of(as_of)?;
    let s = params.decay_days;

    let fa = match &ledger.first_author {
        Some((who, t)) if who == engineer => decay(age_days(as_of, *t), s)?,
        _ => 0.0,
    };
    let dl = per_engineer_sums(&ledger.commits, as_of, s)?;
    let rv = per_engineer_sums(&ledger.reviews, as_of, s)?;
    let (dl_all, dl_others) = total_and_others(&dl, engineer);
    let (rv_all, rv_others) = total_and_others(&rv, engineer);
    let dl_own = dl.get(engineer).copied().unwrap_or(0.0);
    let rv_own = rv.get(engineer).copied().unwrap_or(0.0);

    let mut meetings = 0.0;
    if let Some(by_commit) = ledger.meetings.get(engineer) {
        for entries in by_commit.values() {
            let mut minutes = 0.0;
            for &(t, m) in entries {
                minutes += m * decay(age_days(as_of, t), s)?;
            }
            meetings += (minutes / params.mte_minutes).min(1.0);
        }
    }

    Ok(params.fa_weight * fa
        + params.dl_weight * dl_own
        + params.rv_weight * rv_own
        + meetings
        + params.log_dl_weight * (dl_all.ln_1p() - dl_others.ln_1p())
        + params.log_rv_weight * (rv_all.ln_1p() - rv_others.ln_1p()))
}

/// Commit counts for the baseline model. Undecayed, full history.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct BaselineCounts {
    pub file: String,
    pub first_author: Option<EngineerId>,
    pub dl: BTreeMap<EngineerId, u64>,
}

impl BaselineCounts {
    pub fn from_ledger(ledger: &FileLedger) -> Self {
        Self {
            file: ledger.file.clone(),
            first_author: ledger.first_author.as_ref().map(|(e, _)| e.clone()),
            dl: ledger
                .commits
                .iter()
                .map(|(e, ts)| (e.clone(), ts.len() as u64))
                .collect(),
        }
    }

    /// Commits by everyone except `engineer`.
    pub fn ac_of(&self, engineer: &EngineerId) -> u64 {
        self.dl
            .iter()
            .filter(|(e, _)| *e != engineer)
            .map(|(_, n)| n)
            .sum()
    }

    pub fn engineers(&self) -> BTreeSet<EngineerId> {
        self.first_author
            .iter()
            .cloned()
            .chain(self.dl.keys().cloned())
            .collect()
    }
}

pub fn doa_baseline(engineer: &EngineerId, counts: &BaselineCounts) -> f64 {
    let fa = if counts.first_author.as_ref() == Some(engineer) { 1.0 } else { 0.0 };
    let dl = counts.dl.get(engineer).copied().unwrap_or(0) as f64;
    let ac = counts.ac_of(engineer) as f64;
    BASELINE_INTERCEPT + BASELINE_FA * fa + BASELINE_DL * dl - BASELINE_AC * ac.ln_1p()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DoaScore {
    pub raw: f64,
    pub normalized: f64,
}

/// Per-file scores keyed by engineer. Only engineers with activity on a
/// file are listed; nobody without activity can outscore an active engineer
/// under either model, so the per-file maximum is unaffected.
#[derive(Debug, Clone, PartialEq)]
pub struct DoaTable {
    pub algorithm: Algorithm,
    pub files: BTreeMap<String, BTreeMap<EngineerId, DoaScore>>,
}

/// Normalizes raw scores by the per-file maximum, clamped to `[0, 1]`
/// (0 when the maximum ≤ 0).
pub fn normalize(raw: BTreeMap<EngineerId, f64>) -> BTreeMap<EngineerId, DoaScore> {
    let max = raw.values().copied().fold(f64::NEG_INFINITY, f64::max);
    raw.into_iter()
        .map(|(e, r)| {
            let normalized = if max > 0.0 { (r / max).max(0.0) } else { 0.0 };
            (e, DoaScore { raw: r, normalized })
        })
        .collect()
}

impl DoaTable {
    pub fn multimodal(
        ledgers: &BTreeMap<String, FileLedger>,
        params: &AlgorithmParams,
        as_of: TimestampMs,
    ) -> Result<Self> {
        let files = ledgers
            .par_iter()
            .map(|(path, ledger)| {
                let raw = ledger
                    .engineers()
                    .into_iter()
                    .map(|e| {
                        let doa = doa_multimodal(&e, ledger, params, as_of)?;
                        Ok((e, doa))
                    })
                    .collect::<Result<BTreeMap<_, _>>>()?;
                Ok((path.clone(), normalize(raw)))
            })
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .collect();
        Ok(Self {
            algorithm: Algorithm::Multimodal,
            files,
        })
    }

    pub fn baseline(ledgers: &BTreeMap<String, FileLedger>) -> Self {
        let files = ledgers
            .par_iter()
            .map(|(path, ledger)| {
                let counts = BaselineCounts::from_ledger(ledger);
                let raw = counts
                    .engineers()
                    .into_iter()
                    .map(|e| {
                        let doa = doa_baseline(&e, &counts);
                        (e, doa)
                    })
                    .collect();
                (path.clone(), normalize(raw))
            })
            .collect::<Vec<_>>()
            .into_iter()
            .collect();
        Self {
            algorithm: Algorithm::Baseline,
            files,
        }
    }

    pub fn max_raw(&self, file: &str) -> Option<f64> {
        self.files
            .get(file)?
            .values()
            .map(|s| s.raw)
            .reduce(f64::max)
    }

    /// Authors of `file` with their raw scores.
    ///
    /// Multimodal: `raw ≥ doa_threshold` and `normalized ≥ norm_threshold`.
    /// Baseline: `raw > 3.293` and `raw > norm_threshold · max raw`.
    pub fn authors(&self, file: &str, params: &AlgorithmParams) -> BTreeMap<EngineerId, f64> {
        let Some(scores) = self.files.get(file) else {
            return BTreeMap::new();
        };
        let max = self.max_raw(file).unwrap_or(0.0);
        scores
            .iter()
            .filter(|(_, s)| match self.algorithm {
                Algorithm::Multimodal => {
                    s.raw >= params.doa_threshold && s.normalized >= params.norm_threshold
                }
                Algorithm::Baseline => {
                    s.raw > BASELINE_INTERCEPT && s.raw > params.norm_threshold * max
                }
            })
            .map(|(e, s)| (e.clone(), s.raw))
            .collect()
    }
}

/// File → authors (with raw DOA). Files without authors map to an empty set.
pub type Authorship = BTreeMap<String, BTreeMap<EngineerId, f64>>;

pub fn authorship(table: &DoaTable, files: &BTreeSet<String>, params: &AlgorithmParams) -> Authorship {
    files
        .iter()
        .map(|f| (f.clone(), table.authors(f, params)))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BusFactorResult {
    pub bus_factor: usize,
    /// Engineers in removal order.
    pub key_engineers: Vec<EngineerId>,
    /// Coverage after each removal.
    pub coverage_trace: Vec<f64>,
    pub file_count: usize,
    pub initially_uncovered: usize,
    pub warnings: Vec<String>,
}

/// Removal priority: most authored files, then largest summed raw DOA over
/// those files, then smallest id.
pub fn removal_order(authorship: &Authorship) -> Vec<EngineerId> {
    let mut stats: BTreeMap<&EngineerId, (usize, f64)> = BTreeMap::new();
    for authors in authorship.values() {
        for (e, raw) in authors {
            let entry = stats.entry(e).or_insert((0, 0.0));
            entry.0 += 1;
            entry.1 += raw;
        }
    }
    let mut ranked: Vec<(&EngineerId, (usize, f64))> = stats.into_iter().collect();
    ranked.sort_by(|(ea, (na, da)), (eb, (nb, db))| {
        nb.cmp(na)
            .then_with(|| db.total_cmp(da))
            .then_with(|| ea.cmp(eb))
    });
    ranked.into_iter().map(|(e, _)| e.clone()).collect()
}

/// Greedily removes top authors while coverage stays at or above
/// `params.coverage_threshold`.
pub fn bus_factor(authorship: &Authorship, params: &AlgorithmParams) -> BusFactorResult {
    let file_count = authorship.len();
    let mut warnings = Vec::new();
    if file_count == 0 {
        warnings.push("no files at branch head; bus factor is 0".to_owned());
    }

    let mut remaining_authors: Vec<usize> = authorship.values().map(BTreeMap::len).collect();
    let mut files_of: BTreeMap<&EngineerId, Vec<usize>> = BTreeMap::new();
    for (idx, authors) in authorship.values().enumerate() {
        for e in authors.keys() {
            files_of.entry(e).or_default().push(idx);
        }
    }
    let initially_uncovered = remaining_authors.iter().filter(|&&n| n == 0).count();
    let mut covered = file_count - initially_uncovered;
    let coverage = |covered: usize| {
        if file_count == 0 {
            0.0
        } else {
            covered as f64 / file_count as f64
        }
    };

    let mut key_engineers = Vec::new();
    let mut coverage_trace = Vec::new();
    let mut order = removal_order(authorship).into_iter();
    while file_count > 0 && coverage(covered) >= params.coverage_threshold {
        let Some(top) = order.next() else { break };
        for &f in &files_of[&top] {
            remaining_authors[f] -= 1;
            if remaining_authors[f] == 0 {
                covered -= 1;
            }
        }
        key_engineers.push(top);
        coverage_trace.push(coverage(covered));
    }

    BusFactorResult {
        bus_factor: key_engineers.len(),
        key_engineers,
        coverage_trace,
        file_count,
        initially_uncovered,
        warnings,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Analysis {
    pub table: DoaTable,
    pub authorship: Authorship,
    pub result: BusFactorResult,
}

/// Scores every live file from the event log and runs the greedy loop.
/// Events on files outside `live_files` are ignored with a warning.
pub fn analyze(
    events: &[ContributionEvent],
    live_files: &BTreeSet<String>,
    params: &AlgorithmParams,
    as_of: TimestampMs,
    algorithm: Algorithm,
) -> Result<Analysis> {
    params.validate()?;
    let (live, stray): (Vec<ContributionEvent>, Vec<ContributionEvent>) =
        events.iter().cloned().partition(|e| live_files.contains(&e.file));
    let ledgers = build_ledgers(&live);

    let table = match algorithm {
        Algorithm::Multimodal => DoaTable::multimodal(&ledgers, params, as_of)?,
        Algorithm::Baseline => DoaTable::baseline(&ledgers),
    };
    let authorship = authorship(&table, live_files, params);
    let mut result = bus_factor(&authorship, params);
    if !stray.is_empty() {
        let files: BTreeSet<&str> = stray.iter().map(|e| e.file.as_str()).collect();
        result.warnings.push(format!(
            "ignored {} events on {} files absent from the branch head",
            stray.len(),
            files.len()
        ));
    }
    if events.is_empty() {
        result.warnings.push("event log is empty".to_owned());
    }
    Ok(Analysis {
        table,
        authorship,
        result,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const DAY: i64 = 86_400_000;

    fn id(s: &str) -> EngineerId {
        EngineerId::new(s)
    }

    fn ledger(events: &[ContributionEvent]) -> FileLedger {
        let mut l = FileLedger::new("f");
        for e in events {
            l.push(e);
        }
        l
    }

    fn ev(kind: EventKind, who: &str, ts: i64) -> ContributionEvent {
        ContributionEvent::new(kind, id(who), "f", ts, "c")
    }

    fn ln(x: f64) -> f64 {
        x.ln()
    }

    #[test]
    fn sole_creator_fresh_commit() {
        let l = ledger(&[ev(EventKind::FirstAuthorship, "a", 0), ev(EventKind::Commit, "a", 0)]);
        let doa = doa_multimodal(&id("a"), &l, &AlgorithmParams::default(), 0).unwrap();
        let expected = 3.0 + 1.0 + 2.4 * ln(2.0) - 2.4 * ln(1.0);
        assert!((doa - expected).abs() < 1e-9);
        assert!((doa - 5.66355).abs() < 1e-5);
    }

    #[test]
    fn sole_creator_after_one_half_life() {
        let half_life_ms = (220.0 * std::f64::consts::LN_2 * 86_400_000.0).round() as i64;
        let l = ledger(&[ev(EventKind::FirstAuthorship, "a", 0), ev(EventKind::Commit, "a", 0)]);
        let doa = doa_multimodal(&id("a"), &l, &AlgorithmParams::default(), half_life_ms).unwrap();
        assert!((doa - (3.0 * 0.5 + 0.5 + 2.4 * ln(1.5))).abs() < 1e-9);
        assert!((doa - 2.97312).abs() < 1e-5);
    }

    #[test]
    fn zero_activity_is_exactly_zero() {
        let l = ledger(&[
            ev(EventKind::FirstAuthorship, "a", 0),
            ev(EventKind::Commit, "a", 0),
            ev(EventKind::Commit, "b", 3 * DAY),
            ev(EventKind::Review, "c", 5 * DAY),
        ]);
        let doa = doa_multimodal(&id("z"), &l, &AlgorithmParams::default(), 40 * DAY).unwrap();
        assert_eq!(doa, 0.0);
    }

    #[test]
    fn future_event_is_clock_skew() {
        let l = ledger(&[ev(EventKind::Commit, "a", 10)]);
        assert!(matches!(
            doa_multimodal(&id("a"), &l, &AlgorithmParams::default(), 5),
            Err(Error::ClockSkew { .. })
        ));
    }

    #[test]
    fn meeting_contribution_capped_per_commit() {
        let params = AlgorithmParams::default();
        let mut events = Vec::new();
        for i in 0..5 {
            events.push(ContributionEvent::meeting(id("a"), "f", i, 200.0, "l1"));
        }
        events.push(ContributionEvent::meeting(id("a"), "f", 0, 120.0, "l2"));
        let doa = doa_multimodal(&id("a"), &ledger(&events), &params, 10).unwrap();
        // l1 saturates at 1; l2 gives 120/240 (ages are a few ms).
        assert!((doa - 1.5).abs() < 1e-6);
    }

    #[test]
    fn baseline_values() {
        let counts = BaselineCounts {
            file: "f".into(),
            first_author: Some(id("a")),
            dl: BTreeMap::from([(id("a"), 1)]),
        };
        assert!((doa_baseline(&id("a"), &counts) - 4.555).abs() < 1e-12);

        let empty = BaselineCounts::default();
        assert_eq!(doa_baseline(&id("b"), &empty), 3.293);

        let counts = BaselineCounts {
            file: "f".into(),
            first_author: Some(id("c")),
            dl: BTreeMap::from([(id("b"), 5), (id("c"), 10)]),
        };
        assert_eq!(counts.ac_of(&id("b")), 10);
        let v = doa_baseline(&id("b"), &counts);
        assert!((v - (3.293 + 0.82 - 0.321 * ln(11.0))).abs() < 1e-12);
        assert!((v - 3.34328).abs() < 1e-5);
    }

    fn table(algorithm: Algorithm, raws: &[(&str, f64)]) -> DoaTable {
        let raw = raws.iter().map(|(e, r)| (id(e), *r)).collect();
        DoaTable {
            algorithm,
            files: BTreeMap::from([("f".to_owned(), normalize(raw))]),
        }
    }

    fn author_names(t: &DoaTable) -> Vec<String> {
        t.authors("f", &AlgorithmParams::default())
            .keys()
            .map(|e| e.to_string())
            .collect()
    }

    #[test]
    fn multimodal_author_thresholds() {
        assert_eq!(author_names(&table(Algorithm::Multimodal, &[("a", 5.66)])), ["a"]);
        assert_eq!(author_names(&table(Algorithm::Multimodal, &[("a", 4.0), ("b", 3.1)])), ["a", "b"]);
        assert_eq!(author_names(&table(Algorithm::Multimodal, &[("a", 4.0), ("b", 2.9)])), ["a"]);
        assert!(author_names(&table(Algorithm::Multimodal, &[("a", 0.9), ("b", 0.4)])).is_empty());
        // Inclusive bounds.
        assert_eq!(author_names(&table(Algorithm::Multimodal, &[("a", 4.0), ("b", 3.0)])), ["a", "b"]);
        assert_eq!(author_names(&table(Algorithm::Multimodal, &[("a", 1.0)])), ["a"]);
    }

    #[test]
    fn baseline_author_thresholds_are_strict() {
        assert!(author_names(&table(Algorithm::Baseline, &[("a", 3.293)])).is_empty());
        assert_eq!(author_names(&table(Algorithm::Baseline, &[("a", 4.555)])), ["a"]);
        assert_eq!(author_names(&table(Algorithm::Baseline, &[("a", 4.4), ("b", 3.3)])), ["a"]);
        assert_eq!(author_names(&table(Algorithm::Baseline, &[("a", 4.4), ("b", 3.4)])), ["a", "b"]);
    }

    #[test]
    fn normalize_handles_nonpositive_max() {
        let n = normalize(BTreeMap::from([(id("a"), 0.0), (id("b"), -1.0)]));
        assert!(n.values().all(|s| s.normalized == 0.0));
    }

    fn sole_authorship(owners: &[(&str, usize)], unowned: usize) -> Authorship {
        let mut a = Authorship::new();
        let mut n = 0;
        for (who, count) in owners {
            for _ in 0..*count {
                a.insert(format!("f{n:03}"), BTreeMap::from([(id(who), 5.0)]));
                n += 1;
            }
        }
        for _ in 0..unowned {
            a.insert(format!("f{n:03}"), BTreeMap::new());
            n += 1;
        }
        a
    }

    #[test]
    fn single_owner() {
        let r = bus_factor(&sole_authorship(&[("a", 10)], 0), &AlgorithmParams::default());
        assert_eq!(r.bus_factor, 1);
        assert_eq!(r.key_engineers, [id("a")]);
        assert_eq!(r.coverage_trace, [0.0]);
    }

    #[test]
    fn four_quarter_owners() {
        let owners = [("a", 5), ("b", 5), ("c", 5), ("d", 5)];
        let r = bus_factor(&sole_authorship(&owners, 0), &AlgorithmParams::default());
        assert_eq!(r.bus_factor, 3);
        assert_eq!(r.coverage_trace, [0.75, 0.5, 0.25]);
        assert_eq!(r.key_engineers, [id("a"), id("b"), id("c")]);
    }

    #[test]
    fn mostly_unowned_project() {
        let r = bus_factor(&sole_authorship(&[("a", 4)], 6), &AlgorithmParams::default());
        assert_eq!(r.bus_factor, 0);
        assert!(r.key_engineers.is_empty());
        assert_eq!(r.initially_uncovered, 6);
    }

    #[test]
    fn empty_project_warns() {
        let r = bus_factor(&Authorship::new(), &AlgorithmParams::default());
        assert_eq!(r.bus_factor, 0);
        assert_eq!(r.warnings.len(), 1);
    }

    #[test]
    fn ties_break_on_total_doa_then_id() {
        let mut a = Authorship::new();
        a.insert("f1".into(), BTreeMap::from([(id("b"), 9.0)]));
        a.insert("f2".into(), BTreeMap::from([(id("a"), 2.0)]));
        a.insert("f3".into(), BTreeMap::from([(id("c"), 2.0)]));
        assert_eq!(removal_order(&a), [id("b"), id("a"), id("c")]);
    }

    #[test]
    fn analyze_empty_log() {
        let out = analyze(&[], &BTreeSet::new(), &AlgorithmParams::default(), 0, Algorithm::Multimodal).unwrap();
        assert!(out.table.files.is_empty());
        assert_eq!(out.result.bus_factor, 0);
        assert!(!out.result.warnings.is_empty());
    }

    fn ledger_strategy() -> impl Strategy<Value = Vec<ContributionEvent>> {
        let people = prop::sample::select(vec!["a", "b", "c", "d"]);
        let event = (0u8..4, people, 0i64..400, 1.0f64..300.0, 0u8..3).prop_map(|(k, who, day, minutes, commit)| {
            let ts = day * DAY;
            let commit = format!("l{commit}");
            match k {
                0 => ContributionEvent::new(EventKind::Commit, id(who), "f", ts, commit),
                1 => ContributionEvent::new(EventKind::Review, id(who), "f", ts, commit),
                2 => ContributionEvent::meeting(id(who), "f", ts, minutes, commit),
                _ => ContributionEvent::new(EventKind::FirstAuthorship, id(who), "f", ts, commit),
            }
        });
        prop::collection::vec(event, 0..30)
    }

    proptest! {
        #[test]
        fn zero_activity_cancels(events in ledger_strategy(), extra in 0i64..1000) {
            let l = ledger(&events);
            let as_of = 400 * DAY + extra;
            let doa = doa_multimodal(&id("zed"), &l, &AlgorithmParams::default(), as_of).unwrap();
            prop_assert!(doa.abs() < 1e-9);
        }

        #[test]
        fn adding_a_commit_is_monotone(events in ledger_strategy(), who in prop::sample::select(vec!["a", "b", "c", "d"]), day in 0i64..400) {
            let params = AlgorithmParams::default();
            let as_of = 400 * DAY;
            let before = ledger(&events);
            let mut more = events.clone();
            more.push(ev(EventKind::Commit, who, day * DAY));
            let after = ledger(&more);
            for k in ["a", "b", "c", "d"] {
                let b = doa_multimodal(&id(k), &before, &params, as_of).unwrap();
                let a = doa_multimodal(&id(k), &after, &params, as_of).unwrap();
                if k == who {
                    prop_assert!(a >= b - 1e-12);
                } else {
                    prop_assert!(a <= b + 1e-12);
                }
            }
        }

        #[test]
        fn meeting_cap_holds(n in 1usize..20, minutes in 1.0f64..2000.0) {
            let events: Vec<_> = (0..n).map(|i| ContributionEvent::meeting(id("a"), "f", i as i64, minutes, "l")).collect();
            let doa = doa_multimodal(&id("a"), &ledger(&events), &AlgorithmParams::default(), 100).unwrap();
            prop_assert!(doa <= 1.0 + 1e-12);
        }

        #[test]
        fn shift_equivariance(events in ledger_strategy(), shift in -1_000_000_000_000i64..1_000_000_000_000i64) {
            let params = AlgorithmParams::default();
            let as_of = 400 * DAY;
            let shifted: Vec<_> = events.iter().cloned().map(|mut e| { e.timestamp_ms += shift; e }).collect();
            let (l1, l2) = (ledger(&events), ledger(&shifted));
            for k in ["a", "b", "c", "d"] {
                let x = doa_multimodal(&id(k), &l1, &params, as_of).unwrap();
                let y = doa_multimodal(&id(k), &l2, &params, as_of + shift).unwrap();
                prop_assert!((x - y).abs() <= 1e-12);
            }
        }

        #[test]
        fn baseline_uncontested_creator_is_author(dl in 1u64..1000) {
            let counts = BaselineCounts {
                file: "f".into(),
                first_author: Some(id("a")),
                dl: BTreeMap::from([(id("a"), dl)]),
            };
            prop_assert!(doa_baseline(&id("a"), &counts) > BASELINE_INTERCEPT);
        }

        #[test]
        fn normalized_in_unit_interval(raws in prop::collection::vec(-5.0f64..20.0, 1..6)) {
            let raw: BTreeMap<EngineerId, f64> = raws.iter().enumerate().map(|(i, r)| (id(&format!("e{i}")), *r)).collect();
            let max = raws.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            for (e, s) in normalize(raw.clone()) {
                if max > 0.0 {
                    prop_assert!(s.normalized <= 1.0);
                    prop_assert_eq!(s.normalized == 1.0, raw[&e] == max);
                    prop_assert!(s.normalized >= 0.0);
                } else {
                    prop_assert_eq!(s.normalized, 0.0);
                }
            }
        }
    }
}
