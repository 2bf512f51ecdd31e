//! Git history ingestion.
//!
//! A branch is walked depth-first from its head so that every commit is
//! emitted after all of its parents. Non-merge commits are diffed against
//! their parent with rename detection; merge commits only contribute the
//! paths that differ from every parent (the conflict resolutions).

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::path::Path;

use git2::{Delta, DiffFindOptions, DiffOptions, FileMode, ObjectType, Oid, Repository, TreeWalkMode, TreeWalkResult};

use crate::event::{ContributionEvent, EventKind, FileKey, TimestampMs};
use crate::identity::{EngineerId, IdentityMap, RawActor};
use crate::{Error, Result};

/// Similarity (percent) above which an added/deleted pair counts as a rename.
pub const RENAME_THRESHOLD: u16 = 60;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ChangeKind {
    Added,
    Modified,
    Deleted,
    /// Moved from `from`; `content_changed` is set when the blob differs.
    Renamed { from: String, content_changed: bool },
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FileChange {
    pub path: String,
    pub kind: ChangeKind,
}

impl FileChange {
    pub fn new(path: impl Into<String>, kind: ChangeKind) -> Self {
        Self {
            path: path.into(),
            kind,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CommitRecord {
    pub id: String,
    pub author_email: String,
    pub author_name: String,
    pub timestamp_ms: TimestampMs,
    pub parent_ids: Vec<String>,
    pub changed_files: Vec<FileChange>,
}

impl CommitRecord {
    pub fn is_merge(&self) -> bool {
        self.parent_ids.len() >= 2
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BranchSnapshot {
    pub branch_name: String,
    /// `None` for an unborn branch.
    pub head_commit: Option<String>,
    pub head_timestamp_ms: Option<TimestampMs>,
    pub live_files: BTreeSet<String>,
}

pub struct GitRepo {
    repo: Repository,
}

fn corrupt(commit: Oid) -> impl FnOnce(git2::Error) -> Error {
    move |source| Error::Corrupt {
        commit: commit.to_string(),
        source,
    }
}

fn delta_path(file: &git2::DiffFile<'_>) -> Option<String> {
    file.path().map(|p| p.to_string_lossy().replace('\\', "/"))
}

impl GitRepo {
    pub fn open(path: &Path) -> Result<Self> {
        let repo = Repository::open(path).map_err(|e| Error::RepositoryNotFound {
            path: path.to_path_buf(),
            message: e.message().to_owned(),
        })?;
        Ok(Self { repo })
    }

    /// Resolves `branch` (or the checked-out branch when `None`) to its name
    /// and head commit. Local branches win over remote-tracking ones.
    pub fn resolve_branch(&self, branch: Option<&str>) -> Result<(String, Option<Oid>)> {
        let Some(name) = branch else {
            return match self.repo.head() {
                Ok(head) => {
                    let name = head.shorthand().unwrap_or("HEAD").to_owned();
                    let oid = head.peel_to_commit()?.id();
                    Ok((name, Some(oid)))
                }
                Err(e) if e.code() == git2::ErrorCode::UnbornBranch => {
                    let name = self
                        .repo
                        .find_reference("HEAD")
                        .ok()
                        .and_then(|r| r.symbolic_target().ok().flatten().map(str::to_owned))
                        .map(|t| t.trim_start_matches("refs/heads/").to_owned())
                        .unwrap_or_else(|| "HEAD".to_owned());
                    Ok((name, None))
                }
                Err(e) => Err(e.into()),
            };
        };
        let found = self
            .repo
            .find_branch(name, git2::BranchType::Local)
            .or_else(|_| self.repo.find_branch(name, git2::BranchType::Remote));
        match found {
            Ok(b) => {
                let oid = b.get().peel_to_commit()?.id();
                Ok((name.to_owned(), Some(oid)))
            }
            Err(_) => {
                // An unborn checked-out branch has no ref yet but still exists.
                if let Ok(head) = self.repo.find_reference("HEAD") {
                    if head.symbolic_target().ok().flatten() == Some(format!("refs/heads/{name}").as_str())
                        && self.repo.head().is_err()
                    {
                        return Ok((name.to_owned(), None));
                    }
                }
                Err(Error::BranchNotFound(name.to_owned()))
            }
        }
    }

    /// Commits reachable from `head`, parents before children. Parents are
    /// explored in order, so the first-parent line is visited first.
    pub fn topological_order(&self, head: Oid) -> Result<Vec<Oid>> {
        let mut order = Vec::new();
        let mut seen: HashSet<Oid> = HashSet::new();
        let mut stack = vec![(head, false)];
        while let Some((oid, expanded)) = stack.pop() {
            if expanded {
                order.push(oid);
                continue;
            }
            if !seen.insert(oid) {
                continue;
            }
            stack.push((oid, true));
            let commit = self.repo.find_commit(oid).map_err(corrupt(oid))?;
            let parents: Vec<Oid> = commit.parent_ids().collect();
            for parent in parents.into_iter().rev() {
                if !seen.contains(&parent) {
                    stack.push((parent, false));
                }
            }
        }
        Ok(order)
    }

    /// Every commit reachable from the branch head with its file changes.
    pub fn traverse_branch(&self, branch: Option<&str>) -> Result<Vec<CommitRecord>> {
        let (_, head) = self.resolve_branch(branch)?;
        self.traverse_from(head)
    }

    pub fn traverse_from(&self, head: Option<Oid>) -> Result<Vec<CommitRecord>> {
        let Some(head) = head else {
            return Ok(Vec::new());
        };
        self.topological_order(head)?
            .into_iter()
            .map(|oid| self.commit_record(oid))
            .collect()
    }

    pub fn commit_record(&self, oid: Oid) -> Result<CommitRecord> {
        let commit = self.repo.find_commit(oid).map_err(corrupt(oid))?;
        let author = commit.author();
        let parent_ids: Vec<String> = commit.parent_ids().map(|p| p.to_string()).collect();
        let changed_files = if parent_ids.len() >= 2 {
            self.merge_diff(oid)?
        } else {
            self.diff_commit(oid)?
        };
        Ok(CommitRecord {
            id: oid.to_string(),
            author_email: author.email().unwrap_or_default().to_owned(),
            author_name: author.name().unwrap_or_default().to_owned(),
            timestamp_ms: author.when().seconds() * 1000,
            parent_ids,
            changed_files,
        })
    }

    fn diff_trees(
        &self,
        commit: Oid,
        old: Option<&git2::Tree<'_>>,
        new: &git2::Tree<'_>,
        detect_renames: bool,
    ) -> Result<Vec<FileChange>> {
        let mut opts = DiffOptions::new();
        opts.ignore_submodules(true);
        let mut diff = self
            .repo
            .diff_tree_to_tree(old, Some(new), Some(&mut opts))
            .map_err(corrupt(commit))?;
        if detect_renames {
            let mut find = DiffFindOptions::new();
            find.renames(true)
                .rename_threshold(RENAME_THRESHOLD)
                .exact_match_only(false);
            diff.find_similar(Some(&mut find)).map_err(corrupt(commit))?;
        }
        let mut changes = Vec::new();
        for delta in diff.deltas() {
            let (old_file, new_file) = (delta.old_file(), delta.new_file());
            let is_gitlink = |f: &git2::DiffFile<'_>| f.mode() == FileMode::Commit;
            if is_gitlink(&old_file) && is_gitlink(&new_file) {
                continue;
            }
            let change = match delta.status() {
                Delta::Added | Delta::Copied => delta_path(&new_file).map(|p| FileChange::new(p, ChangeKind::Added)),
                Delta::Deleted => delta_path(&old_file).map(|p| FileChange::new(p, ChangeKind::Deleted)),
                Delta::Modified | Delta::Typechange => {
                    delta_path(&new_file).map(|p| FileChange::new(p, ChangeKind::Modified))
                }
                Delta::Renamed => match (delta_path(&old_file), delta_path(&new_file)) {
                    (Some(from), Some(to)) => Some(FileChange::new(
                        to,
                        ChangeKind::Renamed {
                            from,
                            content_changed: old_file.id() != new_file.id(),
                        },
                    )),
                    _ => None,
                },
                _ => None,
            };
            changes.extend(change);
        }
        changes.sort();
        Ok(changes)
    }

    /// Changes of a root or single-parent commit, with rename detection.
    pub fn diff_commit(&self, oid: Oid) -> Result<Vec<FileChange>> {
        let commit = self.repo.find_commit(oid).map_err(corrupt(oid))?;
        let tree = commit.tree().map_err(corrupt(oid))?;
        let parent_tree = match commit.parent_count() {
            0 => None,
            _ => Some(commit.parent(0).and_then(|p| p.tree()).map_err(corrupt(oid))?),
        };
        self.diff_trees(oid, parent_tree.as_ref(), &tree, true)
    }

    /// Paths of a merge commit that differ from every parent. The change kind
    /// is taken from the first-parent diff.
    pub fn merge_diff(&self, oid: Oid) -> Result<Vec<FileChange>> {
        let commit = self.repo.find_commit(oid).map_err(corrupt(oid))?;
        let tree = commit.tree().map_err(corrupt(oid))?;
        let mut per_parent = Vec::new();
        for parent in commit.parents() {
            let parent_tree = parent.tree().map_err(corrupt(oid))?;
            per_parent.push(self.diff_trees(oid, Some(&parent_tree), &tree, false)?);
        }
        Ok(intersect_diffs(&per_parent))
    }

    /// Blob paths present in the tree of `head`.
    pub fn live_files(&self, head: Oid) -> Result<BTreeSet<String>> {
        let tree = self
            .repo
            .find_commit(head)
            .and_then(|c| c.tree())
            .map_err(corrupt(head))?;
        let mut files = BTreeSet::new();
        tree.walk(TreeWalkMode::PreOrder, |dir, entry| {
            if entry.kind() == Some(ObjectType::Blob) {
                files.insert(format!("{dir}{}", entry.name().unwrap_or_default()));
            }
            TreeWalkResult::Ok
        })
        .map_err(corrupt(head))?;
        Ok(files)
    }

    pub fn snapshot(&self, branch: Option<&str>) -> Result<BranchSnapshot> {
        let (branch_name, head) = self.resolve_branch(branch)?;
        self.snapshot_at(branch_name, head)
    }

    pub fn snapshot_at(&self, branch_name: String, head: Option<Oid>) -> Result<BranchSnapshot> {
        let Some(head) = head else {
            return Ok(BranchSnapshot {
                branch_name,
                head_commit: None,
                head_timestamp_ms: None,
                live_files: BTreeSet::new(),
            });
        };
        let commit = self.repo.find_commit(head).map_err(corrupt(head))?;
        let head_timestamp_ms = commit.author().when().seconds() * 1000;
        Ok(BranchSnapshot {
            branch_name,
            head_commit: Some(head.to_string()),
            head_timestamp_ms: Some(head_timestamp_ms),
            live_files: self.live_files(head)?,
        })
    }
}

/// Path-level intersection of per-parent diffs of a merge commit.
pub fn intersect_diffs(per_parent: &[Vec<FileChange>]) -> Vec<FileChange> {
    let Some((first, rest)) = per_parent.split_first() else {
        return Vec::new();
    };
    let rest_paths: Vec<HashSet<&str>> = rest
        .iter()
        .map(|d| d.iter().map(|c| c.path.as_str()).collect())
        .collect();
    first
        .iter()
        .filter(|c| rest_paths.iter().all(|paths| paths.contains(c.path.as_str())))
        .cloned()
        .collect()
}

/// Commit metadata needed to attribute reviews and meetings.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IndexedCommit {
    pub author: EngineerId,
    pub timestamp_ms: TimestampMs,
    /// Head paths of the files this commit contributed knowledge to.
    pub files: Vec<String>,
}

pub type CommitIndex = BTreeMap<String, IndexedCommit>;

#[derive(Debug, Clone, Default)]
pub struct VcsEvents {
    pub events: Vec<ContributionEvent>,
    /// Identity of every head file, including files no event survives for.
    pub files: Vec<FileKey>,
    pub commit_index: CommitIndex,
    pub warnings: Vec<String>,
}

/// Identity inputs for [`crate::identity::merge_identities`] from commit authors.
pub fn commit_actors(commits: &[CommitRecord]) -> Vec<RawActor> {
    commits
        .iter()
        .map(|c| RawActor::new(c.author_name.clone(), c.author_email.clone()))
        .collect()
}

struct PendingEvent {
    kind: EventKind,
    engineer: EngineerId,
    timestamp_ms: TimestampMs,
    commit: String,
}

struct FirstAuthorCandidate {
    timestamp_ms: TimestampMs,
    commit: String,
    engineer: EngineerId,
}

struct Ledger {
    key: FileKey,
    deleted: bool,
    first_author: Option<FirstAuthorCandidate>,
    events: Vec<PendingEvent>,
}

impl Ledger {
    fn offer_first_author(&mut self, candidate: FirstAuthorCandidate) {
        let better = match &self.first_author {
            None => true,
            Some(cur) => {
                (candidate.timestamp_ms, &candidate.commit) < (cur.timestamp_ms, &cur.commit)
            }
        };
        if better {
            self.first_author = Some(candidate);
        }
    }
}

#[derive(Default)]
struct LedgerFold {
    ledgers: Vec<Ledger>,
    by_path: HashMap<String, usize>,
}

impl LedgerFold {
    fn open(&mut self, path: &str, commit: &str) -> usize {
        let id = self.ledgers.len();
        self.ledgers.push(Ledger {
            key: FileKey::new(path, commit),
            deleted: false,
            first_author: None,
            events: Vec::new(),
        });
        self.by_path.insert(path.to_owned(), id);
        id
    }

    /// Ledger receiving new content at `path`. A path that was deleted starts
    /// a fresh ledger when re-added, but modification revives it (the edit came
    /// from a branch that never saw the deletion).
    fn for_content(&mut self, path: &str, commit: &str, added: bool) -> usize {
        match self.by_path.get(path).copied() {
            Some(id) if !self.ledgers[id].deleted => id,
            Some(id) if !added => {
                self.ledgers[id].deleted = false;
                id
            }
            _ => self.open(path, commit),
        }
    }
}

/// Folds ordered commits into contribution events for the head snapshot.
///
/// Added and modified files yield a `Commit` event; the earliest addition of
/// a file also yields `FirstAuthorship`. Pure renames move the file's ledger
/// to the new path without adding events. Files missing from the snapshot
/// are dropped together with their events.
pub fn emit_vcs_events(
    commits: &[CommitRecord],
    identities: &mut IdentityMap,
    snapshot: &BranchSnapshot,
) -> VcsEvents {
    let mut fold = LedgerFold::default();
    let mut touched: Vec<(usize, Vec<usize>)> = Vec::with_capacity(commits.len());
    let mut authors: Vec<EngineerId> = Vec::with_capacity(commits.len());
    let mut warnings = Vec::new();

    for (idx, commit) in commits.iter().enumerate() {
        let (author, created) = identities.resolve_or_create(&commit.author_name, &commit.author_email);
        if created {
            let msg = format!(
                "commit {}: author <{}> not in identity map, created a new engineer",
                commit.id, commit.author_email
            );
            log::warn!("{msg}");
            warnings.push(msg);
        }
        let mut ledgers_touched = Vec::new();
        for change in &commit.changed_files {
            let knowledge = match &change.kind {
                ChangeKind::Deleted => {
                    if let Some(&id) = fold.by_path.get(&change.path) {
                        fold.ledgers[id].deleted = true;
                    }
                    None
                }
                ChangeKind::Added => Some(fold.for_content(&change.path, &commit.id, true)),
                ChangeKind::Modified => Some(fold.for_content(&change.path, &commit.id, false)),
                ChangeKind::Renamed { from, content_changed } => {
                    let id = match fold.by_path.remove(from) {
                        Some(id) if !fold.ledgers[id].deleted => id,
                        _ => fold.open(&change.path, &commit.id),
                    };
                    if let Some(old) = fold.by_path.insert(change.path.clone(), id) {
                        if old != id {
                            fold.ledgers[old].deleted = true;
                        }
                    }
                    fold.ledgers[id].key.rename(change.path.clone(), commit.id.clone());
                    content_changed.then_some(id)
                }
            };
            let Some(id) = knowledge else { continue };
            let ledger = &mut fold.ledgers[id];
            if change.kind == ChangeKind::Added {
                ledger.offer_first_author(FirstAuthorCandidate {
                    timestamp_ms: commit.timestamp_ms,
                    commit: commit.id.clone(),
                    engineer: author.clone(),
                });
            }
            ledger.events.push(PendingEvent {
                kind: EventKind::Commit,
                engineer: author.clone(),
                timestamp_ms: commit.timestamp_ms,
                commit: commit.id.clone(),
            });
            ledgers_touched.push(id);
        }
        ledgers_touched.sort_unstable();
        ledgers_touched.dedup();
        touched.push((idx, ledgers_touched));
        authors.push(author);
    }

    // Resolve every surviving ledger to its head path.
    let mut head_path_of: HashMap<usize, String> = HashMap::new();
    let mut files = Vec::new();
    let mut events = Vec::new();
    for path in &snapshot.live_files {
        match fold.by_path.get(path).copied() {
            Some(id) => {
                let ledger = &mut fold.ledgers[id];
                head_path_of.insert(id, path.clone());
                files.push(ledger.key.clone());
                if let Some(fa) = &ledger.first_author {
                    events.push(ContributionEvent::new(
                        EventKind::FirstAuthorship,
                        fa.engineer.clone(),
                        path.clone(),
                        fa.timestamp_ms,
                        fa.commit.clone(),
                    ));
                }
                for e in ledger.events.drain(..) {
                    events.push(ContributionEvent::new(
                        e.kind,
                        e.engineer,
                        path.clone(),
                        e.timestamp_ms,
                        e.commit,
                    ));
                }
            }
            None => files.push(FileKey::new(
                path.clone(),
                snapshot.head_commit.clone().unwrap_or_default(),
            )),
        }
    }
    crate::event::sort_events(&mut events);

    let commit_index = touched
        .into_iter()
        .zip(authors)
        .map(|((idx, ledger_ids), author)| {
            let commit = &commits[idx];
            let mut files: Vec<String> = ledger_ids
                .iter()
                .filter_map(|id| head_path_of.get(id).cloned())
                .collect();
            files.sort();
            (
                commit.id.clone(),
                IndexedCommit {
                    author,
                    timestamp_ms: commit.timestamp_ms,
                    files,
                },
            )
        })
        .collect();

    VcsEvents {
        events,
        files,
        commit_index,
        warnings,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::identity::merge_identities;

    fn record(id: &str, email: &str, ts: i64, changes: Vec<FileChange>) -> CommitRecord {
        CommitRecord {
            id: id.to_owned(),
            author_email: email.to_owned(),
            author_name: email.split('@').next().unwrap().to_owned(),
            timestamp_ms: ts,
            parent_ids: Vec::new(),
            changed_files: changes,
        }
    }

    fn snapshot(files: &[&str]) -> BranchSnapshot {
        BranchSnapshot {
            branch_name: "main".into(),
            head_commit: Some("head".into()),
            head_timestamp_ms: Some(0),
            live_files: files.iter().map(|s| s.to_string()).collect(),
        }
    }

    fn run(commits: &[CommitRecord], live: &[&str]) -> VcsEvents {
        let mut ids = IdentityMap::new(merge_identities(&commit_actors(commits)));
        emit_vcs_events(commits, &mut ids, &snapshot(live))
    }

    fn kinds(out: &VcsEvents) -> Vec<(EventKind, &str, &str)> {
        out.events
            .iter()
            .map(|e| (e.kind, e.engineer.as_str(), e.file.as_str()))
            .collect()
    }

    #[test]
    fn creation_yields_first_authorship_and_commit() {
        let out = run(&[record("c1", "a@x.io", 0, vec![FileChange::new("f", ChangeKind::Added)])], &["f"]);
        assert_eq!(
            kinds(&out),
            [(EventKind::FirstAuthorship, "a@x.io", "f"), (EventKind::Commit, "a@x.io", "f")]
        );
        assert_eq!(out.commit_index["c1"].files, ["f"]);
    }

    #[test]
    fn pure_rename_adds_no_events() {
        let commits = [
            record("c1", "a@x.io", 0, vec![FileChange::new("a/f", ChangeKind::Added)]),
            record(
                "c2",
                "b@x.io",
                10,
                vec![FileChange::new("b/f", ChangeKind::Renamed { from: "a/f".into(), content_changed: false })],
            ),
        ];
        let out = run(&commits, &["b/f"]);
        assert_eq!(out.events.len(), 2);
        assert!(out.events.iter().all(|e| e.engineer.as_str() == "a@x.io" && e.file == "b/f"));
        assert_eq!(out.files[0].rename_chain().len(), 2);
        assert_eq!(out.files[0].head_path(), "b/f");
        assert!(out.commit_index["c2"].files.is_empty());
    }

    #[test]
    fn rename_with_edit_counts_as_commit() {
        let commits = [
            record("c1", "a@x.io", 0, vec![FileChange::new("a/f", ChangeKind::Added)]),
            record(
                "c2",
                "b@x.io",
                10,
                vec![FileChange::new("b/f", ChangeKind::Renamed { from: "a/f".into(), content_changed: true })],
            ),
        ];
        let out = run(&commits, &["b/f"]);
        assert!(kinds(&out).contains(&(EventKind::Commit, "b@x.io", "b/f")));
    }

    #[test]
    fn files_absent_at_head_are_dropped() {
        let commits = [
            record("c1", "a@x.io", 0, vec![FileChange::new("f", ChangeKind::Added), FileChange::new("g", ChangeKind::Added)]),
            record("c2", "a@x.io", 5, vec![FileChange::new("g", ChangeKind::Modified)]),
            record("c3", "a@x.io", 6, vec![FileChange::new("g", ChangeKind::Deleted)]),
        ];
        let out = run(&commits, &["f"]);
        assert!(out.events.iter().all(|e| e.file == "f"));
        assert!(out.commit_index["c2"].files.is_empty());
    }

    #[test]
    fn re_added_path_starts_fresh() {
        let commits = [
            record("c1", "a@x.io", 0, vec![FileChange::new("f", ChangeKind::Added)]),
            record("c2", "a@x.io", 5, vec![FileChange::new("f", ChangeKind::Deleted)]),
            record("c3", "b@x.io", 6, vec![FileChange::new("f", ChangeKind::Added)]),
        ];
        let out = run(&commits, &["f"]);
        assert_eq!(
            kinds(&out),
            [(EventKind::FirstAuthorship, "b@x.io", "f"), (EventKind::Commit, "b@x.io", "f")]
        );
    }

    #[test]
    fn concurrent_creation_earliest_timestamp_wins() {
        let commits = [
            record("bbb", "b@x.io", 20, vec![FileChange::new("f", ChangeKind::Added)]),
            record("aaa", "a@x.io", 10, vec![FileChange::new("f", ChangeKind::Added)]),
            record("ccc", "c@x.io", 10, vec![FileChange::new("f", ChangeKind::Added)]),
        ];
        let out = run(&commits, &["f"]);
        let fa: Vec<_> = out.events.iter().filter(|e| e.kind == EventKind::FirstAuthorship).collect();
        assert_eq!(fa.len(), 1);
        assert_eq!(fa[0].engineer.as_str(), "a@x.io");
        assert_eq!(fa[0].commit_ref, "aaa");
    }

    #[test]
    fn unknown_author_is_created_with_warning() {
        let commits = [record("c1", "new@x.io", 0, vec![FileChange::new("f", ChangeKind::Added)])];
        let mut ids = IdentityMap::default();
        let out = emit_vcs_events(&commits, &mut ids, &snapshot(&["f"]));
        assert_eq!(out.warnings.len(), 1);
        assert!(ids.resolve_email("new@x.io").is_some());
    }

    #[test]
    fn intersection_of_parent_diffs() {
        let m = |p: &str| FileChange::new(p, ChangeKind::Modified);
        assert!(intersect_diffs(&[vec![m("a")], vec![m("b")]]).is_empty());
        assert_eq!(intersect_diffs(&[vec![m("a"), m("f")], vec![m("b"), m("f")]]), vec![m("f")]);
        assert_eq!(
            intersect_diffs(&[vec![m("f"), m("g")], vec![m("f"), m("g")], vec![m("g")]]),
            vec![m("g")]
        );
    }
}
