//! Scripted miniature git repositories for tests.

use std::collections::{BTreeMap, HashMap};
use std::path::Path;

use git2::{FileMode, Oid, Repository, Signature, Time};

/// Full file state of a commit: path → content.
pub type Tree = BTreeMap<String, String>;

pub struct FixtureRepo {
    pub repo: Repository,
    states: HashMap<Oid, Tree>,
}

impl FixtureRepo {
    /// Initializes a repository whose HEAD points at the unborn `main` branch.
    pub fn init(path: &Path) -> Self {
        let repo = Repository::init(path).expect("init fixture repo");
        repo.set_head("refs/heads/main").expect("set HEAD");
        Self {
            repo,
            states: HashMap::new(),
        }
    }

    fn write_tree(&self, files: &Tree) -> Oid {
        let mut nested: BTreeMap<String, Tree> = BTreeMap::new();
        let mut builder = self.repo.treebuilder(None).unwrap();
        for (path, content) in files {
            match path.split_once('/') {
                Some((dir, rest)) => {
                    nested
                        .entry(dir.to_owned())
                        .or_default()
                        .insert(rest.to_owned(), content.clone());
                }
                None => {
                    let blob = self.repo.blob(content.as_bytes()).unwrap();
                    builder.insert(path, blob, FileMode::Blob.into()).unwrap();
                }
            }
        }
        for (dir, sub) in &nested {
            let oid = self.write_tree(sub);
            builder.insert(dir, oid, FileMode::Tree.into()).unwrap();
        }
        builder.write().unwrap()
    }

    /// Commits an explicit file state on top of `parents` and moves `main`.
    pub fn commit_tree(&mut self, parents: &[Oid], author_email: &str, time_secs: i64, files: Tree) -> Oid {
        let tree = self.repo.find_tree(self.write_tree(&files)).unwrap();
        let name = author_email.split('@').next().unwrap_or(author_email);
        let sig = Signature::new(name, author_email, &Time::new(time_secs, 0)).unwrap();
        let parent_commits: Vec<_> = parents.iter().map(|p| self.repo.find_commit(*p).unwrap()).collect();
        let refs: Vec<_> = parent_commits.iter().collect();
        let oid = self
            .repo
            .commit(None, &sig, &sig, &format!("change at {time_secs}"), &tree, &refs)
            .unwrap();
        self.repo.reference("refs/heads/main", oid, true, "fixture").unwrap();
        self.states.insert(oid, files);
        oid
    }

    /// Applies `changes` (path → new content, `None` deletes) to the first
    /// parent's state and commits the result.
    pub fn commit(
        &mut self,
        parents: &[Oid],
        author_email: &str,
        time_secs: i64,
        changes: &[(&str, Option<&str>)],
    ) -> Oid {
        let mut files = parents
            .first()
            .map(|p| self.states[p].clone())
            .unwrap_or_default();
        for (path, content) in changes {
            match content {
                Some(c) => files.insert(path.to_string(), c.to_string()),
                None => files.remove(*path),
            };
        }
        self.commit_tree(parents, author_email, time_secs, files)
    }

    pub fn state(&self, oid: Oid) -> &Tree {
        &self.states[&oid]
    }

    pub fn branch(&self, name: &str, oid: Oid) {
        self.repo
            .reference(&format!("refs/heads/{name}"), oid, true, "fixture")
            .unwrap();
    }
}
