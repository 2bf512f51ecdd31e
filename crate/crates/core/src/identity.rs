//! Canonical developer identities.
//!
//! Git authors frequently commit under several addresses, and the review and
//! meeting exports refer to people either by email or by a platform profile
//! reference. All of these are folded into one [`Engineer`] per person by a
//! union-find over shared (normalized) emails and shared profile references.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};

/// Canonical engineer identifier: the smallest normalized email of the group.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct EngineerId(String);

impl EngineerId {
    pub fn new(id: impl Into<String>) -> Self {
        Self(id.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for EngineerId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// One identity as observed in a single data source.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RawActor {
    pub name: String,
    pub email: String,
    pub profile_ref: Option<String>,
}

impl RawActor {
    pub fn new(name: impl Into<String>, email: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            email: email.into(),
            profile_ref: None,
        }
    }

    pub fn with_profile(mut self, profile_ref: impl Into<String>) -> Self {
        self.profile_ref = Some(profile_ref.into());
        self
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Engineer {
    pub id: EngineerId,
    pub emails: BTreeSet<String>,
    pub names: BTreeSet<String>,
    pub profile_refs: BTreeSet<String>,
}

impl Engineer {
    /// Raw actors carrying every alias. Emails beyond the first are not
    /// linked to each other by these actors alone; see [`merge_engineers`].
    pub fn as_actors(&self) -> Vec<RawActor> {
        let mut out = Vec::new();
        let mut names = self.names.iter();
        for email in &self.emails {
            out.push(RawActor::new(
                names.next().cloned().unwrap_or_default(),
                email.clone(),
            ));
        }
        let anchor = self.emails.iter().next().cloned().unwrap_or_default();
        for name in names {
            out.push(RawActor::new(name.clone(), anchor.clone()));
        }
        for profile in &self.profile_refs {
            out.push(RawActor::new("", anchor.clone()).with_profile(profile.clone()));
        }
        out
    }
}

pub fn normalize_email(email: &str) -> String {
    email.trim().to_lowercase()
}

struct DisjointSets {
    parent: Vec<usize>,
}

impl DisjointSets {
    fn new(n: usize) -> Self {
        Self {
            parent: (0..n).collect(),
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.parent[ra.max(rb)] = ra.min(rb);
        }
    }
}

/// Collapses actors that share a normalized email or a profile reference,
/// transitively. The result is sorted by id and independent of input order.
pub fn merge_identities(raw: &[RawActor]) -> Vec<Engineer> {
    merge_linked(raw, &[])
}

/// Re-merges engineers, e.g. after adding aliases. Every engineer's aliases
/// stay together; engineers sharing an alias collapse.
pub fn merge_engineers(engineers: &[Engineer]) -> Vec<Engineer> {
    let mut raw = Vec::new();
    let mut links = Vec::new();
    for engineer in engineers {
        let start = raw.len();
        raw.extend(engineer.as_actors());
        links.extend((start + 1..raw.len()).map(|i| (start, i)));
    }
    merge_linked(&raw, &links)
}

/// Union-find over shared emails, shared profiles and explicit index links.
fn merge_linked(raw: &[RawActor], links: &[(usize, usize)]) -> Vec<Engineer> {
    let mut sets = DisjointSets::new(raw.len());
    for &(a, b) in links {
        sets.union(a, b);
    }
    let mut by_email: HashMap<String, usize> = HashMap::new();
    let mut by_profile: HashMap<&str, usize> = HashMap::new();

    for (idx, actor) in raw.iter().enumerate() {
        let email = normalize_email(&actor.email);
        match by_email.get(&email) {
            Some(&first) => sets.union(first, idx),
            None => {
                by_email.insert(email, idx);
            }
        }
        if let Some(profile) = actor.profile_ref.as_deref() {
            match by_profile.get(profile) {
                Some(&first) => sets.union(first, idx),
                None => {
                    by_profile.insert(profile, idx);
                }
            }
        }
    }

    let mut groups: BTreeMap<usize, Vec<&RawActor>> = BTreeMap::new();
    for (idx, actor) in raw.iter().enumerate() {
        groups.entry(sets.find(idx)).or_default().push(actor);
    }

    let mut engineers: Vec<Engineer> = groups
        .into_values()
        .map(|members| {
            let emails: BTreeSet<String> =
                members.iter().map(|a| normalize_email(&a.email)).collect();
            let names = members
                .iter()
                .map(|a| a.name.trim())
                .filter(|n| !n.is_empty())
                .map(str::to_owned)
                .collect();
            let profile_refs = members
                .iter()
                .filter_map(|a| a.profile_ref.clone())
                .collect();
            Engineer {
                id: EngineerId(emails.iter().next().cloned().unwrap_or_default()),
                emails,
                names,
                profile_refs,
            }
        })
        .collect();
    engineers.sort_by(|a, b| a.id.cmp(&b.id));
    engineers
}

/// A reference to a person in review or meeting exports.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ActorRef {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub email: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub profile_ref: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
}

impl ActorRef {
    pub fn email(email: impl Into<String>) -> Self {
        Self {
            email: Some(email.into()),
            ..Self::default()
        }
    }

    pub fn profile(profile_ref: impl Into<String>) -> Self {
        Self {
            profile_ref: Some(profile_ref.into()),
            ..Self::default()
        }
    }

    /// Identity links this reference contributes to merging. Refs without an
    /// email cannot create an engineer on their own.
    pub fn as_raw(&self) -> Option<RawActor> {
        let email = self.email.as_ref()?;
        Some(RawActor {
            name: self.name.clone().unwrap_or_default(),
            email: email.clone(),
            profile_ref: self.profile_ref.clone(),
        })
    }

    pub fn describe(&self) -> String {
        match (&self.email, &self.profile_ref) {
            (Some(e), _) => e.clone(),
            (None, Some(p)) => format!("profile:{p}"),
            (None, None) => "<empty actor>".to_owned(),
        }
    }
}

/// Lookup from any known alias to the canonical engineer.
#[derive(Debug, Clone, Default)]
pub struct IdentityMap {
    engineers: BTreeMap<EngineerId, Engineer>,
    by_email: HashMap<String, EngineerId>,
    by_profile: HashMap<String, EngineerId>,
}

impl IdentityMap {
    pub fn new(engineers: Vec<Engineer>) -> Self {
        let mut map = Self::default();
        for engineer in engineers {
            map.insert(engineer);
        }
        map
    }

    pub fn from_actors(raw: &[RawActor]) -> Self {
        Self::new(merge_identities(raw))
    }

    fn insert(&mut self, engineer: Engineer) {
        for email in &engineer.emails {
            self.by_email.insert(email.clone(), engineer.id.clone());
        }
        for profile in &engineer.profile_refs {
            self.by_profile.insert(profile.clone(), engineer.id.clone());
        }
        self.engineers.insert(engineer.id.clone(), engineer);
    }

    pub fn resolve_email(&self, email: &str) -> Option<&EngineerId> {
        self.by_email.get(&normalize_email(email))
    }

    pub fn resolve(&self, actor: &ActorRef) -> Option<&EngineerId> {
        actor
            .email
            .as_deref()
            .and_then(|e| self.resolve_email(e))
            .or_else(|| {
                actor
                    .profile_ref
                    .as_deref()
                    .and_then(|p| self.by_profile.get(p))
            })
    }

    /// Resolves `email`, creating a fresh single-alias engineer when unknown.
    /// Returns whether a new engineer was created.
    pub fn resolve_or_create(&mut self, name: &str, email: &str) -> (EngineerId, bool) {
        if let Some(id) = self.resolve_email(email) {
            return (id.clone(), false);
        }
        let engineer = merge_identities(&[RawActor::new(name, email)]).remove(0);
        let id = engineer.id.clone();
        self.insert(engineer);
        (id, true)
    }

    pub fn get(&self, id: &EngineerId) -> Option<&Engineer> {
        self.engineers.get(id)
    }

    pub fn engineers(&self) -> impl Iterator<Item = &Engineer> {
        self.engineers.values()
    }

    pub fn len(&self) -> usize {
        self.engineers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.engineers.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Partition oracle: plain quadratic label propagation over the pair list.
    fn oracle_partition(raw: &[RawActor]) -> BTreeSet<BTreeSet<String>> {
        let n = raw.len();
        let mut label: Vec<usize> = (0..n).collect();
        loop {
            let mut changed = false;
            for i in 0..n {
                for j in 0..n {
                    let linked = normalize_email(&raw[i].email) == normalize_email(&raw[j].email)
                        || (raw[i].profile_ref.is_some() && raw[i].profile_ref == raw[j].profile_ref);
                    if linked && label[i] != label[j] {
                        let m = label[i].min(label[j]);
                        label[i] = m;
                        label[j] = m;
                        changed = true;
                    }
                }
            }
            if !changed {
                break;
            }
        }
        let mut groups: BTreeMap<usize, BTreeSet<String>> = BTreeMap::new();
        for (i, a) in raw.iter().enumerate() {
            groups.entry(label[i]).or_default().insert(normalize_email(&a.email));
        }
        groups.into_values().collect()
    }

    fn partition(engineers: &[Engineer]) -> BTreeSet<BTreeSet<String>> {
        engineers.iter().map(|e| e.emails.clone()).collect()
    }

    #[test]
    fn same_email_modulo_case_merges() {
        let out = merge_identities(&[RawActor::new("Ann", "a@x.io"), RawActor::new("Ann K.", " A@X.IO ")]);
        assert_eq!(out.len(), 1);
        let names: Vec<_> = out[0].names.iter().map(String::as_str).collect();
        assert_eq!(names, ["Ann", "Ann K."]);
        assert_eq!(out[0].id.as_str(), "a@x.io");
    }

    #[test]
    fn distinct_emails_stay_apart() {
        let out = merge_identities(&[RawActor::new("Ann", "a@x.io"), RawActor::new("Bob", "b@x.io")]);
        assert_eq!(out.len(), 2);
    }

    #[test]
    fn shared_profile_merges_transitively() {
        let raw = [
            RawActor::new("Ann", "a@x.io").with_profile("P1"),
            RawActor::new("Ann", "ann@y.io").with_profile("P1"),
            RawActor::new("A. K.", "ANN@y.io"),
        ];
        let out = merge_identities(&raw);
        assert_eq!(out.len(), 1);
        assert_eq!(partition(&out), oracle_partition(&raw));
        assert!(out[0].emails.contains("a@x.io") && out[0].emails.contains("ann@y.io"));
    }

    #[test]
    fn empty_input() {
        assert!(merge_identities(&[]).is_empty());
    }

    #[test]
    fn resolve_by_email_and_profile() {
        let map = IdentityMap::from_actors(&[
            RawActor::new("Ann", "a@x.io").with_profile("P1"),
            RawActor::new("Bob", "b@x.io"),
        ]);
        assert_eq!(map.resolve(&ActorRef::profile("P1")).unwrap().as_str(), "a@x.io");
        assert_eq!(map.resolve(&ActorRef::email("B@x.io")).unwrap().as_str(), "b@x.io");
        assert!(map.resolve(&ActorRef::profile("P9")).is_none());
    }

    #[test]
    fn resolve_or_create_adds_engineer() {
        let mut map = IdentityMap::default();
        let (id, created) = map.resolve_or_create("Zed", "Z@q.io");
        assert!(created);
        assert_eq!(id.as_str(), "z@q.io");
        assert!(!map.resolve_or_create("Zed", "z@q.io").1);
        assert_eq!(map.len(), 1);
    }

    fn actor_strategy() -> impl Strategy<Value = RawActor> {
        (
            "[ab]{0,1}",
            prop::sample::select(vec!["a@x.io", "A@x.io", "b@x.io", "c@y.io", " d@y.io", "e@z.io"]),
            prop::option::of(prop::sample::select(vec!["P1", "P2", "P3"])),
        )
            .prop_map(|(name, email, profile)| RawActor {
                name,
                email: email.to_owned(),
                profile_ref: profile.map(str::to_owned),
            })
    }

    proptest! {
        #[test]
        fn matches_partition_oracle(raw in prop::collection::vec(actor_strategy(), 0..12)) {
            let out = merge_identities(&raw);
            prop_assert_eq!(partition(&out), oracle_partition(&raw));
            let mut seen = BTreeSet::new();
            for e in &out {
                prop_assert!(!e.emails.is_empty());
                for email in &e.emails {
                    prop_assert!(seen.insert(email.clone()), "email shared across engineers");
                }
            }
        }

        #[test]
        fn idempotent(raw in prop::collection::vec(actor_strategy(), 0..12)) {
            let once = merge_identities(&raw);
            prop_assert_eq!(merge_engineers(&once), once);
        }

        #[test]
        fn order_independent(raw in prop::collection::vec(actor_strategy(), 0..12), seed in any::<u64>()) {
            use rand::{seq::SliceRandom, SeedableRng};
            let mut shuffled = raw.clone();
            shuffled.shuffle(&mut rand::rngs::StdRng::seed_from_u64(seed));
            prop_assert_eq!(merge_identities(&shuffled), merge_identities(&raw));
        }
    }
}
