//! Secretary graph data model.
//!
//! Each user owns a pool of secretaries (snodes). Every secretary carries the
//! same public tag as its siblings and a private tag naming one of the owner's
//! relationship groups. Edges only ever join secretaries of two different
//! users, so the public structure says who is connected but not how each side
//! classifies the connection.

mod error;
mod ops;
mod public;

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

pub use error::GraphError;
pub use ops::GroupSpec;
pub use public::{export_public_view, PublicSnode, PublicView};

use crate::ids::{GroupKey, SnodeId, UserId};

/// Public tag used when a graph is created without an explicit one.
pub const DEFAULT_PUBLIC_TAG: &str = "friend";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    Naive,
    Advanced,
}

/// One relationship instance `r_u(t^j_k)`: a typed group owning `k` snodes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RelationshipGroup {
    pub(crate) key: GroupKey,
    pub(crate) members: BTreeSet<SnodeId>,
}

impl RelationshipGroup {
    pub fn key(&self) -> &GroupKey {
        &self.key
    }

    pub fn label(&self) -> &str {
        self.key.label()
    }

    pub fn capacity(&self) -> usize {
        self.members.len()
    }

    pub fn members(&self) -> &BTreeSet<SnodeId> {
        &self.members
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct User {
    pub(crate) id: UserId,
    pub(crate) threshold: u32,
    pub(crate) scheme: Scheme,
    pub(crate) groups: Vec<RelationshipGroup>,
}

impl User {
    pub fn id(&self) -> &UserId {
        &self.id
    }

    pub fn threshold(&self) -> u32 {
        self.threshold
    }

    pub fn scheme(&self) -> Scheme {
        self.scheme
    }

    pub fn groups(&self) -> &[RelationshipGroup] {
        &self.groups
    }

    pub fn group(&self, key: &GroupKey) -> Option<&RelationshipGroup> {
        self.groups.iter().find(|g| &g.key == key)
    }

    pub(crate) fn group_mut(&mut self, key: &GroupKey) -> Option<&mut RelationshipGroup> {
        self.groups.iter_mut().find(|g| &g.key == key)
    }

    /// `n_u`: total secretaries across all groups.
    pub fn snode_count(&self) -> usize {
        self.groups.iter().map(RelationshipGroup::capacity).sum()
    }

    /// `τ_u`: number of distinct relationship type labels.
    pub fn type_count(&self) -> usize {
        self.groups
            .iter()
            .map(RelationshipGroup::label)
            .collect::<BTreeSet<_>>()
            .len()
    }

    pub fn snodes(&self) -> impl Iterator<Item = SnodeId> + '_ {
        self.groups.iter().flat_map(|g| g.members.iter().copied())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Secretary {
    pub(crate) id: SnodeId,
    pub(crate) owner: UserId,
    pub(crate) creation_index: u32,
    pub(crate) public_tag: String,
    pub(crate) private_tag: GroupKey,
}

impl Secretary {
    pub fn id(&self) -> SnodeId {
        self.id
    }

    pub fn owner(&self) -> &UserId {
        &self.owner
    }

    /// Internal tie-break order; never part of the public view.
    pub fn creation_index(&self) -> u32 {
        self.creation_index
    }

    pub fn public_tag(&self) -> &str {
        &self.public_tag
    }

    pub fn private_tag(&self) -> &GroupKey {
        &self.private_tag
    }
}

/// Undirected edge between two secretaries, stored with the smaller id first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(into = "[SnodeId; 2]", try_from = "[SnodeId; 2]")]
pub struct Edge {
    a: SnodeId,
    b: SnodeId,
}

impl Edge {
    pub fn new(x: SnodeId, y: SnodeId) -> Self {
        if x <= y {
            Edge { a: x, b: y }
        } else {
            Edge { a: y, b: x }
        }
    }

    pub fn endpoints(&self) -> (SnodeId, SnodeId) {
        (self.a, self.b)
    }

    pub fn touches(&self, s: SnodeId) -> bool {
        self.a == s || self.b == s
    }

    pub fn other(&self, s: SnodeId) -> Option<SnodeId> {
        if self.a == s {
            Some(self.b)
        } else if self.b == s {
            Some(self.a)
        } else {
            None
        }
    }
}

impl From<Edge> for [SnodeId; 2] {
    fn from(e: Edge) -> Self {
        [e.a, e.b]
    }
}

impl TryFrom<[SnodeId; 2]> for Edge {
    type Error = String;

    fn try_from([x, y]: [SnodeId; 2]) -> Result<Self, Self::Error> {
        if x == y {
            return Err(format!("edge endpoints coincide at {x}"));
        }
        Ok(Edge::new(x, y))
    }
}

/// Handle for a connection request awaiting the target's decision. The
/// requester's chosen group is kept privately inside the graph.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct PendingRequest {
    pub requester: UserId,
    pub target: UserId,
}

#[derive(Debug, Clone)]
pub struct Graph {
    seed: u64,
    public_tag: String,
    users: BTreeMap<UserId, User>,
    secretaries: BTreeMap<SnodeId, Secretary>,
    edges: BTreeSet<Edge>,
    pending: BTreeMap<PendingRequest, GroupKey>,
    // derived, rebuilt on load
    degree: BTreeMap<SnodeId, u32>,
    links: BTreeMap<(UserId, UserId), Edge>,
}

impl PartialEq for Graph {
    fn eq(&self, other: &Self) -> bool {
        self.seed == other.seed
            && self.users == other.users
            && self.secretaries == other.secretaries
            && self.edges == other.edges
            && self.pending == other.pending
    }
}

impl Eq for Graph {}

fn pair_key(u: &UserId, v: &UserId) -> (UserId, UserId) {
    if u <= v {
        (u.clone(), v.clone())
    } else {
        (v.clone(), u.clone())
    }
}

impl Graph {
    pub fn new(seed: u64) -> Self {
        Self::with_public_tag(seed, DEFAULT_PUBLIC_TAG)
    }

    pub fn with_public_tag(seed: u64, public_tag: impl Into<String>) -> Self {
        Graph {
            seed,
            public_tag: public_tag.into(),
            users: BTreeMap::new(),
            secretaries: BTreeMap::new(),
            edges: BTreeSet::new(),
            pending: BTreeMap::new(),
            degree: BTreeMap::new(),
            links: BTreeMap::new(),
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Tag given to secretaries created from now on.
    pub fn public_tag(&self) -> &str {
        &self.public_tag
    }

    pub fn is_empty(&self) -> bool {
        self.users.is_empty()
    }

    pub fn users(&self) -> impl Iterator<Item = &User> {
        self.users.values()
    }

    pub fn user(&self, id: &UserId) -> Option<&User> {
        self.users.get(id)
    }

    pub fn user_count(&self) -> usize {
        self.users.len()
    }

    pub fn secretaries(&self) -> impl Iterator<Item = &Secretary> {
        self.secretaries.values()
    }

    pub fn secretary(&self, id: SnodeId) -> Option<&Secretary> {
        self.secretaries.get(&id)
    }

    pub fn secretary_count(&self) -> usize {
        self.secretaries.len()
    }

    pub fn edges(&self) -> &BTreeSet<Edge> {
        &self.edges
    }

    pub fn pending(&self) -> impl Iterator<Item = (&PendingRequest, &GroupKey)> {
        self.pending.iter()
    }

    /// Number of edges handled by a secretary.
    pub fn degree(&self, s: SnodeId) -> u32 {
        self.degree.get(&s).copied().unwrap_or(0)
    }

    pub fn edge_between(&self, u: &UserId, v: &UserId) -> Option<Edge> {
        self.links.get(&pair_key(u, v)).copied()
    }

    /// The endpoint of `edge` owned by `user`.
    pub fn endpoint_of(&self, edge: Edge, user: &UserId) -> Option<SnodeId> {
        let (a, b) = edge.endpoints();
        [a, b]
            .into_iter()
            .find(|s| self.secretaries.get(s).is_some_and(|sec| &sec.owner == user))
    }

    /// The group `owner` uses for its connection with `other`, if connected.
    pub fn connection_group(&self, owner: &UserId, other: &UserId) -> Option<&GroupKey> {
        let edge = self.edge_between(owner, other)?;
        let s = self.endpoint_of(edge, owner)?;
        Some(&self.secretaries[&s].private_tag)
    }

    /// Users connected to `user`, with the connecting edge.
    pub fn connections(&self, user: &UserId) -> Vec<(UserId, Edge)> {
        self.links
            .iter()
            .filter_map(|((x, y), e)| {
                if x == user {
                    Some((y.clone(), *e))
                } else if y == user {
                    Some((x.clone(), *e))
                } else {
                    None
                }
            })
            .collect()
    }

    pub(crate) fn require_user(&self, id: &UserId) -> Result<&User, GraphError> {
        self.users
            .get(id)
            .ok_or_else(|| GraphError::UnknownUser(id.clone()))
    }

    fn insert_edge(&mut self, edge: Edge) {
        let (a, b) = edge.endpoints();
        let oa = self.secretaries[&a].owner.clone();
        let ob = self.secretaries[&b].owner.clone();
        *self.degree.entry(a).or_default() += 1;
        *self.degree.entry(b).or_default() += 1;
        self.links.insert(pair_key(&oa, &ob), edge);
        self.edges.insert(edge);
    }

    fn remove_edge(&mut self, edge: Edge) {
        if !self.edges.remove(&edge) {
            return;
        }
        let (a, b) = edge.endpoints();
        for s in [a, b] {
            if let Some(d) = self.degree.get_mut(&s) {
                *d -= 1;
            }
        }
        let oa = self.secretaries[&a].owner.clone();
        let ob = self.secretaries[&b].owner.clone();
        self.links.remove(&pair_key(&oa, &ob));
    }

    /// Rebuild a graph from stored parts and check every invariant.
    pub(crate) fn from_parts(
        seed: u64,
        users: BTreeMap<UserId, User>,
        secretaries: BTreeMap<SnodeId, Secretary>,
        edges: BTreeSet<Edge>,
        pending: BTreeMap<PendingRequest, GroupKey>,
    ) -> Result<Self, String> {
        let public_tag = secretaries
            .values()
            .next()
            .map(|s| s.public_tag.clone())
            .unwrap_or_else(|| DEFAULT_PUBLIC_TAG.to_owned());
        let mut graph = Graph {
            seed,
            public_tag,
            users,
            secretaries,
            edges: BTreeSet::new(),
            pending,
            degree: BTreeMap::new(),
            links: BTreeMap::new(),
        };
        for edge in &edges {
            let (a, b) = edge.endpoints();
            for s in [a, b] {
                if !graph.secretaries.contains_key(&s) {
                    return Err(format!("edge endpoint {s} does not exist"));
                }
            }
            let oa = &graph.secretaries[&a].owner;
            let ob = &graph.secretaries[&b].owner;
            if graph.links.contains_key(&pair_key(oa, ob)) {
                return Err(format!("more than one edge between {oa} and {ob}"));
            }
            graph.insert_edge(*edge);
        }
        graph.check_invariants()?;
        Ok(graph)
    }

    /// Full structural audit. Cheap enough for tests and for every load.
    pub fn check_invariants(&self) -> Result<(), String> {
        for (uid, user) in &self.users {
            if &user.id != uid {
                return Err(format!("user map key {uid} != id {}", user.id));
            }
            if user.groups.is_empty() {
                return Err(format!("user {uid} has no groups"));
            }
            let mut seen = BTreeSet::new();
            let mut tags = BTreeSet::new();
            let mut creation = BTreeSet::new();
            for g in &user.groups {
                g.key.validate()?;
                if !seen.insert((g.key.label(), g.key.instance())) {
                    return Err(format!("user {uid} repeats group {}", g.key));
                }
                if g.members.is_empty() {
                    return Err(format!("group {} of {uid} is empty", g.key));
                }
                for s in &g.members {
                    let sec = self
                        .secretaries
                        .get(s)
                        .ok_or_else(|| format!("group {} of {uid} lists missing {s}", g.key))?;
                    if &sec.owner != uid || sec.private_tag != g.key {
                        return Err(format!("{s} does not point back to {} of {uid}", g.key));
                    }
                    tags.insert(sec.public_tag.as_str());
                    if !creation.insert(sec.creation_index) {
                        return Err(format!("user {uid} repeats creation index {}", sec.creation_index));
                    }
                }
            }
            if tags.len() > 1 {
                return Err(format!("user {uid} has mixed public tags"));
            }
            let n = user.snode_count();
            if n > user.threshold as usize {
                return Err(format!("user {uid} has {n} snodes above threshold {}", user.threshold));
            }
            if user.scheme == Scheme::Naive && user.type_count() > n {
                return Err(format!("user {uid} has more types than snodes"));
            }
        }
        for (sid, sec) in &self.secretaries {
            if &sec.id != sid {
                return Err(format!("secretary map key {sid} != id {}", sec.id));
            }
            let owner = self
                .users
                .get(&sec.owner)
                .ok_or_else(|| format!("{sid} owned by missing user {}", sec.owner))?;
            if !owner
                .group(&sec.private_tag)
                .is_some_and(|g| g.members.contains(sid))
            {
                return Err(format!("{sid} missing from its group {}", sec.private_tag));
            }
        }
        let mut recount: BTreeMap<SnodeId, u32> = BTreeMap::new();
        let mut pairs = BTreeSet::new();
        for e in &self.edges {
            let (a, b) = e.endpoints();
            let oa = &self.secretaries[&a].owner;
            let ob = &self.secretaries[&b].owner;
            if oa == ob {
                return Err(format!("edge {a}-{b} joins secretaries of one user"));
            }
            if !pairs.insert(pair_key(oa, ob)) {
                return Err(format!("multiple edges between {oa} and {ob}"));
            }
            *recount.entry(a).or_default() += 1;
            *recount.entry(b).or_default() += 1;
        }
        for s in self.secretaries.keys() {
            if self.degree(*s) != recount.get(s).copied().unwrap_or(0) {
                return Err(format!("cached degree of {s} is stale"));
            }
        }
        for (req, group) in &self.pending {
            let requester = self
                .users
                .get(&req.requester)
                .ok_or_else(|| format!("pending request from missing {}", req.requester))?;
            if !self.users.contains_key(&req.target) || req.requester == req.target {
                return Err(format!("pending request to bad target {}", req.target));
            }
            if requester.group(group).is_none() {
                return Err(format!("pending request names missing group {group}"));
            }
            if pairs.contains(&pair_key(&req.requester, &req.target)) {
                return Err(format!("pending request between connected {} and {}", req.requester, req.target));
            }
            let reverse = PendingRequest {
                requester: req.target.clone(),
                target: req.requester.clone(),
            };
            if self.pending.contains_key(&reverse) {
                return Err(format!("requests pending both ways between {} and {}", req.requester, req.target));
            }
        }
        Ok(())
    }
}
