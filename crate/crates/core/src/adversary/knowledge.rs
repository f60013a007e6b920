use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::AttackError;
use crate::graph::{Edge, Graph, PublicView};
use crate::ids::{GroupKey, SnodeId, UserId};

/// One coalition member's own connection, as that member sees it.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct KnownEdge {
    pub member: UserId,
    pub member_snode: SnodeId,
    /// The member's own choice; says nothing about the other side.
    pub member_group: GroupKey,
    pub target: UserId,
    pub target_snode: SnodeId,
    pub edge: Edge,
}

/// Everything an adversary can use: the public view, pooled coalition
/// edges, and any target labels learned out of band.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Knowledge {
    pub public: PublicView,
    pub coalition: BTreeSet<UserId>,
    pub edges: Vec<KnownEdge>,
    pub learned: BTreeMap<SnodeId, String>,
}

impl Knowledge {
    /// A seeker's knowledge: the public view alone.
    pub fn public_only(view: PublicView) -> Self {
        Knowledge {
            public: view,
            coalition: BTreeSet::new(),
            edges: Vec::new(),
            learned: BTreeMap::new(),
        }
    }

    /// Pool what each coalition member knows locally. Edges between two
    /// members are dropped: they reveal nothing about outsiders.
    pub fn gather(graph: &Graph, coalition: &BTreeSet<UserId>) -> Result<Self, AttackError> {
        if coalition.is_empty() {
            return Err(AttackError::EmptyCoalition);
        }
        let mut edges = Vec::new();
        for member in coalition {
            if graph.user(member).is_none() {
                return Err(AttackError::UnknownUser(member.clone()));
            }
            for (other, edge) in graph.connections(member) {
                if coalition.contains(&other) {
                    continue;
                }
                let member_snode = graph.endpoint_of(edge, member).expect("edge touches member");
                let target_snode = edge.other(member_snode).expect("edge touches member");
                edges.push(KnownEdge {
                    member: member.clone(),
                    member_snode,
                    member_group: graph.secretary(member_snode).expect("exists").private_tag().clone(),
                    target: other,
                    target_snode,
                    edge,
                });
            }
        }
        edges.sort();
        Ok(Knowledge {
            public: graph.export_public_view(),
            coalition: coalition.clone(),
            edges,
            learned: BTreeMap::new(),
        })
    }

    /// Users reached by the coalition, with the edges reaching each.
    pub fn targets(&self) -> BTreeMap<&UserId, Vec<&KnownEdge>> {
        let mut out: BTreeMap<&UserId, Vec<&KnownEdge>> = BTreeMap::new();
        for e in &self.edges {
            out.entry(&e.target).or_default().push(e);
        }
        out
    }

    /// Edges known to end at the same target secretary.
    pub fn co_members(&self, s: SnodeId) -> impl Iterator<Item = &KnownEdge> {
        self.edges.iter().filter(move |e| e.target_snode == s)
    }
}
