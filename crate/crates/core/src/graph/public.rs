//! The adversary-visible projection of a graph.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::{Edge, Graph};
use crate::ids::{SnodeId, UserId};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PublicSnode {
    pub owner: UserId,
    pub public_tag: String,
}

/// Users, secretaries with their public tag, and edges. Nothing else.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PublicView {
    pub users: BTreeSet<UserId>,
    pub snodes: BTreeMap<SnodeId, PublicSnode>,
    pub edges: BTreeSet<Edge>,
}

impl PublicView {
    pub fn snodes_of<'a>(&'a self, user: &'a UserId) -> impl Iterator<Item = SnodeId> + 'a {
        self.snodes
            .iter()
            .filter(move |(_, s)| &s.owner == user)
            .map(|(id, _)| *id)
    }

    pub fn owner(&self, s: SnodeId) -> Option<&UserId> {
        self.snodes.get(&s).map(|p| &p.owner)
    }

    /// Public degree of a secretary.
    pub fn degree(&self, s: SnodeId) -> usize {
        self.edges.iter().filter(|e| e.touches(s)).count()
    }
}

pub fn export_public_view(graph: &Graph) -> PublicView {
    graph.export_public_view()
}

impl Graph {
    pub fn export_public_view(&self) -> PublicView {
        PublicView {
            users: self.users.keys().cloned().collect(),
            snodes: self
                .secretaries
                .values()
                .map(|s| {
                    (
                        s.id,
                        PublicSnode {
                            owner: s.owner.clone(),
                            public_tag: s.public_tag.clone(),
                        },
                    )
                })
                .collect(),
            edges: self.edges.clone(),
        }
    }
}
