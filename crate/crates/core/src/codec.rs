//! Canonical JSON for graphs and public views, plus DOT export.
//!
//! All documents are written through [`canonical_json`]: object keys sorted,
//! two-space indentation, trailing newline. Equal values give equal bytes.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::graph::{
    Edge, Graph, PendingRequest, PublicSnode, PublicView, RelationshipGroup, Scheme, Secretary,
    User,
};
use crate::ids::{GroupKey, SnodeId, UserId};

pub const GRAPH_FORMAT_VERSION: u32 = 1;
pub const PUBLIC_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum CodecError {
    #[error("unsupported document version {found:?} (expected {expected})")]
    VersionMismatch { expected: u32, found: Option<Value> },
    #[error("malformed input: {0}")]
    MalformedInput(String),
}

/// Serialize with sorted keys and a trailing newline.
pub fn canonical_json<T: Serialize + ?Sized>(value: &T) -> Vec<u8> {
    // serde_json::Value keeps object keys in a BTreeMap, so routing through
    // it sorts every level.
    let value = serde_json::to_value(value).expect("document types always serialize");
    let mut out = serde_json::to_vec_pretty(&value).expect("Value always serializes");
    out.push(b'\n');
    out
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GraphDoc {
    version: u32,
    seed: u64,
    users: BTreeMap<UserId, UserDoc>,
    secretaries: BTreeMap<SnodeId, SecretaryDoc>,
    edges: Vec<Edge>,
    pending: Vec<PendingDoc>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct UserDoc {
    scheme: Scheme,
    threshold: u32,
    type_count: usize,
    snode_count: usize,
    groups: Vec<GroupDoc>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GroupDoc {
    label: String,
    instance: u32,
    subtype: Option<String>,
    capacity: usize,
    members: Vec<SnodeId>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SecretaryDoc {
    owner: UserId,
    creation_index: u32,
    public_tag: String,
    private_tag: GroupKey,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PendingDoc {
    requester: UserId,
    target: UserId,
    requester_group: GroupKey,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PublicDoc {
    version: u32,
    users: BTreeSet<UserId>,
    snodes: BTreeMap<SnodeId, PublicSnode>,
    edges: Vec<Edge>,
}

pub fn serialize_graph(graph: &Graph) -> Vec<u8> {
    let doc = GraphDoc {
        version: GRAPH_FORMAT_VERSION,
        seed: graph.seed(),
        users: graph
            .users()
            .map(|u| {
                let groups = u
                    .groups()
                    .iter()
                    .map(|g| GroupDoc {
                        label: g.key().label().to_owned(),
                        instance: g.key().instance(),
                        subtype: g.key().subtype().map(str::to_owned),
                        capacity: g.capacity(),
                        members: g.members().iter().copied().collect(),
                    })
                    .collect();
                let doc = UserDoc {
                    scheme: u.scheme(),
                    threshold: u.threshold(),
                    type_count: u.type_count(),
                    snode_count: u.snode_count(),
                    groups,
                };
                (u.id().clone(), doc)
            })
            .collect(),
        secretaries: graph
            .secretaries()
            .map(|s| {
                let doc = SecretaryDoc {
                    owner: s.owner().clone(),
                    creation_index: s.creation_index(),
                    public_tag: s.public_tag().to_owned(),
                    private_tag: s.private_tag().clone(),
                };
                (s.id(), doc)
            })
            .collect(),
        edges: graph.edges().iter().copied().collect(),
        pending: graph
            .pending()
            .map(|(req, group)| PendingDoc {
                requester: req.requester.clone(),
                target: req.target.clone(),
                requester_group: group.clone(),
            })
            .collect(),
    };
    canonical_json(&doc)
}

fn parse_versioned(bytes: &[u8], expected: u32) -> Result<Value, CodecError> {
    let value: Value =
        serde_json::from_slice(bytes).map_err(|e| CodecError::MalformedInput(e.to_string()))?;
    let found = value.get("version").cloned();
    if found.as_ref().and_then(Value::as_u64) != Some(u64::from(expected)) {
        return Err(CodecError::VersionMismatch { expected, found });
    }
    Ok(value)
}

pub fn deserialize_graph(bytes: &[u8]) -> Result<Graph, CodecError> {
    let value = parse_versioned(bytes, GRAPH_FORMAT_VERSION)?;
    let doc: GraphDoc =
        serde_json::from_value(value).map_err(|e| CodecError::MalformedInput(e.to_string()))?;
    let malformed = CodecError::MalformedInput;

    let mut users = BTreeMap::new();
    for (id, u) in doc.users {
        let mut groups = Vec::with_capacity(u.groups.len());
        for g in u.groups {
            if g.capacity != g.members.len() {
                return Err(malformed(format!("group {} capacity mismatch", g.label)));
            }
            groups.push(RelationshipGroup {
                key: GroupKey::new(g.label, g.instance, g.subtype),
                members: g.members.into_iter().collect(),
            });
        }
        let user = User {
            id: id.clone(),
            threshold: u.threshold,
            scheme: u.scheme,
            groups,
        };
        if user.snode_count() != u.snode_count || user.type_count() != u.type_count {
            return Err(malformed(format!("user {id} counts disagree with its groups")));
        }
        users.insert(id, user);
    }
    let secretaries = doc
        .secretaries
        .into_iter()
        .map(|(id, s)| {
            let sec = Secretary {
                id,
                owner: s.owner,
                creation_index: s.creation_index,
                public_tag: s.public_tag,
                private_tag: s.private_tag,
            };
            (id, sec)
        })
        .collect();
    let edge_count = doc.edges.len();
    let edges: BTreeSet<Edge> = doc.edges.into_iter().collect();
    if edges.len() != edge_count {
        return Err(malformed("duplicate edges".into()));
    }
    let mut pending = BTreeMap::new();
    for p in doc.pending {
        let req = PendingRequest {
            requester: p.requester,
            target: p.target,
        };
        if pending.insert(req, p.requester_group).is_some() {
            return Err(malformed("duplicate pending request".into()));
        }
    }
    Graph::from_parts(doc.seed, users, secretaries, edges, pending).map_err(malformed)
}

pub fn public_view_to_json(view: &PublicView) -> Vec<u8> {
    canonical_json(&PublicDoc {
        version: PUBLIC_FORMAT_VERSION,
        users: view.users.clone(),
        snodes: view.snodes.clone(),
        edges: view.edges.iter().copied().collect(),
    })
}

pub fn public_view_from_json(bytes: &[u8]) -> Result<PublicView, CodecError> {
    let value = parse_versioned(bytes, PUBLIC_FORMAT_VERSION)?;
    let doc: PublicDoc =
        serde_json::from_value(value).map_err(|e| CodecError::MalformedInput(e.to_string()))?;
    let view = PublicView {
        users: doc.users,
        snodes: doc.snodes,
        edges: doc.edges.into_iter().collect(),
    };
    for (id, s) in &view.snodes {
        if !view.users.contains(&s.owner) {
            return Err(CodecError::MalformedInput(format!("{id} owned by unknown user")));
        }
    }
    for e in &view.edges {
        let (a, b) = e.endpoints();
        match (view.owner(a), view.owner(b)) {
            (Some(x), Some(y)) if x != y => {}
            _ => return Err(CodecError::MalformedInput(format!("bad edge {a}-{b}"))),
        }
    }
    Ok(view)
}

fn dot_quote(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

/// Undirected DOT graph: one cluster per user, snodes labelled by public tag.
pub fn export_dot(view: &PublicView) -> String {
    let mut out = String::from("graph public_view {\n");
    for (i, user) in view.users.iter().enumerate() {
        let _ = writeln!(out, "  subgraph cluster_{i} {{");
        let _ = writeln!(out, "    label={};", dot_quote(user.as_str()));
        for s in view.snodes_of(user) {
            let tag = &view.snodes[&s].public_tag;
            let _ = writeln!(out, "    {} [label={}];", dot_quote(&s.to_string()), dot_quote(tag));
        }
        out.push_str("  }\n");
    }
    for e in &view.edges {
        let (a, b) = e.endpoints();
        let _ = writeln!(out, "  {} -- {};", dot_quote(&a.to_string()), dot_quote(&b.to_string()));
    }
    out.push_str("}\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Graph {
        let mut g = Graph::new(42);
        g.setup_naive("alice", 6, 3, 10, &["friend", "enemy", "acquaintance"], 1)
            .unwrap();
        g.setup_advanced(
            "bob",
            &[
                crate::graph::GroupSpec::new("competitor", 1, 4),
                crate::graph::GroupSpec::new("friend", 1, 2).with_subtype("close"),
            ],
            6,
            2,
        )
        .unwrap();
        g.setup_naive("carol", 2, 1, 2, &["friend"], 3).unwrap();
        let (a, b, c) = ("alice".into(), "bob".into(), "carol".into());
        g.connect(&a, &GroupKey::simple("acquaintance"), &b, &GroupKey::simple("competitor"))
            .unwrap();
        g.request_connection(&c, &GroupKey::simple("friend"), &a).unwrap();
        g
    }

    #[test]
    fn graph_round_trip() {
        let g = sample();
        let bytes = serialize_graph(&g);
        let back = deserialize_graph(&bytes).unwrap();
        assert_eq!(back, g);
        assert_eq!(serialize_graph(&back), bytes);
    }

    #[test]
    fn graph_top_level_keys() {
        let v: Value = serde_json::from_slice(&serialize_graph(&sample())).unwrap();
        let keys: Vec<_> = v.as_object().unwrap().keys().cloned().collect();
        assert_eq!(keys, ["edges", "pending", "secretaries", "seed", "users", "version"]);
    }

    #[test]
    fn version_and_truncation_errors() {
        let bytes = serialize_graph(&sample());
        assert!(matches!(
            deserialize_graph(&bytes[..bytes.len() / 2]),
            Err(CodecError::MalformedInput(_))
        ));
        let mut v: Value = serde_json::from_slice(&bytes).unwrap();
        v["version"] = Value::from(9);
        assert!(matches!(
            deserialize_graph(&serde_json::to_vec(&v).unwrap()),
            Err(CodecError::VersionMismatch { expected: 1, .. })
        ));
    }

    #[test]
    fn tampered_back_pointer_is_rejected() {
        let mut v: Value = serde_json::from_slice(&serialize_graph(&sample())).unwrap();
        let first = v["secretaries"].as_object().unwrap().keys().next().unwrap().clone();
        v["secretaries"][&first]["private_tag"] = Value::from("zzz#1");
        assert!(matches!(
            deserialize_graph(&serde_json::to_vec(&v).unwrap()),
            Err(CodecError::MalformedInput(_))
        ));
    }

    #[test]
    fn public_view_keys_and_round_trip() {
        let view = sample().export_public_view();
        let bytes = public_view_to_json(&view);
        let v: Value = serde_json::from_slice(&bytes).unwrap();
        let keys: Vec<_> = v.as_object().unwrap().keys().cloned().collect();
        assert_eq!(keys, ["edges", "snodes", "users", "version"]);
        assert_eq!(public_view_from_json(&bytes).unwrap(), view);
        let text = String::from_utf8(bytes).unwrap();
        for secret in ["enemy", "acquaintance", "competitor", "close", "creation_index", "pending"] {
            assert!(!text.contains(secret), "public view leaks {secret}");
        }
    }

    #[test]
    fn dot_of_empty_view() {
        assert_eq!(export_dot(&PublicView::default()), "graph public_view {\n}\n");
    }

    #[test]
    fn dot_counts() {
        let mut g = Graph::new(0);
        g.setup_naive("a", 6, 2, 6, &["x", "y"], 1).unwrap();
        g.setup_naive("b", 6, 3, 6, &["p", "q", "r"], 2).unwrap();
        g.connect(&"a".into(), &GroupKey::simple("x"), &"b".into(), &GroupKey::simple("r"))
            .unwrap();
        let dot = export_dot(&g.export_public_view());
        let nodes = dot.lines().filter(|l| l.contains("[label=")).count();
        let edges = dot.lines().filter(|l| l.contains(" -- ")).count();
        assert_eq!((nodes, edges), (12, 1));
        assert_eq!(dot.matches("subgraph cluster_").count(), 2);
    }
}
