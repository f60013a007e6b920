//! Mutating operations: setup, connection, and secretary management.

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::{Edge, Graph, GraphError, PendingRequest, RelationshipGroup, Scheme, Secretary, User};
use crate::ids::{GroupKey, SnodeId, UserId};
use crate::seeding::rng_from;

/// One entry of an advanced setup: `capacity` snodes for `label#instance`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupSpec {
    pub label: String,
    #[serde(default = "one")]
    pub instance: u32,
    pub capacity: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub subtype: Option<String>,
}

fn one() -> u32 {
    1
}

impl GroupSpec {
    pub fn new(label: impl Into<String>, instance: u32, capacity: u32) -> Self {
        GroupSpec {
            label: label.into(),
            instance,
            capacity,
            subtype: None,
        }
    }

    pub fn with_subtype(mut self, subtype: impl Into<String>) -> Self {
        self.subtype = Some(subtype.into());
        self
    }

    pub fn key(&self) -> GroupKey {
        GroupKey::new(self.label.clone(), self.instance, self.subtype.clone())
    }
}

impl Graph {
    /// Naive setup: `n` snodes spread evenly over `tau` types, remainder going
    /// one each to the first `n mod tau` labels.
    pub fn setup_naive<S: AsRef<str>>(
        &mut self,
        user_id: impl Into<UserId>,
        n: u32,
        tau: u32,
        threshold: u32,
        type_labels: &[S],
        seed: u64,
    ) -> Result<&User, GraphError> {
        let user_id = user_id.into();
        if tau == 0 || n == 0 || threshold == 0 {
            return Err(GraphError::ConstraintViolation(
                "n, tau and threshold must be positive".into(),
            ));
        }
        if tau > n || n > threshold {
            return Err(GraphError::ConstraintViolation(format!(
                "need tau <= n <= th, got tau={tau}, n={n}, th={threshold}"
            )));
        }
        if type_labels.len() != tau as usize {
            return Err(GraphError::ConstraintViolation(format!(
                "expected {tau} type labels, got {}",
                type_labels.len()
            )));
        }
        let mut seen = BTreeSet::new();
        for label in type_labels {
            if !seen.insert(label.as_ref()) {
                return Err(GraphError::DuplicateLabel(label.as_ref().to_owned()));
            }
        }
        let base = n / tau;
        let extra = n % tau;
        let layout = type_labels
            .iter()
            .enumerate()
            .map(|(i, label)| {
                let cap = base + u32::from((i as u32) < extra);
                (GroupKey::simple(label.as_ref()), cap)
            })
            .collect();
        self.install_user(user_id, threshold, Scheme::Naive, layout, seed)
    }

    /// Advanced setup: one group per spec entry with its own capacity.
    pub fn setup_advanced(
        &mut self,
        user_id: impl Into<UserId>,
        spec: &[GroupSpec],
        threshold: u32,
        seed: u64,
    ) -> Result<&User, GraphError> {
        let user_id = user_id.into();
        if spec.is_empty() {
            return Err(GraphError::EmptySpec);
        }
        let mut seen = BTreeSet::new();
        let mut total: u64 = 0;
        for entry in spec {
            if entry.capacity == 0 {
                return Err(GraphError::ConstraintViolation(format!(
                    "group {} has zero capacity",
                    entry.key()
                )));
            }
            if !seen.insert((entry.label.as_str(), entry.instance)) {
                return Err(GraphError::DuplicateGroup(entry.key()));
            }
            total += u64::from(entry.capacity);
        }
        if total > u64::from(threshold) {
            return Err(GraphError::ConstraintViolation(format!(
                "{total} snodes requested above threshold {threshold}"
            )));
        }
        let layout = spec.iter().map(|e| (e.key(), e.capacity)).collect();
        self.install_user(user_id, threshold, Scheme::Advanced, layout, seed)
    }

    fn install_user(
        &mut self,
        user_id: UserId,
        threshold: u32,
        scheme: Scheme,
        layout: Vec<(GroupKey, u32)>,
        seed: u64,
    ) -> Result<&User, GraphError> {
        if self.users.contains_key(&user_id) {
            return Err(GraphError::DuplicateUser(user_id));
        }
        for (key, _) in &layout {
            key.validate().map_err(GraphError::ConstraintViolation)?;
        }
        let n: u32 = layout.iter().map(|(_, c)| c).sum();
        let base = self.next_snode_id();
        let mut ids: Vec<SnodeId> = (base..base + u64::from(n)).map(SnodeId::new).collect();
        ids.shuffle(&mut rng_from(seed));

        // Creation indices run group by group; public ids come from the shuffle.
        let mut creation = 0u32;
        let mut groups = Vec::with_capacity(layout.len());
        for (key, cap) in layout {
            let mut members = BTreeSet::new();
            for _ in 0..cap {
                let id = ids[creation as usize];
                self.secretaries.insert(
                    id,
                    Secretary {
                        id,
                        owner: user_id.clone(),
                        creation_index: creation,
                        public_tag: self.public_tag.clone(),
                        private_tag: key.clone(),
                    },
                );
                self.degree.insert(id, 0);
                members.insert(id);
                creation += 1;
            }
            groups.push(RelationshipGroup { key, members });
        }
        let user = User {
            id: user_id.clone(),
            threshold,
            scheme,
            groups,
        };
        Ok(self.users.entry(user_id).or_insert(user))
    }

    fn next_snode_id(&self) -> u64 {
        self.secretaries
            .keys()
            .next_back()
            .map_or(0, |s| s.get() + 1)
    }

    fn require_group(&self, user: &UserId, key: &GroupKey) -> Result<&RelationshipGroup, GraphError> {
        self.require_user(user)?
            .group(key)
            .ok_or_else(|| GraphError::UnknownGroup {
                user: user.clone(),
                group: key.clone(),
            })
    }

    /// Least-loaded secretary of a group; ties go to the lowest creation index.
    pub fn least_loaded(&self, user: &UserId, key: &GroupKey) -> Result<SnodeId, GraphError> {
        let group = self.require_group(user, key)?;
        let pick = group
            .members
            .iter()
            .min_by_key(|s| (self.degree(**s), self.secretaries[*s].creation_index))
            .copied();
        // groups are never empty
        Ok(pick.expect("relationship group without members"))
    }

    fn pair_busy(&self, u: &UserId, v: &UserId) -> bool {
        let forward = PendingRequest {
            requester: u.clone(),
            target: v.clone(),
        };
        let backward = PendingRequest {
            requester: v.clone(),
            target: u.clone(),
        };
        self.edge_between(u, v).is_some()
            || self.pending.contains_key(&forward)
            || self.pending.contains_key(&backward)
    }

    /// First phase: the requester privately picks the group that will handle
    /// the connection.
    pub fn request_connection(
        &mut self,
        requester: &UserId,
        requester_group: &GroupKey,
        target: &UserId,
    ) -> Result<PendingRequest, GraphError> {
        self.require_user(requester)?;
        if requester == target {
            return Err(GraphError::SelfConnection(requester.clone()));
        }
        self.require_user(target)?;
        self.require_group(requester, requester_group)?;
        if self.pair_busy(requester, target) {
            return Err(GraphError::DuplicatePair(requester.clone(), target.clone()));
        }
        let request = PendingRequest {
            requester: requester.clone(),
            target: target.clone(),
        };
        self.pending.insert(request.clone(), requester_group.clone());
        Ok(request)
    }

    /// Second phase: the target agrees, choosing its own group. One secretary
    /// from each chosen group is joined by a new edge.
    pub fn accept_connection(
        &mut self,
        request: &PendingRequest,
        target_group: &GroupKey,
    ) -> Result<Edge, GraphError> {
        let requester_group = self
            .pending
            .get(request)
            .cloned()
            .ok_or_else(|| GraphError::NoSuchRequest {
                requester: request.requester.clone(),
                target: request.target.clone(),
            })?;
        let a = self.least_loaded(&request.requester, &requester_group)?;
        let b = self.least_loaded(&request.target, target_group)?;
        self.pending.remove(request);
        let edge = Edge::new(a, b);
        self.insert_edge(edge);
        Ok(edge)
    }

    /// Withdraw a pending request without connecting.
    pub fn cancel_request(&mut self, request: &PendingRequest) -> Result<(), GraphError> {
        self.pending
            .remove(request)
            .map(|_| ())
            .ok_or_else(|| GraphError::NoSuchRequest {
                requester: request.requester.clone(),
                target: request.target.clone(),
            })
    }

    /// Request and accept in one step.
    pub fn connect(
        &mut self,
        requester: &UserId,
        requester_group: &GroupKey,
        target: &UserId,
        target_group: &GroupKey,
    ) -> Result<Edge, GraphError> {
        // validate the target side first so a failure leaves nothing pending
        self.require_group(target, target_group)?;
        let request = self.request_connection(requester, requester_group, target)?;
        self.accept_connection(&request, target_group)
    }

    fn owned_snode(&self, user: &UserId, snode: SnodeId) -> Result<&Secretary, GraphError> {
        self.require_user(user)?;
        let sec = self
            .secretaries
            .get(&snode)
            .ok_or(GraphError::UnknownSnode(snode))?;
        if &sec.owner != user {
            return Err(GraphError::NotOwner {
                user: user.clone(),
                snode,
            });
        }
        Ok(sec)
    }

    /// Exchange the private tags of two of `user`'s secretaries. Edges stay
    /// where they are; their meaning for `user` follows the new tags.
    pub fn swap_roles(&mut self, user: &UserId, a: SnodeId, b: SnodeId) -> Result<(), GraphError> {
        let ta = self.owned_snode(user, a)?.private_tag.clone();
        let tb = self.owned_snode(user, b)?.private_tag.clone();
        if a == b || ta == tb {
            return Ok(());
        }
        let owner = self.users.get_mut(user).expect("checked above");
        let ga = owner.group_mut(&ta).expect("tag references a group");
        ga.members.remove(&a);
        ga.members.insert(b);
        let gb = owner.group_mut(&tb).expect("tag references a group");
        gb.members.remove(&b);
        gb.members.insert(a);
        self.secretaries.get_mut(&a).expect("checked").private_tag = tb;
        self.secretaries.get_mut(&b).expect("checked").private_tag = ta;
        Ok(())
    }

    /// Hire one more secretary into `group`.
    pub fn add_secretary(&mut self, user: &UserId, group: &GroupKey) -> Result<SnodeId, GraphError> {
        self.require_group(user, group)?;
        let owner = &self.users[user];
        if owner.snode_count() >= owner.threshold as usize {
            return Err(GraphError::ThresholdExceeded {
                user: user.clone(),
                threshold: owner.threshold,
            });
        }
        let creation_index = owner
            .snodes()
            .map(|s| self.secretaries[&s].creation_index + 1)
            .max()
            .unwrap_or(0);
        let public_tag = owner
            .snodes()
            .next()
            .map(|s| self.secretaries[&s].public_tag.clone())
            .unwrap_or_else(|| self.public_tag.clone());
        let id = SnodeId::new(self.next_snode_id());
        self.secretaries.insert(
            id,
            Secretary {
                id,
                owner: user.clone(),
                creation_index,
                public_tag,
                private_tag: group.clone(),
            },
        );
        self.degree.insert(id, 0);
        self.users
            .get_mut(user)
            .and_then(|u| u.group_mut(group))
            .expect("checked above")
            .members
            .insert(id);
        Ok(id)
    }

    /// Dismiss a jobless secretary. A group's last secretary cannot go.
    pub fn remove_secretary(&mut self, user: &UserId, snode: SnodeId) -> Result<(), GraphError> {
        let tag = self.owned_snode(user, snode)?.private_tag.clone();
        if self.degree(snode) > 0 {
            return Err(GraphError::SecretaryBusy(snode));
        }
        let group = self
            .users
            .get_mut(user)
            .and_then(|u| u.group_mut(&tag))
            .expect("tag references a group");
        if group.members.len() == 1 {
            return Err(GraphError::ConstraintViolation(format!(
                "{snode} is the last secretary of {tag}"
            )));
        }
        group.members.remove(&snode);
        self.secretaries.remove(&snode);
        self.degree.remove(&snode);
        Ok(())
    }

    /// Move `owner`'s end of its connection with `other` to the least-loaded
    /// secretary of `new_group`. The other side is untouched.
    pub fn reassign_connection(
        &mut self,
        owner: &UserId,
        other: &UserId,
        new_group: &GroupKey,
    ) -> Result<Edge, GraphError> {
        self.require_user(owner)?;
        let edge = self
            .edge_between(owner, other)
            .ok_or_else(|| GraphError::NotConnected(owner.clone(), other.clone()))?;
        self.require_group(owner, new_group)?;
        let mine = self.endpoint_of(edge, owner).expect("edge touches owner");
        let theirs = edge.other(mine).expect("edge touches owner");
        self.remove_edge(edge);
        let pick = self.least_loaded(owner, new_group)?;
        let moved = Edge::new(pick, theirs);
        self.insert_edge(moved);
        Ok(moved)
    }

    /// Per-group snode degrees, in group order.
    pub fn group_loads(&self, user: &UserId) -> Result<BTreeMap<GroupKey, Vec<u32>>, GraphError> {
        let u = self.require_user(user)?;
        Ok(u
            .groups
            .iter()
            .map(|g| (g.key.clone(), g.members.iter().map(|s| self.degree(*s)).collect()))
            .collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn uid(s: &str) -> UserId {
        UserId::from(s)
    }

    fn sizes(g: &Graph, u: &str) -> Vec<usize> {
        g.user(&uid(u))
            .unwrap()
            .groups()
            .iter()
            .map(RelationshipGroup::capacity)
            .collect()
    }

    const LABELS: [&str; 3] = ["friend", "enemy", "acquaintance"];

    #[test]
    fn naive_even_split() {
        let mut g = Graph::new(1);
        g.setup_naive("alice", 6, 3, 10, &LABELS, 9).unwrap();
        assert_eq!(sizes(&g, "alice"), vec![2, 2, 2]);
        let u = g.user(&uid("alice")).unwrap();
        assert_eq!(u.snode_count(), 6);
        assert_eq!(u.type_count(), 3);
        assert!(u.groups().iter().all(|gr| gr.key().instance() == 1));
        g.check_invariants().unwrap();
    }

    #[test]
    fn naive_remainder_goes_to_leading_labels() {
        let mut g = Graph::new(1);
        g.setup_naive("alice", 7, 3, 10, &LABELS, 9).unwrap();
        assert_eq!(sizes(&g, "alice"), vec![3, 2, 2]);
        assert_eq!(g.user(&uid("alice")).unwrap().groups()[0].label(), "friend");
    }

    #[test]
    fn naive_constraint_errors() {
        let mut g = Graph::new(1);
        assert!(matches!(
            g.setup_naive("a", 2, 3, 10, &LABELS, 0),
            Err(GraphError::ConstraintViolation(_))
        ));
        assert!(matches!(
            g.setup_naive("a", 11, 3, 10, &LABELS, 0),
            Err(GraphError::ConstraintViolation(_))
        ));
        assert!(matches!(
            g.setup_naive("a", 6, 3, 10, &["x", "y", "x"], 0),
            Err(GraphError::DuplicateLabel(l)) if l == "x"
        ));
        g.setup_naive("a", 3, 3, 10, &LABELS, 0).unwrap();
        assert!(matches!(
            g.setup_naive("a", 3, 3, 10, &LABELS, 0),
            Err(GraphError::DuplicateUser(_))
        ));
        assert!(g.is_empty() || g.user_count() == 1);
    }

    #[test]
    fn advanced_friend_instances() {
        let mut g = Graph::new(1);
        let spec = [GroupSpec::new("friend", 1, 5), GroupSpec::new("friend", 2, 7)];
        let u = g.setup_advanced("u", &spec, 20, 3).unwrap();
        assert_eq!(u.snode_count(), 12);
        assert_eq!(u.type_count(), 1);
        assert_eq!(sizes(&g, "u"), vec![5, 7]);
    }

    #[test]
    fn advanced_alice_layout() {
        let mut g = Graph::new(1);
        let spec = [
            GroupSpec::new("friend", 1, 20),
            GroupSpec::new("friend", 2, 10),
            GroupSpec::new("friend", 3, 30),
            GroupSpec::new("friend", 4, 30),
            GroupSpec::new("enemy", 1, 25),
        ];
        let u = g.setup_advanced("alice", &spec, 200, 3).unwrap();
        let friends: usize = u
            .groups()
            .iter()
            .filter(|gr| gr.label() == "friend")
            .map(RelationshipGroup::capacity)
            .sum();
        assert_eq!(friends, 90);
        assert_eq!(sizes(&g, "alice"), vec![20, 10, 30, 30, 25]);
    }

    #[test]
    fn advanced_errors() {
        let mut g = Graph::new(1);
        assert_eq!(g.setup_advanced("u", &[], 5, 0).unwrap_err(), GraphError::EmptySpec);
        let over = [GroupSpec::new("friend", 1, 4), GroupSpec::new("enemy", 1, 3)];
        assert!(matches!(
            g.setup_advanced("u", &over, 6, 0),
            Err(GraphError::ConstraintViolation(_))
        ));
        let dup = [
            GroupSpec::new("friend", 1, 1),
            GroupSpec::new("friend", 1, 1).with_subtype("close"),
        ];
        assert!(matches!(
            g.setup_advanced("u", &dup, 6, 0),
            Err(GraphError::DuplicateGroup(_))
        ));
    }

    fn alice_bob() -> Graph {
        let mut g = Graph::new(5);
        g.setup_naive("alice", 6, 3, 10, &["friend", "enemy", "acquaintance"], 1)
            .unwrap();
        g.setup_naive("bob", 8, 4, 10, &["enemy", "friend", "acquaintance", "competitor"], 2)
            .unwrap();
        g
    }

    #[test]
    fn two_phase_connection() {
        let mut g = alice_bob();
        let (alice, bob) = (uid("alice"), uid("bob"));
        let req = g
            .request_connection(&alice, &GroupKey::simple("acquaintance"), &bob)
            .unwrap();
        assert_eq!(req, PendingRequest { requester: alice.clone(), target: bob.clone() });
        let edge = g.accept_connection(&req, &GroupKey::simple("competitor")).unwrap();
        assert_eq!(g.connection_group(&alice, &bob).unwrap().label(), "acquaintance");
        assert_eq!(g.connection_group(&bob, &alice).unwrap().label(), "competitor");
        let (a, b) = edge.endpoints();
        assert_eq!(g.secretary(a).unwrap().public_tag(), "friend");
        assert_eq!(g.secretary(b).unwrap().public_tag(), "friend");
        assert_eq!(g.pending().count(), 0);
        g.check_invariants().unwrap();
    }

    #[test]
    fn connection_errors() {
        let mut g = alice_bob();
        let (alice, bob) = (uid("alice"), uid("bob"));
        let friend = GroupKey::simple("friend");
        assert_eq!(
            g.request_connection(&alice, &friend, &alice).unwrap_err(),
            GraphError::SelfConnection(alice.clone())
        );
        assert!(matches!(
            g.request_connection(&alice, &friend, &uid("carol")),
            Err(GraphError::UnknownUser(_))
        ));
        assert!(matches!(
            g.request_connection(&alice, &GroupKey::simple("competitor"), &bob),
            Err(GraphError::UnknownGroup { .. })
        ));
        let req = g.request_connection(&alice, &friend, &bob).unwrap();
        assert!(matches!(
            g.request_connection(&bob, &friend, &alice),
            Err(GraphError::DuplicatePair(..))
        ));
        assert!(matches!(
            g.accept_connection(&req, &GroupKey::simple("nope")),
            Err(GraphError::UnknownGroup { .. })
        ));
        g.accept_connection(&req, &friend).unwrap();
        assert!(matches!(
            g.accept_connection(&req, &friend),
            Err(GraphError::NoSuchRequest { .. })
        ));
        assert!(matches!(
            g.request_connection(&alice, &friend, &bob),
            Err(GraphError::DuplicatePair(..))
        ));
    }

    #[test]
    fn first_accept_takes_lowest_creation_index() {
        let mut g = Graph::new(0);
        g.setup_advanced("t", &[GroupSpec::new("friend", 1, 5)], 5, 11).unwrap();
        g.setup_naive("x", 1, 1, 1, &["friend"], 0).unwrap();
        let edge = g
            .connect(&uid("x"), &GroupKey::simple("friend"), &uid("t"), &GroupKey::simple("friend"))
            .unwrap();
        let mine = g.endpoint_of(edge, &uid("t")).unwrap();
        assert_eq!(g.secretary(mine).unwrap().creation_index(), 0);
    }

    #[test]
    fn ten_accepts_fill_capacity_five_evenly() {
        let mut g = Graph::new(0);
        let key = GroupKey::simple("friend");
        g.setup_advanced("t", &[GroupSpec::new("friend", 1, 5)], 5, 11).unwrap();
        for i in 0..10 {
            let id = format!("x{i}");
            g.setup_naive(id.as_str(), 1, 1, 1, &["friend"], i).unwrap();
            g.connect(&uid(&id), &key, &uid("t"), &key).unwrap();
        }
        assert_eq!(g.group_loads(&uid("t")).unwrap()[&key], vec![2; 5]);
    }

    #[test]
    fn swap_is_an_involution_and_keeps_edges() {
        let mut g = alice_bob();
        let (alice, bob) = (uid("alice"), uid("bob"));
        g.connect(&alice, &GroupKey::simple("friend"), &bob, &GroupKey::simple("enemy"))
            .unwrap();
        let start = g.clone();
        let friend = g.user(&alice).unwrap().group(&GroupKey::simple("friend")).unwrap();
        let a = *friend.members().iter().next().unwrap();
        let enemy = g.user(&alice).unwrap().group(&GroupKey::simple("enemy")).unwrap();
        let b = *enemy.members().iter().next().unwrap();
        g.swap_roles(&alice, a, b).unwrap();
        assert_eq!(g.secretary(a).unwrap().private_tag().label(), "enemy");
        assert_eq!(g.edges(), start.edges());
        g.check_invariants().unwrap();
        g.swap_roles(&alice, a, b).unwrap();
        assert_eq!(g, start);
        g.swap_roles(&alice, a, a).unwrap();
        assert_eq!(g, start);
    }

    #[test]
    fn swap_ownership_errors() {
        let mut g = alice_bob();
        let bob_snode = g.user(&uid("bob")).unwrap().snodes().next().unwrap();
        let alice_snode = g.user(&uid("alice")).unwrap().snodes().next().unwrap();
        assert!(matches!(
            g.swap_roles(&uid("alice"), alice_snode, bob_snode),
            Err(GraphError::NotOwner { .. })
        ));
        assert_eq!(
            g.swap_roles(&uid("alice"), alice_snode, SnodeId::new(999)).unwrap_err(),
            GraphError::UnknownSnode(SnodeId::new(999))
        );
    }

    #[test]
    fn add_and_remove_secretaries() {
        let mut g = alice_bob();
        let alice = uid("alice");
        let friend = GroupKey::simple("friend");
        let start = g.clone();
        let s = g.add_secretary(&alice, &friend).unwrap();
        assert_eq!(g.user(&alice).unwrap().snode_count(), 7);
        g.check_invariants().unwrap();
        g.remove_secretary(&alice, s).unwrap();
        assert_eq!(g, start);

        for _ in 0..4 {
            g.add_secretary(&alice, &friend).unwrap();
        }
        assert!(matches!(
            g.add_secretary(&alice, &friend),
            Err(GraphError::ThresholdExceeded { threshold: 10, .. })
        ));

        let edge = g
            .connect(&alice, &friend, &uid("bob"), &friend)
            .unwrap();
        let busy = g.endpoint_of(edge, &alice).unwrap();
        assert_eq!(g.remove_secretary(&alice, busy).unwrap_err(), GraphError::SecretaryBusy(busy));
        let bob_snode = g.user(&uid("bob")).unwrap().snodes().next().unwrap();
        assert!(matches!(
            g.remove_secretary(&alice, bob_snode),
            Err(GraphError::NotOwner { .. })
        ));
    }

    #[test]
    fn last_secretary_of_a_group_stays() {
        let mut g = Graph::new(0);
        g.setup_naive("u", 2, 2, 4, &["friend", "enemy"], 0).unwrap();
        let s = *g.user(&uid("u")).unwrap().groups()[1].members().iter().next().unwrap();
        assert!(matches!(
            g.remove_secretary(&uid("u"), s),
            Err(GraphError::ConstraintViolation(_))
        ));
    }

    #[test]
    fn reassign_moves_only_owner_side() {
        let mut g = alice_bob();
        let (alice, bob) = (uid("alice"), uid("bob"));
        let e = g
            .connect(&alice, &GroupKey::simple("acquaintance"), &bob, &GroupKey::simple("friend"))
            .unwrap();
        let bob_end = g.endpoint_of(e, &bob).unwrap();
        let moved = g.reassign_connection(&alice, &bob, &GroupKey::simple("friend")).unwrap();
        assert_eq!(g.endpoint_of(moved, &bob), Some(bob_end));
        assert_eq!(g.connection_group(&alice, &bob).unwrap().label(), "friend");
        assert_eq!(g.connection_group(&bob, &alice).unwrap().label(), "friend");
        assert_eq!(g.edges().len(), 1);
        g.check_invariants().unwrap();
        assert!(matches!(
            g.reassign_connection(&alice, &uid("zed"), &GroupKey::simple("friend")),
            Err(GraphError::NotConnected(..))
        ));
    }

    #[test]
    fn setup_is_deterministic_per_seed() {
        let build = |seed| {
            let mut g = Graph::new(0);
            g.setup_naive("u", 9, 3, 9, &LABELS, seed).unwrap();
            g
        };
        assert_eq!(build(4), build(4));
        assert_ne!(build(4), build(5));
    }
}
