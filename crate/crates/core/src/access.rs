//! Relationship-grained access control.
//!
//! A [`Policy`] maps each of the owner's relationship groups to a permission
//! set. What a viewer sees is decided solely by the owner-side private tag of
//! the edge between them; unconnected viewers get the guest set.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{Edge, Graph, GraphError};
use crate::ids::{GroupKey, UserId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Permission {
    ViewBasicProfile,
    ViewFullProfile,
    ViewPhotos,
    ViewContactInfo,
    ViewTravelSchedule,
    PostComment,
    ReadArticles,
    WriteArticles,
    DownloadArticles,
    PostArticles,
    ViewMemberList,
    BogusPage,
}

impl Permission {
    pub const ALL: [Permission; 12] = [
        Permission::ViewBasicProfile,
        Permission::ViewFullProfile,
        Permission::ViewPhotos,
        Permission::ViewContactInfo,
        Permission::ViewTravelSchedule,
        Permission::PostComment,
        Permission::ReadArticles,
        Permission::WriteArticles,
        Permission::DownloadArticles,
        Permission::PostArticles,
        Permission::ViewMemberList,
        Permission::BogusPage,
    ];

    /// Never granted to guests unless explicitly overridden.
    pub const GUEST_RESTRICTED: [Permission; 3] = [
        Permission::ViewMemberList,
        Permission::ViewContactInfo,
        Permission::ViewFullProfile,
    ];
}

pub type PermissionSet = BTreeSet<Permission>;

/// Everything except the bogus page; what an owner sees on its own page.
pub fn owner_permissions() -> PermissionSet {
    Permission::ALL
        .into_iter()
        .filter(|p| *p != Permission::BogusPage)
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AccessError {
    #[error("unknown user {0}")]
    UnknownUser(UserId),
    #[error("user {owner} has no group {group}")]
    UnknownGroup { owner: UserId, group: GroupKey },
    #[error("invalid permission set: {0}")]
    InvalidPermissionSet(String),
    #[error("{0:?} may not be granted to guests")]
    RestrictedGuestPermission(Permission),
    #[error("policy belongs to {policy_owner}, not {owner}")]
    PolicyOwnerMismatch { policy_owner: UserId, owner: UserId },
    #[error("users {0} and {1} are not connected")]
    NotConnected(UserId, UserId),
    #[error("malformed policy: {0}")]
    Malformed(String),
}

impl From<GraphError> for AccessError {
    fn from(e: GraphError) -> Self {
        match e {
            GraphError::UnknownUser(u) => AccessError::UnknownUser(u),
            GraphError::UnknownGroup { user, group } => AccessError::UnknownGroup { owner: user, group },
            GraphError::NotConnected(a, b) => AccessError::NotConnected(a, b),
            other => AccessError::Malformed(other.to_string()),
        }
    }
}

fn check_bogus_exclusive(perms: &PermissionSet) -> Result<(), AccessError> {
    if perms.contains(&Permission::BogusPage) && perms.len() > 1 {
        return Err(AccessError::InvalidPermissionSet(
            "BogusPage cannot be combined with other permissions".into(),
        ));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Policy {
    owner: UserId,
    guest: PermissionSet,
    entries: BTreeMap<GroupKey, PermissionSet>,
}

impl Policy {
    /// New policy whose guests see the basic profile only.
    pub fn new(owner: impl Into<UserId>) -> Self {
        Policy {
            owner: owner.into(),
            guest: BTreeSet::from([Permission::ViewBasicProfile]),
            entries: BTreeMap::new(),
        }
    }

    pub fn owner(&self) -> &UserId {
        &self.owner
    }

    pub fn guest(&self) -> &PermissionSet {
        &self.guest
    }

    pub fn entries(&self) -> &BTreeMap<GroupKey, PermissionSet> {
        &self.entries
    }

    pub fn entry(&self, group: &GroupKey) -> Option<&PermissionSet> {
        self.entries.get(group)
    }

    pub fn set_guest(&mut self, permissions: PermissionSet) -> Result<(), AccessError> {
        if let Some(p) = Permission::GUEST_RESTRICTED
            .into_iter()
            .find(|p| permissions.contains(p))
        {
            return Err(AccessError::RestrictedGuestPermission(p));
        }
        self.set_guest_unrestricted(permissions)
    }

    /// Explicit override of the default guest restriction.
    pub fn set_guest_unrestricted(&mut self, permissions: PermissionSet) -> Result<(), AccessError> {
        check_bogus_exclusive(&permissions)?;
        self.guest = permissions;
        Ok(())
    }

    pub fn to_json(&self) -> Vec<u8> {
        crate::codec::canonical_json(self)
    }

    /// Parse a policy. Sensitive guest permissions are rejected unless
    /// `allow_sensitive_guest` is set.
    pub fn from_json(bytes: &[u8], allow_sensitive_guest: bool) -> Result<Self, AccessError> {
        let policy: Policy =
            serde_json::from_slice(bytes).map_err(|e| AccessError::Malformed(e.to_string()))?;
        let mut checked = Policy::new(policy.owner.clone());
        if allow_sensitive_guest {
            checked.set_guest_unrestricted(policy.guest)?;
        } else {
            checked.set_guest(policy.guest)?;
        }
        for (group, perms) in policy.entries {
            check_bogus_exclusive(&perms)?;
            checked.entries.insert(group, perms);
        }
        Ok(checked)
    }

    /// Check that every entry names an existing group of the owner.
    pub fn validate(&self, graph: &Graph) -> Result<(), AccessError> {
        let user = graph
            .user(&self.owner)
            .ok_or_else(|| AccessError::UnknownUser(self.owner.clone()))?;
        for (group, perms) in &self.entries {
            if user.group(group).is_none() {
                return Err(AccessError::UnknownGroup {
                    owner: self.owner.clone(),
                    group: group.clone(),
                });
            }
            check_bogus_exclusive(perms)?;
        }
        Ok(())
    }
}

/// Replace the permission set of one of the owner's groups.
pub fn set_policy(
    graph: &Graph,
    policy: &mut Policy,
    group: &GroupKey,
    permissions: PermissionSet,
) -> Result<(), AccessError> {
    let user = graph
        .user(&policy.owner)
        .ok_or_else(|| AccessError::UnknownUser(policy.owner.clone()))?;
    if user.group(group).is_none() {
        return Err(AccessError::UnknownGroup {
            owner: policy.owner.clone(),
            group: group.clone(),
        });
    }
    check_bogus_exclusive(&permissions)?;
    policy.entries.insert(group.clone(), permissions);
    Ok(())
}

fn check_owner(graph: &Graph, policy: &Policy, owner: &UserId) -> Result<(), AccessError> {
    if &policy.owner != owner {
        return Err(AccessError::PolicyOwnerMismatch {
            policy_owner: policy.owner.clone(),
            owner: owner.clone(),
        });
    }
    if graph.user(owner).is_none() {
        return Err(AccessError::UnknownUser(owner.clone()));
    }
    Ok(())
}

/// Permissions `viewer` holds on `owner`'s page.
pub fn evaluate_access(
    graph: &Graph,
    policy: &Policy,
    owner: &UserId,
    viewer: &UserId,
) -> Result<PermissionSet, AccessError> {
    check_owner(graph, policy, owner)?;
    if owner == viewer {
        return Ok(owner_permissions());
    }
    Ok(match graph.connection_group(owner, viewer) {
        None => policy.guest.clone(),
        // deny by default when the group has no entry
        Some(group) => policy.entries.get(group).cloned().unwrap_or_default(),
    })
}

/// Members of the owner's network that `viewer` may see: only those sharing
/// the viewer's own group, and only with `ViewMemberList`.
pub fn visible_members(
    graph: &Graph,
    policy: &Policy,
    owner: &UserId,
    viewer: &UserId,
) -> Result<BTreeSet<UserId>, AccessError> {
    let perms = evaluate_access(graph, policy, owner, viewer)?;
    if !perms.contains(&Permission::ViewMemberList) {
        return Ok(BTreeSet::new());
    }
    let connections = graph.connections(owner);
    if owner == viewer {
        return Ok(connections.into_iter().map(|(u, _)| u).collect());
    }
    let Some(group) = graph.connection_group(owner, viewer) else {
        return Ok(BTreeSet::new());
    };
    Ok(connections
        .into_iter()
        .map(|(u, _)| u)
        .filter(|u| u != viewer && graph.connection_group(owner, u) == Some(group))
        .collect())
}

/// Move `viewer` into `new_group` on the owner's side.
pub fn promote(
    graph: &mut Graph,
    owner: &UserId,
    viewer: &UserId,
    new_group: &GroupKey,
) -> Result<Edge, AccessError> {
    Ok(graph.reassign_connection(owner, viewer, new_group)?)
}
