use thiserror::Error;

use crate::ids::{GroupKey, SnodeId, UserId};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("constraint violation: {0}")]
    ConstraintViolation(String),
    #[error("user {0} already exists")]
    DuplicateUser(UserId),
    #[error("duplicate relationship label {0:?}")]
    DuplicateLabel(String),
    #[error("group specification is empty")]
    EmptySpec,
    #[error("duplicate relationship group {0}")]
    DuplicateGroup(GroupKey),
    #[error("unknown user {0}")]
    UnknownUser(UserId),
    #[error("user {user} has no group {group}")]
    UnknownGroup { user: UserId, group: GroupKey },
    #[error("unknown secretary {0}")]
    UnknownSnode(SnodeId),
    #[error("users {0} and {1} are already connected or have a pending request")]
    DuplicatePair(UserId, UserId),
    #[error("user {0} cannot connect to itself")]
    SelfConnection(UserId),
    #[error("no pending request from {requester} to {target}")]
    NoSuchRequest { requester: UserId, target: UserId },
    #[error("secretary {snode} is not owned by {user}")]
    NotOwner { user: UserId, snode: SnodeId },
    #[error("user {user} is at its secretary threshold {threshold}")]
    ThresholdExceeded { user: UserId, threshold: u32 },
    #[error("secretary {0} still handles connections")]
    SecretaryBusy(SnodeId),
    #[error("users {0} and {1} are not connected")]
    NotConnected(UserId, UserId),
}
