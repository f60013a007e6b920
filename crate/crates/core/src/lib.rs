//! Secretary-based privacy-preserving social graphs.
//!
//! Users hand each connection to one of their secretaries. All secretaries of
//! a user share a public tag while a private tag records the real
//! relationship group, so the published graph hides how each side classifies
//! its links. On top of that model the crate provides relationship-grained
//! access control, closed-form privacy metrics, and an adversary simulator
//! with an exact brute-force posterior oracle.

pub mod access;
pub mod adversary;
pub mod analysis;
pub mod codec;
pub mod generate;
pub mod graph;
pub mod ids;
pub mod scenario;
pub mod seeding;

pub use graph::{Edge, Graph, GraphError, GroupSpec, PendingRequest, PublicView, Scheme};
pub use ids::{GroupKey, SnodeId, UserId};
