//! Adversaries against the published graph.
//!
//! A seeker only browses the public view. A passive coalition pools its
//! members' own connections. An active attacker opens sybil accounts and
//! probes a target. Posteriors come from a closed-form counting model; an
//! independent brute-force enumeration over assignments serves as the
//! reference on small instances.

mod attack;
mod enumerate;
mod knowledge;
mod montecarlo;
mod posterior;

use thiserror::Error;

use crate::graph::{Edge, GraphError};
use crate::ids::UserId;

pub use attack::{
    active_attack, passive_collusion_attack, run_attack, seeker_baseline, uniformity_test,
    AdversaryKind, AttackConfig, AttackReport, ClusterReport, EdgeReport, PairReport, Summary,
    TargetBehavior, UniformityReport, SYBIL_LABEL,
};
pub use enumerate::{
    assignment_count, check_size_guard, enumerate_posterior, enumerate_posterior_with_limit,
    enumerate_same_type, DEFAULT_EXACT_LIMIT, MAX_ASSIGNMENTS,
};
pub use knowledge::{KnownEdge, Knowledge};
pub use montecarlo::{simulate_two_stage_guess, simulate_two_stage_guess_advanced};
pub use posterior::{uniform_over, Fraction, Hypothesis, InferenceMethod, InferenceResult, TargetModel};

#[derive(Debug, Error)]
pub enum AttackError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("unknown user {0}")]
    UnknownUser(UserId),
    #[error("coalition is empty")]
    EmptyCoalition,
    #[error("instance too large for exact enumeration: {snodes} secretaries, {assignments} assignments")]
    TooLarge { snodes: usize, assignments: u128 },
    #[error("inconsistent knowledge: {0}")]
    InconsistentKnowledge(String),
    #[error("edge {0:?} is not incident to the target")]
    UnknownEdge(Edge),
    #[error("{probes} probes requested, limit is {max}")]
    ThresholdExceeded { probes: u32, max: u32 },
    #[error(transparent)]
    Graph(#[from] GraphError),
}
