//! Brute-force posterior oracle.
//!
//! Walks every distinct assignment of the target's secretaries to labels
//! that matches the hypothesised per-label counts and any learned pins, and
//! counts how often the secretary under the target edge carries each label.
//! Edges are typed through the secretary they end at, so two edges into one
//! secretary share a label in every assignment by construction.

use std::collections::BTreeMap;

use super::{AttackError, Fraction, Hypothesis, InferenceMethod, InferenceResult, Knowledge};
use crate::graph::{Edge, PublicView};
use crate::ids::{SnodeId, UserId};

pub const DEFAULT_EXACT_LIMIT: usize = 12;
/// Largest hypothesis space the oracle will walk.
pub const MAX_ASSIGNMENTS: u128 = 10_000_000;

/// Number of distinct label assignments with the given counts (a
/// multinomial coefficient). Saturates instead of overflowing.
pub fn assignment_count(counts: impl IntoIterator<Item = usize>) -> u128 {
    let mut total: u128 = 1;
    let mut placed: u128 = 0;
    for c in counts {
        // multiply by C(placed + c, c) one factor at a time; exact at each step
        for i in 1..=c as u128 {
            placed += 1;
            total = match total.checked_mul(placed) {
                Some(t) => t / i,
                None => return u128::MAX,
            };
        }
    }
    total
}

/// Refuse targets beyond `limit` secretaries or with too many assignments.
pub fn check_size_guard(snodes: usize, hypothesis: &Hypothesis, limit: usize) -> Result<(), AttackError> {
    let assignments = assignment_count(hypothesis.counts().values().copied());
    if snodes > limit || assignments > MAX_ASSIGNMENTS {
        return Err(AttackError::TooLarge { snodes, assignments });
    }
    Ok(())
}

struct Space {
    snodes: Vec<SnodeId>,
    labels: Vec<String>,
    counts: Vec<usize>,
    pins: Vec<Option<usize>>,
}

fn build_space(
    view: &PublicView,
    knowledge: &Knowledge,
    target: &UserId,
    hypothesis: &Hypothesis,
    limit: usize,
) -> Result<Space, AttackError> {
    if !view.users.contains(target) {
        return Err(AttackError::UnknownUser(target.clone()));
    }
    let snodes: Vec<SnodeId> = view.snodes_of(target).collect();
    check_size_guard(snodes.len(), hypothesis, limit)?;
    let labels: Vec<String> = hypothesis.labels().map(str::to_owned).collect();
    let counts: Vec<usize> = hypothesis.counts().values().copied().collect();
    if counts.iter().sum::<usize>() != snodes.len() {
        return Err(AttackError::InconsistentKnowledge(format!(
            "hypothesised counts sum to {}, target has {} secretaries",
            counts.iter().sum::<usize>(),
            snodes.len()
        )));
    }
    let mut pins = vec![None; snodes.len()];
    for (i, s) in snodes.iter().enumerate() {
        if let Some(label) = knowledge.learned.get(s) {
            let j = labels.iter().position(|l| l == label).ok_or_else(|| {
                AttackError::InconsistentKnowledge(format!("{s} learned as unknown label {label}"))
            })?;
            pins[i] = Some(j);
        }
    }
    Ok(Space {
        snodes,
        labels,
        counts,
        pins,
    })
}

/// Visit every consistent assignment; returns how many there were.
fn walk(space: &Space, mut visit: impl FnMut(&[usize])) -> u64 {
    fn go(
        space: &Space,
        depth: usize,
        left: &mut [usize],
        assign: &mut Vec<usize>,
        visit: &mut dyn FnMut(&[usize]),
        total: &mut u64,
    ) {
        if depth == space.snodes.len() {
            *total += 1;
            visit(assign);
            return;
        }
        for j in 0..left.len() {
            if left[j] == 0 || space.pins[depth].is_some_and(|p| p != j) {
                continue;
            }
            left[j] -= 1;
            assign.push(j);
            go(space, depth + 1, left, assign, visit, total);
            assign.pop();
            left[j] += 1;
        }
    }
    let mut left = space.counts.clone();
    let mut assign = Vec::with_capacity(space.snodes.len());
    let mut total = 0;
    go(space, 0, &mut left, &mut assign, &mut visit, &mut total);
    total
}

fn target_endpoint(view: &PublicView, target: &UserId, edge: Edge) -> Result<SnodeId, AttackError> {
    if !view.edges.contains(&edge) {
        return Err(AttackError::UnknownEdge(edge));
    }
    let (a, b) = edge.endpoints();
    match (view.owner(a) == Some(target), view.owner(b) == Some(target)) {
        (true, false) => Ok(a),
        (false, true) => Ok(b),
        _ => Err(AttackError::UnknownEdge(edge)),
    }
}

/// Exact posterior over the type of `target`'s side of `target_edge`.
pub fn enumerate_posterior(
    view: &PublicView,
    knowledge: &Knowledge,
    target: &UserId,
    target_edge: Edge,
    hypothesis: &Hypothesis,
) -> Result<InferenceResult, AttackError> {
    enumerate_posterior_with_limit(view, knowledge, target, target_edge, hypothesis, DEFAULT_EXACT_LIMIT)
}

pub fn enumerate_posterior_with_limit(
    view: &PublicView,
    knowledge: &Knowledge,
    target: &UserId,
    target_edge: Edge,
    hypothesis: &Hypothesis,
    limit: usize,
) -> Result<InferenceResult, AttackError> {
    let space = build_space(view, knowledge, target, hypothesis, limit)?;
    let x = target_endpoint(view, target, target_edge)?;
    let xi = space.snodes.iter().position(|s| *s == x).expect("endpoint owned by target");
    let mut tally = vec![0u64; space.labels.len()];
    let total = walk(&space, |assign| tally[assign[xi]] += 1);
    if total == 0 {
        return Err(AttackError::InconsistentKnowledge(
            "no assignment matches the knowledge".into(),
        ));
    }
    let exact: BTreeMap<String, Fraction> = space
        .labels
        .iter()
        .zip(tally)
        .map(|(l, n)| (l.clone(), Fraction::new(n, total)))
        .collect();
    Ok(InferenceResult::from_exact(
        target_edge,
        target.clone(),
        x,
        exact,
        InferenceMethod::Exact,
    ))
}

/// Exact probability that two of the target's secretaries share a label.
pub fn enumerate_same_type(
    view: &PublicView,
    knowledge: &Knowledge,
    target: &UserId,
    x: SnodeId,
    y: SnodeId,
    hypothesis: &Hypothesis,
) -> Result<Fraction, AttackError> {
    let space = build_space(view, knowledge, target, hypothesis, DEFAULT_EXACT_LIMIT)?;
    let find = |s: SnodeId| {
        space
            .snodes
            .iter()
            .position(|t| *t == s)
            .ok_or_else(|| AttackError::InconsistentKnowledge(format!("{s} is not a secretary of {target}")))
    };
    let (xi, yi) = (find(x)?, find(y)?);
    let mut same = 0u64;
    let total = walk(&space, |assign| same += u64::from(assign[xi] == assign[yi]));
    if total == 0 {
        return Err(AttackError::InconsistentKnowledge(
            "no assignment matches the knowledge".into(),
        ));
    }
    Ok(Fraction::new(same, total))
}
