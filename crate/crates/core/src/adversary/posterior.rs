//! Posterior representation and the closed-form counting route.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use num_integer::Integer;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::{AttackError, Knowledge};
use crate::graph::{Edge, PublicView, User};
use crate::ids::{SnodeId, UserId};

/// Reduced non-negative fraction. Two routes that agree produce identical
/// fields, hence identical floats.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Fraction {
    num: u64,
    den: u64,
}

impl Fraction {
    pub fn new(num: u64, den: u64) -> Self {
        assert!(den != 0, "zero denominator");
        let g = num.gcd(&den);
        Fraction {
            num: num / g,
            den: den / g,
        }
    }

    pub const ZERO: Fraction = Fraction { num: 0, den: 1 };
    pub const ONE: Fraction = Fraction { num: 1, den: 1 };

    pub fn num(self) -> u64 {
        self.num
    }

    pub fn den(self) -> u64 {
        self.den
    }

    pub fn to_f64(self) -> f64 {
        self.num as f64 / self.den as f64
    }
}

impl Ord for Fraction {
    fn cmp(&self, other: &Self) -> Ordering {
        (u128::from(self.num) * u128::from(other.den)).cmp(&(u128::from(other.num) * u128::from(self.den)))
    }
}

impl PartialOrd for Fraction {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Fraction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.num, self.den)
    }
}

impl Serialize for Fraction {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Fraction {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        let (n, d) = s
            .split_once('/')
            .ok_or_else(|| serde::de::Error::custom("expected num/den"))?;
        let n = n.parse().map_err(serde::de::Error::custom)?;
        let d: u64 = d.parse().map_err(serde::de::Error::custom)?;
        if d == 0 {
            return Err(serde::de::Error::custom("zero denominator"));
        }
        Ok(Fraction::new(n, d))
    }
}

/// The adversary's assumption about a target: how many of its secretaries
/// carry each type label.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Hypothesis {
    counts: BTreeMap<String, usize>,
}

impl Hypothesis {
    pub fn new<L: Into<String>>(counts: impl IntoIterator<Item = (L, usize)>) -> Self {
        Hypothesis {
            counts: counts.into_iter().map(|(l, c)| (l.into(), c)).collect(),
        }
    }

    /// True per-label counts of a user (instances of one label merged).
    pub fn from_user(user: &User) -> Self {
        let mut counts = BTreeMap::new();
        for g in user.groups() {
            *counts.entry(g.label().to_owned()).or_insert(0) += g.capacity();
        }
        Hypothesis { counts }
    }

    pub fn counts(&self) -> &BTreeMap<String, usize> {
        &self.counts
    }

    pub fn labels(&self) -> impl Iterator<Item = &str> {
        self.counts.keys().map(String::as_str)
    }

    pub fn type_count(&self) -> usize {
        self.counts.len()
    }

    pub fn total(&self) -> usize {
        self.counts.values().sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InferenceMethod {
    /// Exact count over every assignment consistent with the knowledge.
    Exact,
    /// No evidence considered: prior over the target's labels.
    Prior,
    /// Over the size guard; uniform fallback, not an inference.
    None,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InferenceResult {
    pub edge: Edge,
    pub target: UserId,
    pub target_snode: SnodeId,
    pub posterior: BTreeMap<String, f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exact: Option<BTreeMap<String, Fraction>>,
    pub guess: String,
    pub method: InferenceMethod,
}

impl InferenceResult {
    /// Build from exact masses; the guess is the most probable label, ties
    /// going to the lexicographically smallest.
    pub fn from_exact(
        edge: Edge,
        target: UserId,
        target_snode: SnodeId,
        exact: BTreeMap<String, Fraction>,
        method: InferenceMethod,
    ) -> Self {
        let mut guess: Option<(&String, Fraction)> = None;
        for (label, p) in &exact {
            if guess.is_none_or(|(_, best)| *p > best) {
                guess = Some((label, *p));
            }
        }
        let guess = guess.map(|(l, _)| l.clone()).unwrap_or_default();
        InferenceResult {
            edge,
            target,
            target_snode,
            posterior: exact.iter().map(|(l, p)| (l.clone(), p.to_f64())).collect(),
            exact: Some(exact),
            guess,
            method,
        }
    }

    pub fn mass(&self, label: &str) -> f64 {
        self.posterior.get(label).copied().unwrap_or(0.0)
    }

    pub fn total_mass(&self) -> f64 {
        self.posterior.values().sum()
    }
}

/// Uniform mass over a label set.
pub fn uniform_over<'a>(labels: impl Iterator<Item = &'a str>) -> BTreeMap<String, Fraction> {
    let labels: Vec<&str> = labels.collect();
    let k = labels.len() as u64;
    labels
        .into_iter()
        .map(|l| (l.to_owned(), Fraction::new(1, k.max(1))))
        .collect()
}

/// Closed-form posterior for one target under co-membership and learned
/// pins. With `r_L` unpinned slots left for label `L` and `R` unpinned
/// secretaries, a free secretary carries `L` with probability `r_L / R`.
#[derive(Debug, Clone)]
pub struct TargetModel {
    labels: Vec<String>,
    pins: BTreeMap<SnodeId, usize>,
    remaining: Vec<u64>,
    free: u64,
    snodes: Vec<SnodeId>,
}

impl TargetModel {
    pub fn new(
        view: &PublicView,
        knowledge: &Knowledge,
        target: &UserId,
        hypothesis: &Hypothesis,
    ) -> Result<Self, AttackError> {
        if !view.users.contains(target) {
            return Err(AttackError::UnknownUser(target.clone()));
        }
        let snodes: Vec<SnodeId> = view.snodes_of(target).collect();
        if hypothesis.total() != snodes.len() {
            return Err(AttackError::InconsistentKnowledge(format!(
                "hypothesis covers {} secretaries, {target} has {}",
                hypothesis.total(),
                snodes.len()
            )));
        }
        let labels: Vec<String> = hypothesis.counts().keys().cloned().collect();
        let mut remaining: Vec<u64> = hypothesis.counts().values().map(|&c| c as u64).collect();
        let mut pins = BTreeMap::new();
        for (s, label) in &knowledge.learned {
            if view.owner(*s) != Some(target) {
                continue;
            }
            let j = labels.iter().position(|l| l == label).ok_or_else(|| {
                AttackError::InconsistentKnowledge(format!("{s} pinned to unknown label {label}"))
            })?;
            if remaining[j] == 0 {
                return Err(AttackError::InconsistentKnowledge(format!(
                    "more secretaries pinned to {label} than it has"
                )));
            }
            remaining[j] -= 1;
            pins.insert(*s, j);
        }
        let free = snodes.len() as u64 - pins.len() as u64;
        Ok(TargetModel {
            labels,
            pins,
            remaining,
            free,
            snodes,
        })
    }

    pub fn snodes(&self) -> &[SnodeId] {
        &self.snodes
    }

    pub fn posterior(&self, s: SnodeId) -> BTreeMap<String, Fraction> {
        match self.pins.get(&s) {
            Some(&j) => self
                .labels
                .iter()
                .enumerate()
                .map(|(i, l)| (l.clone(), if i == j { Fraction::ONE } else { Fraction::ZERO }))
                .collect(),
            None => self
                .labels
                .iter()
                .zip(&self.remaining)
                .map(|(l, &r)| (l.clone(), Fraction::new(r, self.free)))
                .collect(),
        }
    }

    /// Probability that two distinct secretaries share a label.
    pub fn same_type(&self, x: SnodeId, y: SnodeId) -> Fraction {
        if x == y {
            return Fraction::ONE;
        }
        match (self.pins.get(&x), self.pins.get(&y)) {
            (Some(a), Some(b)) => {
                if a == b {
                    Fraction::ONE
                } else {
                    Fraction::ZERO
                }
            }
            (Some(&j), None) | (None, Some(&j)) => Fraction::new(self.remaining[j], self.free),
            (None, None) => {
                let num: u64 = self.remaining.iter().map(|&r| r * r.saturating_sub(1)).sum();
                Fraction::new(num, self.free * (self.free - 1))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fraction_reduces_and_orders() {
        let f = Fraction::new(6, 8);
        assert_eq!((f.num(), f.den()), (3, 4));
        assert_eq!(f, Fraction::new(9, 12));
        assert!(Fraction::new(1, 3) < Fraction::new(1, 2));
        assert_eq!(f.to_string(), "3/4");
        let back: Fraction = serde_json::from_str("\"6/8\"").unwrap();
        assert_eq!(back, f);
    }

    #[test]
    fn guess_breaks_ties_lexicographically() {
        let exact = uniform_over(["enemy", "acquaintance", "friend"].into_iter());
        let r = InferenceResult::from_exact(
            Edge::new(SnodeId::new(0), SnodeId::new(1)),
            "t".into(),
            SnodeId::new(0),
            exact,
            InferenceMethod::Prior,
        );
        assert_eq!(r.guess, "acquaintance");
        assert!((r.total_mass() - 1.0).abs() < 1e-12);
    }
}
