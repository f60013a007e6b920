//! Seeker, passive-coalition and active (sybil) attacks on a graph snapshot.

use std::collections::{BTreeMap, BTreeSet};

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};

use super::enumerate::{check_size_guard, DEFAULT_EXACT_LIMIT};
use super::posterior::uniform_over;
use super::{
    AttackError, Fraction, Hypothesis, InferenceMethod, InferenceResult, KnownEdge, Knowledge,
    TargetModel,
};
use crate::analysis::chi_square_uniformity;
use crate::graph::{Graph, User};
use crate::ids::{GroupKey, SnodeId, UserId};
use crate::seeding::{derive_seed, rng_from};

/// Private label of every sybil account created by an active attacker.
pub const SYBIL_LABEL: &str = "probe";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "lowercase")]
pub enum AdversaryKind {
    Seeker,
    Passive {
        coalition: BTreeSet<UserId>,
    },
    Active {
        attacker: UserId,
        target: UserId,
        probes: u32,
    },
}

impl AdversaryKind {
    pub fn name(&self) -> &'static str {
        match self {
            AdversaryKind::Seeker => "seeker",
            AdversaryKind::Passive { .. } => "passive",
            AdversaryKind::Active { .. } => "active",
        }
    }
}

/// How a target files an unknown requester.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum TargetBehavior {
    #[default]
    Uniform,
    Fixed {
        group: GroupKey,
    },
    Weighted {
        weights: BTreeMap<GroupKey, f64>,
    },
}

impl TargetBehavior {
    fn choose(&self, target: &User, rng: &mut impl Rng) -> Result<GroupKey, AttackError> {
        let groups = target.groups();
        match self {
            TargetBehavior::Uniform => Ok(groups[rng.random_range(0..groups.len())].key().clone()),
            TargetBehavior::Fixed { group } => Ok(group.clone()),
            TargetBehavior::Weighted { weights } => {
                let w: Vec<f64> = groups
                    .iter()
                    .map(|g| weights.get(g.key()).copied().unwrap_or(0.0))
                    .collect();
                let dist = WeightedIndex::new(&w)
                    .map_err(|e| AttackError::Domain(format!("bad target weights: {e}")))?;
                Ok(groups[dist.sample(rng)].key().clone())
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttackConfig {
    pub seed: u64,
    pub exact_limit: usize,
    pub max_probes: u32,
    pub target_behavior: TargetBehavior,
}

impl Default for AttackConfig {
    fn default() -> Self {
        AttackConfig {
            seed: 0,
            exact_limit: DEFAULT_EXACT_LIMIT,
            max_probes: 10_000,
            target_behavior: TargetBehavior::Uniform,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeReport {
    #[serde(flatten)]
    pub inference: InferenceResult,
    /// Coalition member (or sybil) holding the other end, if any.
    pub observer: Option<UserId>,
    pub truth: String,
    pub correct: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterReport {
    pub target: UserId,
    pub snode: SnodeId,
    /// Indices into `per_edge`; all of these share one type.
    pub edges: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairReport {
    pub target: UserId,
    pub snodes: [SnodeId; 2],
    pub same_type: f64,
    pub exact: Fraction,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UniformityReport {
    pub snodes: usize,
    pub probes: u32,
    pub chi_square: f64,
    pub dof: usize,
    pub critical_95: f64,
    pub p_value: f64,
    pub uniform_at_95: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub edges: usize,
    pub inferred: usize,
    pub no_inference: usize,
    /// Share of edges whose guess matches the true label.
    pub success_rate: f64,
    /// Mean posterior mass on the guess: the expected success rate.
    pub predicted_success_rate: f64,
    /// Mean of `1/(k' n)` over the attacked sides.
    pub analytic_reference: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttackReport {
    pub model: String,
    pub seed: u64,
    pub per_edge: Vec<EdgeReport>,
    pub clusters: Vec<ClusterReport>,
    pub co_membership: Vec<PairReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub histogram: Option<BTreeMap<SnodeId, u32>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub uniformity: Option<UniformityReport>,
    pub summary: Summary,
}

struct TargetOutcome {
    edges: Vec<EdgeReport>,
    clusters: BTreeMap<SnodeId, Vec<usize>>,
    pairs: Vec<PairReport>,
    target: UserId,
    analytic: f64,
}

fn analytic_for(user: &User) -> f64 {
    1.0 / (user.groups().len() as f64 * user.snode_count() as f64)
}

fn truth_of(graph: &Graph, s: SnodeId) -> String {
    graph
        .secretary(s)
        .map(|sec| sec.private_tag().label().to_owned())
        .unwrap_or_default()
}

fn infer_target(
    graph: &Graph,
    knowledge: &Knowledge,
    target: &UserId,
    known: &[&KnownEdge],
    limit: usize,
) -> Result<TargetOutcome, AttackError> {
    let user = graph
        .user(target)
        .ok_or_else(|| AttackError::UnknownUser(target.clone()))?;
    let hypothesis = Hypothesis::from_user(user);
    let model = match check_size_guard(user.snode_count(), &hypothesis, limit) {
        Ok(()) => Some(TargetModel::new(&knowledge.public, knowledge, target, &hypothesis)?),
        Err(AttackError::TooLarge { .. }) => None,
        Err(e) => return Err(e),
    };
    let mut edges = Vec::with_capacity(known.len());
    let mut clusters: BTreeMap<SnodeId, Vec<usize>> = BTreeMap::new();
    for (i, ke) in known.iter().enumerate() {
        let inference = match &model {
            Some(m) => InferenceResult::from_exact(
                ke.edge,
                target.clone(),
                ke.target_snode,
                m.posterior(ke.target_snode),
                InferenceMethod::Exact,
            ),
            None => {
                let mut r = InferenceResult::from_exact(
                    ke.edge,
                    target.clone(),
                    ke.target_snode,
                    uniform_over(hypothesis.labels()),
                    InferenceMethod::None,
                );
                r.exact = None;
                r
            }
        };
        let truth = truth_of(graph, ke.target_snode);
        edges.push(EdgeReport {
            correct: inference.guess == truth,
            inference,
            observer: Some(ke.member.clone()),
            truth,
        });
        clusters.entry(ke.target_snode).or_default().push(i);
    }
    let mut pairs = Vec::new();
    if let Some(m) = &model {
        let snodes: Vec<SnodeId> = clusters.keys().copied().collect();
        for (i, &a) in snodes.iter().enumerate() {
            for &b in &snodes[i + 1..] {
                let exact = m.same_type(a, b);
                pairs.push(PairReport {
                    target: target.clone(),
                    snodes: [a, b],
                    same_type: exact.to_f64(),
                    exact,
                });
            }
        }
    }
    Ok(TargetOutcome {
        edges,
        clusters,
        pairs,
        target: target.clone(),
        analytic: analytic_for(user),
    })
}

fn summarize(edges: &[EdgeReport], analytic_sum: f64) -> Summary {
    let n = edges.len();
    if n == 0 {
        return Summary::default();
    }
    let no_inference = edges
        .iter()
        .filter(|e| e.inference.method == InferenceMethod::None)
        .count();
    let correct = edges.iter().filter(|e| e.correct).count();
    let predicted: f64 = edges.iter().map(|e| e.inference.mass(&e.inference.guess)).sum();
    Summary {
        edges: n,
        inferred: n - no_inference,
        no_inference,
        success_rate: correct as f64 / n as f64,
        predicted_success_rate: predicted / n as f64,
        analytic_reference: analytic_sum / n as f64,
    }
}

fn assemble(model: &str, seed: u64, outcomes: Vec<TargetOutcome>) -> AttackReport {
    let mut per_edge = Vec::new();
    let mut clusters = Vec::new();
    let mut co_membership = Vec::new();
    let mut analytic_sum = 0.0;
    for outcome in outcomes {
        let offset = per_edge.len();
        analytic_sum += outcome.analytic * outcome.edges.len() as f64;
        for (snode, idx) in outcome.clusters {
            clusters.push(ClusterReport {
                target: outcome.target.clone(),
                snode,
                edges: idx.into_iter().map(|i| i + offset).collect(),
            });
        }
        per_edge.extend(outcome.edges);
        co_membership.extend(outcome.pairs);
    }
    let summary = summarize(&per_edge, analytic_sum);
    AttackReport {
        model: model.to_owned(),
        seed,
        per_edge,
        clusters,
        co_membership,
        histogram: None,
        uniformity: None,
        summary,
    }
}

/// A browsing adversary with the public view only: every side of every
/// edge gets the uniform prior over the owner's labels.
pub fn seeker_baseline(graph: &Graph, config: &AttackConfig) -> AttackReport {
    let view = graph.export_public_view();
    let mut outcomes: BTreeMap<UserId, TargetOutcome> = BTreeMap::new();
    for edge in &view.edges {
        let (a, b) = edge.endpoints();
        for s in [a, b] {
            let owner = view.owner(s).expect("edge endpoint in view");
            let user = graph.user(owner).expect("owner exists");
            let hypothesis = Hypothesis::from_user(user);
            let inference = InferenceResult::from_exact(
                *edge,
                owner.clone(),
                s,
                uniform_over(hypothesis.labels()),
                InferenceMethod::Prior,
            );
            let truth = truth_of(graph, s);
            let outcome = outcomes.entry(owner.clone()).or_insert_with(|| TargetOutcome {
                edges: Vec::new(),
                clusters: BTreeMap::new(),
                pairs: Vec::new(),
                target: owner.clone(),
                analytic: analytic_for(user),
            });
            outcome.clusters.entry(s).or_default().push(outcome.edges.len());
            outcome.edges.push(EdgeReport {
                correct: inference.guess == truth,
                inference,
                observer: None,
                truth,
            });
        }
    }
    assemble("seeker", config.seed, outcomes.into_values().collect())
}

/// Pool the coalition's own connections and infer, for every outside user
/// they reach, the type behind each of those edges.
pub fn passive_collusion_attack(
    graph: &Graph,
    coalition: &BTreeSet<UserId>,
    config: &AttackConfig,
) -> Result<AttackReport, AttackError> {
    let knowledge = Knowledge::gather(graph, coalition)?;
    let targets: Vec<(&UserId, Vec<&KnownEdge>)> = knowledge.targets().into_iter().collect();
    let outcomes = targets
        .par_iter()
        .map(|(target, known)| infer_target(graph, &knowledge, target, known, config.exact_limit))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(assemble("passive", config.seed, outcomes))
}

/// Probe `target` through `probes` fresh sybil accounts, each connecting
/// once via the normal request/accept path, then infer as a coalition.
pub fn active_attack(
    graph: &Graph,
    attacker: &UserId,
    target: &UserId,
    probes: u32,
    config: &AttackConfig,
) -> Result<AttackReport, AttackError> {
    for u in [attacker, target] {
        if graph.user(u).is_none() {
            return Err(AttackError::UnknownUser(u.clone()));
        }
    }
    if attacker == target {
        return Err(AttackError::Domain("attacker and target must differ".into()));
    }
    if probes > config.max_probes {
        return Err(AttackError::ThresholdExceeded {
            probes,
            max: config.max_probes,
        });
    }
    let mut g = graph.clone();
    let mut rng = rng_from(config.seed);
    let sybil_group = GroupKey::simple(SYBIL_LABEL);
    let mut coalition = BTreeSet::from([attacker.clone()]);
    let mut sybils = BTreeSet::new();
    for i in 0..probes {
        let mut id = format!("{attacker}~sybil{i}");
        while g.user(&UserId::new(id.as_str())).is_some() {
            id.push('\'');
        }
        let id = UserId::new(id);
        g.setup_naive(id.clone(), 1, 1, 1, &[SYBIL_LABEL], derive_seed(config.seed, u64::from(i)))?;
        let group = config
            .target_behavior
            .choose(g.user(target).expect("checked"), &mut rng)?;
        g.connect(&id, &sybil_group, target, &group)?;
        coalition.insert(id.clone());
        sybils.insert(id);
    }
    let knowledge = Knowledge::gather(&g, &coalition)?;
    let known: Vec<&KnownEdge> = knowledge.edges.iter().filter(|e| &e.target == target).collect();
    let outcome = infer_target(&g, &knowledge, target, &known, config.exact_limit)?;

    let target_snodes: Vec<SnodeId> = g.user(target).expect("checked").snodes().collect();
    let mut histogram: BTreeMap<SnodeId, u32> = BTreeMap::new();
    for ke in known.iter().filter(|e| sybils.contains(&e.member)) {
        *histogram.entry(ke.target_snode).or_default() += 1;
    }
    let uniformity = (probes > 0 && target_snodes.len() > 1).then(|| {
        let counts: Vec<u32> = target_snodes
            .iter()
            .map(|s| histogram.get(s).copied().unwrap_or(0))
            .collect();
        uniformity_test(&counts, probes)
    });

    let mut report = assemble("active", config.seed, vec![outcome]);
    report.histogram = Some(histogram);
    report.uniformity = uniformity;
    Ok(report)
}

/// Pearson chi-square against equal expected counts, at the 5% level.
pub fn uniformity_test(counts: &[u32], probes: u32) -> UniformityReport {
    let stat = chi_square_uniformity(counts);
    let dof = counts.len().saturating_sub(1).max(1);
    let dist = ChiSquared::new(dof as f64).expect("positive degrees of freedom");
    let critical = dist.inverse_cdf(0.95);
    UniformityReport {
        snodes: counts.len(),
        probes,
        chi_square: stat,
        dof,
        critical_95: critical,
        p_value: 1.0 - dist.cdf(stat),
        uniform_at_95: stat <= critical,
    }
}

pub fn run_attack(
    graph: &Graph,
    kind: &AdversaryKind,
    config: &AttackConfig,
) -> Result<AttackReport, AttackError> {
    match kind {
        AdversaryKind::Seeker => Ok(seeker_baseline(graph, config)),
        AdversaryKind::Passive { coalition } => passive_collusion_attack(graph, coalition, config),
        AdversaryKind::Active {
            attacker,
            target,
            probes,
        } => active_attack(graph, attacker, target, *probes, config),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ring_graph() -> Graph {
        let mut g = Graph::new(0);
        let labels = ["a1", "b2", "c3"];
        for (i, u) in ["u0", "u1", "u2", "u3"].into_iter().enumerate() {
            g.setup_naive(u, 6, 3, 6, &labels, i as u64).unwrap();
        }
        let pairs = [("u0", "u1", "a1", "b2"), ("u1", "u2", "c3", "a1"), ("u2", "u3", "b2", "b2"), ("u0", "u3", "c3", "c3")];
        for (x, y, gx, gy) in pairs {
            g.connect(&x.into(), &GroupKey::simple(gx), &y.into(), &GroupKey::simple(gy))
                .unwrap();
        }
        g
    }

    #[test]
    fn seeker_sees_uniform_priors() {
        let g = ring_graph();
        let r = seeker_baseline(&g, &AttackConfig::default());
        assert_eq!(r.per_edge.len(), 8);
        for e in &r.per_edge {
            assert_eq!(e.inference.method, InferenceMethod::Prior);
            for p in e.inference.posterior.values() {
                assert_eq!(*p, 1.0 / 3.0);
            }
        }
        assert!((r.summary.analytic_reference - 1.0 / 18.0).abs() < 1e-12);
    }

    #[test]
    fn single_member_single_edge_is_uniform() {
        let g = ring_graph();
        let r = passive_collusion_attack(&g, &BTreeSet::from(["u2".into()]), &AttackConfig::default())
            .unwrap();
        assert_eq!(r.per_edge.len(), 2);
        for e in &r.per_edge {
            assert_eq!(e.inference.exact.as_ref().unwrap().values().collect::<BTreeSet<_>>(), BTreeSet::from([&Fraction::new(1, 3)]));
        }
    }

    #[test]
    fn passive_errors() {
        let g = ring_graph();
        let cfg = AttackConfig::default();
        assert!(matches!(
            passive_collusion_attack(&g, &BTreeSet::new(), &cfg),
            Err(AttackError::EmptyCoalition)
        ));
        assert!(matches!(
            passive_collusion_attack(&g, &BTreeSet::from(["nobody".into()]), &cfg),
            Err(AttackError::UnknownUser(_))
        ));
    }

    #[test]
    fn zero_probes_give_empty_histogram() {
        let g = ring_graph();
        let r = active_attack(&g, &"u0".into(), &"u2".into(), 0, &AttackConfig::default()).unwrap();
        assert_eq!(r.histogram, Some(BTreeMap::new()));
        assert!(r.per_edge.is_empty());
        assert!(r.uniformity.is_none());
    }

    #[test]
    fn single_group_target_is_fully_linked() {
        let mut g = ring_graph();
        g.setup_naive("mono", 4, 1, 4, &["kin"], 9).unwrap();
        let r = active_attack(&g, &"u0".into(), &"mono".into(), 9, &AttackConfig::default()).unwrap();
        assert_eq!(r.per_edge.len(), 9);
        for e in &r.per_edge {
            assert_eq!(e.inference.posterior["kin"], 1.0);
            assert!(e.correct);
        }
        assert!(r.co_membership.iter().all(|p| p.exact == Fraction::ONE));
        assert_eq!(r.histogram.unwrap().values().sum::<u32>(), 9);
    }

    #[test]
    fn probe_budget_is_enforced() {
        let g = ring_graph();
        let cfg = AttackConfig { max_probes: 3, ..AttackConfig::default() };
        assert!(matches!(
            active_attack(&g, &"u0".into(), &"u1".into(), 4, &cfg),
            Err(AttackError::ThresholdExceeded { probes: 4, max: 3 })
        ));
        assert!(active_attack(&g, &"u0".into(), &"u0".into(), 1, &cfg).is_err());
    }

    #[test]
    fn fixed_behavior_concentrates_probes() {
        let g = ring_graph();
        let cfg = AttackConfig {
            target_behavior: TargetBehavior::Fixed { group: GroupKey::simple("b2") },
            ..AttackConfig::default()
        };
        let r = active_attack(&g, &"u0".into(), &"u3".into(), 6, &cfg).unwrap();
        let hist = r.histogram.unwrap();
        // b2 holds 2 snodes, one already carrying an edge from u2
        assert_eq!(hist.values().copied().collect::<BTreeSet<_>>(), BTreeSet::from([3]));
        assert_eq!(hist.len(), 2);
        assert!(r.per_edge.iter().filter(|e| e.observer.as_ref().unwrap().as_str() != "u0").all(|e| e.truth == "b2"));
    }

    #[test]
    fn reports_repeat_for_a_seed() {
        let g = ring_graph();
        let cfg = AttackConfig { seed: 5, ..AttackConfig::default() };
        let a = active_attack(&g, &"u1".into(), &"u3".into(), 20, &cfg).unwrap();
        let b = active_attack(&g, &"u1".into(), &"u3".into(), 20, &cfg).unwrap();
        assert_eq!(a, b);
    }
}
