//! Seeded random graphs for experiments and property tests.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::graph::{Graph, GraphError, GroupSpec, DEFAULT_PUBLIC_TAG};
use crate::ids::{GroupKey, UserId};
use crate::seeding::{derive_seed, rng_from};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenConfig {
    /// Number of users `m`.
    pub users: u32,
    /// Secretaries per user `n`.
    pub snodes: u32,
    /// Relationship types per user `k`.
    pub types: u32,
    /// Instances per type `l`; above 1 the advanced scheme is used.
    #[serde(default = "one")]
    pub instances: u32,
    /// Target mean number of connections per user `c`.
    pub mean_degree: f64,
    #[serde(default = "default_prefix")]
    pub label_prefix: String,
    #[serde(default = "default_tag")]
    pub public_tag: String,
}

fn one() -> u32 {
    1
}

fn default_prefix() -> String {
    "kind".into()
}

fn default_tag() -> String {
    DEFAULT_PUBLIC_TAG.into()
}

impl GenConfig {
    pub fn naive(users: u32, snodes: u32, types: u32, mean_degree: f64) -> Self {
        GenConfig {
            users,
            snodes,
            types,
            instances: 1,
            mean_degree,
            label_prefix: default_prefix(),
            public_tag: default_tag(),
        }
    }

    pub fn labels(&self) -> Vec<String> {
        (0..self.types).map(|i| format!("{}{i}", self.label_prefix)).collect()
    }

    /// Advanced layout: `n` split as evenly as possible over `k l`
    /// instances, earlier instances taking the remainder.
    fn group_specs(&self) -> Vec<GroupSpec> {
        let slots = self.types * self.instances;
        let (base, extra) = (self.snodes / slots, self.snodes % slots);
        let mut out = Vec::new();
        let mut idx = 0;
        for label in self.labels() {
            for j in 1..=self.instances {
                let cap = base + u32::from(idx < extra);
                if cap > 0 {
                    out.push(GroupSpec::new(label.clone(), j, cap));
                }
                idx += 1;
            }
        }
        out
    }
}

/// Build a graph of `users` ids `u0..`, then connect `round(c m / 2)`
/// distinct random pairs, each side filing the other under a uniformly
/// chosen group.
pub fn random_graph(config: &GenConfig, seed: u64) -> Result<Graph, GraphError> {
    if config.types == 0 || config.snodes < config.types || config.instances == 0 {
        return Err(GraphError::ConstraintViolation(format!(
            "need 1 <= k <= n and l >= 1, got n={}, k={}, l={}",
            config.snodes, config.types, config.instances
        )));
    }
    if !(config.mean_degree.is_finite() && config.mean_degree >= 0.0) {
        return Err(GraphError::ConstraintViolation("mean degree must be non-negative".into()));
    }
    let mut graph = Graph::with_public_tag(seed, config.public_tag.clone());
    let labels = config.labels();
    let threshold = 2 * config.snodes;
    for i in 0..config.users {
        let id = UserId::new(format!("u{i}"));
        let user_seed = derive_seed(seed, u64::from(i));
        if config.instances == 1 {
            graph.setup_naive(id, config.snodes, config.types, threshold, &labels, user_seed)?;
        } else {
            graph.setup_advanced(id, &config.group_specs(), threshold, user_seed)?;
        }
    }

    let m = config.users as usize;
    let mut pairs: Vec<(usize, usize)> =
        (0..m).flat_map(|a| (a + 1..m).map(move |b| (a, b))).collect();
    let mut rng = rng_from(derive_seed(seed, u64::MAX));
    pairs.shuffle(&mut rng);
    let wanted = (config.mean_degree * m as f64 / 2.0).round() as usize;
    let ids: Vec<UserId> = (0..m).map(|i| UserId::new(format!("u{i}"))).collect();
    for &(a, b) in pairs.iter().take(wanted) {
        let (a, b) = if rng.random::<bool>() { (a, b) } else { (b, a) };
        let ga = pick_group(&graph, &ids[a], &mut rng);
        let gb = pick_group(&graph, &ids[b], &mut rng);
        graph.connect(&ids[a], &ga, &ids[b], &gb)?;
    }
    Ok(graph)
}

fn pick_group(graph: &Graph, user: &UserId, rng: &mut impl Rng) -> GroupKey {
    let groups = graph.user(user).expect("generated user").groups();
    groups[rng.random_range(0..groups.len())].key().clone()
}
