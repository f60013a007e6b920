//! Scripted runs: setup, connections, policies and attacks read from one
//! JSON file, checked up front, then executed in order.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::access::{set_policy, PermissionSet, Policy};
use crate::adversary::{run_attack, AdversaryKind, AttackConfig, AttackReport, TargetBehavior, DEFAULT_EXACT_LIMIT};
use crate::analysis::{metrics_report, MetricsReport};
use crate::codec::{canonical_json, export_dot, public_view_to_json, serialize_graph};
use crate::graph::{Graph, GroupSpec, DEFAULT_PUBLIC_TAG};
use crate::ids::{GroupKey, UserId};
use crate::seeding::derive_seed;

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("validation error: {0}")]
    Validation(String),
    #[error("{section}[{index}] failed: {message}")]
    Runtime {
        section: &'static str,
        index: usize,
        message: String,
    },
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl ScenarioError {
    pub fn exit_code(&self) -> i32 {
        match self {
            ScenarioError::Parse(_) => 2,
            ScenarioError::Validation(_) => 3,
            ScenarioError::Runtime { .. } => 4,
            ScenarioError::Io(_) => 1,
        }
    }
}

fn runtime(section: &'static str, index: usize, err: impl ToString) -> ScenarioError {
    ScenarioError::Runtime {
        section,
        index,
        message: err.to_string(),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "scheme", rename_all = "lowercase", deny_unknown_fields)]
pub enum UserSetup {
    Naive {
        id: UserId,
        n: u32,
        types: Vec<String>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        threshold: Option<u32>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        seed: Option<u64>,
    },
    Advanced {
        id: UserId,
        groups: Vec<GroupSpec>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        threshold: Option<u32>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        seed: Option<u64>,
    },
}

impl UserSetup {
    pub fn id(&self) -> &UserId {
        match self {
            UserSetup::Naive { id, .. } | UserSetup::Advanced { id, .. } => id,
        }
    }

    fn group_keys(&self) -> BTreeSet<GroupKey> {
        match self {
            UserSetup::Naive { types, .. } => types.iter().map(|t| GroupKey::simple(t.as_str())).collect(),
            UserSetup::Advanced { groups, .. } => groups.iter().map(GroupSpec::key).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConnectionStep {
    pub requester: UserId,
    pub requester_group: GroupKey,
    pub target: UserId,
    pub target_group: GroupKey,
}

/// With `group` set, grants that group's permissions; without, sets the
/// owner's guest permissions.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolicyStep {
    pub owner: UserId,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub group: Option<GroupKey>,
    pub permissions: PermissionSet,
    #[serde(default)]
    pub allow_sensitive_guest: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttackStep {
    #[serde(flatten)]
    pub kind: AdversaryKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exact_limit: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_probes: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target_behavior: Option<TargetBehavior>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub public_tag: Option<String>,
    #[serde(default)]
    pub users: Vec<UserSetup>,
    #[serde(default)]
    pub connections: Vec<ConnectionStep>,
    #[serde(default)]
    pub policies: Vec<PolicyStep>,
    #[serde(default)]
    pub attacks: Vec<AttackStep>,
}

/// Users and their group keys, as far as references need to resolve.
pub type Catalog = BTreeMap<UserId, BTreeSet<GroupKey>>;

pub fn catalog_of(graph: &Graph) -> Catalog {
    graph
        .users()
        .map(|u| (u.id().clone(), u.groups().iter().map(|g| g.key().clone()).collect()))
        .collect()
}

fn check_user(catalog: &Catalog, user: &UserId, at: &str) -> Result<(), ScenarioError> {
    if catalog.contains_key(user) {
        Ok(())
    } else {
        Err(ScenarioError::Validation(format!("{at}: unknown user {user}")))
    }
}

fn check_group(catalog: &Catalog, user: &UserId, group: &GroupKey, at: &str) -> Result<(), ScenarioError> {
    check_user(catalog, user, at)?;
    if catalog[user].contains(group) {
        Ok(())
    } else {
        Err(ScenarioError::Validation(format!("{at}: {user} has no group {group}")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioOutput {
    pub graph: Graph,
    pub policies: BTreeMap<UserId, Policy>,
    pub metrics: MetricsReport,
    pub attacks: Vec<AttackReport>,
}

impl Scenario {
    pub fn parse(bytes: &[u8]) -> Result<Self, ScenarioError> {
        serde_json::from_slice(bytes).map_err(|e| ScenarioError::Parse(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, ScenarioError> {
        Scenario::parse(&fs::read(path)?)
    }

    /// Users and groups the setup section will create.
    pub fn catalog(&self) -> Result<Catalog, ScenarioError> {
        let mut catalog = Catalog::new();
        for (i, setup) in self.users.iter().enumerate() {
            if catalog.insert(setup.id().clone(), setup.group_keys()).is_some() {
                return Err(ScenarioError::Validation(format!(
                    "users[{i}]: duplicate user {}",
                    setup.id()
                )));
            }
        }
        Ok(catalog)
    }

    /// Check every reference in the connection, policy and attack sections
    /// against `catalog` (users and groups existing by then).
    pub fn validate_against(&self, catalog: &Catalog) -> Result<(), ScenarioError> {
        for (i, c) in self.connections.iter().enumerate() {
            let at = format!("connections[{i}]");
            check_group(catalog, &c.requester, &c.requester_group, &at)?;
            check_group(catalog, &c.target, &c.target_group, &at)?;
        }
        for (i, p) in self.policies.iter().enumerate() {
            let at = format!("policies[{i}]");
            match &p.group {
                Some(g) => check_group(catalog, &p.owner, g, &at)?,
                None => check_user(catalog, &p.owner, &at)?,
            }
        }
        for (i, a) in self.attacks.iter().enumerate() {
            let at = format!("attacks[{i}]");
            match &a.kind {
                AdversaryKind::Seeker => {}
                AdversaryKind::Passive { coalition } => {
                    if coalition.is_empty() {
                        return Err(ScenarioError::Validation(format!("{at}: empty coalition")));
                    }
                    for u in coalition {
                        check_user(catalog, u, &at)?;
                    }
                }
                AdversaryKind::Active { attacker, target, .. } => {
                    check_user(catalog, attacker, &at)?;
                    check_user(catalog, target, &at)?;
                    if let Some(TargetBehavior::Fixed { group }) = &a.target_behavior {
                        check_group(catalog, target, group, &at)?;
                    }
                }
            }
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), ScenarioError> {
        self.validate_against(&self.catalog()?)
    }

    /// Run the setup section on a fresh graph.
    pub fn setup_graph(&self) -> Result<Graph, ScenarioError> {
        let tag = self.public_tag.clone().unwrap_or_else(|| DEFAULT_PUBLIC_TAG.to_owned());
        let mut graph = Graph::with_public_tag(self.seed, tag);
        for (i, setup) in self.users.iter().enumerate() {
            let fallback = derive_seed(self.seed, i as u64);
            let result = match setup {
                UserSetup::Naive {
                    id,
                    n,
                    types,
                    threshold,
                    seed,
                } => graph
                    .setup_naive(
                        id.clone(),
                        *n,
                        types.len() as u32,
                        threshold.unwrap_or(*n),
                        types,
                        seed.unwrap_or(fallback),
                    )
                    .map(|_| ()),
                UserSetup::Advanced {
                    id,
                    groups,
                    threshold,
                    seed,
                } => {
                    let total: u32 = groups.iter().map(|g| g.capacity).sum();
                    graph
                        .setup_advanced(id.clone(), groups, threshold.unwrap_or(total), seed.unwrap_or(fallback))
                        .map(|_| ())
                }
            };
            result.map_err(|e| runtime("users", i, e))?;
        }
        Ok(graph)
    }

    pub fn apply_connections(&self, graph: &mut Graph) -> Result<(), ScenarioError> {
        for (i, c) in self.connections.iter().enumerate() {
            graph
                .connect(&c.requester, &c.requester_group, &c.target, &c.target_group)
                .map_err(|e| runtime("connections", i, e))?;
        }
        Ok(())
    }

    /// Build one policy per owner from the policy section.
    pub fn build_policies(&self, graph: &Graph) -> Result<BTreeMap<UserId, Policy>, ScenarioError> {
        let mut policies: BTreeMap<UserId, Policy> = BTreeMap::new();
        for (i, p) in self.policies.iter().enumerate() {
            let policy = policies
                .entry(p.owner.clone())
                .or_insert_with(|| Policy::new(p.owner.clone()));
            let result = match &p.group {
                Some(group) => set_policy(graph, policy, group, p.permissions.clone()),
                None if p.allow_sensitive_guest => policy.set_guest_unrestricted(p.permissions.clone()),
                None => policy.set_guest(p.permissions.clone()),
            };
            result.map_err(|e| runtime("policies", i, e))?;
        }
        Ok(policies)
    }

    pub fn attack_config(&self, index: usize) -> AttackConfig {
        let step = &self.attacks[index];
        AttackConfig {
            seed: step
                .seed
                .unwrap_or_else(|| derive_seed(self.seed, (1 << 32) + index as u64)),
            exact_limit: step.exact_limit.unwrap_or(DEFAULT_EXACT_LIMIT),
            max_probes: step.max_probes.unwrap_or(AttackConfig::default().max_probes),
            target_behavior: step.target_behavior.clone().unwrap_or_default(),
        }
    }

    pub fn run_attacks(&self, graph: &Graph) -> Result<Vec<AttackReport>, ScenarioError> {
        (0..self.attacks.len())
            .map(|i| run_attack(graph, &self.attacks[i].kind, &self.attack_config(i)).map_err(|e| runtime("attacks", i, e)))
            .collect()
    }

    /// Validate, then setup, connections, policies and attacks in order.
    pub fn execute(&self) -> Result<ScenarioOutput, ScenarioError> {
        self.validate()?;
        let mut graph = self.setup_graph()?;
        self.apply_connections(&mut graph)?;
        let policies = self.build_policies(&graph)?;
        let metrics = metrics_report(&graph, None).map_err(|e| runtime("metrics", 0, e))?;
        let attacks = self.run_attacks(&graph)?;
        Ok(ScenarioOutput {
            graph,
            policies,
            metrics,
            attacks,
        })
    }
}

impl ScenarioOutput {
    /// Write the fixed output layout into `dir`, creating it if needed.
    pub fn write_to(&self, dir: &Path) -> Result<(), ScenarioError> {
        fs::create_dir_all(dir)?;
        let view = self.graph.export_public_view();
        fs::write(dir.join("graph.json"), serialize_graph(&self.graph))?;
        fs::write(dir.join("public.json"), public_view_to_json(&view))?;
        fs::write(dir.join("public.dot"), export_dot(&view))?;
        fs::write(dir.join("metrics.json"), canonical_json(&self.metrics))?;
        fs::write(dir.join("policies.json"), canonical_json(&self.policies))?;
        for (i, report) in self.attacks.iter().enumerate() {
            fs::write(dir.join(format!("attack-{i}.json")), canonical_json(report))?;
        }
        Ok(())
    }
}

/// Load, validate and execute a scenario file, writing results to `out`.
pub fn run_scenario(path: &Path, out: &Path) -> Result<ScenarioOutput, ScenarioError> {
    let output = Scenario::load(path)?.execute()?;
    output.write_to(out)?;
    Ok(output)
}
