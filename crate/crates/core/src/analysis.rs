//! Closed-form privacy metrics and empirical load statistics.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::Graph;
use crate::ids::{GroupKey, UserId};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AnalysisError {
    #[error("domain error: {0}")]
    Domain(String),
}

fn domain(msg: impl Into<String>) -> AnalysisError {
    AnalysisError::Domain(msg.into())
}

/// Network-wide parameters: `n` snodes per user, `k` types, `l` instances
/// per type, `c` mean connections per user, `m` users.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NetworkParams {
    pub n: u64,
    pub k: u64,
    pub l: u64,
    pub c: f64,
    pub m: u64,
}

impl NetworkParams {
    /// Rejects non-positive values; returns warnings for suspicious but
    /// admissible combinations.
    pub fn validate(&self) -> Result<Vec<String>, AnalysisError> {
        if self.n == 0 || self.k == 0 || self.l == 0 || self.m == 0 {
            return Err(domain("n, k, l and m must be positive"));
        }
        if !(self.c.is_finite() && self.c > 0.0) {
            return Err(domain("c must be positive"));
        }
        if self.k > self.n {
            return Err(domain(format!("k={} exceeds n={}", self.k, self.n)));
        }
        let mut warnings = Vec::new();
        if self.k * self.l > self.n {
            warnings.push(format!(
                "k*l={} exceeds n={}: some group instances cannot own a secretary",
                self.k * self.l,
                self.n
            ));
        }
        Ok(warnings)
    }

    /// Rounded per-user averages measured on a graph; `None` when empty or
    /// when no connections exist.
    pub fn from_graph(graph: &Graph) -> Option<Self> {
        let m = graph.user_count();
        if m == 0 || graph.edges().is_empty() {
            return None;
        }
        let mf = m as f64;
        let mean = |f: &dyn Fn(&crate::graph::User) -> f64| graph.users().map(f).sum::<f64>() / mf;
        let n = mean(&|u| u.snode_count() as f64).round().max(1.0) as u64;
        let k = mean(&|u| u.type_count() as f64).round().clamp(1.0, n as f64) as u64;
        let l = mean(&|u| u.groups().len() as f64 / u.type_count() as f64)
            .round()
            .max(1.0) as u64;
        let c = 2.0 * graph.edges().len() as f64 / mf;
        Some(NetworkParams { n, k, l, c, m: m as u64 })
    }
}

/// Chance of naming a secretary's relationship type: `1/(k n)`.
pub fn guess_prob_naive(n: u64, k: u64) -> Result<f64, AnalysisError> {
    if k == 0 || n == 0 || k > n {
        return Err(domain(format!("need 1 <= k <= n, got k={k}, n={n}")));
    }
    Ok(1.0 / (k as f64 * n as f64))
}

/// Advanced scheme with `l` instances per type: `1/(k l n)`.
pub fn guess_prob_advanced(n: u64, k: u64, l: u64) -> Result<f64, AnalysisError> {
    if l == 0 {
        return Err(domain("l must be positive"));
    }
    guess_prob_naive(n, k)?;
    Ok(1.0 / (k as f64 * l as f64 * n as f64))
}

/// `k' = k l`, the number of distinguishable group instances.
pub fn effective_type_count(k: u64, l: u64) -> u64 {
    k * l
}

/// `p = c k / n`, connections per secretary on average.
pub fn expected_load(c: f64, k: u64, n: u64) -> Result<f64, AnalysisError> {
    if !(c.is_finite() && c > 0.0) || k == 0 || n == 0 {
        return Err(domain(format!("need positive c, k, n; got c={c}, k={k}, n={n}")));
    }
    Ok(c * k as f64 / n as f64)
}

/// `n m` secretaries in the whole network.
pub fn total_snodes(n: u64, m: u64) -> u128 {
    u128::from(n) * u128::from(m)
}

/// Pearson statistic of `counts` against their own mean. Zero for empty or
/// all-zero input.
pub fn chi_square_uniformity(counts: &[u32]) -> f64 {
    if counts.is_empty() {
        return 0.0;
    }
    let mean = counts.iter().map(|&c| f64::from(c)).sum::<f64>() / counts.len() as f64;
    if mean == 0.0 {
        return 0.0;
    }
    counts
        .iter()
        .map(|&c| (f64::from(c) - mean).powi(2) / mean)
        .sum()
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct LoadStats {
    pub snodes: usize,
    pub min: u32,
    pub max: u32,
    pub mean: f64,
    pub spread: u32,
    pub chi_square: f64,
}

impl LoadStats {
    pub fn from_degrees(degrees: &[u32]) -> Self {
        let (Some(&min), Some(&max)) = (degrees.iter().min(), degrees.iter().max()) else {
            return LoadStats::default();
        };
        let mean = degrees.iter().map(|&d| f64::from(d)).sum::<f64>() / degrees.len() as f64;
        LoadStats {
            snodes: degrees.len(),
            min,
            max,
            mean,
            spread: max - min,
            chi_square: chi_square_uniformity(degrees),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupLoad {
    pub user: UserId,
    pub group: GroupKey,
    pub stats: LoadStats,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct LoadReport {
    pub users: usize,
    pub edges: usize,
    pub global: LoadStats,
    /// Largest within-group max−min over all groups.
    pub max_group_spread: u32,
    pub groups: Vec<GroupLoad>,
}

pub fn load_report(graph: &Graph) -> LoadReport {
    let degrees: Vec<u32> = graph.secretaries().map(|s| graph.degree(s.id())).collect();
    let groups: Vec<GroupLoad> = graph
        .users()
        .flat_map(|u| {
            u.groups().iter().map(move |g| {
                let d: Vec<u32> = g.members().iter().map(|s| graph.degree(*s)).collect();
                GroupLoad {
                    user: u.id().clone(),
                    group: g.key().clone(),
                    stats: LoadStats::from_degrees(&d),
                }
            })
        })
        .collect();
    LoadReport {
        users: graph.user_count(),
        edges: graph.edges().len(),
        global: LoadStats::from_degrees(&degrees),
        max_group_spread: groups.iter().map(|g| g.stats.spread).max().unwrap_or(0),
        groups,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalyticReport {
    pub p_naive: f64,
    pub p_advanced: f64,
    pub p_load: f64,
    pub total_snodes: u128,
    pub k_effective: u64,
}

pub fn analytic_report(params: &NetworkParams) -> Result<AnalyticReport, AnalysisError> {
    params.validate()?;
    Ok(AnalyticReport {
        p_naive: guess_prob_naive(params.n, params.k)?,
        p_advanced: guess_prob_advanced(params.n, params.k, params.l)?,
        p_load: expected_load(params.c, params.k, params.n)?,
        total_snodes: total_snodes(params.n, params.m),
        k_effective: effective_type_count(params.k, params.l),
    })
}

/// Body of `metrics.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub params: Option<NetworkParams>,
    pub analytic: Option<AnalyticReport>,
    pub empirical: LoadReport,
    pub warnings: Vec<String>,
}

/// Analytic metrics for `params` (or parameters measured on the graph) next
/// to the graph's measured load.
pub fn metrics_report(
    graph: &Graph,
    params: Option<NetworkParams>,
) -> Result<MetricsReport, AnalysisError> {
    let params = params.or_else(|| NetworkParams::from_graph(graph));
    let (analytic, warnings) = match &params {
        Some(p) => (Some(analytic_report(p)?), p.validate()?),
        None => (None, Vec::new()),
    };
    Ok(MetricsReport {
        params,
        analytic,
        empirical: load_report(graph),
        warnings,
    })
}
