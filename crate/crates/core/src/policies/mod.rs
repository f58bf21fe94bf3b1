//! Dispatch policies: ESDP, the greedy baselines and the omniscient oracle,
//! all behind [`Policy`].

mod baselines;
mod esdp;

pub use baselines::{
    hswf_decide, lcf_decide, lwtf_decide, BaselinePolicy, BaselineRule, BaselineState,
};
pub use esdp::{esdp_decide, select_budget, EsdpPolicy, EsdpState};

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::bipartite::{BipartiteGraph, DecisionVector, ResourceModel};
use crate::error::{Error, Result};
use crate::knapdp::max_weight_feasible;
use crate::stats::{EdgeStats, Schedules};
use crate::workload::Instance;

/// Extra information a policy may attach to a decision.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Diagnostics {
    /// Chosen budget s⋆ (ESDP only).
    pub s_star: Option<u64>,
    /// Index value `s⋆ + sqrt(Σ̂ᵀx)` at the chosen budget (ESDP only).
    pub index_value: Option<f64>,
    /// Arrived ports in the order a greedy baseline considered them.
    pub port_ranks: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PolicyDecision {
    pub x: DecisionVector,
    pub diagnostics: Option<Diagnostics>,
}

impl PolicyDecision {
    pub fn plain(x: DecisionVector) -> Self {
        PolicyDecision {
            x,
            diagnostics: None,
        }
    }
}

/// A dispatch rule driven slot by slot by the simulator.
pub trait Policy: Send {
    fn kind(&self) -> PolicyKind;

    /// Decision for slot `t >= 1` given which ports have a job.
    fn decide(&mut self, t: u64, arrivals: &[bool]) -> PolicyDecision;

    /// Semi-bandit feedback: only `observed[e]` for `x_e = 1` is meaningful.
    fn observe(&mut self, t: u64, arrivals: &[bool], x: &DecisionVector, observed: &[f64]);

    /// Learner statistics, for policies that keep them.
    fn edge_stats(&self) -> Option<&EdgeStats> {
        None
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PolicyKind {
    Esdp,
    Hswf,
    Lcf,
    Lwtf,
    Oracle,
}

impl PolicyKind {
    pub const ALL: [PolicyKind; 5] = [
        PolicyKind::Esdp,
        PolicyKind::Hswf,
        PolicyKind::Lcf,
        PolicyKind::Lwtf,
        PolicyKind::Oracle,
    ];

    pub fn name(self) -> &'static str {
        match self {
            PolicyKind::Esdp => "esdp",
            PolicyKind::Hswf => "hswf",
            PolicyKind::Lcf => "lcf",
            PolicyKind::Lwtf => "lwtf",
            PolicyKind::Oracle => "oracle",
        }
    }

    pub fn is_baseline(self) -> bool {
        matches!(self, PolicyKind::Hswf | PolicyKind::Lcf | PolicyKind::Lwtf)
    }

    /// Fresh policy state for one run on `instance`.
    pub fn build(self, instance: &Instance, schedules: &Schedules) -> Box<dyn Policy> {
        match self {
            PolicyKind::Esdp => Box::new(EsdpPolicy::new(instance, schedules.clone())),
            PolicyKind::Hswf => Box::new(BaselinePolicy::new(instance, BaselineRule::Hswf)),
            PolicyKind::Lcf => Box::new(BaselinePolicy::new(instance, BaselineRule::Lcf)),
            PolicyKind::Lwtf => Box::new(BaselinePolicy::new(instance, BaselineRule::Lwtf)),
            PolicyKind::Oracle => Box::new(OraclePolicy::new(instance)),
        }
    }
}

impl fmt::Display for PolicyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PolicyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        PolicyKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| {
                Error::config("policies", format!("unknown policy `{s}` (esdp | hswf | lcf | lwtf | oracle)"))
            })
    }
}

/// Benchmark that knows the true net means: exact capacity-constrained
/// maximization over the arrived ports' channels.
pub fn oracle_decide(
    true_means: &[f64],
    graph: &BipartiteGraph,
    arrivals: &[bool],
    rm: &ResourceModel,
) -> (PolicyDecision, f64) {
    let mask = graph.arrival_mask(arrivals);
    let (x, value) = max_weight_feasible(true_means, rm, &mask);
    (PolicyDecision::plain(x), value)
}

pub struct OraclePolicy {
    graph: BipartiteGraph,
    resources: ResourceModel,
    true_means: Vec<f64>,
}

impl OraclePolicy {
    pub fn new(instance: &Instance) -> Self {
        OraclePolicy {
            graph: instance.graph.clone(),
            resources: instance.resources.clone(),
            true_means: instance.valuations.true_net_means.clone(),
        }
    }
}

impl Policy for OraclePolicy {
    fn kind(&self) -> PolicyKind {
        PolicyKind::Oracle
    }

    fn decide(&mut self, _t: u64, arrivals: &[bool]) -> PolicyDecision {
        oracle_decide(&self.true_means, &self.graph, arrivals, &self.resources).0
    }

    fn observe(&mut self, _: u64, _: &[bool], _: &DecisionVector, _: &[f64]) {}
}
