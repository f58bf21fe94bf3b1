//! ESDP: optimistic index `ν̂ᵀx + sqrt(σ̂²ᵀx)` maximized approximately by
//! integer scaling and the budgeted DP, then masked by the arrivals.

use crate::bipartite::{BipartiteGraph, DecisionVector, ResourceModel};
use crate::knapdp::{solve_family, BudgetedInstance, Family, Solution};
use crate::stats::{scale, EdgeStats, ScaledStats, Schedules};
use crate::workload::Instance;

use super::{Diagnostics, Policy, PolicyDecision, PolicyKind};

#[derive(Debug, Clone)]
pub struct EsdpState {
    pub stats: EdgeStats,
    pub schedules: Schedules,
    /// Last slot a decision was made for.
    pub t: u64,
}

impl EsdpState {
    pub fn new(num_edges: usize, schedules: Schedules) -> Self {
        EsdpState {
            stats: EdgeStats::new(num_edges),
            schedules,
            t: 0,
        }
    }
}

/// Budget maximizing `s + sqrt(objective(s))` over the feasible budgets;
/// ties go to the smallest `s`.
pub fn select_budget(family: &Family) -> (u64, &Solution) {
    let mut best: Option<(u64, &Solution, f64)> = None;
    for (s, sol) in family.solutions.iter().enumerate() {
        let Some(sol) = sol else { continue };
        let score = s as f64 + (sol.objective as f64).sqrt();
        if best.is_none_or(|(_, _, b)| score > b) {
            best = Some((s as u64, sol, score));
        }
    }
    let (s, sol, _) = best.expect("the empty vector always meets budget 0");
    (s, sol)
}

/// Unmasked ESDP choice for already scaled statistics.
pub fn decide_scaled(scaled: &ScaledStats, rm: &ResourceModel) -> (u64, Solution) {
    let inst = BudgetedInstance::new(
        rm.clone(),
        scaled.scaled_means.clone(),
        scaled.scaled_vars.clone(),
        scaled.s_max,
    )
    .expect("scaled statistics match the resource model");
    let family = solve_family(&inst);
    let (s, sol) = select_budget(&family);
    (s, sol.clone())
}

/// One ESDP decision at slot `t`: scale, solve every budget, pick s⋆, then
/// zero the channels of ports without a job.
pub fn esdp_decide(
    state: &mut EsdpState,
    t: u64,
    graph: &BipartiteGraph,
    arrivals: &[bool],
    rm: &ResourceModel,
) -> PolicyDecision {
    assert!(t >= 1, "decisions start at slot 1");
    state.t = t;
    let scaled = scale(&mut state.stats, &state.schedules, t);
    let (s_star, sol) = decide_scaled(&scaled, rm);
    let index_value = s_star as f64 + (sol.objective as f64).sqrt();
    let mut x = sol.x;
    x.apply_mask(&graph.arrival_mask(arrivals));
    PolicyDecision {
        x,
        diagnostics: Some(Diagnostics {
            s_star: Some(s_star),
            index_value: Some(index_value),
            port_ranks: Vec::new(),
        }),
    }
}

pub struct EsdpPolicy {
    graph: BipartiteGraph,
    resources: ResourceModel,
    state: EsdpState,
}

impl EsdpPolicy {
    pub fn new(instance: &Instance, schedules: Schedules) -> Self {
        EsdpPolicy {
            graph: instance.graph.clone(),
            resources: instance.resources.clone(),
            state: EsdpState::new(instance.num_edges(), schedules),
        }
    }

    pub fn state(&self) -> &EsdpState {
        &self.state
    }
}

impl Policy for EsdpPolicy {
    fn kind(&self) -> PolicyKind {
        PolicyKind::Esdp
    }

    fn decide(&mut self, t: u64, arrivals: &[bool]) -> PolicyDecision {
        esdp_decide(&mut self.state, t, &self.graph, arrivals, &self.resources)
    }

    fn observe(&mut self, t: u64, _arrivals: &[bool], x: &DecisionVector, observed: &[f64]) {
        let sched = self.state.schedules.clone();
        self.state.stats.update(x, observed, &sched, t);
    }

    fn edge_stats(&self) -> Option<&EdgeStats> {
        Some(&self.state.stats)
    }
}
