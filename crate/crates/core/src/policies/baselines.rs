//! Greedy port-ranking baselines. Each arrived port offers exactly one
//! channel; ports are visited in rank order and a channel is kept if it
//! still fits the remaining capacity.
//!
//! Baselines see only historical averages of their own observations.
//! [`BaselineState`] carries no variance information at all.

use std::cmp::Ordering;

use crate::bipartite::{BipartiteGraph, DecisionVector, ResourceModel};
use crate::workload::Instance;

use super::{Diagnostics, Policy, PolicyDecision, PolicyKind};

#[derive(Debug, Clone, PartialEq)]
pub struct BaselineState {
    counts: Vec<u64>,
    sums: Vec<f64>,
    /// Slots since each port last had a job dispatched, counted only over
    /// slots where it had a job.
    pub waiting: Vec<u64>,
}

impl BaselineState {
    pub fn new(num_edges: usize, num_ports: usize) -> Self {
        BaselineState {
            counts: vec![0; num_edges],
            sums: vec![0.0; num_edges],
            waiting: vec![0; num_ports],
        }
    }

    /// Average of past observations; 0 for an edge never selected.
    pub fn estimate(&self, e: usize) -> f64 {
        if self.counts[e] == 0 {
            0.0
        } else {
            self.sums[e] / self.counts[e] as f64
        }
    }

    pub fn set_estimate(&mut self, e: usize, value: f64) {
        self.counts[e] = 1;
        self.sums[e] = value;
    }

    /// Folds in the observations of selected edges and updates the waiting
    /// counters of ports that had a job.
    pub fn observe(
        &mut self,
        graph: &BipartiteGraph,
        arrivals: &[bool],
        x: &DecisionVector,
        observed: &[f64],
    ) {
        for e in x.selected() {
            self.counts[e] += 1;
            self.sums[e] += observed[e];
        }
        for (l, &arrived) in arrivals.iter().enumerate() {
            if !arrived {
                continue;
            }
            if graph.port_edges(l).iter().any(|&e| x.get(e)) {
                self.waiting[l] = 0;
            } else {
                self.waiting[l] += 1;
            }
        }
    }

    /// Channel of port `l` with the highest estimate, lowest index on ties.
    fn best_channel(&self, graph: &BipartiteGraph, l: usize) -> Option<(usize, f64)> {
        first_extreme(graph.port_edges(l), |e| self.estimate(e), Ordering::Greater)
    }
}

/// First element of `edges` whose key is extreme in direction `want`.
fn first_extreme(
    edges: &[usize],
    key: impl Fn(usize) -> f64,
    want: Ordering,
) -> Option<(usize, f64)> {
    let mut best: Option<(usize, f64)> = None;
    for &e in edges {
        let k = key(e);
        if best.is_none_or(|(_, b)| k.total_cmp(&b) == want) {
            best = Some((e, k));
        }
    }
    best
}

/// Walks `(port, channel)` candidates in order, keeping each channel that
/// fits.
fn greedy_fill(
    candidates: &[(usize, usize)],
    rm: &ResourceModel,
    num_edges: usize,
) -> PolicyDecision {
    let mut x = DecisionVector::zeros(num_edges);
    let mut used = vec![0u64; rm.num_resources()];
    for &(_, e) in candidates {
        if rm.fits(&used, e) {
            x.set(e, true);
            for (u, need) in used.iter_mut().zip(rm.column(e)) {
                *u += u64::from(need);
            }
        }
    }
    PolicyDecision {
        x,
        diagnostics: Some(Diagnostics {
            port_ranks: candidates.iter().map(|&(l, _)| l).collect(),
            ..Diagnostics::default()
        }),
    }
}

fn arrived_ports(arrivals: &[bool]) -> impl Iterator<Item = usize> + '_ {
    arrivals
        .iter()
        .enumerate()
        .filter(|(_, &a)| a)
        .map(|(l, _)| l)
}

/// Highest Social Welfare First: ports by descending best estimate.
pub fn hswf_decide(
    state: &BaselineState,
    graph: &BipartiteGraph,
    arrivals: &[bool],
    rm: &ResourceModel,
) -> PolicyDecision {
    let mut ranked: Vec<(usize, usize, f64)> = arrived_ports(arrivals)
        .filter_map(|l| state.best_channel(graph, l).map(|(e, v)| (l, e, v)))
        .collect();
    ranked.sort_by(|a, b| b.2.total_cmp(&a.2));
    let order: Vec<_> = ranked.iter().map(|&(l, e, _)| (l, e)).collect();
    greedy_fill(&order, rm, graph.num_edges())
}

/// Lowest Cost First: each port offers its cheapest channel; ports by
/// ascending cost.
pub fn lcf_decide(
    costs: &[f64],
    graph: &BipartiteGraph,
    arrivals: &[bool],
    rm: &ResourceModel,
) -> PolicyDecision {
    let mut ranked: Vec<(usize, usize, f64)> = arrived_ports(arrivals)
        .filter_map(|l| {
            first_extreme(graph.port_edges(l), |e| costs[e], Ordering::Less).map(|(e, c)| (l, e, c))
        })
        .collect();
    ranked.sort_by(|a, b| a.2.total_cmp(&b.2));
    let order: Vec<_> = ranked.iter().map(|&(l, e, _)| (l, e)).collect();
    greedy_fill(&order, rm, graph.num_edges())
}

/// Longest Waiting Time First: ports by descending waiting counter, each
/// offering its best-estimate channel.
pub fn lwtf_decide(
    state: &BaselineState,
    graph: &BipartiteGraph,
    arrivals: &[bool],
    rm: &ResourceModel,
) -> PolicyDecision {
    let mut ranked: Vec<(usize, usize)> = arrived_ports(arrivals)
        .filter_map(|l| state.best_channel(graph, l).map(|(e, _)| (l, e)))
        .collect();
    ranked.sort_by(|a, b| state.waiting[b.0].cmp(&state.waiting[a.0]));
    greedy_fill(&ranked, rm, graph.num_edges())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BaselineRule {
    Hswf,
    Lcf,
    Lwtf,
}

pub struct BaselinePolicy {
    rule: BaselineRule,
    graph: BipartiteGraph,
    resources: ResourceModel,
    costs: Vec<f64>,
    state: BaselineState,
}

impl BaselinePolicy {
    pub fn new(instance: &Instance, rule: BaselineRule) -> Self {
        BaselinePolicy {
            rule,
            graph: instance.graph.clone(),
            resources: instance.resources.clone(),
            costs: instance.valuations.edge_costs.clone(),
            state: BaselineState::new(instance.num_edges(), instance.graph.num_ports()),
        }
    }

    pub fn state(&self) -> &BaselineState {
        &self.state
    }
}

impl Policy for BaselinePolicy {
    fn kind(&self) -> PolicyKind {
        match self.rule {
            BaselineRule::Hswf => PolicyKind::Hswf,
            BaselineRule::Lcf => PolicyKind::Lcf,
            BaselineRule::Lwtf => PolicyKind::Lwtf,
        }
    }

    fn decide(&mut self, _t: u64, arrivals: &[bool]) -> PolicyDecision {
        match self.rule {
            BaselineRule::Hswf => hswf_decide(&self.state, &self.graph, arrivals, &self.resources),
            BaselineRule::Lcf => lcf_decide(&self.costs, &self.graph, arrivals, &self.resources),
            BaselineRule::Lwtf => lwtf_decide(&self.state, &self.graph, arrivals, &self.resources),
        }
    }

    fn observe(&mut self, _t: u64, arrivals: &[bool], x: &DecisionVector, observed: &[f64]) {
        self.state.observe(&self.graph, arrivals, x, observed);
    }
}
