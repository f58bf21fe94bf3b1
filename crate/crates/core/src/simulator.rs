//! Discrete-time slot loop with coupled random streams, realized social
//! welfare and true-mean pseudo-regret.

use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::bipartite::{is_feasible, DecisionVector};
use crate::config::{SimConfig, TraceLevel};
use crate::error::{Error, Result};
use crate::exec::{self, ExecMode};
use crate::knapdp::{max_cardinality, max_weight_feasible};
use crate::policies::PolicyKind;
use crate::workload::{derive_seed, sample_arrivals, sample_net_valuations, Instance};

const ARRIVAL_STREAM: u64 = 4;
const VALUATION_STREAM: u64 = 5;

/// Regret below this is oracle round-off, not suboptimality.
const REGRET_SLACK: f64 = 1e-9;

/// Probability bound on the event that every port has a job in a slot.
pub fn theorem1_probability(arrival_probs: &[f64]) -> f64 {
    let gap = arrival_probs.len() as f64 - arrival_probs.iter().sum::<f64>();
    (-gap * gap / 3.0).exp()
}

#[derive(Debug, Clone, PartialEq)]
pub struct SlotOutcome {
    pub x: DecisionVector,
    /// Realized welfare `Z̃ᵀx`.
    pub sw: f64,
    /// `ν̃ᵀx`
    pub expected: f64,
    pub regret: f64,
    pub s_star: Option<u64>,
    pub wall_ns: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SlotRecord {
    pub t: u64,
    pub arrivals: Vec<bool>,
    pub oracle_value: f64,
    /// One entry per policy, in `RunResult::policies` order.
    pub outcomes: Vec<SlotOutcome>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct PolicySeries {
    /// Accumulated social welfare after each slot.
    pub cum_sw: Vec<f64>,
    pub cum_regret: Vec<f64>,
    /// `cum_sw[t] / t`
    pub avg_sw: Vec<f64>,
    pub wall_ns: Vec<u64>,
}

/// ESDP statistics after the update of slot `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct StatsSnapshot {
    pub t: u64,
    pub counts: Vec<u64>,
    pub means: Vec<f64>,
    pub var_proxy: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunResult {
    /// Seed of the random streams of this replication.
    pub seed: u64,
    pub policies: Vec<PolicyKind>,
    pub records: Vec<SlotRecord>,
    pub series: Vec<PolicySeries>,
    pub theorem1_probability: f64,
    pub stats_trace: Vec<StatsSnapshot>,
}

impl RunResult {
    pub fn horizon(&self) -> usize {
        self.records.len()
    }

    pub fn series_of(&self, kind: PolicyKind) -> Option<&PolicySeries> {
        self.policies
            .iter()
            .position(|&k| k == kind)
            .map(|i| &self.series[i])
    }
}

/// Seed of replication `rep`.
pub fn replication_seed(config: &SimConfig, rep: usize) -> u64 {
    config.seed.wrapping_add(rep as u64)
}

/// Instance of replication `rep`: the fixed instance file if configured,
/// otherwise one sampled from the replication seed.
pub fn replication_instance(config: &SimConfig, rep: usize, mode: ExecMode) -> Result<Instance> {
    match &config.instance_file {
        Some(path) => Instance::load(path),
        None => Ok(Instance::generate(&config.instance, replication_seed(config, rep), mode)),
    }
}

fn violation(kind: PolicyKind, t: u64, detail: String) -> Error {
    Error::ConstraintViolation {
        policy: kind.name().to_string(),
        slot: t as usize,
        detail,
    }
}

/// Runs every configured policy on `instance` for `config.horizon` slots.
/// Arrivals and valuations come from streams derived from `seed` alone,
/// so they do not depend on the policy list.
pub fn run_instance(config: &SimConfig, instance: &Instance, seed: u64) -> Result<RunResult> {
    config.validate()?;
    instance.validate()?;
    let graph = &instance.graph;
    let rm = &instance.resources;
    let truth = &instance.valuations.true_net_means;
    let edges = instance.num_edges();
    let horizon = config.horizon as usize;

    let schedules = config.schedules(edges, || max_cardinality(rm));
    let mut policies: Vec<_> = config
        .policies
        .iter()
        .map(|k| k.build(instance, &schedules))
        .collect();
    let mut arrival_rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, ARRIVAL_STREAM));
    let mut value_rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, VALUATION_STREAM));

    let mut records = Vec::with_capacity(horizon);
    let mut series = vec![PolicySeries::default(); policies.len()];
    let mut stats_trace = Vec::new();
    let mut observed = vec![f64::NAN; edges];

    for t in 1..=config.horizon {
        let arrivals = sample_arrivals(&instance.arrivals, &mut arrival_rng);
        let z = sample_net_valuations(&instance.valuations, &mut value_rng);
        let mask = graph.arrival_mask(&arrivals);
        let (_, oracle_value) = max_weight_feasible(truth, rm, &mask);

        let mut outcomes = Vec::with_capacity(policies.len());
        for (p, s) in policies.iter_mut().zip(series.iter_mut()) {
            let kind = p.kind();
            let start = config.timing.then(Instant::now);
            let decision = p.decide(t, &arrivals);
            let wall_ns = start.map_or(0, |s| s.elapsed().as_nanos() as u64);
            let x = decision.x;

            if x.len() != edges {
                return Err(violation(kind, t, format!("decision has {} entries for {edges} edges", x.len())));
            }
            if !is_feasible(&x, rm)? {
                return Err(violation(kind, t, format!("usage {:?} exceeds capacities {:?}", rm.usage(&x), rm.capacities)));
            }
            if !x.respects_mask(&mask) {
                return Err(violation(kind, t, "edge of a port without a job selected".into()));
            }

            let sw = x.dot(&z);
            let expected = x.dot(truth);
            let mut regret = oracle_value - expected;
            if regret < -REGRET_SLACK {
                return Err(violation(kind, t, format!("beats the oracle by {}", -regret)));
            }
            regret = regret.max(0.0);

            observed.fill(f64::NAN);
            for e in x.selected() {
                observed[e] = z[e];
            }
            p.observe(t, &arrivals, &x, &observed);
            if config.trace == TraceLevel::Stats && kind == PolicyKind::Esdp {
                if let Some(st) = p.edge_stats() {
                    stats_trace.push(StatsSnapshot {
                        t,
                        counts: st.counts.clone(),
                        means: st.means.clone(),
                        var_proxy: st.var_proxy.clone(),
                    });
                }
            }

            let prev_sw = s.cum_sw.last().copied().unwrap_or(0.0);
            let prev_re = s.cum_regret.last().copied().unwrap_or(0.0);
            s.cum_sw.push(prev_sw + sw);
            s.cum_regret.push(prev_re + regret);
            s.avg_sw.push((prev_sw + sw) / t as f64);
            s.wall_ns.push(wall_ns);

            outcomes.push(SlotOutcome {
                x,
                sw,
                expected,
                regret,
                s_star: decision.diagnostics.and_then(|d| d.s_star),
                wall_ns,
            });
        }
        records.push(SlotRecord {
            t,
            arrivals,
            oracle_value,
            outcomes,
        });
    }

    Ok(RunResult {
        seed,
        policies: config.policies.clone(),
        records,
        series,
        theorem1_probability: theorem1_probability(&instance.arrivals.arrival_probs),
        stats_trace,
    })
}

/// One replication of `config`.
pub fn run(config: &SimConfig, rep: usize, mode: ExecMode) -> Result<RunResult> {
    config.validate()?;
    let instance = replication_instance(config, rep, mode)?;
    run_instance(config, &instance, replication_seed(config, rep))
}

/// All replications, in replication order.
pub fn run_replications(config: &SimConfig, mode: ExecMode) -> Result<Vec<RunResult>> {
    config.validate()?;
    exec::map_range(mode, config.reps, |rep| run(config, rep, mode))
        .into_iter()
        .collect()
}

/// Per-slot mean and population standard deviation across replications.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeriesStats {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

impl SeriesStats {
    fn from_runs<'a>(runs: impl Iterator<Item = &'a [f64]> + Clone, len: usize) -> Self {
        let n = runs.clone().count() as f64;
        let mut mean = vec![0.0; len];
        for r in runs.clone() {
            for (m, v) in mean.iter_mut().zip(r) {
                *m += v / n;
            }
        }
        let mut std = vec![0.0; len];
        for r in runs {
            for ((s, m), v) in std.iter_mut().zip(&mean).zip(r) {
                *s += (v - m) * (v - m) / n;
            }
        }
        std.iter_mut().for_each(|s| *s = s.sqrt());
        SeriesStats { mean, std }
    }

    pub fn last_mean(&self) -> f64 {
        self.mean.last().copied().unwrap_or(0.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PolicySummary {
    pub policy: PolicyKind,
    pub cum_sw: SeriesStats,
    pub cum_regret: SeriesStats,
    pub avg_sw: SeriesStats,
    pub final_asw_mean: f64,
    pub final_asw_std: f64,
    pub final_regret_mean: f64,
    pub mean_wall_ns_per_slot: f64,
}

/// Seed-mean ESDP accumulated welfare over the baseline's, per slot.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RatioSeries {
    pub baseline: PolicyKind,
    pub ratio: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub horizon: usize,
    pub replications: usize,
    pub seeds: Vec<u64>,
    pub theorem1_probability: f64,
    pub policies: Vec<PolicySummary>,
    pub ratios: Vec<RatioSeries>,
}

impl Summary {
    pub fn policy(&self, kind: PolicyKind) -> Option<&PolicySummary> {
        self.policies.iter().find(|p| p.policy == kind)
    }

    pub fn ratio(&self, baseline: PolicyKind) -> Option<&RatioSeries> {
        self.ratios.iter().find(|r| r.baseline == baseline)
    }
}

pub fn aggregate(results: &[RunResult]) -> Result<Summary> {
    let first = results
        .first()
        .ok_or_else(|| Error::Aggregate("no runs".into()))?;
    let horizon = first.horizon();
    for r in results {
        if r.horizon() != horizon {
            return Err(Error::Aggregate(format!("horizons {} and {} differ", horizon, r.horizon())));
        }
        if r.policies != first.policies {
            return Err(Error::Aggregate("policy lists differ".into()));
        }
    }

    let policies: Vec<PolicySummary> = first
        .policies
        .iter()
        .enumerate()
        .map(|(i, &kind)| {
            let pick = |f: fn(&PolicySeries) -> &Vec<f64>| {
                SeriesStats::from_runs(results.iter().map(move |r| f(&r.series[i]).as_slice()), horizon)
            };
            let cum_sw = pick(|s| &s.cum_sw);
            let cum_regret = pick(|s| &s.cum_regret);
            let avg_sw = pick(|s| &s.avg_sw);
            let total_ns: u64 = results.iter().flat_map(|r| &r.series[i].wall_ns).sum();
            let slots = (results.len() * horizon).max(1) as f64;
            PolicySummary {
                policy: kind,
                final_asw_mean: cum_sw.last_mean(),
                final_asw_std: cum_sw.std.last().copied().unwrap_or(0.0),
                final_regret_mean: cum_regret.last_mean(),
                mean_wall_ns_per_slot: total_ns as f64 / slots,
                cum_sw,
                cum_regret,
                avg_sw,
            }
        })
        .collect();

    let ratios = match policies.iter().find(|p| p.policy == PolicyKind::Esdp) {
        None => Vec::new(),
        Some(esdp) => policies
            .iter()
            .filter(|p| p.policy.is_baseline())
            .map(|b| RatioSeries {
                baseline: b.policy,
                ratio: esdp
                    .cum_sw
                    .mean
                    .iter()
                    .zip(&b.cum_sw.mean)
                    .map(|(e, b)| e / b)
                    .collect(),
            })
            .collect(),
    };

    Ok(Summary {
        horizon,
        replications: results.len(),
        seeds: results.iter().map(|r| r.seed).collect(),
        theorem1_probability: results.iter().map(|r| r.theorem1_probability).sum::<f64>()
            / results.len() as f64,
        policies,
        ratios,
    })
}
