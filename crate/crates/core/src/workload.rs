//! Job arrivals, noisy per-channel net valuations and the ground-truth
//! means used by the omniscient benchmark.

use std::path::Path;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::bipartite::{build_random_graph, sample_resources, BipartiteGraph, ResourceModel};
use crate::error::{Error, Result};
use crate::exec::{self, ExecMode};

/// Derives an independent sub-seed from `seed` for stream `tag`
/// (splitmix64 finalizer).
pub fn derive_seed(seed: u64, tag: u64) -> u64 {
    let mut z = seed
        .wrapping_add(tag.wrapping_mul(0x9E37_79B9_7F4A_7C15))
        .wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArrivalModel {
    pub arrival_probs: Vec<f64>,
}

impl ArrivalModel {
    pub fn uniform(num_ports: usize, prob: f64) -> Self {
        ArrivalModel {
            arrival_probs: vec![prob; num_ports],
        }
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(p) = self
            .arrival_probs
            .iter()
            .find(|p| !(0.0..=1.0).contains(*p))
        {
            return Err(Error::InvalidModel(format!("arrival probability {p} outside [0, 1]")));
        }
        Ok(())
    }
}

/// One Bernoulli draw per port.
pub fn sample_arrivals<R: Rng>(am: &ArrivalModel, rng: &mut R) -> Vec<bool> {
    am.arrival_probs.iter().map(|&p| rng.random_bool(p)).collect()
}

/// How the per-resource supply costs of an edge are folded into one number.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CostAggregation {
    #[default]
    Mean,
    Sum,
}

impl std::str::FromStr for CostAggregation {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "mean" => Ok(CostAggregation::Mean),
            "sum" => Ok(CostAggregation::Sum),
            other => Err(format!("unknown cost aggregation `{other}` (mean | sum)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValuationModel {
    pub raw_means: Vec<f64>,
    pub raw_stds: Vec<f64>,
    pub edge_costs: Vec<f64>,
    /// Mean of the clamped net-valuation sampler, per edge.
    pub true_net_means: Vec<f64>,
}

impl ValuationModel {
    /// Model with ground truth left empty; fill it with
    /// [`compute_true_net_means`].
    pub fn new(raw_means: Vec<f64>, raw_stds: Vec<f64>, edge_costs: Vec<f64>) -> Self {
        ValuationModel {
            raw_means,
            raw_stds,
            edge_costs,
            true_net_means: Vec::new(),
        }
    }

    pub fn num_edges(&self) -> usize {
        self.raw_means.len()
    }

    fn net_sample<R: Rng>(&self, e: usize, rng: &mut R) -> f64 {
        let raw = if self.raw_stds[e] > 0.0 {
            Normal::new(self.raw_means[e], self.raw_stds[e])
                .expect("finite std")
                .sample(rng)
        } else {
            self.raw_means[e]
        };
        (raw - self.edge_costs[e]).clamp(0.0, 1.0)
    }
}

/// Full vector of clamped net valuations for one slot.
pub fn sample_net_valuations<R: Rng>(vm: &ValuationModel, rng: &mut R) -> Vec<f64> {
    (0..vm.num_edges()).map(|e| vm.net_sample(e, rng)).collect()
}

/// Monte Carlo estimate of each edge's clamped net mean, stored into the
/// model. Each edge uses its own stream, so the result does not depend on
/// the execution mode.
pub fn compute_true_net_means(
    vm: &mut ValuationModel,
    num_samples: usize,
    seed: u64,
    mode: ExecMode,
) -> Vec<f64> {
    assert!(num_samples >= 100_000, "too few Monte Carlo samples");
    let model = &*vm;
    let means = exec::map_range(mode, model.num_edges(), |e| {
        if model.raw_stds[e] == 0.0 {
            return (model.raw_means[e] - model.edge_costs[e]).clamp(0.0, 1.0);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(e as u64);
        let normal = Normal::new(model.raw_means[e], model.raw_stds[e]).expect("finite std");
        let cost = model.edge_costs[e];
        let total: f64 = (0..num_samples)
            .map(|_| (normal.sample(&mut rng) - cost).clamp(0.0, 1.0))
            .sum();
        total / num_samples as f64
    });
    vm.true_net_means = means.clone();
    means
}

/// Knobs for drawing a random problem instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceParams {
    pub num_ports: usize,
    pub num_servers: usize,
    pub edge_prob: f64,
    pub arrival_prob: f64,
    pub num_resources: usize,
    pub req_bounds: (u32, u32),
    pub cap_bounds: (u32, u32),
    pub capacity_scale: f64,
    pub mean_bounds: (f64, f64),
    pub cost_mean: f64,
    pub cost_std: f64,
    pub cost_aggregation: CostAggregation,
    pub truth_samples: usize,
}

impl Default for InstanceParams {
    fn default() -> Self {
        InstanceParams {
            num_ports: 8,
            num_servers: 40,
            edge_prob: 0.1,
            arrival_prob: 0.9,
            num_resources: 3,
            req_bounds: (1, 2),
            cap_bounds: (1, 2),
            capacity_scale: 1.0,
            mean_bounds: (0.1, 1.0),
            cost_mean: 0.5,
            cost_std: 0.1,
            cost_aggregation: CostAggregation::Mean,
            truth_samples: 200_000,
        }
    }
}

/// Everything a simulation needs to know about the cluster and its
/// workload. Serialized as the instance file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Instance {
    pub seed: u64,
    #[serde(flatten)]
    pub graph: BipartiteGraph,
    #[serde(flatten)]
    pub resources: ResourceModel,
    #[serde(flatten)]
    pub arrivals: ArrivalModel,
    #[serde(flatten)]
    pub valuations: ValuationModel,
}

impl Instance {
    pub fn generate(params: &InstanceParams, seed: u64, mode: ExecMode) -> Instance {
        let graph = build_random_graph(params.num_ports, params.num_servers, params.edge_prob, seed);
        let edges = graph.num_edges();

        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, 1));
        let resources = sample_resources(
            edges,
            params.num_resources,
            params.req_bounds,
            params.cap_bounds,
            params.capacity_scale,
            &mut rng,
        );

        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, 2));
        let (lo, hi) = params.mean_bounds;
        let raw_means: Vec<f64> = (0..edges).map(|_| rng.random_range(lo..=hi)).collect();
        let raw_stds = raw_means.iter().map(|m| m / 2.0).collect();
        let cost_dist = Normal::new(params.cost_mean, params.cost_std).expect("finite cost std");
        let k = params.num_resources.max(1);
        let edge_costs = (0..edges)
            .map(|_| {
                let total: f64 = (0..k)
                    .map(|_| cost_dist.sample(&mut rng).clamp(0.0, 1.0))
                    .sum();
                let agg = match params.cost_aggregation {
                    CostAggregation::Mean => total / k as f64,
                    CostAggregation::Sum => total,
                };
                agg.clamp(0.0, 1.0)
            })
            .collect();

        let mut valuations = ValuationModel::new(raw_means, raw_stds, edge_costs);
        compute_true_net_means(
            &mut valuations,
            params.truth_samples,
            derive_seed(seed, 3),
            mode,
        );

        Instance {
            seed,
            graph,
            resources,
            arrivals: ArrivalModel::uniform(params.num_ports, params.arrival_prob),
            valuations,
        }
    }

    pub fn num_edges(&self) -> usize {
        self.graph.num_edges()
    }

    pub fn validate(&self) -> Result<()> {
        self.resources.validate()?;
        self.arrivals.validate()?;
        let edges = self.graph.num_edges();
        let check = |what: &'static str, got: usize, expected: usize| {
            if got == expected {
                Ok(())
            } else {
                Err(Error::Dimension { what, expected, got })
            }
        };
        check("requirement columns", self.resources.num_edges(), edges)?;
        check("arrival probabilities", self.arrivals.arrival_probs.len(), self.graph.num_ports())?;
        check("raw means", self.valuations.raw_means.len(), edges)?;
        check("raw stds", self.valuations.raw_stds.len(), edges)?;
        check("edge costs", self.valuations.edge_costs.len(), edges)?;
        check("true net means", self.valuations.true_net_means.len(), edges)?;
        if self
            .valuations
            .true_net_means
            .iter()
            .any(|m| !(0.0..=1.0).contains(m))
        {
            return Err(Error::InvalidModel("true net means outside [0, 1]".into()));
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("instance serializes")
    }

    pub fn from_json(text: &str) -> Result<Instance> {
        let inst: Instance = serde_json::from_str(text)?;
        inst.validate()?;
        Ok(inst)
    }

    pub fn load(path: &Path) -> Result<Instance> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Instance::from_json(&text)
    }
}
