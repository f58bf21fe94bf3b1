//! Port/server bipartite graph, resource requirements and the capacity
//! feasibility check for binary dispatch vectors.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A port (job type) on the left and a server on the right.
pub type Edge = (usize, usize);

/// Ports, servers and channels. The position of a channel in [`edges`]
/// is the coordinate used by every decision vector and statistic.
///
/// [`edges`]: BipartiteGraph::edges
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "GraphRepr", into = "GraphRepr")]
pub struct BipartiteGraph {
    num_ports: usize,
    num_servers: usize,
    edges: Vec<Edge>,
    port_edges: Vec<Vec<usize>>,
    server_edges: Vec<Vec<usize>>,
}

#[derive(Serialize, Deserialize, Clone)]
struct GraphRepr {
    ports: usize,
    servers: usize,
    edges: Vec<Edge>,
}

impl TryFrom<GraphRepr> for BipartiteGraph {
    type Error = Error;

    fn try_from(repr: GraphRepr) -> Result<Self> {
        BipartiteGraph::new(repr.ports, repr.servers, repr.edges)
    }
}

impl From<BipartiteGraph> for GraphRepr {
    fn from(g: BipartiteGraph) -> Self {
        GraphRepr {
            ports: g.num_ports,
            servers: g.num_servers,
            edges: g.edges,
        }
    }
}

impl BipartiteGraph {
    /// Builds a graph from an explicit edge list. Edges are sorted by
    /// `(port, server)`; duplicates and out-of-range endpoints are rejected.
    pub fn new(num_ports: usize, num_servers: usize, mut edges: Vec<Edge>) -> Result<Self> {
        edges.sort_unstable();
        if let Some(w) = edges.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::InvalidModel(format!("duplicate edge {:?}", w[0])));
        }
        if let Some(&(l, r)) = edges
            .iter()
            .find(|&&(l, r)| l >= num_ports || r >= num_servers)
        {
            return Err(Error::InvalidModel(format!(
                "edge ({l}, {r}) outside {num_ports} ports x {num_servers} servers"
            )));
        }

        let mut port_edges = vec![Vec::new(); num_ports];
        let mut server_edges = vec![Vec::new(); num_servers];
        for (i, &(l, r)) in edges.iter().enumerate() {
            port_edges[l].push(i);
            server_edges[r].push(i);
        }
        Ok(BipartiteGraph {
            num_ports,
            num_servers,
            edges,
            port_edges,
            server_edges,
        })
    }

    pub fn num_ports(&self) -> usize {
        self.num_ports
    }

    pub fn num_servers(&self) -> usize {
        self.num_servers
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge(&self, i: usize) -> Edge {
        self.edges[i]
    }

    /// Channels of port `l`, in ascending edge index.
    pub fn port_edges(&self, l: usize) -> &[usize] {
        &self.port_edges[l]
    }

    /// Channels ending at server `r`, in ascending edge index.
    pub fn server_edges(&self, r: usize) -> &[usize] {
        &self.server_edges[r]
    }

    /// Port owning edge `i`.
    pub fn port_of(&self, i: usize) -> usize {
        self.edges[i].0
    }

    /// Mask of edges whose port has a job this slot.
    pub fn arrival_mask(&self, arrivals: &[bool]) -> Vec<bool> {
        self.edges.iter().map(|&(l, _)| arrivals[l]).collect()
    }
}

/// Samples each `(port, server)` pair independently with probability
/// `edge_prob`, then attaches one uniformly random server to every port
/// left without a channel.
pub fn build_random_graph(
    num_ports: usize,
    num_servers: usize,
    edge_prob: f64,
    seed: u64,
) -> BipartiteGraph {
    assert!(num_ports >= 1 && num_servers >= 1, "empty side");
    assert!((0.0..=1.0).contains(&edge_prob), "edge_prob outside [0, 1]");

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges = Vec::new();
    for l in 0..num_ports {
        let before = edges.len();
        for r in 0..num_servers {
            if rng.random_bool(edge_prob) {
                edges.push((l, r));
            }
        }
        if edges.len() == before {
            edges.push((l, rng.random_range(0..num_servers)));
        }
    }
    BipartiteGraph::new(num_ports, num_servers, edges).expect("sampled edges are distinct")
}

/// Requirement matrix (resource types x edges) and per-type capacities.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResourceModel {
    /// `requirements[k][e]` units of resource `k` locked by dispatching on edge `e`.
    pub requirements: Vec<Vec<u32>>,
    pub capacities: Vec<u32>,
}

impl ResourceModel {
    pub fn new(requirements: Vec<Vec<u32>>, capacities: Vec<u32>) -> Result<Self> {
        let rm = ResourceModel {
            requirements,
            capacities,
        };
        rm.validate()?;
        Ok(rm)
    }

    pub fn validate(&self) -> Result<()> {
        if self.requirements.len() != self.capacities.len() {
            return Err(Error::Dimension {
                what: "requirement rows vs capacities",
                expected: self.capacities.len(),
                got: self.requirements.len(),
            });
        }
        let edges = self.num_edges();
        for row in &self.requirements {
            if row.len() != edges {
                return Err(Error::Dimension {
                    what: "requirement row length",
                    expected: edges,
                    got: row.len(),
                });
            }
        }
        if let Some(e) = (0..edges).find(|&e| self.requirements.iter().all(|row| row[e] == 0)) {
            return Err(Error::InvalidModel(format!("edge {e} requires no resources")));
        }
        Ok(())
    }

    pub fn num_resources(&self) -> usize {
        self.capacities.len()
    }

    pub fn num_edges(&self) -> usize {
        self.requirements.first().map_or(0, Vec::len)
    }

    /// Column `e` of the requirement matrix.
    pub fn column(&self, e: usize) -> impl Iterator<Item = u32> + '_ {
        self.requirements.iter().map(move |row| row[e])
    }

    /// `A x`, one entry per resource type.
    pub fn usage(&self, x: &DecisionVector) -> Vec<u64> {
        self.requirements
            .iter()
            .map(|row| {
                x.selected()
                    .map(|e| u64::from(row[e]))
                    .sum::<u64>()
            })
            .collect()
    }

    /// Whether adding edge `e` on top of `used` stays within capacity.
    pub fn fits(&self, used: &[u64], e: usize) -> bool {
        self.requirements
            .iter()
            .zip(&self.capacities)
            .zip(used)
            .all(|((row, &cap), &u)| u + u64::from(row[e]) <= u64::from(cap))
    }

    /// Number of points on the residual-capacity grid, `prod_k (c_k + 1)`.
    pub fn grid_size(&self) -> usize {
        self.capacities.iter().map(|&c| c as usize + 1).product()
    }
}

/// Draws integer requirements uniformly from `[req_lo, req_hi]` and
/// capacities from `[cap_lo, cap_hi]`, scales capacities by
/// `capacity_scale`, then raises each capacity to at least the largest
/// single-edge requirement of its type.
pub fn sample_resources<R: Rng>(
    num_edges: usize,
    num_resources: usize,
    (req_lo, req_hi): (u32, u32),
    (cap_lo, cap_hi): (u32, u32),
    capacity_scale: f64,
    rng: &mut R,
) -> ResourceModel {
    assert!(req_lo >= 1 && req_lo <= req_hi, "bad requirement bounds");
    assert!(cap_lo <= cap_hi, "bad capacity bounds");
    let requirements: Vec<Vec<u32>> = (0..num_resources)
        .map(|_| {
            (0..num_edges)
                .map(|_| rng.random_range(req_lo..=req_hi))
                .collect()
        })
        .collect();
    let capacities = requirements
        .iter()
        .map(|row| {
            let drawn = rng.random_range(cap_lo..=cap_hi);
            let scaled = (f64::from(drawn) * capacity_scale).round() as u32;
            scaled.max(row.iter().copied().max().unwrap_or(0))
        })
        .collect();
    ResourceModel {
        requirements,
        capacities,
    }
}

/// Binary dispatch decision; bit `e` set means the job of edge `e`'s port
/// is dispatched to that edge's server.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DecisionVector(Vec<bool>);

impl DecisionVector {
    pub fn zeros(len: usize) -> Self {
        DecisionVector(vec![false; len])
    }

    pub fn from_bits(bits: Vec<bool>) -> Self {
        DecisionVector(bits)
    }

    /// Builds a vector from the low `len` bits of `mask`, bit `e` of the mask
    /// being coordinate `e`.
    pub fn from_mask(mask: u64, len: usize) -> Self {
        DecisionVector((0..len).map(|e| mask >> e & 1 == 1).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, e: usize) -> bool {
        self.0[e]
    }

    pub fn set(&mut self, e: usize, on: bool) {
        self.0[e] = on;
    }

    pub fn bits(&self) -> &[bool] {
        &self.0
    }

    /// Indices of selected edges, ascending.
    pub fn selected(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().enumerate().filter(|(_, &b)| b).map(|(e, _)| e)
    }

    pub fn count(&self) -> usize {
        self.0.iter().filter(|&&b| b).count()
    }

    /// `w^T x`, summed in ascending edge order.
    pub fn dot(&self, w: &[f64]) -> f64 {
        self.selected().map(|e| w[e]).sum()
    }

    pub fn dot_int(&self, w: &[i64]) -> i64 {
        self.selected().map(|e| w[e]).sum()
    }

    /// Clears every bit whose mask entry is false.
    pub fn apply_mask(&mut self, mask: &[bool]) {
        for (b, &m) in self.0.iter_mut().zip(mask) {
            *b &= m;
        }
    }

    pub fn respects_mask(&self, mask: &[bool]) -> bool {
        self.0.iter().zip(mask).all(|(&b, &m)| !b || m)
    }
}

/// `true` iff `A x <= c` componentwise.
pub fn is_feasible(x: &DecisionVector, rm: &ResourceModel) -> Result<bool> {
    if x.len() != rm.num_edges() {
        return Err(Error::Dimension {
            what: "decision vector length",
            expected: rm.num_edges(),
            got: x.len(),
        });
    }
    Ok(rm
        .usage(x)
        .iter()
        .zip(&rm.capacities)
        .all(|(&u, &c)| u <= u64::from(c)))
}
