//! Dynamic program for the per-slot family of budgeted integer programs
//!
//! ```text
//! maximize    Σ̂ᵀx
//! subject to  A x <= c,   Υ̂ᵀx >= s,   x binary
//! ```
//!
//! for every budget `s` in `0..=s_max`, plus exhaustive oracles used by the
//! tests and a real-valued capacity knapsack used by the omniscient
//! benchmark.
//!
//! The table is indexed by budget `s`, residual capacity `c'` (a point of
//! the grid `0..=c_1 x ... x 0..=c_K`) and edge cursor `i`; state
//! `(s, c', i)` may only use edges `i..|E|`. Each state keeps its value and
//! one take bit, and decisions are rebuilt by walking the take bits.
//!
//! Ties between taking and skipping an edge go to skipping, so among optimal
//! vectors the one returned is the lexicographically smallest when edge 0 is
//! the most significant position.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::bipartite::{DecisionVector, ResourceModel};
use crate::error::{Error, Result};
use crate::exec::{self, ExecMode};

/// Marker for an unreachable state. Never used in arithmetic.
pub const INFEASIBLE: i64 = i64::MIN;

/// Largest edge count the exhaustive oracles accept.
pub const BRUTE_FORCE_LIMIT: usize = 20;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BudgetedInstance {
    pub resources: ResourceModel,
    pub scaled_means: Vec<i64>,
    pub scaled_vars: Vec<i64>,
    pub s_max: u64,
}

impl BudgetedInstance {
    pub fn new(
        resources: ResourceModel,
        scaled_means: Vec<i64>,
        scaled_vars: Vec<i64>,
        s_max: u64,
    ) -> Result<Self> {
        let edges = resources.num_edges();
        for (what, v) in [("scaled means", &scaled_means), ("scaled vars", &scaled_vars)] {
            if v.len() != edges {
                return Err(Error::Dimension {
                    what,
                    expected: edges,
                    got: v.len(),
                });
            }
            if v.iter().any(|&x| x < 0) {
                return Err(Error::InvalidModel(format!("negative entry in {what}")));
            }
        }
        Ok(BudgetedInstance {
            resources,
            scaled_means,
            scaled_vars,
            s_max,
        })
    }

    pub fn num_edges(&self) -> usize {
        self.scaled_means.len()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Solution {
    pub x: DecisionVector,
    pub objective: i64,
}

/// Optimal solution per budget; `None` where no binary vector meets the
/// budget within capacity.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Family {
    pub solutions: Vec<Option<Solution>>,
}

impl Family {
    pub fn get(&self, s: u64) -> Option<&Solution> {
        self.solutions.get(s as usize).and_then(Option::as_ref)
    }

    pub fn s_max(&self) -> u64 {
        self.solutions.len() as u64 - 1
    }

    pub fn objectives(&self) -> Vec<Option<i64>> {
        self.solutions
            .iter()
            .map(|s| s.as_ref().map(|s| s.objective))
            .collect()
    }
}

/// Mixed-radix encoding of the residual-capacity grid. Point index order is
/// lexicographic with resource 0 most significant, so clipped subtraction
/// of a nonzero column always lands on a smaller index.
#[derive(Debug, Clone)]
struct CapacityGrid {
    caps: Vec<u32>,
    strides: Vec<usize>,
    size: usize,
}

impl CapacityGrid {
    fn new(caps: &[u32]) -> Self {
        let mut strides = vec![0; caps.len()];
        let mut size = 1usize;
        for k in (0..caps.len()).rev() {
            strides[k] = size;
            size *= caps[k] as usize + 1;
        }
        CapacityGrid {
            caps: caps.to_vec(),
            strides,
            size,
        }
    }

    fn decode(&self, mut idx: usize) -> Vec<u32> {
        self.strides
            .iter()
            .map(|&st| {
                let v = idx / st;
                idx %= st;
                v as u32
            })
            .collect()
    }

    fn encode(&self, point: &[u32]) -> usize {
        point.iter().zip(&self.strides).map(|(&v, &st)| v as usize * st).sum()
    }

    fn top(&self) -> usize {
        self.encode(&self.caps)
    }
}

/// Per-edge transitions on the capacity grid: where a take lands after
/// clipped subtraction, and whether the edge fits at all.
#[derive(Debug, Clone)]
struct Transitions {
    child: Vec<Vec<usize>>,
    fits: Vec<Vec<bool>>,
}

impl Transitions {
    fn new(rm: &ResourceModel, grid: &CapacityGrid) -> Self {
        let edges = rm.num_edges();
        let mut child = vec![vec![0; grid.size]; edges];
        let mut fits = vec![vec![false; grid.size]; edges];
        for c in 0..grid.size {
            let point = grid.decode(c);
            for e in 0..edges {
                let mut ok = true;
                let rest: Vec<u32> = point
                    .iter()
                    .zip(rm.column(e))
                    .map(|(&have, need)| {
                        ok &= need <= have;
                        have.saturating_sub(need)
                    })
                    .collect();
                child[e][c] = grid.encode(&rest);
                fits[e][c] = ok;
            }
        }
        Transitions { child, fits }
    }
}

/// Filled value/take table for one instance.
#[derive(Debug, Clone)]
pub struct DpTable {
    values: Vec<i64>,
    take: Vec<bool>,
    grid: CapacityGrid,
    transitions: Transitions,
    scaled_means: Vec<i64>,
    edges: usize,
    /// Budgets above this are unreachable and were not tabulated.
    s_reach: u64,
    s_max: u64,
}

impl DpTable {
    fn idx(&self, s: u64, c: usize, i: usize) -> usize {
        (s as usize * self.grid.size + c) * (self.edges + 1) + i
    }

    /// Optimal value of the state `(s, c', i)`, or [`INFEASIBLE`].
    pub fn value(&self, s: u64, residual: &[u32], i: usize) -> i64 {
        if s > self.s_reach {
            return INFEASIBLE;
        }
        self.values[self.idx(s, self.grid.encode(residual), i)]
    }

    /// Values `V(s, c', 0)` over the whole capacity grid, in grid order.
    pub fn frontier(&self, s: u64) -> Vec<(Vec<u32>, i64)> {
        (0..self.grid.size)
            .map(|c| {
                let v = if s > self.s_reach {
                    INFEASIBLE
                } else {
                    self.values[self.idx(s, c, 0)]
                };
                (self.grid.decode(c), v)
            })
            .collect()
    }

    /// Number of stored states.
    pub fn num_states(&self) -> usize {
        self.values.len()
    }

    fn reconstruct(&self, s: u64) -> Option<Solution> {
        if s > self.s_reach {
            return None;
        }
        let top = self.grid.top();
        let objective = self.values[self.idx(s, top, 0)];
        if objective == INFEASIBLE {
            return None;
        }
        let mut x = DecisionVector::zeros(self.edges);
        let (mut s, mut c) = (s, top);
        for i in 0..self.edges {
            if self.take[self.idx(s, c, i)] {
                x.set(i, true);
                s = s.saturating_sub(self.scaled_means[i] as u64);
                c = self.transitions.child[i][c];
            }
        }
        Some(Solution { x, objective })
    }

    pub fn family(&self) -> Family {
        Family {
            solutions: (0..=self.s_max).map(|s| self.reconstruct(s)).collect(),
        }
    }
}

/// Fills the value table for every budget in `0..=s_max`.
pub fn solve_table(inst: &BudgetedInstance) -> DpTable {
    let edges = inst.num_edges();
    let grid = CapacityGrid::new(&inst.resources.capacities);
    let transitions = Transitions::new(&inst.resources, &grid);
    // No vector reaches a budget above the sum of all scaled means.
    let reachable: u64 = inst.scaled_means.iter().map(|&u| u as u64).sum();
    let s_reach = inst.s_max.min(reachable);

    let rows = s_reach as usize + 1;
    let mut table = DpTable {
        values: vec![INFEASIBLE; rows * grid.size * (edges + 1)],
        take: vec![false; rows * grid.size * (edges + 1)],
        grid,
        transitions,
        scaled_means: inst.scaled_means.clone(),
        edges,
        s_reach,
        s_max: inst.s_max,
    };

    // s ascending, c' ascending, i descending: every take-branch child
    // (smaller s, or equal s with strictly smaller c') is already final.
    for s in 0..=s_reach {
        for c in 0..table.grid.size {
            let base = table.idx(s, c, edges);
            table.values[base] = if s == 0 { 0 } else { INFEASIBLE };
            for i in (0..edges).rev() {
                let here = table.idx(s, c, i);
                let skip = table.values[here + 1];
                if c == 0 {
                    table.values[here] = skip;
                    continue;
                }
                let s_child = s.saturating_sub(inst.scaled_means[i] as u64);
                let c_child = table.transitions.child[i][c];
                let child = table.values[table.idx(s_child, c_child, i + 1)];
                let take = if child == INFEASIBLE {
                    INFEASIBLE
                } else {
                    child + inst.scaled_vars[i]
                };
                // The clipped child may hide a capacity deficit; a take that
                // would exceed c' is reverted to the skip branch.
                if take > skip && table.transitions.fits[i][c] {
                    table.values[here] = take;
                    table.take[here] = true;
                } else {
                    table.values[here] = skip;
                }
            }
        }
    }
    table
}

/// Optimal solution of every budgeted program in the family.
pub fn solve_family(inst: &BudgetedInstance) -> Family {
    solve_table(inst).family()
}

/// Exhaustive solution of the same family, with the same tie-breaking.
pub fn brute_force_family(inst: &BudgetedInstance) -> Result<Family> {
    let edges = inst.num_edges();
    if edges > BRUTE_FORCE_LIMIT {
        return Err(Error::TooLarge {
            edges,
            limit: BRUTE_FORCE_LIMIT,
        });
    }
    let levels = inst.s_max as usize + 1;
    // best vector whose budget level min(Υ̂ᵀx, s_max) is exactly u
    let mut at_level: Vec<Option<Solution>> = vec![None; levels];
    for mask in 0..(1u64 << edges) {
        let x = DecisionVector::from_mask(mask, edges);
        if !fits_all(&x, &inst.resources) {
            continue;
        }
        let reach = x.dot_int(&inst.scaled_means) as u64;
        let candidate = Solution {
            objective: x.dot_int(&inst.scaled_vars),
            x,
        };
        let slot = &mut at_level[reach.min(inst.s_max) as usize];
        if better(&candidate, slot.as_ref()) {
            *slot = Some(candidate);
        }
    }
    let mut solutions = vec![None; levels];
    let mut running: Option<Solution> = None;
    for s in (0..levels).rev() {
        if let Some(c) = at_level[s].take() {
            if better(&c, running.as_ref()) {
                running = Some(c);
            }
        }
        solutions[s] = running.clone();
    }
    Ok(Family { solutions })
}

fn better(candidate: &Solution, incumbent: Option<&Solution>) -> bool {
    match incumbent {
        None => true,
        Some(inc) => {
            candidate.objective > inc.objective
                || (candidate.objective == inc.objective && candidate.x < inc.x)
        }
    }
}

fn fits_all(x: &DecisionVector, rm: &ResourceModel) -> bool {
    rm.usage(x)
        .iter()
        .zip(&rm.capacities)
        .all(|(&u, &c)| u <= u64::from(c))
}

/// Exact maximizer of `wᵀx` over `A x <= c` with masked-out edges forced to
/// zero. Edges with nonpositive weight are never taken.
pub fn max_weight_feasible(
    weights: &[f64],
    rm: &ResourceModel,
    allowed: &[bool],
) -> (DecisionVector, f64) {
    let edges = rm.num_edges();
    assert_eq!(weights.len(), edges, "weight length");
    assert_eq!(allowed.len(), edges, "mask length");
    let grid = CapacityGrid::new(&rm.capacities);
    let transitions = Transitions::new(rm, &grid);

    // values[i * grid + c]: best using edges i.. with residual c
    let mut values = vec![0.0f64; (edges + 1) * grid.size];
    let mut take = vec![false; edges * grid.size];
    for i in (0..edges).rev() {
        for c in 0..grid.size {
            let skip = values[(i + 1) * grid.size + c];
            let mut best = skip;
            if allowed[i] && transitions.fits[i][c] {
                let with = weights[i] + values[(i + 1) * grid.size + transitions.child[i][c]];
                if with > skip {
                    best = with;
                    take[i * grid.size + c] = true;
                }
            }
            values[i * grid.size + c] = best;
        }
    }

    let mut x = DecisionVector::zeros(edges);
    let mut c = grid.top();
    for i in 0..edges {
        if take[i * grid.size + c] {
            x.set(i, true);
            c = transitions.child[i][c];
        }
    }
    let value = x.dot(weights);
    (x, value)
}

/// Exhaustive counterpart of [`max_weight_feasible`].
pub fn brute_force_max_weight(
    weights: &[f64],
    rm: &ResourceModel,
    allowed: &[bool],
) -> Result<(DecisionVector, f64)> {
    let edges = rm.num_edges();
    if edges > BRUTE_FORCE_LIMIT {
        return Err(Error::TooLarge {
            edges,
            limit: BRUTE_FORCE_LIMIT,
        });
    }
    let mut best = (DecisionVector::zeros(edges), 0.0);
    for mask in 1..(1u64 << edges) {
        let x = DecisionVector::from_mask(mask, edges);
        if !x.respects_mask(allowed) || !fits_all(&x, rm) {
            continue;
        }
        let v = x.dot(weights);
        if v > best.1 {
            best = (x, v);
        }
    }
    Ok(best)
}

/// Largest number of edges any capacity-feasible vector selects.
pub fn max_cardinality(rm: &ResourceModel) -> u64 {
    let edges = rm.num_edges();
    let (x, _) = max_weight_feasible(&vec![1.0; edges], rm, &vec![true; edges]);
    x.count() as u64
}

/// Random small instance: up to 10 edges, up to 2 resources, capacities up
/// to 3, scaled means up to 8 and budgets up to their total.
pub fn random_instance<R: Rng>(rng: &mut R) -> BudgetedInstance {
    let edges = rng.random_range(1..=10);
    let k = rng.random_range(1..=2);
    let capacities: Vec<u32> = (0..k).map(|_| rng.random_range(1..=3)).collect();
    let mut requirements: Vec<Vec<u32>> = capacities
        .iter()
        .map(|&c| (0..edges).map(|_| rng.random_range(0..=c)).collect())
        .collect();
    for e in 0..edges {
        if requirements.iter().all(|row| row[e] == 0) {
            requirements[0][e] = 1;
        }
    }
    let resources = ResourceModel::new(requirements, capacities).expect("valid by construction");
    let scaled_means: Vec<i64> = (0..edges).map(|_| rng.random_range(0..=8)).collect();
    let scaled_vars = (0..edges).map(|_| rng.random_range(0..=50)).collect();
    let s_max = scaled_means.iter().sum::<i64>() as u64 + 1;
    BudgetedInstance::new(resources, scaled_means, scaled_vars, s_max).expect("valid by construction")
}

/// First budget at which the DP and exhaustive objectives differ.
pub fn first_mismatch(inst: &BudgetedInstance) -> Result<Option<u64>> {
    let dp = solve_family(inst).objectives();
    let bf = brute_force_family(inst)?.objectives();
    Ok(dp.iter().zip(&bf).position(|(a, b)| a != b).map(|s| s as u64))
}

/// Compares the DP against enumeration on `n` random instances. Returns
/// the indices of failing instances.
pub fn oracle_check(n: usize, seed: u64, mode: ExecMode) -> Vec<usize> {
    exec::map_range(mode, n, |i| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(i as u64);
        let inst = random_instance(&mut rng);
        matches!(first_mismatch(&inst), Ok(None))
    })
    .into_iter()
    .enumerate()
    .filter(|(_, ok)| !ok)
    .map(|(i, _)| i)
    .collect()
}
