//! Per-channel bandit statistics, their integer scale-up, and the
//! exploration schedules δ(t) and g(t).

use serde::{Deserialize, Serialize};

use crate::bipartite::DecisionVector;
use crate::error::{Error, Result};

/// Approximation slack sequence δ(t), strictly decreasing to zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum DeltaVariant {
    /// `1 / (ln(t+1) + 1)`
    #[serde(rename = "inv-log")]
    InvLog,
    /// `1 / (ln(ln(t+1) + 1) + 1)`
    #[default]
    #[serde(rename = "inv-loglog")]
    InvLogLog,
    /// `1 / (ln(ln(ln(t+1) + 1) + 1) + 1)`
    #[serde(rename = "inv-logloglog")]
    InvLogLogLog,
}

impl DeltaVariant {
    pub const ALL: [DeltaVariant; 3] = [
        DeltaVariant::InvLog,
        DeltaVariant::InvLogLog,
        DeltaVariant::InvLogLogLog,
    ];

    pub fn name(self) -> &'static str {
        match self {
            DeltaVariant::InvLog => "inv-log",
            DeltaVariant::InvLogLog => "inv-loglog",
            DeltaVariant::InvLogLogLog => "inv-logloglog",
        }
    }

    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "inv-log" => Ok(DeltaVariant::InvLog),
            "inv-loglog" | "default" => Ok(DeltaVariant::InvLogLog),
            "inv-logloglog" => Ok(DeltaVariant::InvLogLogLog),
            other => Err(Error::config(
                "delta_variant",
                format!("unknown variant `{other}` (inv-log | inv-loglog | inv-logloglog)"),
            )),
        }
    }

    pub fn eval(self, t: u64) -> f64 {
        let l = ((t + 1) as f64).ln();
        let denom = match self {
            DeltaVariant::InvLog => l + 1.0,
            DeltaVariant::InvLogLog => (l + 1.0).ln() + 1.0,
            DeltaVariant::InvLogLogLog => ((l + 1.0).ln() + 1.0).ln() + 1.0,
        };
        1.0 / denom
    }
}

/// Exploration width g(t) feeding the variance proxy `g(t) / (2 n)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum GVariant {
    /// `ln(t+1) + 4 ln(ln(t+1) + 1) * m`
    #[default]
    #[serde(rename = "full")]
    Full,
    /// `4 ln(ln(t+1) + 1) * m`
    #[serde(rename = "loglog")]
    LogLog,
    /// `ln(t+1)`
    #[serde(rename = "ln-only")]
    LnOnly,
}

impl GVariant {
    pub const ALL: [GVariant; 3] = [GVariant::Full, GVariant::LogLog, GVariant::LnOnly];

    pub fn name(self) -> &'static str {
        match self {
            GVariant::Full => "full",
            GVariant::LogLog => "loglog",
            GVariant::LnOnly => "ln-only",
        }
    }

    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "full" | "default" => Ok(GVariant::Full),
            "loglog" => Ok(GVariant::LogLog),
            "ln-only" => Ok(GVariant::LnOnly),
            other => Err(Error::config(
                "g_variant",
                format!("unknown variant `{other}` (full | loglog | ln-only)"),
            )),
        }
    }

    pub fn eval(self, t: u64, m_bound: u64) -> f64 {
        self.eval_real(t as f64, m_bound)
    }

    /// Same closed form at a real-valued time.
    pub fn eval_real(self, t: f64, m_bound: u64) -> f64 {
        let l = (t + 1.0).ln();
        let loglog = 4.0 * (l + 1.0).ln() * m_bound as f64;
        match self {
            GVariant::Full => l + loglog,
            GVariant::LogLog => loglog,
            GVariant::LnOnly => l,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Schedules {
    pub delta: DeltaVariant,
    pub g: GVariant,
    /// Upper bound on the number of edges any feasible decision selects.
    pub m_bound: u64,
    pub alpha: f64,
    /// Coefficient on the square-root exploration term.
    pub ucb_multiplier: f64,
}

impl Schedules {
    /// Schedules with `m_bound = ceil(alpha * |E|)` (at least 1).
    pub fn new(delta: DeltaVariant, g: GVariant, alpha: f64, num_edges: usize) -> Self {
        let m_bound = ((alpha * num_edges as f64).ceil() as u64).max(1);
        Schedules {
            delta,
            g,
            m_bound,
            alpha,
            ucb_multiplier: 1.0,
        }
    }

    pub fn with_m_bound(mut self, m_bound: u64) -> Self {
        self.m_bound = m_bound.max(1);
        self
    }

    pub fn eval_delta(&self, t: u64) -> f64 {
        self.delta.eval(t)
    }

    pub fn eval_g(&self, t: u64) -> f64 {
        self.g.eval(t, self.m_bound)
    }

    /// ξ(t) = ceil(m / δ(t)).
    pub fn xi(&self, t: u64) -> u64 {
        (self.m_bound as f64 / self.eval_delta(t)).ceil() as u64
    }
}

/// Running per-edge statistics. Unexplored edges have mean 0 and an
/// infinite variance proxy.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeStats {
    pub counts: Vec<u64>,
    pub value_sums: Vec<f64>,
    pub means: Vec<f64>,
    pub var_proxy: Vec<f64>,
    g: f64,
}

impl EdgeStats {
    pub fn new(num_edges: usize) -> Self {
        EdgeStats {
            counts: vec![0; num_edges],
            value_sums: vec![0.0; num_edges],
            means: vec![0.0; num_edges],
            var_proxy: vec![f64::INFINITY; num_edges],
            g: 0.0,
        }
    }

    pub fn num_edges(&self) -> usize {
        self.counts.len()
    }

    pub fn is_explored(&self, e: usize) -> bool {
        self.counts[e] > 0
    }

    /// The g(t) the variance proxies were last computed with.
    pub fn current_g(&self) -> f64 {
        self.g
    }

    /// Records the observations of the selected edges, then recomputes the
    /// variance proxies of every edge with `g(t)`.
    pub fn update(&mut self, x: &DecisionVector, observed: &[f64], sched: &Schedules, t: u64) {
        assert_eq!(x.len(), self.num_edges(), "decision length");
        for e in x.selected() {
            let v = observed[e];
            assert!((0.0..=1.0).contains(&v), "observation {v} outside [0, 1]");
            self.counts[e] += 1;
            self.value_sums[e] += v;
            self.means[e] = self.value_sums[e] / self.counts[e] as f64;
        }
        self.refresh(sched.eval_g(t));
    }

    /// Recomputes `var_proxy_e = g / (2 n_e)`.
    pub fn refresh(&mut self, g: f64) {
        self.g = g;
        for (v, &n) in self.var_proxy.iter_mut().zip(&self.counts) {
            *v = if n > 0 { g / (2.0 * n as f64) } else { f64::INFINITY };
        }
    }
}

/// Integer scale-up of the statistics at one slot.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScaledStats {
    pub xi: u64,
    pub scaled_means: Vec<i64>,
    pub scaled_vars: Vec<i64>,
    pub s_max: u64,
    /// Value assigned to `scaled_vars` of unexplored edges.
    pub sentinel: i64,
}

/// Scales the statistics to integers using ξ(t). Variance proxies are
/// recomputed with g(t) first.
pub fn scale(stats: &mut EdgeStats, sched: &Schedules, t: u64) -> ScaledStats {
    assert!(t >= 1, "decisions start at slot 1");
    let g = sched.eval_g(t);
    stats.refresh(g);
    scale_snapshot(stats, sched, t)
}

/// Like [`scale`] but uses the variance proxies exactly as stored.
pub fn scale_snapshot(stats: &EdgeStats, sched: &Schedules, t: u64) -> ScaledStats {
    let xi = sched.xi(t);
    let xi_f = xi as f64;
    let width = sched.ucb_multiplier * sched.ucb_multiplier;
    let edges = stats.num_edges() as i64;
    let sentinel = (2 * edges * (xi_f * xi_f * width * stats.current_g()).ceil() as i64).max(1);

    let scaled_means = stats
        .means
        .iter()
        .zip(&stats.counts)
        .map(|(&m, &n)| if n > 0 { (xi_f * m).ceil() as i64 } else { 0 })
        .collect();
    let scaled_vars = stats
        .var_proxy
        .iter()
        .zip(&stats.counts)
        .map(|(&v, &n)| {
            if n > 0 {
                (xi_f * xi_f * width * v).ceil() as i64
            } else {
                sentinel
            }
        })
        .collect();

    ScaledStats {
        xi,
        scaled_means,
        scaled_vars,
        s_max: xi * sched.m_bound,
        sentinel,
    }
}
