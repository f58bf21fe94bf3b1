//! Flat `key = value` experiment configuration with typed validation.
//!
//! Lines starting with `#` are comments. Every key is optional; missing
//! keys take the default experiment settings (8 ports, 40 servers, edge
//! probability 0.1, 3 resource types, requirements and capacities in
//! `[1, 2]`, arrival probability 0.9, α = 0.5, T = 2000).

use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::policies::PolicyKind;
use crate::stats::{DeltaVariant, GVariant, Schedules};
use crate::workload::{CostAggregation, InstanceParams};

/// How the bound on selected edges per slot is obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MBoundMode {
    /// `ceil(alpha * |E|)`
    #[default]
    Alpha,
    /// Exact maximum cardinality of a capacity-feasible vector.
    Exact,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TraceLevel {
    Off,
    /// Per-slot CSV per replication.
    #[default]
    Csv,
    /// CSV plus per-slot ESDP statistics snapshots.
    Stats,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub horizon: u64,
    pub seed: u64,
    pub reps: usize,
    pub policies: Vec<PolicyKind>,
    pub instance: InstanceParams,
    pub delta_variant: DeltaVariant,
    pub g_variant: GVariant,
    pub alpha: f64,
    pub m_bound: MBoundMode,
    pub ucb_multiplier: f64,
    pub trace: TraceLevel,
    /// Record wall-clock per slot. Timing columns are zero when off, which
    /// keeps trace files reproducible byte for byte.
    pub timing: bool,
    /// Use a fixed instance file instead of sampling one per replication.
    pub instance_file: Option<PathBuf>,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            horizon: 2000,
            seed: 1,
            reps: 10,
            policies: PolicyKind::ALL.to_vec(),
            instance: InstanceParams::default(),
            delta_variant: DeltaVariant::default(),
            g_variant: GVariant::default(),
            alpha: 0.5,
            m_bound: MBoundMode::Alpha,
            ucb_multiplier: 1.0,
            trace: TraceLevel::Csv,
            timing: false,
            instance_file: None,
        }
    }
}

/// Every recognised key, in echo order.
pub const KEYS: &[&str] = &[
    "horizon",
    "seed",
    "reps",
    "policies",
    "ports",
    "servers",
    "edge_prob",
    "arrival_prob",
    "resources",
    "req_lo",
    "req_hi",
    "cap_lo",
    "cap_hi",
    "capacity_scale",
    "mean_lo",
    "mean_hi",
    "cost_mean",
    "cost_std",
    "cost_aggregation",
    "truth_samples",
    "alpha",
    "delta_variant",
    "g_variant",
    "m_bound",
    "ucb_multiplier",
    "trace",
    "timing",
    "instance_file",
];

fn parse_num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::config(key, format!("cannot parse `{value}`")))
}

fn parse_prob(key: &str, value: &str) -> Result<f64> {
    let p: f64 = parse_num(key, value)?;
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::config(key, format!("{p} is not a probability")));
    }
    Ok(p)
}

fn parse_bool(key: &str, value: &str) -> Result<bool> {
    match value {
        "true" | "1" | "yes" | "on" => Ok(true),
        "false" | "0" | "no" | "off" => Ok(false),
        _ => Err(Error::config(key, format!("expected a boolean, got `{value}`"))),
    }
}

/// Splits `key = value` (or `key=value`). Returns `None` for blank and
/// comment lines.
pub fn split_assignment(line: &str) -> Option<std::result::Result<(&str, &str), String>> {
    let line = line.trim();
    if line.is_empty() || line.starts_with('#') {
        return None;
    }
    Some(match line.split_once('=') {
        Some((k, v)) => Ok((k.trim(), v.trim())),
        None => Err(format!("expected `key = value`, got `{line}`")),
    })
}

impl SimConfig {
    /// Applies one assignment.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let p = &mut self.instance;
        match key {
            "horizon" => self.horizon = parse_num(key, value)?,
            "seed" => self.seed = parse_num(key, value)?,
            "reps" => self.reps = parse_num(key, value)?,
            "policies" => {
                self.policies = value
                    .split(',')
                    .map(str::trim)
                    .filter(|s| !s.is_empty())
                    .map(str::parse)
                    .collect::<Result<_>>()?
            }
            "ports" => p.num_ports = parse_num(key, value)?,
            "servers" => p.num_servers = parse_num(key, value)?,
            "edge_prob" => p.edge_prob = parse_prob(key, value)?,
            "arrival_prob" => p.arrival_prob = parse_prob(key, value)?,
            "resources" => p.num_resources = parse_num(key, value)?,
            "req_lo" => p.req_bounds.0 = parse_num(key, value)?,
            "req_hi" => p.req_bounds.1 = parse_num(key, value)?,
            "cap_lo" => p.cap_bounds.0 = parse_num(key, value)?,
            "cap_hi" => p.cap_bounds.1 = parse_num(key, value)?,
            "capacity_scale" => p.capacity_scale = parse_num(key, value)?,
            "mean_lo" => p.mean_bounds.0 = parse_num(key, value)?,
            "mean_hi" => p.mean_bounds.1 = parse_num(key, value)?,
            "cost_mean" => p.cost_mean = parse_num(key, value)?,
            "cost_std" => p.cost_std = parse_num(key, value)?,
            "cost_aggregation" => {
                p.cost_aggregation = value
                    .parse::<CostAggregation>()
                    .map_err(|m| Error::config(key, m))?
            }
            "truth_samples" => p.truth_samples = parse_num(key, value)?,
            "alpha" => self.alpha = parse_num(key, value)?,
            "delta_variant" => self.delta_variant = DeltaVariant::parse(value)?,
            "g_variant" => self.g_variant = GVariant::parse(value)?,
            "m_bound" => {
                self.m_bound = match value {
                    "alpha" => MBoundMode::Alpha,
                    "exact" => MBoundMode::Exact,
                    _ => return Err(Error::config(key, format!("`{value}` is not alpha | exact"))),
                }
            }
            "ucb_multiplier" => self.ucb_multiplier = parse_num(key, value)?,
            "trace" => {
                self.trace = match value {
                    "off" => TraceLevel::Off,
                    "csv" => TraceLevel::Csv,
                    "stats" => TraceLevel::Stats,
                    _ => return Err(Error::config(key, format!("`{value}` is not off | csv | stats"))),
                }
            }
            "timing" => self.timing = parse_bool(key, value)?,
            "instance_file" => {
                self.instance_file = if value.is_empty() {
                    None
                } else {
                    Some(PathBuf::from(value))
                }
            }
            _ => return Err(Error::config(key, "unknown key")),
        }
        Ok(())
    }

    /// Parses config text on top of the defaults.
    pub fn parse(text: &str) -> Result<SimConfig> {
        let mut cfg = SimConfig::default();
        cfg.apply_text(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub(crate) fn apply_text(&mut self, text: &str) -> Result<()> {
        for (n, line) in text.lines().enumerate() {
            match split_assignment(line) {
                None => {}
                Some(Ok((k, v))) => self.set(k, v)?,
                Some(Err(msg)) => return Err(Error::config(format!("line {}", n + 1), msg)),
            }
        }
        Ok(())
    }

    pub fn load(path: &Path) -> Result<SimConfig> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        SimConfig::parse(&text)
    }

    /// Applies `key=value` overrides, then revalidates.
    pub fn with_overrides<S: AsRef<str>>(mut self, overrides: &[S]) -> Result<SimConfig> {
        for o in overrides {
            let o = o.as_ref();
            let (k, v) = o
                .split_once('=')
                .ok_or_else(|| Error::config(o, "override must be key=value"))?;
            self.set(k.trim(), v.trim())?;
        }
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        let p = &self.instance;
        let fail = |k: &str, m: &str| Err(Error::config(k, m));
        if self.horizon < 1 {
            return fail("horizon", "must be at least 1");
        }
        if self.reps < 1 {
            return fail("reps", "must be at least 1");
        }
        if self.policies.is_empty() {
            return fail("policies", "at least one policy is required");
        }
        let mut sorted = self.policies.clone();
        sorted.sort();
        sorted.dedup();
        if sorted.len() != self.policies.len() {
            return fail("policies", "duplicate policy");
        }
        if p.num_ports < 1 {
            return fail("ports", "must be at least 1");
        }
        if p.num_servers < 1 {
            return fail("servers", "must be at least 1");
        }
        if p.num_resources < 1 {
            return fail("resources", "must be at least 1");
        }
        if p.req_bounds.0 < 1 || p.req_bounds.0 > p.req_bounds.1 {
            return fail("req_lo", "requirements need 1 <= req_lo <= req_hi");
        }
        if p.cap_bounds.0 > p.cap_bounds.1 {
            return fail("cap_lo", "cap_lo exceeds cap_hi");
        }
        if !(p.capacity_scale.is_finite() && p.capacity_scale > 0.0) {
            return fail("capacity_scale", "must be positive");
        }
        if !(0.0 <= p.mean_bounds.0 && p.mean_bounds.0 <= p.mean_bounds.1) {
            return fail("mean_lo", "need 0 <= mean_lo <= mean_hi");
        }
        if !(p.cost_std.is_finite() && p.cost_std >= 0.0) {
            return fail("cost_std", "must be nonnegative");
        }
        if p.truth_samples < 100_000 {
            return fail("truth_samples", "must be at least 100000");
        }
        if !(0.0..=1.0).contains(&self.alpha) {
            return fail("alpha", "must lie in [0, 1]");
        }
        if !(self.ucb_multiplier.is_finite() && self.ucb_multiplier >= 0.0) {
            return fail("ucb_multiplier", "must be nonnegative");
        }
        Ok(())
    }

    /// Value of `key` as it would be written in a config file.
    pub fn get(&self, key: &str) -> Option<String> {
        let p = &self.instance;
        Some(match key {
            "horizon" => self.horizon.to_string(),
            "seed" => self.seed.to_string(),
            "reps" => self.reps.to_string(),
            "policies" => self
                .policies
                .iter()
                .map(|k| k.name())
                .collect::<Vec<_>>()
                .join(","),
            "ports" => p.num_ports.to_string(),
            "servers" => p.num_servers.to_string(),
            "edge_prob" => p.edge_prob.to_string(),
            "arrival_prob" => p.arrival_prob.to_string(),
            "resources" => p.num_resources.to_string(),
            "req_lo" => p.req_bounds.0.to_string(),
            "req_hi" => p.req_bounds.1.to_string(),
            "cap_lo" => p.cap_bounds.0.to_string(),
            "cap_hi" => p.cap_bounds.1.to_string(),
            "capacity_scale" => p.capacity_scale.to_string(),
            "mean_lo" => p.mean_bounds.0.to_string(),
            "mean_hi" => p.mean_bounds.1.to_string(),
            "cost_mean" => p.cost_mean.to_string(),
            "cost_std" => p.cost_std.to_string(),
            "cost_aggregation" => match p.cost_aggregation {
                CostAggregation::Mean => "mean".into(),
                CostAggregation::Sum => "sum".into(),
            },
            "truth_samples" => p.truth_samples.to_string(),
            "alpha" => self.alpha.to_string(),
            "delta_variant" => self.delta_variant.name().into(),
            "g_variant" => self.g_variant.name().into(),
            "m_bound" => match self.m_bound {
                MBoundMode::Alpha => "alpha".into(),
                MBoundMode::Exact => "exact".into(),
            },
            "ucb_multiplier" => self.ucb_multiplier.to_string(),
            "trace" => match self.trace {
                TraceLevel::Off => "off".into(),
                TraceLevel::Csv => "csv".into(),
                TraceLevel::Stats => "stats".into(),
            },
            "timing" => self.timing.to_string(),
            "instance_file" => self
                .instance_file
                .as_ref()
                .map(|p| p.display().to_string())
                .unwrap_or_default(),
            _ => return None,
        })
    }

    /// Canonical config text listing every key; parsing it yields `self`.
    pub fn to_text(&self) -> String {
        KEYS.iter()
            .map(|k| format!("{k} = {}\n", self.get(k).expect("known key")))
            .collect()
    }

    /// Schedules for an instance with `num_edges` channels; `exact_bound`
    /// is used when the exact m-bound mode is selected.
    pub fn schedules(&self, num_edges: usize, exact_bound: impl FnOnce() -> u64) -> Schedules {
        let mut s = Schedules::new(self.delta_variant, self.g_variant, self.alpha, num_edges);
        if self.m_bound == MBoundMode::Exact {
            s = s.with_m_bound(exact_bound());
        }
        s.ucb_multiplier = self.ucb_multiplier;
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_match_experiment_table() {
        let c = SimConfig::parse("").unwrap();
        assert_eq!(c.horizon, 2000);
        assert_eq!(c.instance.num_ports, 8);
        assert_eq!(c.instance.num_servers, 40);
        assert_eq!(c.instance.num_resources, 3);
        assert_eq!(c.instance.edge_prob, 0.1);
        assert_eq!(c.instance.arrival_prob, 0.9);
        assert_eq!(c.instance.req_bounds, (1, 2));
        assert_eq!(c.instance.cap_bounds, (1, 2));
        assert_eq!(c.alpha, 0.5);
        assert_eq!(c.delta_variant, DeltaVariant::InvLogLog);
        assert_eq!(c.g_variant, GVariant::Full);
    }

    #[test]
    fn text_round_trip() {
        let text = "# comment\nhorizon = 10\npolicies = esdp, lcf\narrival_prob=0.5\ng_variant = ln-only\n";
        let c = SimConfig::parse(text).unwrap();
        assert_eq!(c.horizon, 10);
        assert_eq!(c.policies, vec![PolicyKind::Esdp, PolicyKind::Lcf]);
        let again = SimConfig::parse(&c.to_text()).unwrap();
        assert_eq!(again, c);
        assert_eq!(again.to_text(), c.to_text());
    }

    #[test]
    fn errors_name_the_key() {
        let err = SimConfig::parse("horizon = 0").unwrap_err();
        assert!(err.to_string().contains("horizon"), "{err}");
        let err = SimConfig::parse("arrival_prob = 1.5").unwrap_err();
        assert!(err.to_string().contains("arrival_prob"));
        let err = SimConfig::parse("bogus = 1").unwrap_err();
        assert!(err.to_string().contains("bogus"));
        let err = SimConfig::parse("delta_variant = cubic").unwrap_err();
        assert!(err.to_string().contains("delta_variant"));
        let err = SimConfig::default().with_overrides(&["reps"]).unwrap_err();
        assert!(err.to_string().contains("reps"));
        let err = SimConfig::parse("policies = esdp,jsq").unwrap_err();
        assert!(err.to_string().contains("policies"));
    }

    #[test]
    fn overrides_apply_in_order() {
        let c = SimConfig::default()
            .with_overrides(&["horizon=1", "seed=42", "horizon = 3"])
            .unwrap();
        assert_eq!(c.horizon, 3);
        assert_eq!(c.seed, 42);
    }
}
