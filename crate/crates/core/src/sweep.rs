//! One-parameter sensitivity sweeps over a base configuration.

use std::path::{Path, PathBuf};

use crate::config::{split_assignment, SimConfig};
use crate::error::{Error, Result};
use crate::exec::{self, ExecMode};
use crate::report::{write_atomic, write_run_outputs};
use crate::simulator::{aggregate, run_replications, RunResult, Summary};

/// Parameters a sweep may vary.
pub const SWEEPABLE: &[&str] = &[
    "arrival_prob",
    "edge_prob",
    "capacity_scale",
    "delta_variant",
    "g_variant",
    "alpha",
];

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub param: String,
    pub values: Vec<String>,
    pub base: SimConfig,
}

impl SweepSpec {
    pub fn new(param: &str, values: Vec<String>, base: SimConfig) -> Result<SweepSpec> {
        let spec = SweepSpec {
            param: param.to_string(),
            values,
            base,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// A config file with two extra keys, `sweep_param` and
    /// `sweep_values` (comma separated).
    pub fn parse(text: &str) -> Result<SweepSpec> {
        let mut param = None;
        let mut values = None;
        let mut rest = String::new();
        for (n, line) in text.lines().enumerate() {
            match split_assignment(line) {
                None => {}
                Some(Ok(("sweep_param", v))) => param = Some(v.to_string()),
                Some(Ok(("sweep_values", v))) => {
                    values = Some(
                        v.split(',')
                            .map(str::trim)
                            .filter(|s| !s.is_empty())
                            .map(String::from)
                            .collect(),
                    )
                }
                Some(Ok(_)) => {
                    rest.push_str(line);
                    rest.push('\n');
                }
                Some(Err(msg)) => return Err(Error::config(format!("line {}", n + 1), msg)),
            }
        }
        let param = param.ok_or_else(|| Error::config("sweep_param", "missing"))?;
        let values = values.ok_or_else(|| Error::config("sweep_values", "missing"))?;
        SweepSpec::new(&param, values, SimConfig::parse(&rest)?)
    }

    pub fn load(path: &Path) -> Result<SweepSpec> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        SweepSpec::parse(&text)
    }

    pub fn validate(&self) -> Result<()> {
        if !SWEEPABLE.contains(&self.param.as_str()) {
            return Err(Error::config(
                "sweep_param",
                format!("`{}` is not one of {}", self.param, SWEEPABLE.join(", ")),
            ));
        }
        if self.values.is_empty() {
            return Err(Error::config("sweep_values", "grid is empty"));
        }
        for v in &self.values {
            self.point_config(v)?;
        }
        Ok(())
    }

    /// Base config with the swept parameter set to `value`.
    pub fn point_config(&self, value: &str) -> Result<SimConfig> {
        self.base
            .clone()
            .with_overrides(&[format!("{}={value}", self.param)])
    }
}

#[derive(Debug, Clone)]
pub struct SweepPoint {
    pub value: String,
    pub config: SimConfig,
    pub runs: Vec<RunResult>,
    pub summary: Summary,
}

/// Runs every grid point, in grid order.
pub fn run_sweep(spec: &SweepSpec, mode: ExecMode) -> Result<Vec<SweepPoint>> {
    spec.validate()?;
    exec::map(mode, spec.values.clone(), |value| {
        let config = spec.point_config(&value)?;
        let runs = run_replications(&config, mode)?;
        let summary = aggregate(&runs)?;
        Ok(SweepPoint {
            value,
            config,
            runs,
            summary,
        })
    })
    .into_iter()
    .collect()
}

/// Combined table: one row per grid point and policy.
pub fn sweep_csv(spec: &SweepSpec, points: &[SweepPoint]) -> Result<Vec<u8>> {
    let err = |e: csv::Error| Error::io(Path::new("<csv>"), std::io::Error::other(e));
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "param",
        "value",
        "policy",
        "final_asw_mean",
        "final_asw_std",
        "final_regret_mean",
        "mean_wall_ns_per_slot",
    ])
    .map_err(err)?;
    for p in points {
        for s in &p.summary.policies {
            w.write_record([
                spec.param.clone(),
                p.value.clone(),
                s.policy.name().to_string(),
                s.final_asw_mean.to_string(),
                s.final_asw_std.to_string(),
                s.final_regret_mean.to_string(),
                s.mean_wall_ns_per_slot.to_string(),
            ])
            .map_err(err)?;
        }
    }
    let body = w.into_inner().map_err(|e| err(e.into_error().into()))?;
    let mut out: Vec<u8> = spec
        .base
        .to_text()
        .lines()
        .map(|l| format!("# {l}\n"))
        .collect::<String>()
        .into_bytes();
    out.extend(format!("# sweep_param = {}\n# sweep_values = {}\n", spec.param, spec.values.join(",")).bytes());
    out.extend(body);
    Ok(out)
}

/// Writes each point into `dir/point{i}` plus `dir/sweep.csv`.
pub fn write_sweep_outputs(dir: &Path, spec: &SweepSpec, points: &[SweepPoint]) -> Result<Vec<PathBuf>> {
    let mut written = Vec::new();
    for (i, p) in points.iter().enumerate() {
        written.extend(write_run_outputs(&dir.join(format!("point{i}")), &p.config, &p.runs, &p.summary)?);
    }
    let path = dir.join("sweep.csv");
    write_atomic(&path, &sweep_csv(spec, points)?)?;
    written.push(path);
    Ok(written)
}
