//! Output files: per-run trace CSVs, optional statistics CSVs and the
//! summary JSON. Each file carries the full config so a run can be
//! repeated from any of its outputs.

use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::config::{SimConfig, TraceLevel};
use crate::error::{Error, Result};
use crate::simulator::{RunResult, Summary};

/// Writes `bytes` to `path` through a temporary file in the same directory.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path
        .parent()
        .filter(|p| !p.as_os_str().is_empty())
        .unwrap_or(Path::new("."));
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| Error::io(dir, e))?;
    tmp.write_all(bytes).map_err(|e| Error::io(path, e))?;
    tmp.persist(path).map_err(|e| Error::io(path, e.error))?;
    Ok(())
}

fn config_header(config: &SimConfig) -> String {
    config.to_text().lines().map(|l| format!("# {l}\n")).collect()
}

fn csv_error(e: csv::Error) -> Error {
    Error::io(Path::new("<csv>"), std::io::Error::other(e))
}

fn finish_csv(header: String, w: csv::Writer<Vec<u8>>) -> Result<Vec<u8>> {
    let body = w.into_inner().map_err(|e| csv_error(e.into_error().into()))?;
    let mut out = header.into_bytes();
    out.extend(body);
    Ok(out)
}

/// Trace CSV: one row per slot and policy.
pub fn trace_csv(config: &SimConfig, run: &RunResult) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["t", "policy", "sw", "cum_sw", "oracle_value", "regret", "cum_regret", "wall_ns"])
        .map_err(csv_error)?;
    for (i, rec) in run.records.iter().enumerate() {
        for (p, (kind, out)) in run.policies.iter().zip(&rec.outcomes).enumerate() {
            let s = &run.series[p];
            w.write_record([
                rec.t.to_string(),
                kind.name().to_string(),
                out.sw.to_string(),
                s.cum_sw[i].to_string(),
                rec.oracle_value.to_string(),
                out.regret.to_string(),
                s.cum_regret[i].to_string(),
                out.wall_ns.to_string(),
            ])
            .map_err(csv_error)?;
        }
    }
    finish_csv(config_header(config), w)
}

/// ESDP statistics per slot and edge.
pub fn stats_csv(config: &SimConfig, run: &RunResult) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["t", "edge", "count", "mean", "var_proxy"])
        .map_err(csv_error)?;
    for snap in &run.stats_trace {
        for e in 0..snap.counts.len() {
            w.write_record([
                snap.t.to_string(),
                e.to_string(),
                snap.counts[e].to_string(),
                snap.means[e].to_string(),
                snap.var_proxy[e].to_string(),
            ])
            .map_err(csv_error)?;
        }
    }
    finish_csv(config_header(config), w)
}

#[derive(Serialize)]
struct SummaryFile<'a> {
    config: String,
    summary: &'a Summary,
}

pub fn summary_json(config: &SimConfig, summary: &Summary) -> Result<Vec<u8>> {
    let file = SummaryFile {
        config: config.to_text(),
        summary,
    };
    let mut bytes = serde_json::to_vec_pretty(&file)?;
    bytes.push(b'\n');
    Ok(bytes)
}

/// Recovers the config echoed in an output file (summary JSON, trace CSV
/// or a plain config file).
pub fn config_from_output(text: &str) -> Result<SimConfig> {
    if text.trim_start().starts_with('{') {
        let v: serde_json::Value = serde_json::from_str(text)?;
        let cfg = v
            .get("config")
            .and_then(|c| c.as_str())
            .ok_or_else(|| Error::config("config", "summary file has no config echo"))?;
        return SimConfig::parse(cfg);
    }
    let echoed: String = text
        .lines()
        .take_while(|l| l.starts_with('#'))
        .filter_map(|l| l.strip_prefix("# "))
        .filter(|l| l.contains('='))
        .map(|l| format!("{l}\n"))
        .collect();
    if echoed.is_empty() {
        SimConfig::parse(text)
    } else {
        SimConfig::parse(&echoed)
    }
}

/// Writes `config.cfg`, `summary.json` and the per-replication traces
/// into `dir`. Returns the written paths.
pub fn write_run_outputs(
    dir: &Path,
    config: &SimConfig,
    runs: &[RunResult],
    summary: &Summary,
) -> Result<Vec<PathBuf>> {
    let mut written = Vec::new();
    let mut put = |name: String, bytes: Vec<u8>| -> Result<()> {
        let path = dir.join(name);
        write_atomic(&path, &bytes)?;
        written.push(path);
        Ok(())
    };
    put("config.cfg".into(), config.to_text().into_bytes())?;
    put("summary.json".into(), summary_json(config, summary)?)?;
    if config.trace != TraceLevel::Off {
        for (r, run) in runs.iter().enumerate() {
            put(format!("trace_rep{r}.csv"), trace_csv(config, run)?)?;
            if config.trace == TraceLevel::Stats {
                put(format!("stats_rep{r}.csv"), stats_csv(config, run)?)?;
            }
        }
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::policies::PolicyKind;
    use crate::simulator::{aggregate, run};
    use crate::ExecMode;

    fn small() -> SimConfig {
        SimConfig::default()
            .with_overrides(&["horizon=30", "reps=2", "truth_samples=100000", "policies=esdp,lcf"])
            .unwrap()
    }

    #[test]
    fn trace_has_expected_columns() {
        let cfg = small();
        let r = run(&cfg, 0, ExecMode::Sequential).unwrap();
        let text = String::from_utf8(trace_csv(&cfg, &r).unwrap()).unwrap();
        let body: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
        assert_eq!(body[0], "t,policy,sw,cum_sw,oracle_value,regret,cum_regret,wall_ns");
        assert_eq!(body.len(), 1 + 30 * 2);
        assert!(body[1].starts_with("1,esdp,"));
        assert!(body[2].starts_with("1,lcf,"));
    }

    #[test]
    fn echoed_config_round_trips() {
        let cfg = small();
        let runs: Vec<_> = (0..2).map(|r| run(&cfg, r, ExecMode::Sequential).unwrap()).collect();
        let summary = aggregate(&runs).unwrap();
        let json = String::from_utf8(summary_json(&cfg, &summary).unwrap()).unwrap();
        assert_eq!(config_from_output(&json).unwrap(), cfg);
        let csv = String::from_utf8(trace_csv(&cfg, &runs[0]).unwrap()).unwrap();
        assert_eq!(config_from_output(&csv).unwrap(), cfg);
        assert_eq!(config_from_output(&cfg.to_text()).unwrap(), cfg);
        assert!(json.contains("\"seeds\""));
        assert!(json.contains("\"theorem1_probability\""));
        assert_eq!(summary.policy(PolicyKind::Lcf).unwrap().cum_sw.mean.len(), 30);
    }

    #[test]
    fn atomic_write_replaces_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("nested").join("out.txt");
        write_atomic(&path, b"one").unwrap();
        write_atomic(&path, b"two").unwrap();
        assert_eq!(std::fs::read(&path).unwrap(), b"two");
        assert_eq!(std::fs::read_dir(path.parent().unwrap()).unwrap().count(), 1);
    }
}
