use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};

use esdp::config::SimConfig;
use esdp::knapdp::oracle_check;
use esdp::policies::PolicyKind;
use esdp::report::{config_from_output, write_atomic, write_run_outputs};
use esdp::simulator::{aggregate, run_replications, Summary};
use esdp::sweep::{run_sweep, write_sweep_outputs, SweepSpec};
use esdp::workload::Instance;
use esdp::ExecMode;

#[derive(Parser)]
#[command(name = "esdp", version, about = "Online multi-server job dispatching experiments")]
struct Cli {
    /// Run replications one after another on the calling thread.
    #[arg(long, global = true)]
    sequential: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct OutDir {
    /// Output directory.
    #[arg(long, env = "ESDP_OUT_DIR", default_value = "esdp-out")]
    out: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Run seed-replicated simulations and write traces plus a summary.
    Run {
        /// Config file, or any output file carrying a config echo.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Override one key (repeatable), e.g. `--set horizon=500`.
        #[arg(long = "set", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        reps: Option<usize>,
        /// Comma-separated policy names.
        #[arg(long)]
        policies: Option<String>,
        #[command(flatten)]
        out: OutDir,
    },
    /// Run a one-parameter sweep described by a sweep file.
    Sweep {
        file: PathBuf,
        #[command(flatten)]
        out: OutDir,
    },
    /// Check a config or sweep file without running it.
    Validate { file: PathBuf },
    /// Compare the budgeted DP with exhaustive enumeration on random instances.
    OracleCheck {
        #[arg(long, default_value_t = 200)]
        n: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// Sample an instance and write it as JSON (usable as `instance_file`).
    Instance {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long = "set", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
}

fn load_config(path: Option<&Path>) -> Result<SimConfig> {
    match path {
        None => Ok(SimConfig::default()),
        Some(p) => {
            let text = std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            Ok(config_from_output(&text)?)
        }
    }
}

fn is_sweep_file(text: &str) -> bool {
    text.lines().any(|l| l.trim_start().starts_with("sweep_param"))
}

fn print_summary(summary: &Summary) {
    println!("policy   final ASW (mean ± std)   final regret");
    for p in &summary.policies {
        println!(
            "{:<8} {:>10.3} ± {:<10.3} {:>10.3}",
            p.policy.name(),
            p.final_asw_mean,
            p.final_asw_std,
            p.final_regret_mean
        );
    }
    for r in &summary.ratios {
        println!(
            "ASW(esdp)/ASW({}) = {:.4}",
            r.baseline,
            r.ratio.last().copied().unwrap_or(f64::NAN)
        );
    }
    println!("all-ports-arrive bound: {:.4}", summary.theorem1_probability);
}

fn execute(cli: Cli) -> Result<()> {
    let mode = if cli.sequential {
        ExecMode::Sequential
    } else {
        ExecMode::Parallel
    };
    match cli.command {
        Command::Run {
            config,
            mut overrides,
            seed,
            reps,
            policies,
            out,
        } => {
            if let Some(s) = seed {
                overrides.push(format!("seed={s}"));
            }
            if let Some(r) = reps {
                overrides.push(format!("reps={r}"));
            }
            if let Some(p) = policies {
                overrides.push(format!("policies={p}"));
            }
            let cfg = load_config(config.as_deref())?.with_overrides(&overrides)?;
            let runs = run_replications(&cfg, mode)?;
            let summary = aggregate(&runs)?;
            let files = write_run_outputs(&out.out, &cfg, &runs, &summary)?;
            print_summary(&summary);
            println!("wrote {} files to {}", files.len(), out.out.display());
        }
        Command::Sweep { file, out } => {
            let spec = SweepSpec::load(&file)?;
            let points = run_sweep(&spec, mode)?;
            write_sweep_outputs(&out.out, &spec, &points)?;
            for p in &points {
                let asw: Vec<String> = p
                    .summary
                    .policies
                    .iter()
                    .map(|s| format!("{}={:.3}", s.policy, s.final_asw_mean))
                    .collect();
                println!("{} = {}: {}", spec.param, p.value, asw.join(" "));
            }
            println!("wrote {}", out.out.join("sweep.csv").display());
        }
        Command::Validate { file } => {
            let text = std::fs::read_to_string(&file).with_context(|| format!("reading {}", file.display()))?;
            if is_sweep_file(&text) {
                let spec = SweepSpec::parse(&text)?;
                println!("ok: sweep over {} with {} points", spec.param, spec.values.len());
            } else {
                let cfg = config_from_output(&text)?;
                let names: Vec<&str> = cfg.policies.iter().map(|p: &PolicyKind| p.name()).collect();
                println!(
                    "ok: horizon {} reps {} policies {}",
                    cfg.horizon,
                    cfg.reps,
                    names.join(",")
                );
            }
        }
        Command::OracleCheck { n, seed } => {
            let failures = oracle_check(n, seed, mode);
            if failures.is_empty() {
                println!("PASS: DP matches enumeration on {n} instances");
            } else {
                anyhow::bail!("FAIL: {} of {n} instances differ (first: #{})", failures.len(), failures[0]);
            }
        }
        Command::Instance {
            config,
            overrides,
            seed,
            out,
        } => {
            let cfg = load_config(config.as_deref())?.with_overrides(&overrides)?;
            let inst = Instance::generate(&cfg.instance, seed, mode);
            write_atomic(&out, inst.to_json().as_bytes())?;
            println!("wrote instance with {} edges to {}", inst.num_edges(), out.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
