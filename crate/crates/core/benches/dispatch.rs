use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use esdp::config::{SimConfig, TraceLevel};
use esdp::knapdp::{oracle_check, random_instance, solve_family};
use esdp::simulator::run_replications;
use esdp::workload::{compute_true_net_means, ValuationModel};
use esdp::ExecMode;

const MODES: [(&str, ExecMode); 2] = [
    ("sequential", ExecMode::Sequential),
    ("parallel", ExecMode::Parallel),
];

fn replications(c: &mut Criterion) {
    let config = SimConfig::default()
        .with_overrides(&["horizon=200", "reps=4", "truth_samples=100000"])
        .unwrap();
    let config = SimConfig {
        trace: TraceLevel::Off,
        ..config
    };
    let mut g = c.benchmark_group("replications");
    g.sample_size(10);
    for (name, mode) in MODES {
        g.bench_function(name, |b| b.iter(|| run_replications(&config, mode).unwrap()));
    }
    g.finish();
}

fn ground_truth(c: &mut Criterion) {
    let edges = 32;
    let means: Vec<f64> = (0..edges).map(|e| 0.1 + 0.9 * e as f64 / edges as f64).collect();
    let stds = means.iter().map(|m| m / 2.0).collect();
    let base = ValuationModel::new(means, stds, vec![0.5; edges]);
    let mut g = c.benchmark_group("ground_truth");
    g.sample_size(10);
    for (name, mode) in MODES {
        g.bench_function(name, |b| {
            b.iter(|| {
                let mut vm = base.clone();
                compute_true_net_means(&mut vm, 100_000, 3, mode);
                vm
            })
        });
    }
    g.finish();
}

fn oracle_checks(c: &mut Criterion) {
    let mut g = c.benchmark_group("oracle_check_200");
    g.sample_size(10);
    for (name, mode) in MODES {
        g.bench_function(name, |b| b.iter(|| oracle_check(200, 1, mode)));
    }
    g.finish();
}

fn dp(c: &mut Criterion) {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut g = c.benchmark_group("solve_family");
    for i in 0..3 {
        let inst = random_instance(&mut rng);
        g.bench_with_input(BenchmarkId::from_parameter(i), &inst, |b, inst| {
            b.iter(|| solve_family(inst))
        });
    }
    g.finish();
}

criterion_group!(benches, replications, ground_truth, oracle_checks, dp);
criterion_main!(benches);
