use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use it2fgp::fixtures::fixture;
use it2fgp::nlpcore::{grid_oracle, payoff_table, NlpConfig};
use it2fgp::sigmodel::Sense;
use it2fgp::Execution;

const MODES: [(&str, Execution); 2] = [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)];

fn payoff(c: &mut Criterion) {
    let mut group = c.benchmark_group("payoff_table");
    group.sample_size(10);
    for name in ["example1_crisp", "example2_crisp"] {
        let p = fixture(name).unwrap().defuzzify();
        for (label, execution) in MODES {
            let cfg = NlpConfig { execution, ..NlpConfig::default() };
            group.bench_with_input(BenchmarkId::new(label, name), &cfg, |b, cfg| {
                b.iter(|| payoff_table(&p, cfg).unwrap())
            });
        }
    }
    group.finish();
}

fn grid(c: &mut Criterion) {
    let mut group = c.benchmark_group("grid_oracle");
    group.sample_size(10);
    let p = fixture("example1_crisp").unwrap().defuzzify();
    for (label, execution) in MODES {
        group.bench_function(BenchmarkId::new(label, "example1_crisp/f1/max/100"), |b| {
            b.iter(|| grid_oracle(&p, 0, Sense::Maximize, 100, None, execution).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, payoff, grid);
criterion_main!(benches);
