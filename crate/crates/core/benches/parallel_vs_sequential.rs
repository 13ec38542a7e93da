use std::hint::black_box;

use casimir_aniso::lifshitz::casimir_force;
use casimir_aniso::sign_atlas::{log_grid, sweep};
use casimir_aniso::{Execution, MaterialSystem, PermittivityModel, QuadratureSpec};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

const MODES: [(&str, Execution); 2] = [
    ("sequential", Execution::Sequential),
    ("parallel", Execution::Parallel),
];

fn bench_sweep(c: &mut Criterion) {
    let m2: Vec<f64> = (0..8).map(|i| 0.5 + 0.15 * i as f64).collect();
    let m3 = log_grid(0.05, 10.0, 32).unwrap();
    let spec = QuadratureSpec::default();
    let mut g = c.benchmark_group("sweep_8x32");
    for (name, exec) in MODES {
        g.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| sweep(1.5, black_box(&m2), black_box(&m3), &spec, exec).unwrap())
        });
    }
    g.finish();
}

fn bench_force(c: &mut Criterion) {
    let osc = |s: f64, w: f64| PermittivityModel::oscillator([(s, w)]);
    let sys = MaterialSystem::new(
        osc(2.0, 2e16),
        osc(0.6, 5e15),
        osc(1.0, 1e16),
        osc(2.5, 1.5e16),
    );
    let mut g = c.benchmark_group("dispersive_force");
    for (name, exec) in MODES {
        let spec = QuadratureSpec::default()
            .tightened(10.0)
            .with_execution(exec);
        g.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| casimir_force(black_box(&sys), 1e-7, &spec).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, bench_sweep, bench_force);
criterion_main!(benches);
