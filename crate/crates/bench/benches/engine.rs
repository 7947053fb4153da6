use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use dicke_bench::working_point;
use dicke_core::dynamics::{integrate_final, IntegratorConfig};
use dicke_core::phases::{classify_point, sweep, AxisSpec, ClassifyOptions, Mode};
use dicke_core::rhs;
use dicke_core::steadystate::{find_all_fixed_points, NewtonOptions};

fn vector_field(c: &mut Criterion) {
    let (p, s) = working_point();
    c.bench_function("rhs", |b| b.iter(|| rhs(black_box(&p), black_box(&s))));
}

fn integration(c: &mut Criterion) {
    let (p, s) = working_point();
    let mut g = c.benchmark_group("integrate_100us");
    g.sample_size(20);
    let rk4 = IntegratorConfig::rk4(1e-3, 100.0, usize::MAX);
    let rk45 = IntegratorConfig::adaptive(1e-8, 100.0, usize::MAX);
    g.bench_function("rk4", |b| b.iter(|| integrate_final(&p, black_box(&s), &rk4)));
    g.bench_function("rk45", |b| b.iter(|| integrate_final(&p, black_box(&s), &rk45)));
    g.finish();
}

fn steady_states(c: &mut Criterion) {
    let (p, _) = working_point();
    let opts = NewtonOptions::default();
    let mut g = c.benchmark_group("steady_states");
    g.sample_size(20);
    g.bench_function("find_all_fixed_points", |b| b.iter(|| find_all_fixed_points(black_box(&p), &[], &opts)));
    g.bench_function("classify_hybrid", |b| {
        b.iter(|| classify_point(black_box(&p), Mode::Hybrid, &ClassifyOptions::default()))
    });
    g.finish();
}

fn phase_sweep(c: &mut Criterion) {
    let (p, _) = working_point();
    let opts = ClassifyOptions::default();
    let mut g = c.benchmark_group("sweep_8x8");
    g.sample_size(10);
    for mode in [Mode::Analytic, Mode::Hybrid] {
        g.bench_function(format!("{mode:?}").to_lowercase(), |b| {
            b.iter(|| sweep(&p, AxisSpec::new(2.0, 12.0, 8), AxisSpec::new(0.3, 0.9, 8), mode, &opts))
        });
    }
    g.finish();
}

criterion_group!(benches, vector_field, integration, steady_states, phase_sweep);
criterion_main!(benches);
