use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use einflow::calculus::{codifferential, dalembertian_and_ricci_split};
use einflow::curvature::curvature_at;
use einflow::killing::maxwell_like_residuals;
use einflow::komar::{komar_energy_surface, SphereQuadrature};
use einflow_bench::fixture;

fn operators(c: &mut Criterion) {
    let f = fixture("schwarzschild", "t", 16);
    let p = f.points[0];
    c.bench_function("curvature_at/schwarzschild", |b| {
        b.iter(|| curvature_at(f.scenario.metric.as_ref(), black_box(&p)).unwrap())
    });
    let delta_f = codifferential(f.field.f.clone(), f.scenario.metric.clone());
    c.bench_function("codifferential/F", |b| b.iter(|| delta_f.value(black_box(&p)).unwrap()));
    let split = dalembertian_and_ricci_split(f.field.a.clone(), f.scenario.metric.clone());
    c.bench_function("dirac_square/A", |b| b.iter(|| split.square.value(black_box(&p)).unwrap()));
    c.bench_function("maxwell/16_points", |b| {
        b.iter(|| maxwell_like_residuals(&f.scenario, &f.field, black_box(&f.points)).unwrap())
    });
}

fn komar(c: &mut Criterion) {
    let f = fixture("schwarzschild", "t", 1);
    let q = SphereQuadrature::new(vec![50.0, 100.0, 200.0], 32, 64);
    let mut group = c.benchmark_group("komar");
    group.sample_size(10);
    group.bench_function("surface/3x32x64", |b| b.iter(|| komar_energy_surface(&f.scenario, &f.field, black_box(&q)).unwrap()));
    group.finish();
}

criterion_group!(benches, operators, komar);
criterion_main!(benches);
