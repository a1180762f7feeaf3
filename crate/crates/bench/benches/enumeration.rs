use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use diophantine_core::{
    best_multiplicative, best_over_grid, best_standard, default_grid, enumerate_t, Admissibility,
    ApproxInstance, Mode, Variant,
};

fn instances() -> Vec<(&'static str, ApproxInstance)> {
    vec![
        ("1x1", ApproxInstance::homogeneous(1, 1, vec![1.618033988749895]).unwrap()),
        ("1x2", ApproxInstance::new(1, 2, vec![0.7548776662466927, 0.5698402909980532], vec![0.25]).unwrap()),
        ("2x1", ApproxInstance::homogeneous(2, 1, vec![0.41421356237309515, 0.7320508075688772]).unwrap()),
    ]
}

fn single_scale(c: &mut Criterion) {
    let mut g = c.benchmark_group("single_scale");
    for (name, inst) in instances() {
        let q = if inst.n() == 1 { 1e5 } else { 1e6 };
        g.bench_with_input(BenchmarkId::new("standard", name), &inst, |b, i| {
            b.iter(|| best_standard(black_box(i), q).unwrap())
        });
        g.bench_with_input(BenchmarkId::new("multiplicative", name), &inst, |b, i| {
            b.iter(|| best_multiplicative(black_box(i), 2e4).unwrap())
        });
    }
    g.finish();
}

fn grid(c: &mut Criterion) {
    let grid = default_grid(1e5);
    let mut g = c.benchmark_group("grid");
    for (name, inst) in instances() {
        g.bench_with_input(BenchmarkId::new("standard", name), &inst, |b, i| {
            b.iter(|| best_over_grid(black_box(i), &grid, Mode::Standard).unwrap())
        });
    }
    g.finish();
}

fn flow(c: &mut Criterion) {
    c.bench_function("enumerate_t_3x3_v12", |b| {
        b.iter(|| enumerate_t(3, 3, black_box(12.0), Variant::General, Admissibility::Literal).unwrap())
    });
}

criterion_group!(benches, single_scale, grid, flow);
criterion_main!(benches);
