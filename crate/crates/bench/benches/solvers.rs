use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};

use ld_vortex::harness::{census, relax};
use ld_vortex::minimize::{minimize, newton_critical};
use ld_vortex::perturbation::{seed_state, vortex_plane_config};
use ld_vortex::{gradient, total_energy};
use ld_vortex_bench::desk_problem;

fn evaluation(c: &mut Criterion) {
    let mut group = c.benchmark_group("evaluate");
    for m in [100, 400, 1600] {
        let (p, g) = desk_problem(m);
        let st = seed_state(&p, &g, &vortex_plane_config(&p).unwrap());
        group.bench_with_input(BenchmarkId::new("energy", m), &st, |b, st| {
            b.iter(|| total_energy(black_box(st), &p, &g).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("gradient", m), &st, |b, st| {
            b.iter(|| gradient(black_box(st), &p, &g).unwrap())
        });
    }
    group.finish();
}

fn solvers(c: &mut Criterion) {
    let mut group = c.benchmark_group("solve");
    group.sample_size(10);
    let (p, g) = desk_problem(200);
    let seed = seed_state(&p, &g, &vortex_plane_config(&p).unwrap());
    group.bench_function("minimize/200", |b| b.iter(|| minimize(black_box(&seed), &p, &g, 1e-8, 20_000).unwrap()));
    group.bench_function("newton/200", |b| b.iter(|| newton_critical(black_box(&seed), &p, &g, 1e-10).unwrap()));
    group.bench_function("relax/200", |b| b.iter(|| relax(black_box(&seed), &p, &g).unwrap()));
    let (p, g) = desk_problem(60);
    group.bench_function("census/N2/60", |b| b.iter(|| census(&p, &g, 4, 1).unwrap()));
    group.finish();
}

criterion_group!(benches, evaluation, solvers);
criterion_main!(benches);
