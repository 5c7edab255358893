use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use inclab_core::energy::{quadrature_energy_estimate, sum_multiplicities_par, sum_multiplicities_seq};
use inclab_core::hyperplanes::build_family;
use inclab_core::incidence::{count_incidences_par, count_incidences_seq};
use inclab_core::lattice::build_point_set_with_bound;

fn bench_sum_multiplicities(c: &mut Criterion) {
    let mut group = c.benchmark_group("sum_multiplicities");
    for b in [3i64, 4, 5] {
        let ps = build_point_set_with_bound(4, b).unwrap();
        group.bench_with_input(BenchmarkId::new("seq", b), &ps, |bench, ps| {
            bench.iter(|| sum_multiplicities_seq(ps))
        });
        group.bench_with_input(BenchmarkId::new("par", b), &ps, |bench, ps| {
            bench.iter(|| sum_multiplicities_par(ps))
        });
    }
    group.finish();
}

fn bench_incidences(c: &mut Criterion) {
    let mut group = c.benchmark_group("count_incidences");
    group.sample_size(20);
    for b in [2i64, 3] {
        let ps = build_point_set_with_bound(4, b).unwrap();
        let family = build_family(&ps);
        let planes = family.planes();
        group.bench_with_input(BenchmarkId::new("seq", b), &b, |bench, _| {
            bench.iter(|| count_incidences_seq(&ps, &planes))
        });
        group.bench_with_input(BenchmarkId::new("par", b), &b, |bench, _| {
            bench.iter(|| count_incidences_par(&ps, &planes))
        });
    }
    group.finish();
}

fn bench_quadrature(c: &mut Criterion) {
    let mut group = c.benchmark_group("quadrature");
    group.sample_size(10);
    let ps = build_point_set_with_bound(3, 2).unwrap();
    group.bench_function("grid32", |bench| {
        bench.iter(|| quadrature_energy_estimate(&ps, 32))
    });
    group.finish();
}

criterion_group!(benches, bench_sum_multiplicities, bench_incidences, bench_quadrature);
criterion_main!(benches);
