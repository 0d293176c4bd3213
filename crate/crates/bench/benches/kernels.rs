use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use ustat_bench::box_data;
use ustat_core::design::DEFAULT_ENUMERATION_CAP;
use ustat_core::variance::c_of_k;
use ustat_core::{derive_omega, draw_incomplete_design, KernelSpec, Scheme};

fn kernels(c: &mut Criterion) {
    let data = box_data(400, 1);
    let idx: Vec<usize> = (0..200).collect();
    let target = vec![0.5, 0.5];
    let specs = [
        ("mean", KernelSpec::mean()),
        ("knn5", KernelSpec::knn(5, target.clone())),
        ("ols", KernelSpec::ols(target.clone())),
        ("cart5", KernelSpec::cart(5, 1, target.clone())),
        ("rp_tree5", KernelSpec::rp_tree(5, target.clone())),
    ];
    let mut group = c.benchmark_group("kernel_s200");
    for (name, spec) in &specs {
        group.bench_function(*name, |b| b.iter(|| spec.evaluate(&data, black_box(&idx), derive_omega(3, 0)).unwrap()));
    }
    group.finish();
}

fn designs(c: &mut Criterion) {
    let mut group = c.benchmark_group("design");
    for &(n, s) in &[(30usize, 5usize), (2000, 50)] {
        group.bench_with_input(BenchmarkId::new("bernoulli_N2000", format!("{n}_{s}")), &(n, s), |b, &(n, s)| {
            b.iter(|| draw_incomplete_design(n, s, 2000, Scheme::Bernoulli, black_box(7), DEFAULT_ENUMERATION_CAP).unwrap())
        });
    }
    group.finish();
}

fn ck(c: &mut Criterion) {
    c.bench_function("c_of_k_50_s2000", |b| b.iter(|| c_of_k(black_box(50), 2000).unwrap()));
}

criterion_group!(benches, kernels, designs, ck);
criterion_main!(benches);
