use std::hint::black_box;

use brplan_bench::{problem, tree};
use brplan_core::{
    backward_induction, build_ellsberg_tree, global_target_bound, log_partition_function, sample_choice,
    sample_path_until_accept, EllsbergColor, PlannerOptions, RngStream, CHANCE_ALPHA,
};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};

fn partition(c: &mut Criterion) {
    let mut group = c.benchmark_group("log_partition");
    for n in [100, 10_000, 1_000_000] {
        let p = problem(n);
        group.throughput(Throughput::Elements(n as u64));
        group.bench_with_input(BenchmarkId::from_parameter(n), &p, |b, p| {
            b.iter(|| log_partition_function(black_box(p)).unwrap())
        });
    }
    group.finish();
}

fn induction(c: &mut Criterion) {
    let mut group = c.benchmark_group("backward_induction");
    for (depth, branching) in [(3, 3), (6, 4)] {
        let t = tree(depth, branching);
        group.throughput(Throughput::Elements(t.len() as u64));
        group.bench_function(format!("d{depth}b{branching}"), |b| b.iter(|| backward_induction(black_box(&t))));
    }
    let ellsberg = build_ellsberg_tree(-10.0, 10.0, CHANCE_ALPHA, EllsbergColor::Black).unwrap();
    group.bench_function("ellsberg", |b| b.iter(|| backward_induction(black_box(&ellsberg))));
    group.finish();
}

fn samplers(c: &mut Criterion) {
    let mut group = c.benchmark_group("sampling");
    let p = problem(1000);
    let target = p.utility_range().1;
    let mut rng = RngStream::new(3, 0);
    group.bench_function("sample_choice_n1000", |b| {
        b.iter(|| sample_choice(black_box(&p), target, &mut rng, u64::MAX).unwrap())
    });
    let options = PlannerOptions {
        allow_mixed_signs: false,
    };
    for (depth, branching) in [(2, 3), (3, 3)] {
        let t = tree(depth, branching);
        let u_star = global_target_bound(&t);
        let mut rng = RngStream::new(3, 1);
        group.bench_function(format!("sample_path_d{depth}b{branching}"), |b| {
            b.iter(|| sample_path_until_accept(black_box(&t), u_star, &mut rng, u64::MAX, options).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, partition, induction, samplers);
criterion_main!(benches);
