use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use lesskit::estimators::sketch_and_solve_with;
use lesskit::linalg::qr_thin;
use lesskit::SketchFamily;
use lesskit_bench::problem;

fn sketch_apply(c: &mut Criterion) {
    let p = problem(4096, 20);
    let mut group = c.benchmark_group("apply_4096x20_n200");
    for family in SketchFamily::ALL {
        let k = if family.is_sparse_less() { 20 } else { 0 };
        let op = p.operator(lesskit::SketchSpec::new(family, 200, k, 0)).unwrap();
        let mut seed = 0u64;
        group.bench_function(BenchmarkId::from_parameter(family.name()), |b| {
            b.iter(|| {
                seed += 1;
                op.apply_with_seed(p.augmented(), seed).unwrap()
            })
        });
    }
    group.finish();
}

fn sketch_and_solve(c: &mut Criterion) {
    let p = problem(4096, 20);
    let op = p.operator(lesskit::SketchSpec::less(200, 20, 0)).unwrap();
    let mut seed = 0u64;
    c.bench_function("less_sketch_and_solve_4096x20_n200", |b| {
        b.iter(|| {
            seed += 1;
            sketch_and_solve_with(&p, &op, seed).unwrap()
        })
    });
}

fn thin_qr(c: &mut Criterion) {
    let mut group = c.benchmark_group("qr_thin");
    for (rows, cols) in [(1000, 10), (2000, 50)] {
        let p = problem(rows, cols);
        group.bench_function(BenchmarkId::from_parameter(format!("{rows}x{cols}")), |b| {
            b.iter(|| qr_thin(p.a()).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, sketch_apply, sketch_and_solve, thin_qr);
criterion_main!(benches);
