//! Compares the rayon-parallel sampled refuter against a single-thread pool
//! on the same workload, so the data-parallel layer earns its keep.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use entlife::oracle::{ea_sampled_verdict, SampleBudget};
use entlife::unital::UnitalPair;

fn bench_sampled_verdict(c: &mut Criterion) {
    let pair = UnitalPair::new([0.62, 0.58, 0.43], [0.55, 0.51, 0.47]).unwrap();
    let (ml, mr) = (pair.left_ptm(), pair.right_ptm());
    let mut group = c.benchmark_group("sampled_verdict");
    for &n in &[500usize, 2000] {
        group.bench_with_input(BenchmarkId::new("rayon_pool", n), &n, |b, &n| {
            b.iter(|| ea_sampled_verdict(&ml, &mr, SampleBudget { n, seed: 7 }))
        });
        group.bench_with_input(BenchmarkId::new("single_thread", n), &n, |b, &n| {
            let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
            b.iter(|| {
                pool.install(|| ea_sampled_verdict(&ml, &mr, SampleBudget { n, seed: 7 }))
            })
        });
    }
    group.finish();
}

criterion_group!(benches, bench_sampled_verdict);
criterion_main!(benches);
