//! Fusion throughput: parallel pool sizes against each other, or the
//! sequential build when compiled with `--no-default-features`.
//!
//! Run `cargo bench -p pasmef` for the parallel comparison and
//! `cargo bench -p pasmef --no-default-features` for the sequential
//! baseline; the pipeline output is bit-identical across all of them.

use criterion::{criterion_group, criterion_main, Criterion};
use std::hint::black_box;

use pasmef::synth::synthetic_stack;
use pasmef::{fuse_stack, mef_ssim, FusionConfig, MefSsimConfig};

fn bench_fusion(c: &mut Criterion) {
    let stack = synthetic_stack(768, 512, 3);
    let config = FusionConfig::default();

    let mut group = c.benchmark_group("fuse_768x512x3");
    group.sample_size(10);

    #[cfg(feature = "parallel")]
    {
        for threads in [1usize, 2, 4, 8] {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .expect("build rayon pool");
            group.bench_function(format!("threads_{threads}"), |b| {
                b.iter(|| {
                    pool.install(|| fuse_stack(black_box(&stack), black_box(&config)).unwrap())
                })
            });
        }
    }

    #[cfg(not(feature = "parallel"))]
    group.bench_function("sequential", |b| {
        b.iter(|| fuse_stack(black_box(&stack), black_box(&config)).unwrap())
    });

    group.finish();
}

fn bench_metric(c: &mut Criterion) {
    let stack = synthetic_stack(384, 256, 3);
    let fused = fuse_stack(&stack, &FusionConfig::default()).unwrap();
    let config = MefSsimConfig::default();

    let mut group = c.benchmark_group("mef_ssim_384x256x3");
    group.sample_size(10);

    #[cfg(feature = "parallel")]
    {
        for threads in [1usize, 8] {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .expect("build rayon pool");
            group.bench_function(format!("threads_{threads}"), |b| {
                b.iter(|| {
                    pool.install(|| {
                        mef_ssim(black_box(&stack), black_box(&fused), black_box(&config)).unwrap()
                    })
                })
            });
        }
    }

    #[cfg(not(feature = "parallel"))]
    group.bench_function("sequential", |b| {
        b.iter(|| mef_ssim(black_box(&stack), black_box(&fused), black_box(&config)).unwrap())
    });

    group.finish();
}

criterion_group!(benches, bench_fusion, bench_metric);
criterion_main!(benches);
