use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use ksb_core::enumerate::{
    check_confluence, enumerate, random_sliced_tree, Census, EnumerationParams, Target,
};
use ksb_core::error::Error;
use ksb_core::prune::{prune_final, LeafPolicy};
use ksb_core::{par, ExecMode, PrunedTree};

const MODES: [ExecMode; 2] = [ExecMode::Sequential, ExecMode::Parallel];

fn capped(p: &EnumerationParams) -> Census {
    match enumerate(p) {
        Ok(c) => c,
        Err(Error::CapExceeded { partial, .. }) => *partial,
        Err(e) => panic!("{e}"),
    }
}

fn bench_enumeration(c: &mut Criterion) {
    let mut g = c.benchmark_group("enumerate");
    g.sample_size(10);
    for mode in MODES {
        let sliced = EnumerationParams::new(3, Target::Sliced)
            .max_entries(usize::MAX)
            .max_vertices(5)
            .mode(mode);
        g.bench_with_input(BenchmarkId::new("sliced_h3_v5", mode), &sliced, |b, p| {
            b.iter(|| capped(p).total)
        });
        let pruned = EnumerationParams::new(3, Target::Pruned)
            .max_entries(usize::MAX)
            .max_vertices(5)
            .mode(mode);
        g.bench_with_input(BenchmarkId::new("pruned_h3_v5", mode), &pruned, |b, p| {
            b.iter(|| capped(p).total)
        });
    }
    g.finish();
}

fn bench_confluence(c: &mut Criterion) {
    let census = capped(
        &EnumerationParams::new(3, Target::Sliced)
            .max_entries(usize::MAX)
            .max_vertices(4),
    );
    let mut g = c.benchmark_group("confluence");
    g.sample_size(10);
    for mode in MODES {
        g.bench_with_input(BenchmarkId::new("sliced_h3_v4", mode), &mode, |b, &m| {
            b.iter(|| check_confluence(&census, 4, m).divergences.len())
        });
    }
    g.finish();
}

fn bench_prune_batch(c: &mut Criterion) {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let trees: Vec<PrunedTree> = (0..2000)
        .map(|k| PrunedTree::from(random_sliced_tree(3 + k % 3, 16, &mut rng)))
        .collect();
    let mut g = c.benchmark_group("prune_batch");
    for mode in MODES {
        g.bench_with_input(BenchmarkId::new("random_2000", mode), &mode, |b, &m| {
            b.iter(|| {
                par::map(m, trees.clone(), |t| {
                    prune_final(t, &LeafPolicy::LowestId).is_ok()
                })
                .into_iter()
                .filter(|&ok| ok)
                .count()
            })
        });
    }
    g.finish();
}

criterion_group!(benches, bench_enumeration, bench_confluence, bench_prune_batch);
criterion_main!(benches);
