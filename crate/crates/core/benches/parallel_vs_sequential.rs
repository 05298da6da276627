use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use trailforge::eval::dtw_curve;
use trailforge::fixtures::{Fixture, FixtureParams};
use trailforge::par::available_workers;
use trailforge::planner::{generate_batch, GenerationRequest, Mode};
use trailforge::world::{compute_fields_parallel, compute_fields_sequential};
use trailforge::{CellPath, GridWorld};

fn fixture() -> (Fixture, GridWorld) {
    let f = Fixture::generate(FixtureParams::default());
    let w = f.world().expect("fixture world");
    (f, w)
}

fn bench_fields(c: &mut Criterion) {
    let (f, _) = fixture();
    let (rows, cols) = (f.params.rows, f.params.cols);
    let mut g = c.benchmark_group("fields");
    g.sample_size(10);
    g.bench_function("sequential", |b| {
        b.iter(|| compute_fields_sequential(rows, cols, black_box(&f.pois)))
    });
    g.bench_function("parallel", |b| {
        b.iter(|| compute_fields_parallel(rows, cols, black_box(&f.pois)))
    });
    g.finish();
}

fn requests(w: &GridWorld, n: usize) -> Vec<GenerationRequest<'static>> {
    let comp = w.largest_component();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    (0..n)
        .map(|i| {
            let start = comp[rng.random_range(0..comp.len())];
            let mut r = GenerationRequest::new(start, 200.0, Mode::Attraction, None).unwrap();
            r.seed = i as u64;
            r
        })
        .collect()
}

fn bench_generate(c: &mut Criterion) {
    let (_, w) = fixture();
    let reqs = requests(&w, 32);
    let mut g = c.benchmark_group("generate_batch");
    g.sample_size(10);
    for workers in [1, available_workers().max(2)] {
        g.bench_with_input(BenchmarkId::from_parameter(workers), &workers, |b, &k| {
            b.iter(|| generate_batch(&w, black_box(&reqs), k))
        });
    }
    g.finish();
}

fn bench_dtw(c: &mut Criterion) {
    let (_, w) = fixture();
    let paths: Vec<CellPath> = generate_batch(&w, &requests(&w, 21), 1)
        .into_iter()
        .filter_map(|r| r.ok().map(|r| r.path))
        .collect();
    let mut g = c.benchmark_group("dtw_curve");
    g.sample_size(10);
    for workers in [1, available_workers().max(2)] {
        g.bench_with_input(BenchmarkId::from_parameter(workers), &workers, |b, &k| {
            b.iter(|| dtw_curve(black_box(&paths), k))
        });
    }
    g.finish();
}

criterion_group!(benches, bench_fields, bench_generate, bench_dtw);
criterion_main!(benches);
