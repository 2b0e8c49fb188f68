//! Data-parallel core vs single-thread baseline on the three hot loops:
//! spatially-correlated noise sampling, Feynman–Kac Monte Carlo, and
//! refined box scanning. The same code runs in both cases; the baseline
//! pins a one-worker pool, so the numbers isolate the rayon speedup.

#[cfg(feature = "parallel")]
mod benches {
    use criterion::{BenchmarkId, Criterion};
    use kraichnan_core::fractal::bm_level_set;
    use kraichnan_core::kernels::CorrelationKernel;
    use kraichnan_core::noise::{sample_noise, SpaceTimeGrid, SpatialFactor};
    use kraichnan_core::solver_fk::{gamma_field, Mode};
    use std::hint::black_box;
    use std::sync::Arc;

    fn single_pool() -> rayon::ThreadPool {
        rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .expect("pool")
    }

    pub fn noise_sampling(c: &mut Criterion) {
        let kernel = CorrelationKernel::gaussian_bell(1.0, 1.0).unwrap();
        let grid = Arc::new(SpaceTimeGrid::uniform(-16.0, 16.0, 257, 1.0, 256).unwrap());
        let factor = SpatialFactor::new(&kernel, &grid).unwrap();
        let single = single_pool();
        let mut group = c.benchmark_group("noise_sample_256x257");
        group.bench_with_input(BenchmarkId::new("rayon", "default"), &factor, |b, f| {
            b.iter(|| black_box(f.sample(7)))
        });
        group.bench_with_input(BenchmarkId::new("sequential", 1), &factor, |b, f| {
            b.iter(|| single.install(|| black_box(f.sample(7))))
        });
        group.finish();
    }

    pub fn gamma_monte_carlo(c: &mut Criterion) {
        let kernel = CorrelationKernel::gaussian_bell(1.0, 1.0).unwrap();
        let grid = Arc::new(SpaceTimeGrid::uniform(-12.0, 12.0, 241, 1.0, 128).unwrap());
        let noise = sample_noise(&kernel, &grid, 11).unwrap();
        let single = single_pool();
        let point = (1.0, 0.2, -0.1);
        let mut group = c.benchmark_group("gamma_field_2000_bridges");
        group.sample_size(20);
        group.bench_function("rayon", |b| {
            b.iter(|| {
                gamma_field(
                    0.5,
                    &kernel,
                    point,
                    2000,
                    13,
                    Mode::ConditionalTrajectory,
                    Some(black_box(&noise)),
                )
                .unwrap()
            })
        });
        group.bench_function("sequential", |b| {
            b.iter(|| {
                single.install(|| {
                    gamma_field(
                        0.5,
                        &kernel,
                        point,
                        2000,
                        13,
                        Mode::ConditionalTrajectory,
                        Some(&noise),
                    )
                    .unwrap()
                })
            })
        });
        group.finish();
    }

    pub fn box_scanning(c: &mut Criterion) {
        let single = single_pool();
        let mut group = c.benchmark_group("bm_level_set_1e5_boxes");
        group.sample_size(20);
        group.bench_function("rayon", |b| {
            b.iter(|| black_box(bm_level_set(0.0, 100_000, 4, 3)))
        });
        group.bench_function("sequential", |b| {
            b.iter(|| single.install(|| black_box(bm_level_set(0.0, 100_000, 4, 3))))
        });
        group.finish();
    }
}

#[cfg(feature = "parallel")]
fn main() {
    let mut criterion = criterion::Criterion::default().configure_from_args();
    benches::noise_sampling(&mut criterion);
    benches::gamma_monte_carlo(&mut criterion);
    benches::box_scanning(&mut criterion);
    criterion.final_summary();
}

#[cfg(not(feature = "parallel"))]
fn main() {
    eprintln!(
        "bench compares the rayon core against a single thread; enable the `parallel` feature"
    );
}
