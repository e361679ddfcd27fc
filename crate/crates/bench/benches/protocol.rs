use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use gaussdistill::fock::{distill_round, gaussian_to_fock};
use gaussdistill::gaussian::{random_physical_state, RandomStateSpec};
use gaussdistill::phase_space::symmetrize_pipeline;
use gaussdistill::{CorrelationMatrix, FockDensity, GaussianState};

fn conversion(c: &mut Criterion) {
    let state = GaussianState::centered(CorrelationMatrix::two_mode_squeezed(1.6)).unwrap();
    let mut group = c.benchmark_group("gaussian_to_fock");
    group.sample_size(10);
    for cutoff in [10, 20, 30] {
        group.bench_with_input(BenchmarkId::from_parameter(cutoff), &cutoff, |b, &cutoff| {
            b.iter(|| gaussian_to_fock(black_box(&state), cutoff).unwrap())
        });
    }
    group.finish();
}

fn round(c: &mut Criterion) {
    let mut group = c.benchmark_group("distill_round");
    for n in [2, 4, 8] {
        let rho = FockDensity::isotropic(n, 0.8);
        group.bench_with_input(BenchmarkId::from_parameter(n), &rho, |b, rho| {
            b.iter(|| distill_round(black_box(rho), n).unwrap())
        });
    }
    group.finish();
}

fn symmetrization(c: &mut Criterion) {
    let spec = RandomStateSpec { scramble: Some(1.0), ..Default::default() };
    let m = random_physical_state(1, &spec).unwrap();
    c.bench_function("symmetrize_pipeline", |b| b.iter(|| symmetrize_pipeline(black_box(&m)).unwrap()));
}

criterion_group!(benches, conversion, round, symmetrization);
criterion_main!(benches);
