//! Benchmarks for the hot paths: eigendecomposition, the twirl, full reports,
//! the coupled-oscillator build and the probe optimizer.

use criterion::{BenchmarkId, Criterion};
use qfi_core::models::{example2_system, DEFAULT_KAPPA, DEFAULT_OMEGA};
use qfi_core::probeopt::{optimize_probe, EnergyConstraint, OptProblem};
use qfi_core::sampling::{random_density, random_hermitian, random_scenario};
use qfi_core::{eigh, report, twirl, DEFAULT_CLUSTER_TOL};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const DIMS: [usize; 3] = [8, 32, 128];

pub fn benchmarks(c: &mut Criterion) {
    let mut rng = ChaCha8Rng::seed_from_u64(1);

    let mut group = c.benchmark_group("eigh");
    for dim in DIMS {
        let h = random_hermitian(&mut rng, dim, 1.0);
        group.bench_with_input(BenchmarkId::from_parameter(dim), &h, |b, h| {
            b.iter(|| eigh(h).unwrap())
        });
    }
    group.finish();

    let mut group = c.benchmark_group("twirl");
    for dim in DIMS {
        let s = random_scenario(&mut rng, dim, true);
        let p = s.projectors(DEFAULT_CLUSTER_TOL).unwrap();
        let rho = random_density(&mut rng, dim);
        group.bench_with_input(
            BenchmarkId::from_parameter(dim),
            &(rho, p),
            |b, (rho, p)| b.iter(|| twirl(rho, p).unwrap()),
        );
    }
    group.finish();

    let mut group = c.benchmark_group("report");
    for dim in DIMS {
        let s = random_scenario(&mut rng, dim, false);
        group.bench_with_input(BenchmarkId::from_parameter(dim), &s, |b, s| {
            b.iter(|| report(s, DEFAULT_CLUSTER_TOL).unwrap())
        });
    }
    group.finish();

    let mut group = c.benchmark_group("example2_system");
    group.sample_size(10);
    for n_max in [4, 9] {
        group.bench_with_input(BenchmarkId::from_parameter(n_max), &n_max, |b, &n| {
            b.iter(|| {
                example2_system(DEFAULT_OMEGA, DEFAULT_KAPPA, n, DEFAULT_CLUSTER_TOL).unwrap()
            })
        });
    }
    group.finish();

    let mut group = c.benchmark_group("optimize_probe");
    group.sample_size(10);
    for n in [8, 24] {
        let problem = OptProblem::new(n, EnergyConstraint::FixedMeanEnergy(2.0));
        group.bench_with_input(BenchmarkId::from_parameter(n), &problem, |b, p| {
            b.iter(|| optimize_probe(p).unwrap())
        });
    }
    group.finish();
}
