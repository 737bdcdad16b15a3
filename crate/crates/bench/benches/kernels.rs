use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use jchsim::invariants::scrambled_state;
use jchsim::model::*;
use jchsim::propagator::{KrylovConfig, KrylovStepper};
use num_complex::Complex64 as C64;

fn two_excitation(n: usize) -> (ModelParams, Basis) {
    (ModelParams::spin(n, 1.0, 2.0).unwrap(), Basis::enumerate(n, Sector::Two, ModelKind::Spin))
}

fn build(c: &mut Criterion) {
    let mut g = c.benchmark_group("build_hamiltonian");
    for n in [30, 60, 100] {
        let (p, b) = two_excitation(n);
        g.bench_with_input(BenchmarkId::from_parameter(b.dim()), &n, |bench, _| {
            bench.iter(|| build_hamiltonian(black_box(&p), black_box(&b)).unwrap())
        });
    }
    g.finish();
}

fn matvec(c: &mut Criterion) {
    let mut g = c.benchmark_group("matvec");
    for n in [30, 60, 100] {
        let (p, b) = two_excitation(n);
        let h = build_hamiltonian(&p, &b).unwrap();
        let x = scrambled_state(b.dim());
        let mut y = vec![C64::new(0.0, 0.0); b.dim()];
        g.bench_with_input(BenchmarkId::from_parameter(b.dim()), &n, |bench, _| {
            bench.iter(|| h.apply(black_box(&x), &mut y))
        });
    }
    g.finish();
}

fn krylov_step(c: &mut Criterion) {
    let mut g = c.benchmark_group("krylov_step_dt_0.5");
    g.sample_size(20);
    for n in [30, 60, 100] {
        let (p, b) = two_excitation(n);
        let h = build_hamiltonian(&p, &b).unwrap();
        let psi0 = scrambled_state(b.dim());
        let mut stepper = KrylovStepper::new(KrylovConfig::default());
        g.bench_with_input(BenchmarkId::from_parameter(b.dim()), &n, |bench, _| {
            bench.iter(|| {
                let mut psi = psi0.clone();
                stepper.advance(&h, &mut psi, 0.5).unwrap();
                psi
            })
        });
    }
    g.finish();
}

criterion_group!(benches, build, matvec, krylov_step);
criterion_main!(benches);
