use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use hkp_core::sample;
use hkp_core::spectral::SpectralMatrix;
use hkp_core::symbol::Symbol;
use hkp_core::trig::DEFAULT_HARD_CAP;

fn spectral_build(c: &mut Criterion) {
    let mut group = c.benchmark_group("spectral_build");
    let mut r = sample::rng(1);
    let sym = sample::rand_symbol(&mut r, 2, 1, -3, -4, 3, DEFAULT_HARD_CAP, 0.4);
    for cap in [8usize, 16, 24] {
        group.bench_with_input(BenchmarkId::new("parallel", cap), &cap, |b, &cap| {
            b.iter(|| SpectralMatrix::from_symbol(&sym, cap).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("sequential", cap), &cap, |b, &cap| {
            b.iter(|| {
                SpectralMatrix::from_action_seq(cap, sym.dim, sym.hard_cap.max(4 * cap), |f| {
                    sym.apply(f)
                })
                .unwrap()
            })
        });
    }
    group.finish();
}

fn factorization_sweep(c: &mut Criterion) {
    let mut group = c.benchmark_group("birkhoff_sweep");
    for n in [3usize, 5] {
        group.bench_with_input(BenchmarkId::new("order", n), &n, |b, &n| {
            b.iter(|| {
                for seed in 0..8u64 {
                    let mut r = sample::rng(seed);
                    let u =
                        sample::rand_unit_hseries(&mut r, n, 1, -(n as i64), 2, DEFAULT_HARD_CAP, 0.3);
                    hkp_core::hseries::birkhoff_factor(&u).unwrap();
                }
            })
        });
    }
    group.finish();
}

fn dressed_operator(c: &mut Criterion) {
    let mut group = c.benchmark_group("dressed_l0");
    let mut r = sample::rng(7);
    let floor = -6;
    let exponent = sample::rand_dressing_exponent(&mut r, 1, floor, 2, DEFAULT_HARD_CAP, 0.3);
    let s0 = Symbol::exp_neg(&exponent).unwrap();
    for h_order in [4usize, 6] {
        group.bench_with_input(BenchmarkId::new("h_order", h_order), &h_order, |b, &n| {
            b.iter(|| hkp_core::kp::make_l0(&s0, n).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, spectral_build, factorization_sweep, dressed_operator);
criterion_main!(benches);
