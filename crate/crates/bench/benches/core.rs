use std::f64::consts::FRAC_PI_2;

use criterion::{criterion_group, criterion_main, Criterion};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::hint::black_box;
use vqa_bench::{full_noise, qaoa};
use vqa_core::optim::{psr_gradient, spsa_gradient};
use vqa_core::sim::{make_channel, ChannelKind};
use vqa_core::{DensityMatrix, NoiseConfig, PerturbationDist, Shots};

const THETA: [f64; 2] = [0.4, 0.9];

fn evaluation(c: &mut Criterion) {
    let mut g = c.benchmark_group("evaluate");
    let ideal = qaoa(1, NoiseConfig::none(), Shots::Finite(1024));
    let noisy = qaoa(1, full_noise(), Shots::Finite(1024));
    let exact = qaoa(1, full_noise(), Shots::Exact);
    g.bench_function("noise_free_1024_shots", |b| b.iter(|| ideal.evaluate(black_box(&THETA), 7).unwrap()));
    g.bench_function("gate_and_readout_1024_shots", |b| b.iter(|| noisy.evaluate(black_box(&THETA), 7).unwrap()));
    g.bench_function("gate_and_readout_exact", |b| b.iter(|| exact.exact_value(black_box(&THETA), None).unwrap()));
    g.finish();
}

fn gradients(c: &mut Criterion) {
    let mut g = c.benchmark_group("gradient");
    let obj = qaoa(1, full_noise(), Shots::Finite(1024));
    let ideal = qaoa(1, NoiseConfig::none(), Shots::Exact);
    let d = PerturbationDist::rademacher();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    g.bench_function("spsa", |b| b.iter(|| spsa_gradient(&obj, black_box(&THETA), 0.2, &d, &mut rng, 0).unwrap()));
    g.bench_function("param_shift", |b| b.iter(|| psr_gradient(&obj, black_box(&THETA), FRAC_PI_2, 0).unwrap()));
    g.bench_function("ideal_exact", |b| b.iter(|| ideal.ideal_gradient(black_box(&THETA)).unwrap()));
    g.finish();
}

fn channels(c: &mut Criterion) {
    let mut g = c.benchmark_group("channel");
    let rho = DensityMatrix::maximally_mixed(4).unwrap();
    let one = make_channel(ChannelKind::Depolarizing, 0.01, &[2]).unwrap();
    let two = make_channel(ChannelKind::Depolarizing, 0.01, &[1, 3]).unwrap();
    g.bench_function("depolarizing_1q_on_4q", |b| b.iter(|| rho.apply_channel(black_box(&one)).unwrap()));
    g.bench_function("depolarizing_2q_on_4q", |b| b.iter(|| rho.apply_channel(black_box(&two)).unwrap()));
    g.finish();
}

criterion_group!(benches, evaluation, gradients, channels);
criterion_main!(benches);
