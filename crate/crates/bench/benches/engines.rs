use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use std::hint::black_box;

use patchsim::circuit::{CircuitDescriptor, GateFamily, GridGeometry, NoiseSpec};
use patchsim::mpdo::{ChannelSuperop, MpdoState};
use patchsim::oracle::{evolve_circuit, DenseOptions};
use patchsim::sampler::{patch_sampler, Backend};
use patchsim::stabilizer::simulate_circuit;

fn haar(n: usize, d: usize) -> CircuitDescriptor {
    CircuitDescriptor::new(GridGeometry::line(n).unwrap(), d, GateFamily::Haar2Q, NoiseSpec::amplitude_damping(0.1), 1)
}

fn dense(c: &mut Criterion) {
    let mut g = c.benchmark_group("dense");
    g.sample_size(10);
    for n in [8, 10] {
        let circuit = haar(n, 8).realize().unwrap();
        g.bench_function(format!("evolve n={n} d=8"), |b| {
            b.iter(|| evolve_circuit(black_box(&circuit), &DenseOptions::default()).unwrap())
        });
    }
    g.finish();
}

fn mpdo(c: &mut Criterion) {
    let mut g = c.benchmark_group("mpdo");
    g.sample_size(10);
    let circuit = haar(12, 8).realize().unwrap();
    for chi in [32, 128] {
        g.bench_function(format!("evolve n=12 d=8 chi={chi}"), |b| {
            b.iter(|| MpdoState::evolve(black_box(&circuit), chi).unwrap())
        });
    }
    let state = MpdoState::evolve(&circuit, 64).unwrap();
    let gate = circuit.layers()[0].gates[0].gate.unitary();
    let m = ChannelSuperop::build(&gate, &NoiseSpec::amplitude_damping(0.1)).unwrap();
    g.bench_function("apply_channel chi=64", |b| {
        b.iter_batched(
            || state.clone(),
            |mut s| s.apply_channel(&m, 5).unwrap(),
            BatchSize::SmallInput,
        )
    });
    g.finish();
}

fn stabilizer(c: &mut Criterion) {
    let d = CircuitDescriptor::new(
        GridGeometry::square(16).unwrap(),
        16,
        GateFamily::Clifford2Q,
        NoiseSpec::heralded_reset(0.1),
        1,
    );
    let circuit = d.realize().unwrap();
    c.bench_function("tableau 16x16 d=16", |b| b.iter(|| simulate_circuit(black_box(&circuit)).unwrap()));
    let t = simulate_circuit(&circuit).unwrap();
    c.bench_function("diagonal subgroup 16x16", |b| b.iter(|| t.diagonal_subgroup().unwrap()));
}

fn sampler(c: &mut Criterion) {
    let d = haar(16, 6);
    c.bench_function("patch sampler build n=16 ell=2 d*=3", |b| {
        b.iter(|| patch_sampler(black_box(&d), 2, 3, Backend::Dense, 14).unwrap())
    });
    let s = patch_sampler(&d, 2, 3, Backend::Dense, 14).unwrap();
    c.bench_function("patch sampler 1000 samples", |b| b.iter(|| s.sample_many(1000, 1, 0).unwrap()));
}

criterion_group!(benches, dense, mpdo, stabilizer, sampler);
criterion_main!(benches);
