use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use vqebench::freefermion::{self, QaoaParams};
use vqebench::harness::{qaoa_circuit, xxz_trotter_circuit};
use vqebench::models::{
    ground_energy_oracle, tfim_hamiltonian, xxz_hamiltonian, TfimSpec, XxzSpec,
};
use vqebench::statevector;

fn params(n: usize) -> Vec<f64> {
    (0..n).map(|i| 0.1 + 0.37 * (i as f64).sin()).collect()
}

fn free_fermion(c: &mut Criterion) {
    let mut group = c.benchmark_group("freefermion");
    for n in [16usize, 32, 64] {
        let spec = TfimSpec::new(n, 1.0).unwrap();
        let p = QaoaParams::from_interleaved(&params(n)).unwrap();
        group.bench_with_input(BenchmarkId::new("energy_and_gradient", n), &n, |b, _| {
            b.iter(|| freefermion::energy_and_gradient(black_box(&spec), black_box(&p)))
        });
        group.bench_with_input(BenchmarkId::new("fubini", n), &n, |b, _| {
            b.iter(|| freefermion::fubini(black_box(&spec), black_box(&p)))
        });
    }
    group.finish();
}

fn state_vector(c: &mut Criterion) {
    let mut group = c.benchmark_group("statevector");
    group.sample_size(20);
    for n in [10usize, 12] {
        let h = tfim_hamiltonian(&TfimSpec::new(n, 1.0).unwrap());
        let circuit = qaoa_circuit(n).unwrap();
        let theta = params(circuit.num_params());
        group.bench_with_input(
            BenchmarkId::new("qaoa_energy_and_gradient", n),
            &n,
            |b, _| {
                b.iter(|| {
                    statevector::energy_and_gradient(&circuit, black_box(&theta), &h).unwrap()
                })
            },
        );
        group.bench_with_input(BenchmarkId::new("qaoa_fubini", n), &n, |b, _| {
            b.iter(|| statevector::fubini(&circuit, black_box(&theta)).unwrap())
        });

        let h = xxz_hamiltonian(&XxzSpec::new(n, 1.0).unwrap());
        let circuit = xxz_trotter_circuit(n).unwrap();
        let theta = params(circuit.num_params());
        group.bench_with_input(
            BenchmarkId::new("xxz_energy_and_gradient", n),
            &n,
            |b, _| {
                b.iter(|| {
                    statevector::energy_and_gradient(&circuit, black_box(&theta), &h).unwrap()
                })
            },
        );
    }
    group.finish();
}

fn ground_state(c: &mut Criterion) {
    let mut group = c.benchmark_group("ground_energy");
    group.sample_size(10);
    for n in [8usize, 12, 14] {
        let h = xxz_hamiltonian(&XxzSpec::new(n, 1.0).unwrap());
        group.bench_with_input(BenchmarkId::new("xxz", n), &n, |b, _| {
            b.iter(|| ground_energy_oracle(black_box(&h)).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, free_fermion, state_vector, ground_state);
criterion_main!(benches);
