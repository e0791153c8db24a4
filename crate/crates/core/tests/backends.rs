//! The free-fermion and statevector simulators must agree on plain TFIM QAOA
//! circuits.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use vqebench::freefermion::{self, QaoaParams};
use vqebench::harness::qaoa_circuit;
use vqebench::models::{tfim_hamiltonian, TfimSpec};
use vqebench::statevector;

fn random_params(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(-3.0..3.0)).collect()
}

#[test]
fn energies_gradients_and_metrics_agree() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for n in [2usize, 4, 6, 8, 10] {
        for field in [1.0, 0.7] {
            let spec = TfimSpec::new(n, field).unwrap();
            let h = tfim_hamiltonian(&spec);
            let circuit = qaoa_circuit(n).unwrap();
            for _ in 0..3 {
                let theta = random_params(&mut rng, n);
                let qp = QaoaParams::from_interleaved(&theta).unwrap();

                let (e_ff, g_ff) = freefermion::energy_and_gradient(&spec, &qp);
                let (e_sv, g_sv) = statevector::energy_and_gradient(&circuit, &theta, &h).unwrap();
                assert!(
                    (e_ff - e_sv).abs() < 1e-10,
                    "N={n}: energy {e_ff} vs {e_sv}"
                );
                for (a, b) in g_ff.iter().zip(&g_sv) {
                    assert!((a - b).abs() < 1e-9, "N={n}: gradient {a} vs {b}");
                }

                let f_ff = freefermion::fubini(&spec, &qp);
                let f_sv = statevector::fubini(&circuit, &theta).unwrap();
                let diff = f_ff.max_abs_diff(&f_sv);
                assert!(
                    diff < 1e-9,
                    "N={n}: metric differs by {diff}\n{:?}\n{:?}",
                    f_ff,
                    f_sv
                );
            }
        }
    }
}
