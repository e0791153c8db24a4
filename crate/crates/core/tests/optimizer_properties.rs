//! Invariants of the optimizer updates over random inputs.

mod common;

use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use vqebench::optimizers::{
    adam_step, bfgs_step, natural_direction, AdamConfig, AdamState, BfgsConfig, BfgsState,
    Objective, Point,
};
use vqebench::FubiniMatrix;

use common::{random_spd, Quadratic};

/// Cauchy-Schwarz bound on `|m̂_t| / sqrt(v̂_t)` for any gradient history.
fn adam_ratio_bound(beta1: f64, beta2: f64, t: i32) -> f64 {
    let r = beta1 * beta1 / beta2;
    let series: f64 = (0..t).map(|j| r.powi(j)).sum();
    let s = (1.0 - beta1).powi(2) / (1.0 - beta2) * series;
    s.sqrt() * (1.0 - beta2.powi(t)).sqrt() / (1.0 - beta1.powi(t))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn adam_step_length_is_bounded(
        lr in 1e-4f64..1.0,
        grads in prop::collection::vec(prop::collection::vec(-1e3f64..1e3, 3), 1..60),
    ) {
        let config = AdamConfig::new(lr);
        let mut state = AdamState::new(3);
        let mut theta = vec![0.0; 3];
        for (t, g) in grads.iter().enumerate() {
            let before = theta.clone();
            adam_step(&config, &mut state, &mut theta, g).unwrap();
            let bound = lr * adam_ratio_bound(config.beta1, config.beta2, t as i32 + 1);
            for (a, b) in theta.iter().zip(&before) {
                prop_assert!((a - b).abs() <= bound * (1.0 + 1e-12));
                prop_assert!(a.is_finite());
            }
        }
    }

    #[test]
    fn bfgs_hessian_stays_symmetric_positive_definite(seed in any::<u64>(), n in 2usize..7) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random_spd(n, &mut rng);
        let center: Vec<f64> = (0..n).map(|i| (i as f64 * 0.37).sin()).collect();
        let objective = Quadratic { a, center };
        let start = vec![1.5; n];
        let (energy, grad) = objective.energy_and_gradient(&start);
        let mut point = Point { params: start, energy, grad };
        let config = BfgsConfig::default();
        let mut state = BfgsState::new(n);
        for _ in 0..n {
            if common::max_abs(&point.grad) < 1e-12 {
                break;
            }
            let step = bfgs_step(&config, &mut state, &objective, &point).unwrap();
            prop_assert!(step.point.energy.is_finite());
            prop_assert!(step.point.energy <= point.energy + 1e-14);
            point = step.point;
            let b = &state.hessian;
            prop_assert!((b - b.transpose()).amax() <= 1e-10 * b.amax());
            let sym = (b + b.transpose()) * 0.5;
            prop_assert!(sym.symmetric_eigenvalues().min() > 0.0);
        }
    }

    #[test]
    fn natural_direction_solves_the_regularized_system(
        seed in any::<u64>(),
        n in 1usize..8,
        scale in prop::sample::select(vec![1.0, 4.0]),
        tikhonov in 1e-8f64..1e-1,
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = random_spd(n, &mut rng);
        let g: Vec<f64> = (0..n).map(|i| ((i + 1) as f64 * 1.3).cos()).collect();
        let x = natural_direction(&FubiniMatrix::new(f.clone()), scale, &g, tikhonov).unwrap();
        let lhs = (f * scale + DMatrix::identity(n, n) * tikhonov)
            * nalgebra::DVector::from_column_slice(&x);
        let residual = common::max_abs_diff(lhs.as_slice(), &g);
        prop_assert!(residual <= 1e-10 * common::max_abs(&g).max(1.0));
    }
}
