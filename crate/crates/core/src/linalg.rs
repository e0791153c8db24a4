//! Small numerical helpers: Hermitian eigenvalues and a Lanczos ground-state
//! solver for matrix-free operators.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Smallest eigenvalue of a dense Hermitian matrix.
///
/// `A + iB` is embedded as the real symmetric `[[A, -B], [B, A]]`, which has
/// the same spectrum with every eigenvalue doubled.
pub fn smallest_eigenvalue_hermitian(h: &DMatrix<Complex64>) -> f64 {
    let d = h.nrows();
    let mut real = DMatrix::<f64>::zeros(2 * d, 2 * d);
    for i in 0..d {
        for j in 0..d {
            let z = h[(i, j)];
            real[(i, j)] = z.re;
            real[(i + d, j + d)] = z.re;
            real[(i, j + d)] = -z.im;
            real[(i + d, j)] = z.im;
        }
    }
    // Symmetrize against rounding in the input.
    let real = (&real + real.transpose()) * 0.5;
    SymmetricEigen::new(real).eigenvalues.min()
}

const LANCZOS_BLOCK: usize = 200;
const LANCZOS_RESTARTS: usize = 30;
const LANCZOS_TOL: f64 = 1e-13;

/// Lowest eigenvalue of a Hermitian operator given only through `apply`,
/// using Lanczos with full reorthogonalization and explicit restarts from the
/// current Ritz vector.
pub fn lanczos_ground_energy<F>(dim: usize, apply: F) -> Result<f64>
where
    F: Fn(&[Complex64], &mut [Complex64]),
{
    let mut rng = ChaCha8Rng::seed_from_u64(0x1a2c_2050);
    let mut start: Vec<Complex64> = (0..dim)
        .map(|_| Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
        .collect();
    normalize(&mut start);

    let mut best = f64::INFINITY;
    for _ in 0..LANCZOS_RESTARTS {
        let (theta, ritz, converged) = lanczos_cycle(dim, &apply, &start);
        best = best.min(theta);
        if converged {
            return Ok(theta);
        }
        start = ritz;
        normalize(&mut start);
    }
    Err(Error::Solve(format!(
        "Lanczos did not converge after {LANCZOS_RESTARTS} restarts (best estimate {best})"
    )))
}

fn lanczos_cycle<F>(dim: usize, apply: &F, start: &[Complex64]) -> (f64, Vec<Complex64>, bool)
where
    F: Fn(&[Complex64], &mut [Complex64]),
{
    let max_k = LANCZOS_BLOCK.min(dim);
    let mut basis: Vec<Vec<Complex64>> = vec![start.to_vec()];
    let mut alphas: Vec<f64> = Vec::new();
    let mut betas: Vec<f64> = Vec::new();
    let mut w = vec![Complex64::new(0.0, 0.0); dim];

    loop {
        let k = basis.len() - 1;
        apply(&basis[k], &mut w);
        let alpha = dot(&basis[k], &w).re;
        alphas.push(alpha);
        // Full reorthogonalization, twice for stability.
        for _ in 0..2 {
            for q in &basis {
                let c = dot(q, &w);
                for (wi, qi) in w.iter_mut().zip(q) {
                    *wi -= c * qi;
                }
            }
        }
        let beta = norm(&w);

        let m = alphas.len();
        let check = m == max_k || beta < 1e-14 || m.is_multiple_of(10);
        if check {
            let t = tridiagonal(&alphas, &betas);
            let eig = SymmetricEigen::new(t);
            let (idx, theta) = eig
                .eigenvalues
                .iter()
                .copied()
                .enumerate()
                .min_by(|a, b| a.1.total_cmp(&b.1))
                .expect("non-empty tridiagonal");
            let y = eig.eigenvectors.column(idx);
            let residual = beta * y[m - 1].abs();
            let converged = beta < 1e-14 || residual < LANCZOS_TOL * theta.abs().max(1.0);
            if converged || m == max_k {
                let mut ritz = vec![Complex64::new(0.0, 0.0); dim];
                for (coef, q) in y.iter().zip(&basis) {
                    for (r, qi) in ritz.iter_mut().zip(q) {
                        *r += *coef * qi;
                    }
                }
                return (theta, ritz, converged);
            }
        }

        betas.push(beta);
        let next: Vec<Complex64> = w.iter().map(|z| z / beta).collect();
        basis.push(next);
    }
}

fn tridiagonal(alphas: &[f64], betas: &[f64]) -> DMatrix<f64> {
    let m = alphas.len();
    let mut t = DMatrix::zeros(m, m);
    for i in 0..m {
        t[(i, i)] = alphas[i];
        if i + 1 < m {
            t[(i, i + 1)] = betas[i];
            t[(i + 1, i)] = betas[i];
        }
    }
    t
}

pub(crate) fn dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn norm(a: &[Complex64]) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

fn normalize(a: &mut [Complex64]) {
    let n = norm(a);
    a.iter_mut().for_each(|z| *z /= n);
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hermitian_embedding_keeps_spectrum() {
        // [[1, -i], [i, 1]] has eigenvalues 0 and 2.
        let h = DMatrix::from_row_slice(
            2,
            2,
            &[
                Complex64::new(1.0, 0.0),
                Complex64::new(0.0, -1.0),
                Complex64::new(0.0, 1.0),
                Complex64::new(1.0, 0.0),
            ],
        );
        assert!(smallest_eigenvalue_hermitian(&h).abs() < 1e-14);
    }

    #[test]
    fn lanczos_matches_dense_on_random_hermitian() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let d = 150;
        let mut h = DMatrix::<Complex64>::zeros(d, d);
        for i in 0..d {
            for j in 0..=i {
                let z = Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5);
                h[(i, j)] = z;
                h[(j, i)] = z.conj();
            }
            h[(i, i)] = Complex64::new(h[(i, i)].re, 0.0);
        }
        let dense = smallest_eigenvalue_hermitian(&h);
        let lanczos = lanczos_ground_energy(d, |v, out| {
            for i in 0..d {
                out[i] = (0..d).map(|j| h[(i, j)] * v[j]).sum();
            }
        })
        .unwrap();
        assert!((dense - lanczos).abs() < 1e-10, "{dense} vs {lanczos}");
    }
}
