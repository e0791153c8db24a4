use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

/// Real symmetric positive semi-definite metric on parameter space
/// (the Fubini-Study metric of an ansatz family).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FubiniMatrix(DMatrix<f64>);

impl FubiniMatrix {
    pub fn new(matrix: DMatrix<f64>) -> Self {
        assert!(matrix.is_square(), "metric must be square");
        Self(matrix)
    }

    pub fn zeros(n: usize) -> Self {
        Self(DMatrix::zeros(n, n))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.0
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.0[(i, j)]
    }

    /// Largest `|F_ij - F_ji|`.
    pub fn asymmetry(&self) -> f64 {
        (&self.0 - self.0.transpose()).amax()
    }

    pub fn min_eigenvalue(&self) -> f64 {
        let sym = (&self.0 + self.0.transpose()) * 0.5;
        SymmetricEigen::new(sym).eigenvalues.min()
    }

    /// Largest entrywise difference to another metric of the same size.
    pub fn max_abs_diff(&self, other: &FubiniMatrix) -> f64 {
        (&self.0 - &other.0).amax()
    }
}

impl From<DMatrix<f64>> for FubiniMatrix {
    fn from(m: DMatrix<f64>) -> Self {
        Self::new(m)
    }
}
