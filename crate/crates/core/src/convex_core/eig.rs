//! Hermitian eigendecomposition (nalgebra backend) in descending order.

use nalgebra::DMatrix;

use crate::error::SolveError;
use crate::linalg::{CMatrix, C64};

/// Eigenvalues in descending order and matching orthonormal eigenvectors
/// stored as the columns of `vectors`.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    pub vectors: CMatrix,
}

impl HermitianEigen {
    pub fn principal(&self) -> (f64, Vec<C64>) {
        (self.values[0], self.vectors.col(0))
    }

    /// `U diag(f(lambda)) U^H`.
    pub fn reconstruct_with(&self, f: impl Fn(f64) -> f64) -> CMatrix {
        let n = self.vectors.dim();
        let mut out = CMatrix::zeros(n);
        for (k, &lam) in self.values.iter().enumerate() {
            let w = f(lam);
            if w == 0.0 {
                continue;
            }
            let u = self.vectors.col(k);
            for i in 0..n {
                let ui = u[i] * w;
                for j in 0..n {
                    out[(i, j)] += ui * u[j].conj();
                }
            }
        }
        out
    }

    pub fn reconstruct(&self) -> CMatrix {
        self.reconstruct_with(|l| l)
    }
}

/// Converts nested rows into a square matrix, rejecting ragged or
/// rectangular input.
pub fn square_from_rows(rows: &[Vec<C64>]) -> Result<CMatrix, SolveError> {
    let n = rows.len();
    if let Some(bad) = rows.iter().find(|r| r.len() != n) {
        return Err(SolveError::NotSquare { rows: n, cols: bad.len() });
    }
    Ok(CMatrix::from_fn(n, |i, j| rows[i][j]))
}

/// Eigendecomposition of a Hermitian matrix. The input is symmetrized on
/// entry, so round-off asymmetry below ~1e-10 is harmless.
pub fn hermitian_eig(h: &CMatrix) -> HermitianEigen {
    let n = h.dim();
    let sym = h.hermitian_part();
    let m = DMatrix::from_fn(n, n, |i, j| sym[(i, j)]);
    let eig = m.symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = CMatrix::from_fn(n, |r, c| eig.eigenvectors[(r, order[c])]);
    HermitianEigen { values, vectors }
}
