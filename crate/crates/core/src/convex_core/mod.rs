//! First-order convex optimization primitives shared by every subproblem.

mod eig;
mod projection;
mod solver;

use serde::{Deserialize, Serialize};

pub use eig::{hermitian_eig, square_from_rows, HermitianEigen};
pub use projection::{
    dykstra_psd_unit_diag, project_box, project_psd, project_psd_unit_diag, project_psd_unit_diag_warm, project_simplex,
    project_simplex_floor,
    project_unit_disk,
};
pub use solver::{finite_difference_gradient, gradient_error, maximize_concave, ConcaveProblem, Maximum};

/// Asserts the analytic gradient of `problem` matches central differences
/// (relative 1e-4) at `points` sampled locations.
#[cfg(test)]
pub(crate) fn check_gradient<P: ConcaveProblem, R>(
    problem: &P,
    points: usize,
    rng: &mut R,
    mut sample: impl FnMut(&mut R) -> Vec<f64>,
) {
    for _ in 0..points {
        let x = sample(rng);
        let err = gradient_error(problem, &x);
        assert!(err < 1e-4, "gradient mismatch {err:e} at {x:?}");
    }
}

use crate::error::SolveError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverParams {
    pub max_iters: usize,
    /// Sup-norm threshold on the projected-gradient residual.
    pub grad_tol: f64,
    pub step_init: f64,
    pub armijo_c: f64,
    pub backtrack_factor: f64,
    pub projection_iters: usize,
}

impl Default for SolverParams {
    fn default() -> Self {
        Self {
            max_iters: 500,
            grad_tol: 1e-7,
            step_init: 1.0,
            armijo_c: 1e-4,
            backtrack_factor: 0.5,
            projection_iters: 100,
        }
    }
}

impl SolverParams {
    pub fn validate(&self) -> Result<(), SolveError> {
        let bad = |what: &str| Err(SolveError::InvalidParams(what.to_string()));
        if self.max_iters == 0 || self.projection_iters == 0 {
            return bad("iteration caps must be positive");
        }
        if !(self.grad_tol > 0.0 && self.step_init > 0.0) {
            return bad("grad_tol and step_init must be positive");
        }
        if !(self.armijo_c > 0.0 && self.armijo_c < 1.0) {
            return bad("armijo_c must lie in (0, 1)");
        }
        if !(self.backtrack_factor > 0.0 && self.backtrack_factor < 1.0) {
            return bad("backtrack_factor must lie in (0, 1)");
        }
        Ok(())
    }
}
