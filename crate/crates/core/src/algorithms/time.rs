use std::f64::consts::LN_2;

use super::TAU_FLOOR;
use crate::convex_core::{maximize_concave, project_simplex_floor, ConcaveProblem, SolverParams};
use crate::error::SolveError;

/// `max sum_k tau_{k+1} log2(1 + sum_{i != k+1} w[k][i] tau_i / tau_{k+1})`
/// over `{tau >= 0, sum(tau) <= frame}`. Each term is the perspective of a
/// concave function, so the objective is jointly concave. Variables are
/// normalized by the frame length.
#[derive(Debug, Clone)]
pub struct TimeProblem {
    /// `K x (K + 1)`; `w[k][k + 1]` is ignored.
    pub weights: Vec<Vec<f64>>,
    pub frame: f64,
}

impl TimeProblem {
    fn floor(&self) -> f64 {
        (TAU_FLOOR / self.frame).min(1.0 / (self.weights.len() + 1) as f64)
    }

    fn numerator(&self, k: usize, x: &[f64]) -> f64 {
        let own = k + 1;
        self.weights[k].iter().zip(x).enumerate().filter(|(i, _)| *i != own).map(|(_, (w, xi))| w * xi).sum()
    }

    /// Objective in bits/Hz at slot lengths `tau` (seconds).
    pub fn value_at(&self, tau: &[f64]) -> f64 {
        let x: Vec<f64> = tau.iter().map(|t| t / self.frame).collect();
        self.value(&x)
    }
}

impl ConcaveProblem for TimeProblem {
    fn value(&self, x: &[f64]) -> f64 {
        let mut total = 0.0;
        for k in 0..self.weights.len() {
            let xk = x[k + 1];
            if xk <= 0.0 {
                continue;
            }
            let u = self.numerator(k, x);
            total += xk * (u / xk).ln_1p();
        }
        self.frame * total / LN_2
    }

    fn gradient(&self, x: &[f64], grad: &mut [f64]) {
        grad.iter_mut().for_each(|g| *g = 0.0);
        for k in 0..self.weights.len() {
            let own = k + 1;
            let xk = x[own].max(f64::MIN_POSITIVE);
            let s = self.numerator(k, x) / xk;
            grad[own] += self.frame * (s.ln_1p() - s / (1.0 + s)) / LN_2;
            let common = self.frame / ((1.0 + s) * LN_2);
            for (i, w) in self.weights[k].iter().enumerate() {
                if i != own {
                    grad[i] += common * w;
                }
            }
        }
    }

    fn project(&self, x: &mut [f64]) {
        let p = project_simplex_floor(x, 1.0, self.floor());
        x.copy_from_slice(&p);
    }
}

/// Optimal slot lengths for fixed cross gains, starting from `start`
/// (projected onto the feasible set first). Returns `(tau, value)`.
pub fn solve_time_allocation(
    weights: &[Vec<f64>],
    frame: f64,
    start: &[f64],
    params: &SolverParams,
) -> Result<(Vec<f64>, f64), SolveError> {
    if weights.iter().flatten().any(|w| !(w.is_finite() && *w >= 0.0)) {
        return Err(SolveError::InvalidArgument("time weights must be finite and non-negative".into()));
    }
    let problem = TimeProblem { weights: weights.to_vec(), frame };
    let mut x: Vec<f64> = start.iter().map(|t| t / frame).collect();
    problem.project(&mut x);
    let m = maximize_concave(&problem, &x, params)?;
    Ok((m.x.iter().map(|v| v * frame).collect(), m.value))
}
