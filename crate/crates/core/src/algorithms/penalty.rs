//! Blocks of the penalty method for imperfect cancellation: the auxiliary
//! noise variable `z_k`, which replaces `capacity_gap*(beta*gamma*P_k/sigma2 + 1)`
//! in the rate and is tied to it by `(1/2rho)(z_k - target_k)^2`.

use std::f64::consts::{LN_2, LOG2_E};

use crate::convex_core::{maximize_concave, project_box, ConcaveProblem, SolverParams};
use crate::error::SolveError;
use crate::model::SicModel;

/// Maximizer of the tangent surrogate
/// `tau (log2(1 + a/z_ref) - a log2(e) (z - z_ref) / (z_ref (z_ref + a))) - (z - target)^2 / (2 rho)`
/// with `target = capacity_gap * (beta*gamma*power/sigma2 + 1)`.
pub fn closed_form_z(
    z_ref: f64,
    a: f64,
    tau: f64,
    power: f64,
    rho: f64,
    sic: &SicModel,
    sigma2: f64,
) -> Result<f64, SolveError> {
    if !(z_ref > 0.0) {
        return Err(SolveError::InvalidArgument(format!("z reference must be positive, got {z_ref}")));
    }
    let target = sic.normalized_noise(power, sigma2);
    Ok(target - rho * a * tau * LOG2_E / (z_ref * (z_ref + a)))
}

/// The surrogate maximized by [`closed_form_z`].
pub fn z_surrogate(z: f64, z_ref: f64, a: f64, tau: f64, target: f64, rho: f64) -> f64 {
    tau * ((a / z_ref).ln_1p() / LN_2 - a * LOG2_E * (z - z_ref) / (z_ref * (z_ref + a)))
        - (z - target).powi(2) / (2.0 * rho)
}

/// `max_k |z_k - capacity_gap*(beta*gamma*P_{k+1}/sigma2 + 1)|`, with `power`
/// indexed by slot.
pub fn penalty_violation(z: &[f64], power: &[f64], sic: &SicModel, sigma2: f64) -> f64 {
    z.iter()
        .enumerate()
        .map(|(k, zk)| (zk - sic.normalized_noise(power[k + 1], sigma2)).abs())
        .fold(0.0, f64::max)
}

/// Power block over normalized powers `p = P / pmax` in `[0, 1]^(K+1)`:
/// `sum_k tau_k log2(1 + sum_{i != k+1} coef[k][i] p_i) - sum_k (z_k - gap - slope p_{k+1})^2 / (2 rho)`.
#[derive(Debug, Clone)]
pub struct PowerProblem {
    pub tau_own: Vec<f64>,
    pub coef: Vec<Vec<f64>>,
    pub z: Vec<f64>,
    pub rho: f64,
    pub gap: f64,
    /// `gap * beta * gamma * pmax / sigma2`.
    pub slope: f64,
}

impl PowerProblem {
    fn snr(&self, k: usize, p: &[f64]) -> f64 {
        self.coef[k].iter().zip(p).enumerate().filter(|(i, _)| *i != k + 1).map(|(_, (c, pi))| c * pi).sum()
    }
}

impl ConcaveProblem for PowerProblem {
    fn value(&self, p: &[f64]) -> f64 {
        let mut total = 0.0;
        for k in 0..self.z.len() {
            total += self.tau_own[k] * self.snr(k, p).ln_1p() / LN_2;
            let gap = self.z[k] - self.gap - self.slope * p[k + 1];
            total -= gap * gap / (2.0 * self.rho);
        }
        total
    }

    fn gradient(&self, p: &[f64], grad: &mut [f64]) {
        grad.iter_mut().for_each(|g| *g = 0.0);
        for k in 0..self.z.len() {
            let c = self.tau_own[k] / ((1.0 + self.snr(k, p)) * LN_2);
            for (i, coef) in self.coef[k].iter().enumerate() {
                if i != k + 1 {
                    grad[i] += c * coef;
                }
            }
            let gap = self.z[k] - self.gap - self.slope * p[k + 1];
            grad[k + 1] += gap * self.slope / self.rho;
        }
    }

    fn project(&self, p: &mut [f64]) {
        let q = project_box(p, 0.0, 1.0);
        p.copy_from_slice(&q);
    }
}

/// Solves the power block from `start` (watts). Returns `(P, value)`.
pub fn solve_power(
    problem: &PowerProblem,
    pmax: f64,
    start: &[f64],
    params: &SolverParams,
) -> Result<(Vec<f64>, f64), SolveError> {
    let mut x: Vec<f64> = start.iter().map(|p| p / pmax).collect();
    problem.project(&mut x);
    let m = maximize_concave(problem, &x, params)?;
    Ok((m.x.iter().map(|p| p * pmax).collect(), m.value))
}
