//! Projected-gradient ascent with Barzilai-Borwein trial steps and Armijo
//! backtracking along the projected direction (monotone spectral projected
//! gradient).

use super::SolverParams;
use crate::error::SolveError;

const STEP_MIN: f64 = 1e-12;
const STEP_MAX: f64 = 1e12;

/// A concave maximization problem over a closed convex set, expressed
/// over real coordinates. Complex variables are interleaved `(re, im)`
/// pairs and their gradient is the real gradient, i.e. twice the Wirtinger
/// derivative `df/dv*`, so that `f(x + d) ~ f(x) + <grad, d>`.
pub trait ConcaveProblem {
    fn value(&self, x: &[f64]) -> f64;
    fn gradient(&self, x: &[f64], grad: &mut [f64]);
    fn project(&self, x: &mut [f64]);
}

#[derive(Debug, Clone)]
pub struct Maximum {
    pub x: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Objective after every accepted step, starting with `f(start)`.
    pub trace: Vec<f64>,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn sup_norm(a: &[f64]) -> f64 {
    a.iter().fold(0.0, |m, v| m.max(v.abs()))
}

/// Maximizes a concave function from a feasible start. The returned value
/// is never below `f(start)`.
pub fn maximize_concave<P: ConcaveProblem + ?Sized>(
    problem: &P,
    start: &[f64],
    params: &SolverParams,
) -> Result<Maximum, SolveError> {
    params.validate()?;
    let n = start.len();
    let mut x = start.to_vec();
    let mut f = problem.value(&x);
    if !f.is_finite() {
        return Err(SolveError::NonFinite { iteration: 0, point: x });
    }
    let mut g = vec![0.0; n];
    problem.gradient(&x, &mut g);
    if g.iter().any(|v| !v.is_finite()) {
        return Err(SolveError::NonFinite { iteration: 0, point: x });
    }

    let mut step = params.step_init;
    let mut trace = vec![f];
    let mut converged = n == 0;
    let mut iterations = 0;
    let mut trial = vec![0.0; n];
    let mut cand = vec![0.0; n];
    let mut g_new = vec![0.0; n];

    while !converged && iterations < params.max_iters {
        for i in 0..n {
            trial[i] = x[i] + step * g[i];
        }
        problem.project(&mut trial);
        let d: Vec<f64> = trial.iter().zip(&x).map(|(t, xi)| t - xi).collect();
        // ||P(x + g) - x|| <= ||P(x + s g) - x|| / min(s, 1).
        let residual = sup_norm(&d) / step.min(1.0);
        let slope = dot(&g, &d);
        if residual < params.grad_tol || slope <= 0.0 {
            converged = true;
            break;
        }

        let mut t = 1.0;
        let mut f_new = f64::NAN;
        let mut accepted = false;
        while t >= 1e-14 {
            for i in 0..n {
                cand[i] = x[i] + t * d[i];
            }
            f_new = problem.value(&cand);
            if f_new.is_finite() && f_new >= f + params.armijo_c * t * slope {
                accepted = true;
                break;
            }
            t *= params.backtrack_factor;
        }
        if !accepted {
            // No ascent possible along the projected direction at machine
            // precision: numerically stationary.
            converged = true;
            break;
        }

        problem.gradient(&cand, &mut g_new);
        iterations += 1;
        if g_new.iter().any(|v| !v.is_finite()) {
            return Err(SolveError::NonFinite { iteration: iterations, point: cand });
        }
        let mut ss = 0.0;
        let mut sy = 0.0;
        for i in 0..n {
            let s = cand[i] - x[i];
            ss += s * s;
            sy += s * (g_new[i] - g[i]);
        }
        step = if sy < 0.0 { (ss / -sy).clamp(STEP_MIN, STEP_MAX) } else { STEP_MAX };
        std::mem::swap(&mut x, &mut cand);
        std::mem::swap(&mut g, &mut g_new);
        f = f_new;
        trace.push(f);
    }

    Ok(Maximum { x, value: f, iterations, converged, trace })
}

/// Central-difference gradient with step `h`.
pub fn finite_difference_gradient<P: ConcaveProblem + ?Sized>(problem: &P, x: &[f64], h: f64) -> Vec<f64> {
    let mut xp = x.to_vec();
    (0..x.len())
        .map(|i| {
            xp[i] = x[i] + h;
            let up = problem.value(&xp);
            xp[i] = x[i] - h;
            let down = problem.value(&xp);
            xp[i] = x[i];
            (up - down) / (2.0 * h)
        })
        .collect()
}

/// `max_i |grad_i - fd_i| / max(max_i |fd_i|, 1e-300)` with `h = 1e-6`.
pub fn gradient_error<P: ConcaveProblem + ?Sized>(problem: &P, x: &[f64]) -> f64 {
    let fd = finite_difference_gradient(problem, x, 1e-6);
    let mut g = vec![0.0; x.len()];
    problem.gradient(x, &mut g);
    let scale = sup_norm(&fd).max(1e-300);
    g.iter().zip(&fd).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max) / scale
}
