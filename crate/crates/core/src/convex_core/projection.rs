//! Euclidean projections onto the feasible sets of the subproblems.

use super::eig::{hermitian_eig, HermitianEigen};
use super::SolverParams;
use crate::linalg::{CMatrix, C64, ONE};

const DYKSTRA_TOL: f64 = 1e-12;

/// Projection onto `{x >= 0, sum(x) <= budget}`.
pub fn project_simplex(x: &[f64], budget: f64) -> Vec<f64> {
    let clipped: Vec<f64> = x.iter().map(|v| v.max(0.0)).collect();
    if clipped.iter().sum::<f64>() <= budget {
        return clipped;
    }
    let mut sorted = clipped.clone();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let mut cumsum = 0.0;
    let mut theta = 0.0;
    for (j, &u) in sorted.iter().enumerate() {
        cumsum += u;
        let t = (cumsum - budget) / (j + 1) as f64;
        if u - t > 0.0 {
            theta = t;
        }
    }
    clipped.iter().map(|v| (v - theta).max(0.0)).collect()
}

/// Projection onto `{x >= floor, sum(x) <= budget}`; requires
/// `floor * len <= budget`.
pub fn project_simplex_floor(x: &[f64], budget: f64, floor: f64) -> Vec<f64> {
    let shifted: Vec<f64> = x.iter().map(|v| v - floor).collect();
    let room = budget - floor * x.len() as f64;
    project_simplex(&shifted, room.max(0.0)).into_iter().map(|v| v + floor).collect()
}

/// Rescales entries with modulus above one back onto the unit circle.
pub fn project_unit_disk(v: &[C64]) -> Vec<C64> {
    v.iter()
        .map(|z| {
            let r = z.norm();
            if r > 1.0 {
                z / r
            } else {
                *z
            }
        })
        .collect()
}

pub fn project_box(x: &[f64], lo: f64, hi: f64) -> Vec<f64> {
    x.iter().map(|v| v.clamp(lo, hi)).collect()
}

/// Nearest positive-semidefinite matrix in Frobenius norm.
pub fn project_psd(h: &CMatrix) -> CMatrix {
    hermitian_eig(h).reconstruct_with(|l| l.max(0.0))
}



/// Projection onto `{V >= 0, diag(V) = 1}` by semismooth Newton on the
/// dual `min_y 0.5 ||(H + Diag y)_+||^2 - sum(y)`, whose minimizer gives
/// `V = (H + Diag y)_+`. The result is rescaled by its diagonal so it is
/// feasible to round-off even when Newton stops early.
pub fn project_psd_unit_diag(h: &CMatrix, params: &SolverParams) -> CMatrix {
    project_psd_unit_diag_warm(h, None, params).0
}

/// As [`project_psd_unit_diag`], starting the dual iteration from `y0`
/// (e.g. the multipliers of a nearby projection). Also returns the final
/// multipliers.
pub fn project_psd_unit_diag_warm(h: &CMatrix, y0: Option<&[f64]>, params: &SolverParams) -> (CMatrix, Vec<f64>) {
    let n = h.dim();
    let g = h.hermitian_part();
    let mut y: Vec<f64> = match y0 {
        Some(y0) if y0.len() == n => y0.to_vec(),
        _ => (0..n).map(|i| 1.0 - g[(i, i)].re).collect(),
    };
    let mut state = DualPoint::new(&g, &y);
    let tol = NEWTON_TOL * g.frobenius_norm().max(1.0);
    for _ in 0..params.projection_iters {
        let residual: Vec<f64> = state.diag.iter().map(|d| d - 1.0).collect();
        let norm = state.residual_norm();
        if norm < tol {
            break;
        }
        let mu = (1e-3 * norm).min(1e-6).max(1e-14);
        let d = conjugate_gradient(|v| state.jacobian_apply(v, mu), &residual.iter().map(|r| -r).collect::<Vec<_>>());
        let slope: f64 = residual.iter().zip(&d).map(|(r, di)| r * di).sum();
        let mut t = 1.0;
        let mut moved = false;
        loop {
            let trial: Vec<f64> = y.iter().zip(&d).map(|(yi, di)| yi + t * di).collect();
            let next = DualPoint::new(&g, &trial);
            // Near the solution round-off in theta hides the decrease; a
            // halved residual is accepted instead.
            if next.theta <= state.theta + 1e-4 * t * slope.min(0.0) || next.residual_norm() < 0.5 * norm {
                y = trial;
                state = next;
                moved = true;
                break;
            }
            t *= 0.5;
            if t < 1e-6 {
                break;
            }
        }
        if !moved {
            break;
        }
    }
    let x = state.primal();
    let scale: Vec<f64> = (0..n).map(|i| 1.0 / x[(i, i)].re.max(1e-300).sqrt()).collect();
    let mut out = CMatrix::from_fn(n, |i, j| x[(i, j)] * scale[i] * scale[j]);
    for i in 0..n {
        out[(i, i)] = ONE;
    }
    (out, y)
}

const NEWTON_TOL: f64 = 1e-9;

/// Eigen-data of `H + Diag y` shared by the dual value, gradient and the
/// generalized Jacobian.
struct DualPoint {
    eig: HermitianEigen,
    /// `diag((H + Diag y)_+)`.
    diag: Vec<f64>,
    theta: f64,
}

impl DualPoint {
    fn new(g: &CMatrix, y: &[f64]) -> Self {
        let mut m = g.clone();
        for (i, yi) in y.iter().enumerate() {
            m[(i, i)] += yi;
        }
        let eig = hermitian_eig(&m);
        let n = g.dim();
        let mut diag = vec![0.0; n];
        let mut theta = -y.iter().sum::<f64>();
        for (k, &l) in eig.values.iter().enumerate() {
            if l <= 0.0 {
                continue;
            }
            theta += 0.5 * l * l;
            for (i, d) in diag.iter_mut().enumerate() {
                *d += l * eig.vectors[(i, k)].norm_sqr();
            }
        }
        Self { eig, diag, theta }
    }

    fn residual_norm(&self) -> f64 {
        self.diag.iter().map(|d| (d - 1.0).powi(2)).sum::<f64>().sqrt()
    }

    fn primal(&self) -> CMatrix {
        self.eig.reconstruct_with(|l| l.max(0.0))
    }

    /// `(J + mu I) v` with `J v = diag(P (Omega o (P^H Diag(v) P)) P^H)`.
    /// `Omega` vanishes on the negative-negative block, so only the `r`
    /// positive eigenvectors enter: `O(n^2 r)`.
    fn jacobian_apply(&self, v: &[f64], mu: f64) -> Vec<f64> {
        let p = &self.eig.vectors;
        let lam = &self.eig.values;
        let n = v.len();
        let r = lam.iter().take_while(|l| **l > 0.0).count();
        let mut out: Vec<f64> = v.iter().map(|x| mu * x).collect();
        // rows[j][k] = c_k Omega_jk (P^H Diag(v) P)_jk for positive j, with
        // c_k = 2 on the mixed block (its transpose is folded in).
        let mut rows = vec![C64::new(0.0, 0.0); r * n];
        for j in 0..r {
            for k in 0..n {
                let mut s = C64::new(0.0, 0.0);
                for (m, vm) in v.iter().enumerate() {
                    s += p[(m, j)].conj() * p[(m, k)] * *vm;
                }
                let w = if k < r { 1.0 } else { 2.0 * omega(lam[j], lam[k]) };
                rows[j * n + k] = s * w;
            }
        }
        for (i, o) in out.iter_mut().enumerate() {
            let mut acc = 0.0;
            for j in 0..r {
                let mut row = C64::new(0.0, 0.0);
                for k in 0..n {
                    row += rows[j * n + k] * p[(i, k)].conj();
                }
                acc += (p[(i, j)] * row).re;
            }
            *o += acc;
        }
        out
    }
}

fn omega(a: f64, b: f64) -> f64 {
    match (a > 0.0, b > 0.0) {
        (true, true) => 1.0,
        (false, false) => 0.0,
        (true, false) => a / (a - b),
        (false, true) => b / (b - a),
    }
}

fn conjugate_gradient(apply: impl Fn(&[f64]) -> Vec<f64>, b: &[f64]) -> Vec<f64> {
    let n = b.len();
    let mut x = vec![0.0; n];
    let mut r = b.to_vec();
    let mut p = r.clone();
    let mut rr: f64 = r.iter().map(|v| v * v).sum();
    let stop = 1e-24_f64.max(1e-20 * rr);
    for _ in 0..2 * n + 10 {
        if rr <= stop {
            break;
        }
        let ap = apply(&p);
        let pap: f64 = p.iter().zip(&ap).map(|(a, b)| a * b).sum();
        if pap <= 0.0 {
            break;
        }
        let alpha = rr / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        let rr_new: f64 = r.iter().map(|v| v * v).sum();
        for i in 0..n {
            p[i] = r[i] + rr_new / rr * p[i];
        }
        rr = rr_new;
    }
    x
}

/// The same projection by Dykstra's alternating projections between the
/// PSD cone and the unit-diagonal affine set (the affine step needs no
/// correction term). Slow; kept as a reference.
pub fn dykstra_psd_unit_diag(h: &CMatrix, iters: usize) -> CMatrix {
    let n = h.dim();
    let mut y = h.hermitian_part();
    let mut correction = CMatrix::zeros(n);
    for _ in 0..iters.max(1) {
        let r = y.sub(&correction);
        let x = project_psd(&r);
        correction = x.sub(&r);
        let mut next = x;
        for i in 0..n {
            next[(i, i)] = ONE;
        }
        let change = next.sub(&y).frobenius_norm();
        y = next;
        if change < DYKSTRA_TOL {
            break;
        }
    }
    y
}
