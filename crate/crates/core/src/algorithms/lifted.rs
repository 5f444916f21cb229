//! Rank-one lifting for plans whose vector enters both a downlink and an
//! uplink gain of the same device.
//!
//! With `v~ = [1; v]` and `V = v~ v~^H` (PSD, unit diagonal, rank one), the
//! gains become `y = h^H V h`, `y_bar = h_bar^H V h_bar` and their product
//! `y * y_bar = |h^H V h_bar|^2 = tr(V H_bar V H)`, where `h = [h_d; q]`
//! and `h_bar = [h_d_bar; q_bar]`. The product is convex in `V` and is
//! replaced by its tangent; rank one is enforced by penalizing
//! `tr(V) - ||V||_2` with the spectral norm linearized at the reference.

use std::f64::consts::LN_2;

use std::cell::RefCell;

use crate::convex_core::{hermitian_eig, maximize_concave, project_psd_unit_diag_warm, ConcaveProblem, SolverParams};
use crate::error::SolveError;
use crate::linalg::{dot_h, pack, unpack, CMatrix, C64};
use crate::scenario::CompositeChannels;

#[derive(Debug, Clone, PartialEq)]
pub struct LiftedChannel {
    pub h: Vec<C64>,
    pub h_bar: Vec<C64>,
}

impl LiftedChannel {
    pub fn new(ch: &CompositeChannels, k: usize) -> Self {
        let mut h = vec![ch.h_d[k]];
        h.extend_from_slice(&ch.q[k]);
        let mut h_bar = vec![ch.h_d_bar[k]];
        h_bar.extend_from_slice(&ch.q_bar[k]);
        Self { h, h_bar }
    }

    /// `h^H V h`.
    pub fn dl(&self, v: &CMatrix) -> f64 {
        dot_h(&self.h, &v.mul_vec(&self.h)).re
    }

    /// `h_bar^H V h_bar`.
    pub fn ul(&self, v: &CMatrix) -> f64 {
        dot_h(&self.h_bar, &v.mul_vec(&self.h_bar)).re
    }

    /// `h^H V h_bar`.
    pub fn cross_amplitude(&self, v: &CMatrix) -> C64 {
        dot_h(&self.h, &v.mul_vec(&self.h_bar))
    }

    /// `tr(V H_bar V H)`.
    pub fn cross(&self, v: &CMatrix) -> f64 {
        self.cross_amplitude(v).norm_sqr()
    }

    /// Tangent of [`Self::cross`] at `v_ref`.
    pub fn cross_bound(&self, v: &CMatrix, v_ref: &CMatrix) -> f64 {
        let r = self.cross_amplitude(v_ref);
        -r.norm_sqr() + 2.0 * (r.conj() * self.cross_amplitude(v)).re
    }
}

/// `(H_k, H_bar_k)` as explicit outer products.
pub fn lift_channel(ch: &CompositeChannels, k: usize) -> (CMatrix, CMatrix) {
    let l = LiftedChannel::new(ch, k);
    (CMatrix::outer(&l.h), CMatrix::outer(&l.h_bar))
}

/// `tr(V) - lambda_max(V)`; zero exactly for rank-one PSD matrices.
pub fn rank_metric(v: &CMatrix) -> f64 {
    v.trace().re - hermitian_eig(v).values[0]
}

/// One device's term `weight * log2(1 + scale * (lin * y_bar(V) + cross * y(V) y_bar(V)))`.
#[derive(Debug, Clone, PartialEq)]
pub struct DcTerm {
    pub device: usize,
    pub weight: f64,
    pub scale: f64,
    pub lin: f64,
    pub cross: f64,
}

impl DcTerm {
    pub fn exact(&self, ch: &LiftedChannel, v: &CMatrix) -> f64 {
        self.weight * (self.scale * (self.lin * ch.ul(v) + self.cross * ch.cross(v))).ln_1p() / LN_2
    }
}

/// Concave surrogate of the rank-penalized lifted objective around `V_ref`.
#[derive(Debug, Clone)]
pub struct LiftedObjective<'a> {
    chans: &'a [LiftedChannel],
    terms: &'a [DcTerm],
    refs: Vec<C64>,
    lambda: Vec<C64>,
    inv_two_rho: f64,
    n: usize,
    params: SolverParams,
    /// Multipliers of the last projection, reused as the next start.
    dual: RefCell<Option<Vec<f64>>>,
}

impl<'a> LiftedObjective<'a> {
    pub fn new(
        chans: &'a [LiftedChannel],
        terms: &'a [DcTerm],
        v_ref: &CMatrix,
        rho: f64,
        params: &SolverParams,
    ) -> Self {
        let refs = terms.iter().map(|t| chans[t.device].cross_amplitude(v_ref)).collect();
        let lambda = hermitian_eig(v_ref).principal().1;
        Self { chans, terms, refs, lambda, inv_two_rho: 0.5 / rho, n: v_ref.dim(), params: params.clone(), dual: RefCell::new(None) }
    }

    fn matrix(&self, x: &[f64]) -> CMatrix {
        CMatrix::from_row_major(unpack(x)).expect("square packing")
    }

    fn term_arg(&self, idx: usize, v: &CMatrix) -> (f64, C64) {
        let t = &self.terms[idx];
        let ch = &self.chans[t.device];
        let r = self.refs[idx];
        let amp = ch.cross_amplitude(v);
        let bound = -r.norm_sqr() + 2.0 * (r.conj() * amp).re;
        (1.0 + t.scale * (t.lin * ch.ul(v) + t.cross * bound), amp)
    }

    pub fn value_at(&self, v: &CMatrix) -> f64 {
        self.value(&pack(v.as_slice()))
    }
}

impl ConcaveProblem for LiftedObjective<'_> {
    fn value(&self, x: &[f64]) -> f64 {
        let v = self.matrix(x);
        let mut total = 0.0;
        for (idx, t) in self.terms.iter().enumerate() {
            let (arg, _) = self.term_arg(idx, &v);
            if !(arg > 0.0) {
                return f64::NEG_INFINITY;
            }
            total += t.weight * arg.log2();
        }
        let quad = dot_h(&self.lambda, &v.mul_vec(&self.lambda)).re;
        total + self.inv_two_rho * (quad - v.trace().re)
    }

    fn gradient(&self, x: &[f64], grad: &mut [f64]) {
        let v = self.matrix(x);
        let n = self.n;
        let mut g = CMatrix::zeros(n);
        for (idx, t) in self.terms.iter().enumerate() {
            let ch = &self.chans[t.device];
            let (arg, _) = self.term_arg(idx, &v);
            let c = t.weight * t.scale / (arg * LN_2);
            let a = c * t.lin;
            let b = c * t.cross * 2.0 * self.refs[idx];
            for i in 0..n {
                for j in 0..n {
                    g[(i, j)] += a * ch.h_bar[i] * ch.h_bar[j].conj() + b * ch.h[i] * ch.h_bar[j].conj();
                }
            }
        }
        for i in 0..n {
            for j in 0..n {
                g[(i, j)] += self.lambda[i] * self.lambda[j].conj() * self.inv_two_rho;
            }
            g[(i, i)] -= self.inv_two_rho;
        }
        grad.copy_from_slice(&pack(g.as_slice()));
    }

    fn project(&self, x: &mut [f64]) {
        let mut dual = self.dual.borrow_mut();
        let (p, y) = project_psd_unit_diag_warm(&self.matrix(x), dual.as_deref(), &self.params);
        *dual = Some(y);
        x.copy_from_slice(&pack(p.as_slice()));
    }
}

/// One DC round: maximizes the surrogate built at `v_ref` (which must be
/// PSD with unit diagonal) over the same set.
pub fn dc_static_phase(
    chans: &[LiftedChannel],
    terms: &[DcTerm],
    v_ref: &CMatrix,
    rho: f64,
    params: &SolverParams,
) -> Result<CMatrix, SolveError> {
    let obj = LiftedObjective::new(chans, terms, v_ref, rho, params);
    let m = maximize_concave(&obj, &pack(v_ref.as_slice()), params)?;
    Ok(obj.matrix(&m.x).hermitian_part())
}
