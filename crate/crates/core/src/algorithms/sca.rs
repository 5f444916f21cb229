//! First-order (SCA) phase updates for a single slot vector.
//!
//! A gain `|h + v^H q|^2` is convex in `v`, so it is bounded below by its
//! tangent at `v_ref`: `kappa + 2 Re(w^H v)` with `a = h + v_ref^H q`,
//! `w = q conj(a)` and `kappa = -|a|^2 + 2 Re(conj(h) a)`. Substituting the
//! tangent turns every throughput term into the log of an affine function.

use std::f64::consts::LN_2;

use crate::convex_core::{maximize_concave, project_unit_disk, ConcaveProblem, SolverParams};
use crate::error::SolveError;
use crate::linalg::{dot_h, pack, unpack, C64};
use crate::scenario::CompositeChannels;

fn linearize(h: C64, q: &[C64], v_ref: &[C64]) -> (f64, Vec<C64>) {
    let a = h + dot_h(v_ref, q);
    let kappa = -a.norm_sqr() + 2.0 * (h.conj() * a).re;
    let w = q.iter().map(|qm| qm * a.conj()).collect();
    (kappa, w)
}

fn tangent(h: C64, q: &[C64], v: &[C64], v_ref: &[C64]) -> f64 {
    let a_ref = h + dot_h(v_ref, q);
    let x = h + dot_h(v, q);
    -a_ref.norm_sqr() + 2.0 * (x.conj() * a_ref).re
}

/// Tangent lower bound of the downlink gain of device `k` at `v_ref`.
pub fn sca_dl_bound(ch: &CompositeChannels, k: usize, v: &[C64], v_ref: &[C64]) -> f64 {
    tangent(ch.h_d[k], &ch.q[k], v, v_ref)
}

/// Tangent lower bound of the uplink gain of device `k` at `v_ref`.
pub fn sca_ul_bound(ch: &CompositeChannels, k: usize, v: &[C64], v_ref: &[C64]) -> f64 {
    tangent(ch.h_d_bar[k], &ch.q_bar[k], v, v_ref)
}

/// `weight * log2(base + 2 Re(s^H v))`.
#[derive(Debug, Clone)]
pub struct ScaTerm {
    pub weight: f64,
    pub base: f64,
    pub s: Vec<C64>,
}

/// Sum of [`ScaTerm`]s plus a constant, maximized over the unit disk.
#[derive(Debug, Clone, Default)]
pub struct ScaObjective {
    pub terms: Vec<ScaTerm>,
    pub constant: f64,
}

impl ScaObjective {
    pub fn value_at(&self, v: &[C64]) -> f64 {
        self.value(&pack(v))
    }
}

impl ConcaveProblem for ScaObjective {
    fn value(&self, x: &[f64]) -> f64 {
        let v = unpack(x);
        let mut total = self.constant;
        for t in &self.terms {
            let arg = t.base + 2.0 * dot_h(&t.s, &v).re;
            if !(arg > 0.0) {
                return f64::NEG_INFINITY;
            }
            total += t.weight * arg.log2();
        }
        total
    }

    fn gradient(&self, x: &[f64], grad: &mut [f64]) {
        let v = unpack(x);
        grad.iter_mut().for_each(|g| *g = 0.0);
        for t in &self.terms {
            let arg = t.base + 2.0 * dot_h(&t.s, &v).re;
            let c = 2.0 * t.weight / (arg * LN_2);
            for (m, s) in t.s.iter().enumerate() {
                grad[2 * m] += c * s.re;
                grad[2 * m + 1] += c * s.im;
            }
        }
    }

    fn project(&self, x: &mut [f64]) {
        let p = pack(&project_unit_disk(&unpack(x)));
        x.copy_from_slice(&p);
    }
}

/// Frozen quantities around one phase-block update. Device `k`'s objective
/// term is `tau[k+1] log2(1 + scale[k]/tau[k+1] * sum_i P_i tau_i pair[k][i])`.
#[derive(Debug, Clone)]
pub struct PhaseContext {
    pub tau: Vec<f64>,
    pub power: Vec<f64>,
    /// `eta_k / (sigma2 * d_k)` with `d_k` the normalized noise.
    pub scale: Vec<f64>,
    /// Product gains, `K x (K + 1)`; `pair[k][k + 1]` is unused.
    pub pair: Vec<Vec<f64>>,
    /// Uplink factor carried by device `k`'s downlink gain in `pair[k][i]`.
    pub ul: Vec<f64>,
    /// `sum_{i != k+1} P_i tau_i y_{k,i}` (downlink gains only).
    pub energy: Vec<f64>,
}

impl PhaseContext {
    fn devices(&self) -> usize {
        self.scale.len()
    }

    fn snr_numerator(&self, k: usize, skip: usize) -> f64 {
        (0..self.tau.len())
            .filter(|&i| i != k + 1 && i != skip)
            .map(|i| self.power[i] * self.tau[i] * self.pair[k][i])
            .sum()
    }

    /// Current (un-approximated) objective.
    pub fn objective(&self) -> f64 {
        (0..self.devices())
            .map(|k| {
                let t = self.tau[k + 1];
                if t <= 0.0 {
                    0.0
                } else {
                    t * (self.scale[k] / t * self.snr_numerator(k, usize::MAX)).ln_1p() / LN_2
                }
            })
            .sum()
    }

    /// SCA surrogate of the objective as a function of the vector used in
    /// `slot`, linearized at `v_ref`. For an uplink slot the owner's uplink
    /// gain is linearized as well.
    pub fn slot_objective(&self, ch: &CompositeChannels, slot: usize, v_ref: &[C64]) -> ScaObjective {
        let mut obj = ScaObjective::default();
        let pt_slot = self.power[slot] * self.tau[slot];
        for k in 0..self.devices() {
            let t = self.tau[k + 1];
            if t <= 0.0 {
                continue;
            }
            let c = self.scale[k] / t;
            if k + 1 == slot {
                let (kappa, w) = linearize(ch.h_d_bar[k], &ch.q_bar[k], v_ref);
                let e = self.energy[k];
                obj.terms.push(ScaTerm {
                    weight: t,
                    base: 1.0 + c * e * kappa,
                    s: w.into_iter().map(|x| x * (c * e)).collect(),
                });
            } else if pt_slot > 0.0 && self.ul[k] > 0.0 {
                let (kappa, w) = linearize(ch.h_d[k], &ch.q[k], v_ref);
                let other = self.snr_numerator(k, slot);
                let g = c * pt_slot * self.ul[k];
                obj.terms.push(ScaTerm {
                    weight: t,
                    base: 1.0 + c * other + g * kappa,
                    s: w.into_iter().map(|x| x * g).collect(),
                });
            } else {
                obj.constant += t * (c * self.snr_numerator(k, usize::MAX)).ln_1p() / LN_2;
            }
        }
        obj
    }
}

fn sca_rounds(
    ch: &CompositeChannels,
    ctx: &PhaseContext,
    slot: usize,
    v_ref: &[C64],
    rounds: usize,
    params: &SolverParams,
) -> Result<Vec<C64>, SolveError> {
    let mut v = project_unit_disk(v_ref);
    if v.is_empty() {
        return Ok(v);
    }
    for _ in 0..rounds.max(1) {
        let obj = ctx.slot_objective(ch, slot, &v);
        let m = maximize_concave(&obj, &pack(&v), params)?;
        v = unpack(&m.x);
    }
    Ok(v)
}

/// Updates the dedicated downlink vector (slot 0).
pub fn optimize_phase_dl(
    ch: &CompositeChannels,
    v0_ref: &[C64],
    ctx: &PhaseContext,
    rounds: usize,
    params: &SolverParams,
) -> Result<Vec<C64>, SolveError> {
    sca_rounds(ch, ctx, 0, v0_ref, rounds, params)
}

/// Updates the vector of uplink slot `k + 1`, which drives device `k`'s
/// uplink gain and every other device's harvesting in that slot.
pub fn optimize_phase_ul_slot(
    ch: &CompositeChannels,
    k: usize,
    vk_ref: &[C64],
    ctx: &PhaseContext,
    rounds: usize,
    params: &SolverParams,
) -> Result<Vec<C64>, SolveError> {
    sca_rounds(ch, ctx, k + 1, vk_ref, rounds, params)
}
