//! Block-ascent optimizers for the three phase-plan configurations.
//!
//! All of them share one engine ([`optimize`]) that alternates between a
//! time block, an optional power/auxiliary block (imperfect cancellation)
//! and phase blocks. Fully dynamic plans update each slot vector by a
//! first-order (SCA) step; static and partially dynamic plans lift the
//! shared vector to a PSD matrix and use a rank-penalized DC step.

mod engine;
mod lifted;
mod penalty;
mod sca;
mod time;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use engine::{
    ao_fully_dynamic_perfect, optimize, partial_beamforming_optimize, penalty_fully_dynamic,
    static_beamforming_optimize, PhaseMode, PowerMode, SolveSpec, TimeMode,
};
pub use lifted::{dc_static_phase, lift_channel, rank_metric, DcTerm, LiftedChannel, LiftedObjective};
pub use penalty::{closed_form_z, penalty_violation, solve_power, z_surrogate, PowerProblem};
pub use sca::{
    optimize_phase_dl, optimize_phase_ul_slot, sca_dl_bound, sca_ul_bound, PhaseContext, ScaObjective,
    ScaTerm,
};
pub use time::{solve_time_allocation, TimeProblem};

use crate::linalg::{C64, ONE};
use crate::model::{PhasePlan, ResourceAllocation, SicModel};
use crate::scenario::CompositeChannels;

/// Smallest slot length used inside the solvers; snapped to zero in the
/// reported allocation.
pub const TAU_FLOOR: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PenaltyParams {
    pub rho0: f64,
    /// Shrink factor applied to the penalty coefficient each outer round.
    pub c: f64,
    pub eps_inner: f64,
    pub eps_outer: f64,
    pub max_outer: usize,
    pub max_inner: usize,
}

impl Default for PenaltyParams {
    fn default() -> Self {
        Self { rho0: 100.0, c: 0.85, eps_inner: 1e-2, eps_outer: 1e-5, max_outer: 300, max_inner: 50 }
    }
}

impl PenaltyParams {
    pub fn validate(&self) -> Result<(), String> {
        if !(self.rho0 > 0.0) {
            return Err("penalty.rho0 must be positive".into());
        }
        if !(self.c > 0.0 && self.c < 1.0) {
            return Err("penalty.c must lie in (0, 1)".into());
        }
        if !(self.eps_inner > 0.0 && self.eps_outer > 0.0) {
            return Err("penalty tolerances must be positive".into());
        }
        if self.max_outer == 0 || self.max_inner == 0 {
            return Err("penalty iteration caps must be positive".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PhaseInit {
    /// Align the reflected path with the direct link (strongest device for
    /// downlink vectors, the slot owner for uplink vectors).
    CoPhase,
    Random,
}

/// Uplink order. `IncreasingSnr` puts the device with the strongest direct
/// link first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SchedulingOrder {
    IncreasingSnr,
    DecreasingSnr,
}

impl FromStr for SchedulingOrder {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "increasing_snr" | "increasing" => Ok(Self::IncreasingSnr),
            "decreasing_snr" | "decreasing" => Ok(Self::DecreasingSnr),
            other => Err(format!("unknown scheduling order `{other}`")),
        }
    }
}

impl fmt::Display for SchedulingOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::IncreasingSnr => "increasing_snr",
            Self::DecreasingSnr => "decreasing_snr",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AlgoSettings {
    pub phase_init: PhaseInit,
    pub schedule: SchedulingOrder,
    /// Relative-increase threshold of the perfect-cancellation loop.
    pub ao_tol: f64,
    pub max_ao_iters: usize,
    /// Linearize-and-solve rounds per phase-block visit.
    pub sca_rounds: usize,
    /// Initial coefficient of the rank-one penalty; shrinks by `penalty.c`.
    pub dc_rho0: f64,
    pub rank_tol: f64,
    pub max_dc_rounds: usize,
    /// Iteration cap of the inner solver in each lifted step.
    pub lifted_max_iters: usize,
    /// Partially dynamic plans only: keep the downlink vector equal to the
    /// uplink vector, which reduces to the static problem.
    pub tie_dl_to_ul: bool,
}

impl Default for AlgoSettings {
    fn default() -> Self {
        Self {
            phase_init: PhaseInit::CoPhase,
            schedule: SchedulingOrder::IncreasingSnr,
            ao_tol: 1e-4,
            max_ao_iters: 100,
            sca_rounds: 1,
            dc_rho0: 100.0,
            rank_tol: 1e-4,
            max_dc_rounds: 300,
            lifted_max_iters: 60,
            tie_dl_to_ul: false,
        }
    }
}

/// Device permutation: entry `j` is the device that transmits in uplink
/// slot `j + 1`. Ties keep index order.
pub fn schedule_devices(ch: &CompositeChannels, order: SchedulingOrder) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..ch.devices()).collect();
    let gain = |k: usize| ch.h_d[k].norm_sqr();
    match order {
        SchedulingOrder::IncreasingSnr => idx.sort_by(|&a, &b| gain(b).total_cmp(&gain(a)).then(a.cmp(&b))),
        SchedulingOrder::DecreasingSnr => idx.sort_by(|&a, &b| gain(a).total_cmp(&gain(b)).then(a.cmp(&b))),
    }
    idx
}

/// Maps every entry to unit modulus. Entries below `1e-12` in modulus have
/// no meaningful phase and become `1`.
pub fn reconstruct_unit_modulus(plan: &PhasePlan) -> PhasePlan {
    let mut out = plan.clone();
    for v in out.vectors_mut() {
        for z in v.iter_mut() {
            *z = unit(*z);
        }
    }
    out.relaxed = false;
    out
}

pub(crate) fn unit(z: C64) -> C64 {
    let r = z.norm();
    if r < 1e-12 {
        ONE
    } else {
        z / r
    }
}

/// One recorded objective value. Values sharing `outer` were produced under
/// the same penalty coefficients and form a nondecreasing run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TracePoint {
    pub outer: usize,
    pub inner: usize,
    pub value: f64,
    pub xi: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizationResult {
    pub scheme: String,
    /// Indexed by original device label (`tau[k + 1]` is device `k`'s slot).
    pub alloc: ResourceAllocation,
    pub plan: PhasePlan,
    /// Uplink transmission order actually used.
    pub order: Vec<usize>,
    pub objective: f64,
    /// Objective before unit-modulus reconstruction and the final re-solve.
    pub relaxed_objective: f64,
    pub objective_trace: Vec<TracePoint>,
    pub violation_trace: Vec<f64>,
    pub iterations: usize,
    pub outer_iterations: usize,
    pub xi_final: Option<f64>,
    /// `tr(V) - ||V||_2` of the last lifted iterate, if any.
    pub rank_metric: Option<f64>,
    /// Cancellation model the objective was evaluated with.
    pub sic: SicModel,
}

impl OptimizationResult {
    /// Largest relative drop between consecutive trace values that share
    /// a penalty segment.
    pub fn worst_trace_drop(&self) -> f64 {
        self.objective_trace
            .windows(2)
            .filter(|w| w[0].outer == w[1].outer)
            .map(|w| (w[0].value - w[1].value) / w[0].value.abs().max(1e-12))
            .fold(0.0, f64::max)
    }

    /// Summary line plus per-slot rows: `slot,tau,power` then
    /// `vector,m,re,im` for every stored phase vector.
    pub fn write_csv<W: std::io::Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "scheme,objective,iterations,xi_final")?;
        let xi = self.xi_final.map(|x| format!("{x:e}")).unwrap_or_default();
        writeln!(w, "{},{:.12e},{},{xi}", self.scheme, self.objective, self.iterations)?;
        writeln!(w, "slot,tau,power")?;
        for (i, (t, p)) in self.alloc.tau.iter().zip(&self.alloc.power).enumerate() {
            writeln!(w, "{i},{t:.12e},{p:.12e}")?;
        }
        writeln!(w, "vector,m,re,im")?;
        for (s, v) in self.plan.vectors().iter().enumerate() {
            for (m, z) in v.iter().enumerate() {
                writeln!(w, "{s},{m},{:.12e},{:.12e}", z.re, z.im)?;
            }
        }
        Ok(())
    }
}
