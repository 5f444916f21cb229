//! The shared block-ascent driver.
//!
//! Devices are relabeled by the schedule so that scheduled device `j`
//! owns slot `j + 1`; results are mapped back to the original labels.
//! The recorded objective is the penalized one: rate terms (with `z_k` in
//! place of the interference-dependent noise when the penalty method is
//! active), minus the `z` penalty, minus the rank penalty of a lifted
//! iterate. It is nondecreasing within one penalty segment.

use std::f64::consts::LN_2;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::lifted::{dc_static_phase, rank_metric, DcTerm, LiftedChannel};
use super::penalty::{closed_form_z, penalty_violation, solve_power, PowerProblem};
use super::sca::{optimize_phase_dl, optimize_phase_ul_slot, PhaseContext};
use super::time::solve_time_allocation;
use super::{
    reconstruct_unit_modulus, schedule_devices, unit, AlgoSettings, OptimizationResult, PenaltyParams,
    PhaseInit, SchedulingOrder, TracePoint, TAU_FLOOR,
};
use crate::convex_core::{hermitian_eig, SolverParams};
use crate::error::AlgoError;
use crate::linalg::{phasor, CMatrix, C64, ONE};
use crate::model::{dl_gain, sum_throughput, ul_gain, PhasePlan, PlanKind, ResourceAllocation, SicModel};
use crate::scenario::{CompositeChannels, SystemConfig};

/// How the HAP transmit powers are handled.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PowerMode {
    /// Every slot at `pmax` (optimal under perfect cancellation).
    Full,
    /// Optimized jointly with the auxiliary noise variables.
    Penalty,
    /// Half-duplex: `pmax` in slot 0 and silent during uplink slots.
    DownlinkOnly,
}

impl PowerMode {
    /// `Full` for perfect cancellation, `Penalty` otherwise.
    pub fn for_sic(sic: &SicModel) -> Self {
        if sic.is_perfect() {
            PowerMode::Full
        } else {
            PowerMode::Penalty
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TimeMode {
    Optimize,
    /// Every slot gets `frame / (K + 1)`.
    Uniform,
}

#[derive(Debug, Clone, PartialEq)]
pub enum PhaseMode {
    Optimize,
    /// Keep the given plan (original device labels) untouched.
    Frozen(PhasePlan),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveSpec {
    pub kind: PlanKind,
    pub power: PowerMode,
    pub time: TimeMode,
    pub phases: PhaseMode,
    pub order: SchedulingOrder,
    /// Recorded in the result.
    pub tag: String,
}

impl SolveSpec {
    pub fn new(kind: PlanKind, config: &SystemConfig) -> Self {
        Self {
            kind,
            power: PowerMode::for_sic(&config.sic()),
            time: TimeMode::Optimize,
            phases: PhaseMode::Optimize,
            order: config.algo().schedule,
            tag: kind.to_string(),
        }
    }
}

/// Perfect-cancellation AO for per-slot vectors: powers fixed at `pmax`.
pub fn ao_fully_dynamic_perfect(
    ch: &CompositeChannels,
    config: &SystemConfig,
    order: SchedulingOrder,
) -> Result<OptimizationResult, AlgoError> {
    if !config.sic().is_perfect() {
        return Err(AlgoError::Precondition("perfect cancellation required (gamma = 0)".into()));
    }
    let spec = SolveSpec { order, power: PowerMode::Full, ..SolveSpec::new(PlanKind::Fully, config) };
    optimize(ch, config, &spec)
}

/// Two-layer penalty method for per-slot vectors under imperfect cancellation.
pub fn penalty_fully_dynamic(
    ch: &CompositeChannels,
    config: &SystemConfig,
    order: SchedulingOrder,
) -> Result<OptimizationResult, AlgoError> {
    if config.sic().is_perfect() {
        return Err(AlgoError::Precondition("imperfect cancellation required (gamma > 0)".into()));
    }
    let spec = SolveSpec { order, power: PowerMode::Penalty, ..SolveSpec::new(PlanKind::Fully, config) };
    optimize(ch, config, &spec)
}

pub fn static_beamforming_optimize(
    ch: &CompositeChannels,
    config: &SystemConfig,
    order: SchedulingOrder,
) -> Result<OptimizationResult, AlgoError> {
    let spec = SolveSpec { order, ..SolveSpec::new(PlanKind::Static, config) };
    optimize(ch, config, &spec)
}

pub fn partial_beamforming_optimize(
    ch: &CompositeChannels,
    config: &SystemConfig,
    order: SchedulingOrder,
) -> Result<OptimizationResult, AlgoError> {
    let spec = SolveSpec { order, ..SolveSpec::new(PlanKind::Partial, config) };
    optimize(ch, config, &spec)
}

/// Runs the block-ascent loop described by `spec` on channels `ch`
/// (original device labels).
pub fn optimize(
    ch: &CompositeChannels,
    config: &SystemConfig,
    spec: &SolveSpec,
) -> Result<OptimizationResult, AlgoError> {
    if ch.devices() != config.devices() {
        return Err(AlgoError::Precondition(format!(
            "channels describe {} devices, configuration {}",
            ch.devices(),
            config.devices()
        )));
    }
    if spec.kind == PlanKind::Partial && config.algo().tie_dl_to_ul && spec.phases == PhaseMode::Optimize {
        let mut s = spec.clone();
        s.kind = PlanKind::Static;
        let mut res = optimize(ch, config, &s)?;
        let v = res.plan.slot(0).to_vec();
        res.plan = PhasePlan::partial(v.clone(), v);
        return Ok(res);
    }
    let order = schedule_devices(ch, spec.order);
    let engine = Engine::new(ch, config, spec, &order);
    let mut res = engine.run()?;
    res.plan = res.plan.unscheduled(&order);
    let mut tau = res.alloc.tau.clone();
    let mut power = res.alloc.power.clone();
    for (j, &k) in order.iter().enumerate() {
        tau[k + 1] = res.alloc.tau[j + 1];
        power[k + 1] = res.alloc.power[j + 1];
    }
    res.alloc = ResourceAllocation { tau, power };
    res.order = order;
    res.scheme = spec.tag.clone();
    Ok(res)
}

/// Gains of the current iterate in the form every block consumes.
struct Gains {
    /// `pair[k][i]` multiplies `P_i tau_i` in device `k`'s SNR numerator.
    pair: Vec<Vec<f64>>,
    /// Uplink factor carried by the slot-0 (and, for per-slot vectors,
    /// every) downlink gain of device `k`.
    ul: Vec<f64>,
    /// Harvesting sum `sum_{i != k+1} P_i tau_i y_{k,i}`.
    energy: Vec<f64>,
}

#[derive(Clone)]
struct State {
    tau: Vec<f64>,
    power: Vec<f64>,
    z: Vec<f64>,
    /// Per-slot vectors (fully dynamic) or `[v_d]` (partial); empty for static.
    vectors: Vec<Vec<C64>>,
    /// Lifted shared vector (partial uplink / static).
    lifted: Option<CMatrix>,
    rho: f64,
    rho_dc: f64,
}

struct Engine<'a> {
    ch: CompositeChannels,
    lifted: Vec<LiftedChannel>,
    eta: Vec<f64>,
    sigma2: f64,
    frame: f64,
    pmax: f64,
    sic: SicModel,
    kind: PlanKind,
    spec: &'a SolveSpec,
    frozen: Option<PhasePlan>,
    seed: u64,
    solver: SolverParams,
    lifted_solver: SolverParams,
    pen: PenaltyParams,
    algo: AlgoSettings,
}

fn rel_increase(prev: f64, cur: f64) -> f64 {
    (cur - prev) / prev.abs().max(1e-12)
}

fn cophase(h: C64, q: &[C64]) -> Vec<C64> {
    q.iter().map(|qm| phasor(qm.arg() - h.arg())).collect()
}

fn lift_vector(v: &[C64]) -> CMatrix {
    let mut t = vec![ONE];
    t.extend_from_slice(v);
    CMatrix::outer(&t)
}

fn extract_vector(v: &CMatrix) -> Vec<C64> {
    let u = hermitian_eig(v).principal().1;
    let head = u[0];
    u[1..].iter().map(|x| unit(if head.norm() > 1e-12 { x / head } else { *x })).collect()
}

impl<'a> Engine<'a> {
    fn new(ch: &CompositeChannels, config: &SystemConfig, spec: &'a SolveSpec, order: &[usize]) -> Self {
        let ch = ch.reordered(order);
        let m = ch.elements();
        let frozen = match &spec.phases {
            PhaseMode::Frozen(p) => Some(reschedule(p, order)),
            PhaseMode::Optimize => None,
        };
        // Without reflecting elements every plan collapses to the direct links.
        let kind = if m == 0 { PlanKind::Fully } else { frozen.as_ref().map_or(spec.kind, PhasePlan::kind) };
        let lifted = if kind == PlanKind::Fully || frozen.is_some() {
            Vec::new()
        } else {
            (0..ch.devices()).map(|k| LiftedChannel::new(&ch, k)).collect()
        };
        let eta = order.iter().map(|&k| config.eta()[k]).collect();
        let solver = config.solver().clone();
        let lifted_solver = SolverParams { max_iters: config.algo().lifted_max_iters, ..solver.clone() };
        Self {
            ch,
            lifted,
            eta,
            sigma2: config.sigma2(),
            frame: config.frame(),
            pmax: config.pmax(),
            sic: config.sic(),
            kind,
            spec,
            frozen,
            seed: config.seed(),
            solver,
            lifted_solver,
            pen: config.penalty().clone(),
            algo: config.algo().clone(),
        }
    }

    fn k(&self) -> usize {
        self.ch.devices()
    }

    fn penalty(&self) -> bool {
        self.spec.power == PowerMode::Penalty
    }

    fn is_lifted(&self) -> bool {
        !self.lifted.is_empty()
    }

    fn init(&self) -> State {
        let k = self.k();
        let m = self.ch.elements();
        let mut alloc = ResourceAllocation::uniform(k, self.frame, self.pmax);
        if self.spec.power == PowerMode::DownlinkOnly {
            alloc.power.iter_mut().skip(1).for_each(|p| *p = 0.0);
        }
        let z = if self.penalty() {
            (0..k).map(|_| self.sic.normalized_noise(self.pmax, self.sigma2)).collect()
        } else {
            Vec::new()
        };

        let strongest = (0..k).max_by(|&a, &b| self.ch.h_d[a].norm_sqr().total_cmp(&self.ch.h_d[b].norm_sqr()).then(b.cmp(&a)));
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(0x5eed);
        let random = |rng: &mut ChaCha8Rng| -> Vec<C64> {
            (0..m).map(|_| phasor(rng.random::<f64>() * std::f64::consts::TAU)).collect()
        };
        let dl_init = match (self.algo.phase_init, strongest) {
            (PhaseInit::CoPhase, Some(s)) => cophase(self.ch.h_d[s], &self.ch.q[s]),
            _ => random(&mut rng),
        };

        let (vectors, lifted) = if let Some(plan) = &self.frozen {
            (plan.expand(k + 1), None)
        } else {
            match self.kind {
                PlanKind::Fully => {
                    let mut vs = vec![dl_init];
                    for j in 0..k {
                        vs.push(match self.algo.phase_init {
                            PhaseInit::CoPhase => cophase(self.ch.h_d_bar[j], &self.ch.q_bar[j]),
                            PhaseInit::Random => random(&mut rng),
                        });
                    }
                    (vs, None)
                }
                PlanKind::Partial => (vec![dl_init.clone()], Some(lift_vector(&dl_init))),
                PlanKind::Static => (Vec::new(), Some(lift_vector(&dl_init))),
            }
        };
        State {
            tau: alloc.tau,
            power: alloc.power,
            z,
            vectors,
            lifted,
            rho: self.pen.rho0,
            rho_dc: self.algo.dc_rho0,
        }
    }

    fn gains(&self, st: &State) -> Gains {
        let k = self.k();
        let slots = k + 1;
        let mut pair = vec![vec![0.0; slots]; k];
        let mut ul = vec![0.0; k];
        let mut energy = vec![0.0; k];
        match &st.lifted {
            None => {
                for d in 0..k {
                    let y: Vec<f64> = (0..slots).map(|i| dl_gain(&self.ch, d, &st.vectors[i])).collect();
                    let yb = ul_gain(&self.ch, d, &st.vectors[d + 1]);
                    ul[d] = yb;
                    for i in (0..slots).filter(|&i| i != d + 1) {
                        pair[d][i] = y[i] * yb;
                        energy[d] += st.power[i] * st.tau[i] * y[i];
                    }
                }
            }
            Some(v) => {
                for d in 0..k {
                    let l = &self.lifted[d];
                    let x = l.cross(v);
                    let u = l.ul(v);
                    let y = l.dl(v);
                    ul[d] = u;
                    for i in (0..slots).filter(|&i| i != d + 1) {
                        pair[d][i] = x;
                        energy[d] += st.power[i] * st.tau[i] * y;
                    }
                    if self.kind == PlanKind::Partial {
                        let y0 = dl_gain(&self.ch, d, &st.vectors[0]);
                        pair[d][0] = y0 * u;
                        energy[d] += st.power[0] * st.tau[0] * (y0 - y);
                    }
                }
            }
        }
        Gains { pair, ul, energy }
    }

    /// Normalized noise `d_k`: the auxiliary variable under the penalty
    /// method, otherwise the exact interference-plus-noise level.
    fn denominators(&self, st: &State) -> Vec<f64> {
        if self.penalty() {
            st.z.clone()
        } else {
            (0..self.k()).map(|d| self.sic.normalized_noise(st.power[d + 1], self.sigma2)).collect()
        }
    }

    /// `a_k = eta_k sum_{i != k+1} P_i tau_i pair[k][i] / (tau_{k+1} sigma2)`.
    fn snr_numerators(&self, st: &State, g: &Gains) -> Vec<f64> {
        (0..self.k())
            .map(|d| {
                let s: f64 = (0..=self.k())
                    .filter(|&i| i != d + 1)
                    .map(|i| st.power[i] * st.tau[i] * g.pair[d][i])
                    .sum();
                self.eta[d] * s / (st.tau[d + 1] * self.sigma2)
            })
            .collect()
    }

    fn rate(&self, st: &State, g: &Gains) -> f64 {
        let a = self.snr_numerators(st, g);
        let den = self.denominators(st);
        (0..self.k())
            .map(|d| {
                let t = st.tau[d + 1];
                if t <= 0.0 {
                    0.0
                } else {
                    t * (a[d] / den[d]).ln_1p() / LN_2
                }
            })
            .sum()
    }

    fn penalized(&self, st: &State) -> f64 {
        let g = self.gains(st);
        let mut value = self.rate(st, &g);
        if self.penalty() {
            let s: f64 = (0..self.k())
                .map(|d| (st.z[d] - self.sic.normalized_noise(st.power[d + 1], self.sigma2)).powi(2))
                .sum();
            value -= s / (2.0 * st.rho);
        }
        if let Some(v) = &st.lifted {
            value -= rank_metric(v) / (2.0 * st.rho_dc);
        }
        value
    }

    fn xi(&self, st: &State) -> Option<f64> {
        self.penalty().then(|| penalty_violation(&st.z, &st.power, &self.sic, self.sigma2))
    }

    fn time_block(&self, st: &mut State) -> Result<(), AlgoError> {
        if self.spec.time == TimeMode::Uniform {
            return Ok(());
        }
        let g = self.gains(st);
        let den = self.denominators(st);
        let weights: Vec<Vec<f64>> = (0..self.k())
            .map(|d| {
                (0..=self.k())
                    .map(|i| {
                        if i == d + 1 {
                            0.0
                        } else {
                            self.eta[d] * st.power[i] * g.pair[d][i] / (self.sigma2 * den[d])
                        }
                    })
                    .collect()
            })
            .collect();
        st.tau = solve_time_allocation(&weights, self.frame, &st.tau, &self.solver)?.0;
        Ok(())
    }

    fn power_block(&self, st: &mut State) -> Result<(), AlgoError> {
        if !self.penalty() {
            return Ok(());
        }
        let g = self.gains(st);
        let k = self.k();
        let coef = (0..k)
            .map(|d| {
                (0..=k)
                    .map(|i| {
                        if i == d + 1 {
                            0.0
                        } else {
                            self.eta[d] * self.pmax * st.tau[i] * g.pair[d][i]
                                / (self.sigma2 * st.z[d] * st.tau[d + 1])
                        }
                    })
                    .collect()
            })
            .collect();
        let problem = PowerProblem {
            tau_own: st.tau[1..].to_vec(),
            coef,
            z: st.z.clone(),
            rho: st.rho,
            gap: self.sic.capacity_gap,
            slope: self.sic.capacity_gap * self.sic.beta * self.sic.gamma * self.pmax / self.sigma2,
        };
        st.power = solve_power(&problem, self.pmax, &st.power, &self.solver)?.0;
        Ok(())
    }

    fn z_block(&self, st: &mut State) -> Result<(), AlgoError> {
        if !self.penalty() {
            return Ok(());
        }
        let g = self.gains(st);
        let a = self.snr_numerators(st, &g);
        for d in 0..self.k() {
            let z = closed_form_z(st.z[d], a[d], st.tau[d + 1], st.power[d + 1], st.rho, &self.sic, self.sigma2)?;
            // Noise can never drop below the interference-free level.
            st.z[d] = z.max(self.sic.capacity_gap);
        }
        Ok(())
    }

    fn phase_context(&self, st: &State) -> PhaseContext {
        let g = self.gains(st);
        let den = self.denominators(st);
        PhaseContext {
            tau: st.tau.clone(),
            power: st.power.clone(),
            scale: (0..self.k()).map(|d| self.eta[d] / (self.sigma2 * den[d])).collect(),
            pair: g.pair,
            ul: g.ul,
            energy: g.energy,
        }
    }

    fn phase_block(&self, st: &mut State) -> Result<(), AlgoError> {
        if self.frozen.is_some() || self.ch.elements() == 0 {
            return Ok(());
        }
        let rounds = self.algo.sca_rounds;
        match self.kind {
            PlanKind::Fully => {
                for slot in 0..=self.k() {
                    let ctx = self.phase_context(st);
                    st.vectors[slot] = if slot == 0 {
                        optimize_phase_dl(&self.ch, &st.vectors[0], &ctx, rounds, &self.solver)?
                    } else {
                        optimize_phase_ul_slot(&self.ch, slot - 1, &st.vectors[slot], &ctx, rounds, &self.solver)?
                    };
                }
            }
            PlanKind::Partial => {
                let ctx = self.phase_context(st);
                st.vectors[0] = optimize_phase_dl(&self.ch, &st.vectors[0], &ctx, rounds, &self.solver)?;
                self.lifted_step(st)?;
            }
            PlanKind::Static => self.lifted_step(st)?,
        }
        Ok(())
    }

    fn lifted_step(&self, st: &mut State) -> Result<(), AlgoError> {
        let den = self.denominators(st);
        let k = self.k();
        let terms: Vec<DcTerm> = (0..k)
            .filter(|&d| st.tau[d + 1] > 0.0)
            .map(|d| {
                let first = if self.kind == PlanKind::Partial { 1 } else { 0 };
                let cross: f64 = (first..=k).filter(|&i| i != d + 1).map(|i| st.power[i] * st.tau[i]).sum();
                let lin = if self.kind == PlanKind::Partial {
                    st.power[0] * st.tau[0] * dl_gain(&self.ch, d, &st.vectors[0])
                } else {
                    0.0
                };
                DcTerm {
                    device: d,
                    weight: st.tau[d + 1],
                    scale: self.eta[d] / (self.sigma2 * den[d] * st.tau[d + 1]),
                    lin,
                    cross,
                }
            })
            .collect();
        let v_ref = st.lifted.as_ref().expect("lifted iterate");
        let mut next = v_ref.clone();
        for _ in 0..self.algo.sca_rounds.max(1) {
            next = dc_static_phase(&self.lifted, &terms, &next, st.rho_dc, &self.lifted_solver)?;
        }
        st.lifted = Some(next);
        Ok(())
    }

    fn sweep(&self, st: &mut State) -> Result<(), AlgoError> {
        self.time_block(st)?;
        self.power_block(st)?;
        self.z_block(st)?;
        self.phase_block(st)?;
        Ok(())
    }

    fn run(&self) -> Result<OptimizationResult, AlgoError> {
        let mut st = self.init();
        let mut trace = Vec::new();
        let mut violations = Vec::new();
        let mut sweeps = 0;
        let lifted = self.is_lifted();
        let (inner_tol, max_inner, max_outer) = if lifted {
            (self.algo.ao_tol.min(self.pen.eps_inner), 1, self.algo.max_dc_rounds)
        } else if self.penalty() {
            (self.pen.eps_inner, self.pen.max_inner, self.pen.max_outer)
        } else {
            (self.algo.ao_tol, self.algo.max_ao_iters, 1)
        };

        let mut outer = 0;
        loop {
            let start = self.penalized(&st);
            if !start.is_finite() {
                return Err(AlgoError::Diverged { outer });
            }
            trace.push(TracePoint { outer, inner: 0, value: start, xi: self.xi(&st) });
            let mut prev = start;
            let mut round_gain = 0.0;
            for inner in 1..=max_inner {
                self.sweep(&mut st)?;
                sweeps += 1;
                let cur = self.penalized(&st);
                if !cur.is_finite() {
                    return Err(AlgoError::Diverged { outer });
                }
                trace.push(TracePoint { outer, inner, value: cur, xi: self.xi(&st) });
                round_gain = rel_increase(prev, cur);
                prev = cur;
                if round_gain < inner_tol {
                    break;
                }
            }
            let xi = self.xi(&st);
            if let Some(x) = xi {
                violations.push(x);
            }
            outer += 1;
            let feasible = xi.is_none_or(|x| x < self.pen.eps_outer);
            let done = if lifted {
                let rank = st.lifted.as_ref().map_or(0.0, rank_metric);
                (feasible && rank < self.algo.rank_tol && round_gain.abs() < inner_tol) || outer >= max_outer
            } else {
                feasible || outer >= max_outer
            };
            if done {
                break;
            }
            st.rho *= self.pen.c;
            st.rho_dc *= self.pen.c;
        }

        let relaxed_objective = self.rate(&st, &self.gains(&st));
        let rank = st.lifted.as_ref().map(rank_metric);
        let plan = self.extract_plan(&st);
        let mut fin = State {
            vectors: plan.expand(self.k() + 1),
            lifted: None,
            ..st
        };
        let vector_engine = Engine { lifted: Vec::new(), kind: PlanKind::Fully, ..self.shallow() };
        vector_engine.time_block(&mut fin)?;
        vector_engine.power_block(&mut fin)?;
        vector_engine.z_block(&mut fin)?;

        for t in fin.tau.iter_mut() {
            if *t <= 2.0 * TAU_FLOOR {
                *t = 0.0;
            }
        }
        let alloc = ResourceAllocation { tau: fin.tau.clone(), power: fin.power.clone() };
        let objective = sum_throughput(&self.ch, &alloc, &plan, &self.eta, &self.sic, self.sigma2);
        Ok(OptimizationResult {
            scheme: String::new(),
            alloc,
            plan,
            order: Vec::new(),
            objective,
            relaxed_objective,
            objective_trace: trace,
            xi_final: vector_engine.xi(&fin),
            violation_trace: violations,
            iterations: sweeps,
            outer_iterations: outer,
            rank_metric: rank,
            sic: self.sic,
        })
    }

    fn shallow(&self) -> Engine<'a> {
        Engine {
            ch: self.ch.clone(),
            lifted: self.lifted.clone(),
            eta: self.eta.clone(),
            sigma2: self.sigma2,
            frame: self.frame,
            pmax: self.pmax,
            sic: self.sic,
            kind: self.kind,
            spec: self.spec,
            frozen: self.frozen.clone(),
            seed: self.seed,
            solver: self.solver.clone(),
            lifted_solver: self.lifted_solver.clone(),
            pen: self.pen.clone(),
            algo: self.algo.clone(),
        }
    }

    /// Unit-modulus plan (scheduled labels) from the final iterate.
    fn extract_plan(&self, st: &State) -> PhasePlan {
        if let Some(p) = &self.frozen {
            return p.clone();
        }
        let relaxed = match self.kind {
            PlanKind::Fully => PhasePlan { relaxed: true, ..PhasePlan::fully(st.vectors.clone()) },
            PlanKind::Partial => PhasePlan {
                relaxed: true,
                ..PhasePlan::partial(st.vectors[0].clone(), extract_vector(st.lifted.as_ref().expect("lifted")))
            },
            PlanKind::Static => {
                PhasePlan { relaxed: true, ..PhasePlan::fixed(extract_vector(st.lifted.as_ref().expect("lifted"))) }
            }
        };
        reconstruct_unit_modulus(&relaxed)
    }
}

/// Relabels a plan given in original device labels into schedule order.
fn reschedule(plan: &PhasePlan, order: &[usize]) -> PhasePlan {
    match plan.kind() {
        PlanKind::Fully => {
            let mut slots = vec![plan.slot(0).to_vec()];
            slots.extend(order.iter().map(|&k| plan.slot(k + 1).to_vec()));
            PhasePlan { relaxed: plan.relaxed, ..PhasePlan::fully(slots) }
        }
        _ => plan.clone(),
    }
}
