//! Energy, power and throughput evaluation for a given allocation, phase
//! plan and self-interference model.
//!
//! Slot 0 is the dedicated downlink slot. Device `k` (0-based) transmits
//! in slot `k + 1` and harvests in every other slot.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::ModelError;
use crate::linalg::{dot_h, C64, ONE};
use crate::scenario::CompositeChannels;

/// Slot durations (seconds) and HAP transmit powers (watts), both of
/// length `K + 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResourceAllocation {
    pub tau: Vec<f64>,
    pub power: Vec<f64>,
}

impl ResourceAllocation {
    pub fn uniform(devices: usize, frame: f64, pmax: f64) -> Self {
        let slots = devices + 1;
        Self { tau: vec![frame / slots as f64; slots], power: vec![pmax; slots] }
    }

    pub fn slots(&self) -> usize {
        self.tau.len()
    }

    pub fn check_feasible(&self, frame: f64, pmax: f64) -> Result<(), ModelError> {
        if self.tau.len() != self.power.len() {
            return Err(ModelError::Dimension("tau and power lengths differ".into()));
        }
        let tol = 1e-9;
        if self.tau.iter().any(|t| !(*t >= -tol)) || self.tau.iter().sum::<f64>() > frame + tol {
            return Err(ModelError::Dimension("time allocation outside the frame".into()));
        }
        if self.power.iter().any(|p| !(*p >= -tol && *p <= pmax * (1.0 + tol))) {
            return Err(ModelError::Dimension("power outside [0, pmax]".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PlanKind {
    Fully,
    Partial,
    Static,
}

impl fmt::Display for PlanKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PlanKind::Fully => "fully",
            PlanKind::Partial => "partial",
            PlanKind::Static => "static",
        })
    }
}

impl FromStr for PlanKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "fully" => Ok(PlanKind::Fully),
            "partial" => Ok(PlanKind::Partial),
            "static" => Ok(PlanKind::Static),
            other => Err(format!("unknown plan kind `{other}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PhaseConfig {
    /// One vector per slot `0..=K`.
    Fully(Vec<Vec<C64>>),
    Partial { down: Vec<C64>, up: Vec<C64> },
    Static(Vec<C64>),
}

/// IRS reflection coefficients. Entries are unit-modulus unless `relaxed`,
/// in which case they lie in the closed unit disk.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhasePlan {
    pub config: PhaseConfig,
    pub relaxed: bool,
}

impl PhasePlan {
    pub fn fully(slots: Vec<Vec<C64>>) -> Self {
        Self { config: PhaseConfig::Fully(slots), relaxed: false }
    }

    pub fn partial(down: Vec<C64>, up: Vec<C64>) -> Self {
        Self { config: PhaseConfig::Partial { down, up }, relaxed: false }
    }

    pub fn fixed(v: Vec<C64>) -> Self {
        Self { config: PhaseConfig::Static(v), relaxed: false }
    }

    /// All-ones plan of the given kind.
    pub fn identity(kind: PlanKind, devices: usize, elements: usize) -> Self {
        let ones = vec![ONE; elements];
        match kind {
            PlanKind::Fully => Self::fully(vec![ones; devices + 1]),
            PlanKind::Partial => Self::partial(ones.clone(), ones),
            PlanKind::Static => Self::fixed(ones),
        }
    }

    pub fn kind(&self) -> PlanKind {
        match self.config {
            PhaseConfig::Fully(_) => PlanKind::Fully,
            PhaseConfig::Partial { .. } => PlanKind::Partial,
            PhaseConfig::Static(_) => PlanKind::Static,
        }
    }

    /// Vector in effect during `slot`.
    pub fn slot(&self, slot: usize) -> &[C64] {
        match &self.config {
            PhaseConfig::Fully(v) => &v[slot],
            PhaseConfig::Partial { down, up } => {
                if slot == 0 {
                    down
                } else {
                    up
                }
            }
            PhaseConfig::Static(v) => v,
        }
    }

    /// Expands to one vector per slot.
    pub fn expand(&self, slots: usize) -> Vec<Vec<C64>> {
        (0..slots).map(|i| self.slot(i).to_vec()).collect()
    }

    /// Distinct stored vectors, in storage order.
    pub fn vectors(&self) -> Vec<&[C64]> {
        match &self.config {
            PhaseConfig::Fully(v) => v.iter().map(Vec::as_slice).collect(),
            PhaseConfig::Partial { down, up } => vec![down, up],
            PhaseConfig::Static(v) => vec![v],
        }
    }

    pub fn vectors_mut(&mut self) -> Vec<&mut Vec<C64>> {
        match &mut self.config {
            PhaseConfig::Fully(v) => v.iter_mut().collect(),
            PhaseConfig::Partial { down, up } => vec![down, up],
            PhaseConfig::Static(v) => vec![v],
        }
    }

    /// Checks the modulus invariant for the current `relaxed` flag.
    pub fn is_valid(&self) -> bool {
        let tol = 1e-9;
        self.vectors().iter().flat_map(|v| v.iter()).all(|z| {
            let r = z.norm();
            if self.relaxed {
                r <= 1.0 + tol
            } else {
                (r - 1.0).abs() <= tol
            }
        })
    }

    /// Plan with the slots permuted back: `order[j]` is the original index
    /// of scheduled device `j`, so slot `j + 1` moves to `order[j] + 1`.
    pub fn unscheduled(&self, order: &[usize]) -> Self {
        match &self.config {
            PhaseConfig::Fully(v) => {
                let mut out = v.clone();
                for (j, &k) in order.iter().enumerate() {
                    out[k + 1] = v[j + 1].clone();
                }
                Self { config: PhaseConfig::Fully(out), relaxed: self.relaxed }
            }
            _ => self.clone(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SicMode {
    Perfect,
    Imperfect,
}

/// Residual self-interference after cancellation. The receive noise in
/// slot `k` is `capacity_gap * (beta * gamma * P_k + sigma2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SicModel {
    pub mode: SicMode,
    pub gamma: f64,
    pub beta: f64,
    pub capacity_gap: f64,
}

impl SicModel {
    pub fn perfect(capacity_gap: f64, beta: f64) -> Self {
        Self { mode: SicMode::Perfect, gamma: 0.0, beta, capacity_gap }
    }

    pub fn imperfect(gamma: f64, beta: f64, capacity_gap: f64) -> Self {
        Self { mode: SicMode::Imperfect, gamma, beta, capacity_gap }
    }

    pub fn is_perfect(&self) -> bool {
        self.mode == SicMode::Perfect || self.gamma == 0.0
    }

    /// Gap-scaled noise power in a slot where the HAP transmits `power`.
    pub fn noise(&self, power: f64, sigma2: f64) -> f64 {
        self.capacity_gap * (self.beta * self.gamma * power + sigma2)
    }

    /// Noise normalized by `sigma2`: `capacity_gap * (beta*gamma*P/sigma2 + 1)`.
    pub fn normalized_noise(&self, power: f64, sigma2: f64) -> f64 {
        self.capacity_gap * (self.beta * self.gamma * power / sigma2 + 1.0)
    }
}

/// `|h_d,k + v^H q_k|^2`.
pub fn dl_gain(ch: &CompositeChannels, k: usize, v: &[C64]) -> f64 {
    (ch.h_d[k] + reflected(v, &ch.q[k])).norm_sqr()
}

/// `|h_d_bar,k + v^H q_bar_k|^2`.
pub fn ul_gain(ch: &CompositeChannels, k: usize, v: &[C64]) -> f64 {
    (ch.h_d_bar[k] + reflected(v, &ch.q_bar[k])).norm_sqr()
}

fn reflected(v: &[C64], q: &[C64]) -> C64 {
    if q.is_empty() {
        C64::new(0.0, 0.0)
    } else {
        dot_h(v, q)
    }
}

/// Energy harvested by device `k` over every slot except its own.
pub fn harvested_energy(
    ch: &CompositeChannels,
    k: usize,
    alloc: &ResourceAllocation,
    plan: &PhasePlan,
    eta_k: f64,
) -> f64 {
    let own = k + 1;
    let sum: f64 = (0..alloc.slots())
        .filter(|&i| i != own)
        .map(|i| {
            let pt = alloc.power[i] * alloc.tau[i];
            if pt == 0.0 {
                0.0
            } else {
                pt * dl_gain(ch, k, plan.slot(i))
            }
        })
        .sum();
    eta_k * sum
}

/// Average transmit power `E_k / tau_k` of device `k`.
pub fn device_power(
    ch: &CompositeChannels,
    k: usize,
    alloc: &ResourceAllocation,
    plan: &PhasePlan,
    eta_k: f64,
) -> Result<f64, ModelError> {
    let energy = harvested_energy(ch, k, alloc, plan, eta_k);
    let tau = alloc.tau[k + 1];
    if tau > 0.0 {
        Ok(energy / tau)
    } else if energy == 0.0 {
        Ok(0.0)
    } else {
        Err(ModelError::DegenerateSlot { device: k, energy })
    }
}

fn rate(tau: f64, energy: f64, ul: f64, noise: f64) -> f64 {
    if tau <= 0.0 {
        return 0.0;
    }
    tau * (energy * ul / (noise * tau)).ln_1p() / std::f64::consts::LN_2
}

/// Uplink throughput of device `k` in bits/Hz; zero for an empty slot.
pub fn throughput(
    ch: &CompositeChannels,
    k: usize,
    alloc: &ResourceAllocation,
    plan: &PhasePlan,
    eta_k: f64,
    sic: &SicModel,
    sigma2: f64,
) -> f64 {
    let slot = k + 1;
    let tau = alloc.tau[slot];
    if tau <= 0.0 {
        return 0.0;
    }
    let energy = harvested_energy(ch, k, alloc, plan, eta_k);
    let ul = ul_gain(ch, k, plan.slot(slot));
    rate(tau, energy, ul, sic.noise(alloc.power[slot], sigma2))
}

pub fn sum_throughput(
    ch: &CompositeChannels,
    alloc: &ResourceAllocation,
    plan: &PhasePlan,
    eta: &[f64],
    sic: &SicModel,
    sigma2: f64,
) -> f64 {
    (0..ch.devices()).map(|k| throughput(ch, k, alloc, plan, eta[k], sic, sigma2)).sum()
}

/// Per-device breakdown of one evaluation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Evaluation {
    pub energy: Vec<f64>,
    /// `None` marks a degenerate slot (zero length, positive energy).
    pub power: Vec<Option<f64>>,
    pub rate: Vec<f64>,
}

impl Evaluation {
    pub fn total(&self) -> f64 {
        self.rate.iter().sum()
    }

    /// Rows `k,E_k,p_k,R_k`; a degenerate power is written as an empty field.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "k,energy_j,power_w,rate_bits_per_hz")?;
        for k in 0..self.rate.len() {
            let p = self.power[k].map(|p| format!("{p:e}")).unwrap_or_default();
            writeln!(w, "{k},{:e},{p},{:e}", self.energy[k], self.rate[k])?;
        }
        Ok(())
    }
}

pub fn evaluate(
    ch: &CompositeChannels,
    alloc: &ResourceAllocation,
    plan: &PhasePlan,
    eta: &[f64],
    sic: &SicModel,
    sigma2: f64,
) -> Evaluation {
    let n = ch.devices();
    Evaluation {
        energy: (0..n).map(|k| harvested_energy(ch, k, alloc, plan, eta[k])).collect(),
        power: (0..n).map(|k| device_power(ch, k, alloc, plan, eta[k]).ok()).collect(),
        rate: (0..n).map(|k| throughput(ch, k, alloc, plan, eta[k], sic, sigma2)).collect(),
    }
}
