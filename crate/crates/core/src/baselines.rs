//! Reference schemes: direct links only, random reflection, equal slot
//! lengths, and half-duplex harvest-then-transmit.

use rand::{Rng, RngCore};

use crate::algorithms::{optimize, OptimizationResult, PhaseMode, PowerMode, SchedulingOrder, SolveSpec, TimeMode};
use crate::error::AlgoError;
use crate::linalg::phasor;
use crate::model::{PhasePlan, PlanKind};
use crate::scenario::{CompositeChannels, SystemConfig};

/// Optimizes time (and powers under imperfect cancellation) over the
/// direct links alone.
pub fn no_irs(
    ch: &CompositeChannels,
    config: &SystemConfig,
    order: SchedulingOrder,
) -> Result<OptimizationResult, AlgoError> {
    let spec = SolveSpec { order, tag: "no-irs".into(), ..SolveSpec::new(PlanKind::Fully, config) };
    optimize(&ch.without_irs(), config, &spec)
}

/// Uniform phases per element and per slot; only resources are optimized.
pub fn random_phase<R: RngCore + ?Sized>(
    ch: &CompositeChannels,
    config: &SystemConfig,
    order: SchedulingOrder,
    rng: &mut R,
) -> Result<OptimizationResult, AlgoError> {
    let m = ch.elements();
    let slots = (0..=ch.devices())
        .map(|_| (0..m).map(|_| phasor(rng.random::<f64>() * std::f64::consts::TAU)).collect())
        .collect();
    let spec = SolveSpec {
        order,
        phases: PhaseMode::Frozen(PhasePlan::fully(slots)),
        tag: "random-phase".into(),
        ..SolveSpec::new(PlanKind::Fully, config)
    };
    optimize(ch, config, &spec)
}

/// Every slot lasts `frame / (K + 1)`; phases (and powers) are optimized.
pub fn fixed_time(
    ch: &CompositeChannels,
    config: &SystemConfig,
    order: SchedulingOrder,
    kind: PlanKind,
) -> Result<OptimizationResult, AlgoError> {
    let spec =
        SolveSpec { order, time: TimeMode::Uniform, tag: "fixed-time".into(), ..SolveSpec::new(kind, config) };
    optimize(ch, config, &spec)
}

/// Half-duplex harvest-then-transmit: the HAP radiates `pmax` in slot 0
/// only and is silent while devices transmit, so there is no
/// self-interference.
pub fn hd_harvest_then_transmit(
    ch: &CompositeChannels,
    config: &SystemConfig,
    order: SchedulingOrder,
    kind: PlanKind,
) -> Result<OptimizationResult, AlgoError> {
    let spec = SolveSpec {
        order,
        power: PowerMode::DownlinkOnly,
        tag: format!("hd-{kind}"),
        ..SolveSpec::new(kind, config)
    };
    optimize(ch, config, &spec)
}
