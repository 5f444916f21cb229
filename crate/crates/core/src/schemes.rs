use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::algorithms::{
    ao_fully_dynamic_perfect, partial_beamforming_optimize, penalty_fully_dynamic, static_beamforming_optimize,
    OptimizationResult,
};
use crate::baselines::{fixed_time, hd_harvest_then_transmit, no_irs, random_phase};
use crate::error::AlgoError;
use crate::model::PlanKind;
use crate::scenario::{CompositeChannels, SystemConfig};

/// A named way of solving one channel realization.
pub trait Scheme: Send + Sync {
    fn name(&self) -> &str;
    fn description(&self) -> &str;
    /// `seed` feeds any randomness the scheme itself needs.
    fn solve(&self, ch: &CompositeChannels, config: &SystemConfig, seed: u64) -> Result<OptimizationResult, AlgoError>;
}

type SolveFn = fn(&CompositeChannels, &SystemConfig, u64) -> Result<OptimizationResult, AlgoError>;

struct Builtin {
    name: &'static str,
    description: &'static str,
    solve: SolveFn,
}

impl Scheme for Builtin {
    fn name(&self) -> &str {
        self.name
    }

    fn description(&self) -> &str {
        self.description
    }

    fn solve(&self, ch: &CompositeChannels, config: &SystemConfig, seed: u64) -> Result<OptimizationResult, AlgoError> {
        let mut res = (self.solve)(ch, config, seed)?;
        res.scheme = self.name.to_string();
        Ok(res)
    }
}

fn fully(ch: &CompositeChannels, config: &SystemConfig, _: u64) -> Result<OptimizationResult, AlgoError> {
    let order = config.algo().schedule;
    if config.sic().is_perfect() {
        ao_fully_dynamic_perfect(ch, config, order)
    } else {
        penalty_fully_dynamic(ch, config, order)
    }
}

const BUILTIN: &[Builtin] = &[
    Builtin { name: "fully", description: "per-slot reflection vectors", solve: fully },
    Builtin {
        name: "partial",
        description: "one downlink and one uplink reflection vector",
        solve: |ch, cfg, _| partial_beamforming_optimize(ch, cfg, cfg.algo().schedule),
    },
    Builtin {
        name: "static",
        description: "a single reflection vector for the whole frame",
        solve: |ch, cfg, _| static_beamforming_optimize(ch, cfg, cfg.algo().schedule),
    },
    Builtin {
        name: "no-irs",
        description: "direct links only",
        solve: |ch, cfg, _| no_irs(ch, cfg, cfg.algo().schedule),
    },
    Builtin {
        name: "random-phase",
        description: "uniform random phases per slot, resources optimized",
        solve: |ch, cfg, seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(7);
            random_phase(ch, cfg, cfg.algo().schedule, &mut rng)
        },
    },
    Builtin {
        name: "fixed-time",
        description: "equal slot lengths, per-slot vectors optimized",
        solve: |ch, cfg, _| fixed_time(ch, cfg, cfg.algo().schedule, PlanKind::Fully),
    },
    Builtin {
        name: "hd-fully",
        description: "half-duplex harvest-then-transmit, per-slot vectors",
        solve: |ch, cfg, _| hd_harvest_then_transmit(ch, cfg, cfg.algo().schedule, PlanKind::Fully),
    },
    Builtin {
        name: "hd-partial",
        description: "half-duplex harvest-then-transmit, downlink and uplink vectors",
        solve: |ch, cfg, _| hd_harvest_then_transmit(ch, cfg, cfg.algo().schedule, PlanKind::Partial),
    },
    Builtin {
        name: "hd-static",
        description: "half-duplex harvest-then-transmit, single vector",
        solve: |ch, cfg, _| hd_harvest_then_transmit(ch, cfg, cfg.algo().schedule, PlanKind::Static),
    },
];

#[derive(Default)]
pub struct SchemeRegistry {
    schemes: BTreeMap<String, Box<dyn Scheme>>,
}

impl SchemeRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_builtin() -> Self {
        let mut reg = Self::new();
        for b in BUILTIN {
            reg.register(Box::new(Builtin { name: b.name, description: b.description, solve: b.solve }));
        }
        reg
    }

    /// Replaces any scheme already registered under the same name.
    pub fn register(&mut self, scheme: Box<dyn Scheme>) {
        self.schemes.insert(scheme.name().to_string(), scheme);
    }

    pub fn get(&self, name: &str) -> Result<&dyn Scheme, AlgoError> {
        self.schemes.get(name).map(|s| s.as_ref()).ok_or_else(|| AlgoError::UnknownScheme(name.to_string()))
    }

    pub fn contains(&self, name: &str) -> bool {
        self.schemes.contains_key(name)
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.schemes.keys().map(String::as_str)
    }

    pub fn iter(&self) -> impl Iterator<Item = &dyn Scheme> {
        self.schemes.values().map(|s| s.as_ref())
    }
}
