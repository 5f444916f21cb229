//! Independent oracles shared by the integration tests. Nothing here calls
//! into the optimizers; objective values are recomputed from the channel
//! coefficients directly.

#![allow(dead_code)]

use std::f64::consts::TAU;

use fdwpcn::linalg::{phasor, C64};
use fdwpcn::scenario::{CompositeChannels, SystemConfig};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

/// Amplitude that puts `eta * pmax * a^4 / (gap * sigma2)` near 100 under
/// the default scenario, so direct and reflected paths are comparable.
pub const TOY_SCALE: f64 = 6e-3;

pub fn config(devices: usize, perfect: bool) -> SystemConfig {
    SystemConfig::default()
        .modified(|f| {
            f.devices = devices;
            f.perfect_sic = perfect;
        })
        .unwrap()
}

fn cn(rng: &mut ChaCha8Rng, scale: f64) -> C64 {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    C64::new(re, im) * (scale * std::f64::consts::FRAC_1_SQRT_2)
}

/// I.i.d. `CN(0, scale^2)` direct and composite reflected coefficients.
pub fn toy_channels(seed: u64, devices: usize, elements: usize, scale: f64) -> CompositeChannels {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let vecs = |rng: &mut ChaCha8Rng| -> Vec<Vec<C64>> {
        (0..devices).map(|_| (0..elements).map(|_| cn(rng, scale)).collect()).collect()
    };
    let q = vecs(&mut rng);
    let q_bar = vecs(&mut rng);
    let h_d = (0..devices).map(|_| cn(&mut rng, scale)).collect();
    let h_d_bar = (0..devices).map(|_| cn(&mut rng, scale)).collect();
    CompositeChannels { q, q_bar, h_d, h_d_bar }
}

fn gain(h: C64, q: &[C64], v: &[C64]) -> f64 {
    let r: C64 = v.iter().zip(q).map(|(a, b)| a.conj() * b).sum();
    (h + r).norm_sqr()
}

pub fn dl(ch: &CompositeChannels, k: usize, v: &[C64]) -> f64 {
    gain(ch.h_d[k], &ch.q[k], v)
}

pub fn ul(ch: &CompositeChannels, k: usize, v: &[C64]) -> f64 {
    gain(ch.h_d_bar[k], &ch.q_bar[k], v)
}

/// `eta_k * pmax / (gap * (beta * gamma * p_ul + sigma2))` for each device.
pub fn snr_constants(cfg: &SystemConfig, p_ul: f64) -> Vec<f64> {
    let noise = cfg.sic().noise(p_ul, cfg.sigma2());
    cfg.eta().iter().map(|e| e * cfg.pmax() / noise).collect()
}

/// Every vector of `elements` phases drawn from a `points`-level grid.
pub fn phase_grid(elements: usize, points: usize) -> Vec<Vec<C64>> {
    let mut out = vec![Vec::new()];
    for _ in 0..elements {
        out = out
            .into_iter()
            .flat_map(|v| {
                (0..points).map(move |j| {
                    let mut w = v.clone();
                    w.push(phasor(TAU * j as f64 / points as f64));
                    w
                })
            })
            .collect();
    }
    out
}

/// Points of `pts` not dominated componentwise by another point.
pub fn pareto_front(pts: &[[f64; 2]]) -> Vec<[f64; 2]> {
    let mut sorted = pts.to_vec();
    sorted.sort_by(|a, b| b[0].total_cmp(&a[0]).then(b[1].total_cmp(&a[1])));
    let mut front: Vec<[f64; 2]> = Vec::new();
    for p in sorted {
        if front.last().is_none_or(|l| p[1] > l[1]) {
            front.push(p);
        }
    }
    front
}

/// All `(tau_0, tau_1, tau_2)` on the `1/steps` lattice summing to one.
pub fn simplex_grid3(steps: usize) -> Vec<[f64; 3]> {
    let h = 1.0 / steps as f64;
    let mut out = Vec::with_capacity((steps + 1) * (steps + 2) / 2);
    for i in 0..=steps {
        for j in 0..=steps - i {
            out.push([i as f64 * h, j as f64 * h, (steps - i - j) as f64 * h]);
        }
    }
    out
}

fn term(tau: f64, num: f64) -> f64 {
    if tau <= 0.0 {
        0.0
    } else {
        tau * (num / tau).ln_1p() / std::f64::consts::LN_2
    }
}

/// Two devices, every slot at `pmax`: device 0 transmits in slot 1,
/// device 1 in slot 2. `dl[k][i]` is device `k`'s downlink gain in slot
/// `i`; `ul[k]` its uplink gain.
pub fn two_device_rate(c: &[f64], tau: &[f64; 3], dl: [[f64; 3]; 2], ul: [f64; 2]) -> f64 {
    term(tau[1], c[0] * (tau[0] * dl[0][0] + tau[2] * dl[0][2]) * ul[0])
        + term(tau[2], c[1] * (tau[0] * dl[1][0] + tau[1] * dl[1][1]) * ul[1])
}

/// Brute-force optimum of the per-slot problem for `K = 2` under perfect
/// cancellation: `points` phases per element, time lattice `1/steps`.
pub fn brute_force_fully(ch: &CompositeChannels, c: &[f64], points: usize, steps: usize) -> f64 {
    let grid = phase_grid(ch.elements(), points);
    let slot0 = pareto_front(&grid.iter().map(|v| [dl(ch, 0, v), dl(ch, 1, v)]).collect::<Vec<_>>());
    let slot1 = pareto_front(&grid.iter().map(|v| [ul(ch, 0, v), dl(ch, 1, v)]).collect::<Vec<_>>());
    let slot2 = pareto_front(&grid.iter().map(|v| [ul(ch, 1, v), dl(ch, 0, v)]).collect::<Vec<_>>());
    let taus = simplex_grid3(steps);
    let mut best = 0.0f64;
    for a in &slot0 {
        for b in &slot1 {
            for d in &slot2 {
                let gains = [[a[0], 0.0, d[1]], [a[1], b[1], 0.0]];
                for t in &taus {
                    best = best.max(two_device_rate(c, t, gains, [b[0], d[0]]));
                }
            }
        }
    }
    best
}

/// Brute-force optimum for `K = 2` with one vector in every slot.
pub fn brute_force_static(ch: &CompositeChannels, c: &[f64], points: usize, steps: usize) -> f64 {
    let taus = simplex_grid3(steps);
    let mut best = 0.0f64;
    for v in phase_grid(ch.elements(), points) {
        let (y0, y1) = (dl(ch, 0, &v), dl(ch, 1, &v));
        let gains = [[y0, 0.0, y0], [y1, y1, 0.0]];
        let u = [ul(ch, 0, &v), ul(ch, 1, &v)];
        for t in &taus {
            best = best.max(two_device_rate(c, t, gains, u));
        }
    }
    best
}

/// Brute-force optimum for `K = 2` with a downlink vector in slot 0 and
/// one uplink vector shared by slots 1 and 2.
pub fn brute_force_partial(ch: &CompositeChannels, c: &[f64], points: usize, steps: usize) -> f64 {
    let grid = phase_grid(ch.elements(), points);
    let down = pareto_front(&grid.iter().map(|v| [dl(ch, 0, v), dl(ch, 1, v)]).collect::<Vec<_>>());
    let taus = simplex_grid3(steps);
    let mut best = 0.0f64;
    for d in &down {
        for v in &grid {
            let (y0, y1) = (dl(ch, 0, v), dl(ch, 1, v));
            let gains = [[d[0], 0.0, y0], [d[1], y1, 0.0]];
            let u = [ul(ch, 0, v), ul(ch, 1, v)];
            for t in &taus {
                best = best.max(two_device_rate(c, t, gains, u));
            }
        }
    }
    best
}

/// Maximum of a unimodal `f` on `[lo, hi]`.
pub fn golden_max(f: impl Fn(f64) -> f64, lo: f64, hi: f64, iters: usize) -> f64 {
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (lo, hi);
    for _ in 0..iters {
        let x1 = b - g * (b - a);
        let x2 = a + g * (b - a);
        if f(x1) > f(x2) {
            b = x2;
        } else {
            a = x1;
        }
    }
    f((a + b) / 2.0).max(f(lo)).max(f(hi))
}

/// Optimal two-device rate for fixed gains by nested golden-section search
/// over `tau_0` and `tau_1` (the rate is jointly concave in `tau`).
pub fn best_time_two_devices(c: &[f64], dl: [[f64; 3]; 2], ul: [f64; 2]) -> f64 {
    golden_max(
        |t0| {
            let rest = 1.0 - t0;
            golden_max(|t1| two_device_rate(c, &[t0, t1, (rest - t1).max(0.0)], dl, ul), 0.0, rest, 60)
        },
        0.0,
        1.0,
        60,
    )
}
