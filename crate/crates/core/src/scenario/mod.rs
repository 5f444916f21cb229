//! Network geometry, Rician fading realizations and the composite IRS
//! channel vectors every objective is built from.
//!
//! Random streams are ChaCha8 (`rand_chacha`). A topology draw consumes
//! the caller's generator; a channel draw takes one `u64` from it and then
//! uses an independent ChaCha8 stream per link type, in the fixed order
//! `g` (1), `g_bar` (2), `h_d` (3), `h_d_bar` (4), `h_r[k]` (5 + k).

mod config;

use std::f64::consts::PI;
use std::io::Write;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub use config::{db_to_linear, ConfigFile, Eta, LinearParams, Point3, SystemConfig, SPEED_OF_LIGHT};

use crate::error::ModelError;
use crate::linalg::{phasor, C64};

#[derive(Debug, Clone, PartialEq)]
pub struct Topology {
    pub hap_tx: Point3,
    pub hap_rx: Point3,
    pub irs_center: Point3,
    pub device_pos: Vec<Point3>,
    /// Row-major over the grid: index `iz * mx + ix`.
    pub irs_element_pos: Vec<Point3>,
}

fn sub(a: Point3, b: Point3) -> Point3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn norm(a: Point3) -> f64 {
    (a[0] * a[0] + a[1] * a[1] + a[2] * a[2]).sqrt()
}

fn dot3(a: Point3, b: Point3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub fn distance(a: Point3, b: Point3) -> f64 {
    norm(sub(a, b))
}

/// Places devices uniformly on the horizontal disk around the configured
/// center and lays the IRS out as an `mx x mz` grid in the x-z plane.
pub fn sample_topology<R: Rng + ?Sized>(config: &SystemConfig, rng: &mut R) -> Topology {
    let f = config.file();
    let device_pos = (0..f.devices)
        .map(|_| {
            let r = f.device_radius_m * rng.random::<f64>().sqrt();
            let phi = 2.0 * PI * rng.random::<f64>();
            [f.device_center[0] + r * phi.cos(), f.device_center[1] + r * phi.sin(), f.device_center[2]]
        })
        .collect();
    let c = f.irs_pos;
    let d = f.element_spacing_m;
    let ox = (f.irs_mx as f64 - 1.0) / 2.0;
    let oz = (f.irs_mz as f64 - 1.0) / 2.0;
    let mut irs_element_pos = Vec::with_capacity(f.irs_mx * f.irs_mz);
    for iz in 0..f.irs_mz {
        for ix in 0..f.irs_mx {
            irs_element_pos.push([c[0] + (ix as f64 - ox) * d, c[1], c[2] + (iz as f64 - oz) * d]);
        }
    }
    Topology { hap_tx: f.hap_pos, hap_rx: config.hap_rx(), irs_center: c, device_pos, irs_element_pos }
}

/// Free-space reference loss at 1 m scaled by `d^-exponent`.
pub fn path_loss(distance_m: f64, exponent: f64, carrier_hz: f64) -> Result<f64, ModelError> {
    if !(distance_m > 0.0) {
        return Err(ModelError::NonPositiveDistance(distance_m));
    }
    let lambda = SPEED_OF_LIGHT / carrier_hz;
    let c0 = (lambda / (4.0 * PI)).powi(2);
    Ok(c0 * distance_m.powf(-exponent))
}

/// One fading realization. Uplink IRS-device channels are the elementwise
/// conjugates of `h_r` and are not stored.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelSet {
    pub g: Vec<C64>,
    pub g_bar: Vec<C64>,
    pub h_r: Vec<Vec<C64>>,
    pub h_d: Vec<C64>,
    pub h_d_bar: Vec<C64>,
}

impl ChannelSet {
    pub fn devices(&self) -> usize {
        self.h_d.len()
    }

    pub fn elements(&self) -> usize {
        self.g.len()
    }

    pub fn h_r_bar(&self, k: usize) -> Vec<C64> {
        self.h_r[k].iter().map(|z| z.conj()).collect()
    }

    /// Debug dump with columns `link,k,m,re,im`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "link,k,m,re,im")?;
        for (m, z) in self.g.iter().enumerate() {
            writeln!(w, "g,,{m},{:e},{:e}", z.re, z.im)?;
        }
        for (m, z) in self.g_bar.iter().enumerate() {
            writeln!(w, "g_bar,,{m},{:e},{:e}", z.re, z.im)?;
        }
        for (k, z) in self.h_d.iter().enumerate() {
            writeln!(w, "h_d,{k},,{:e},{:e}", z.re, z.im)?;
        }
        for (k, z) in self.h_d_bar.iter().enumerate() {
            writeln!(w, "h_d_bar,{k},,{:e},{:e}", z.re, z.im)?;
        }
        for (k, row) in self.h_r.iter().enumerate() {
            for (m, z) in row.iter().enumerate() {
                writeln!(w, "h_r,{k},{m},{:e},{:e}", z.re, z.im)?;
            }
        }
        Ok(())
    }
}

fn cn01<R: Rng>(rng: &mut R) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

fn stream(base: u64, id: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(base);
    r.set_stream(id);
    r
}

/// Far-field response of the IRS toward `toward`, referenced to the array
/// center. Entries have modulus exactly one.
fn array_response(topo: &Topology, toward: Point3, wavelength: f64, sign: f64) -> Vec<C64> {
    let dir = sub(toward, topo.irs_center);
    let len = norm(dir);
    let u = if len > 0.0 { [dir[0] / len, dir[1] / len, dir[2] / len] } else { [0.0; 3] };
    let k = 2.0 * PI / wavelength;
    topo.irs_element_pos
        .iter()
        .map(|&p| phasor(sign * k * dot3(sub(p, topo.irs_center), u)))
        .collect()
}

struct Rician {
    los_w: f64,
    nlos_w: f64,
}

impl Rician {
    fn new(kappa: f64) -> Self {
        if kappa.is_infinite() {
            return Self { los_w: 1.0, nlos_w: 0.0 };
        }
        Self { los_w: (kappa / (1.0 + kappa)).sqrt(), nlos_w: (1.0 / (1.0 + kappa)).sqrt() }
    }

    fn draw<R: Rng>(&self, amplitude: f64, los: C64, rng: &mut R) -> C64 {
        let nlos = cn01(rng);
        (los * self.los_w + nlos * self.nlos_w) * amplitude
    }
}

fn link_distance(a: Point3, b: Point3) -> Result<f64, ModelError> {
    let d = distance(a, b);
    if d > 0.0 {
        Ok(d)
    } else {
        Err(ModelError::NonPositiveDistance(d))
    }
}

pub fn sample_channels<R: RngCore + ?Sized>(
    config: &SystemConfig,
    topo: &Topology,
    rng: &mut R,
) -> Result<ChannelSet, ModelError> {
    let f = config.file();
    let lin = config.linear();
    let base = rng.next_u64();
    let fading = Rician::new(lin.rician_k);
    let fc = f.carrier_hz;
    let lambda = lin.wavelength_m;

    let irs_link = |end: Point3, exponent: f64, sign: f64, id: u64| -> Result<Vec<C64>, ModelError> {
        let amp = path_loss(link_distance(end, topo.irs_center)?, exponent, fc)?.sqrt();
        let los = array_response(topo, end, lambda, sign);
        let mut r = stream(base, id);
        Ok(los.into_iter().map(|l| fading.draw(amp, l, &mut r)).collect())
    };
    let g = irs_link(topo.hap_tx, f.pathloss_hap_irs, 1.0, 1)?;
    let g_bar = irs_link(topo.hap_rx, f.pathloss_hap_irs, 1.0, 2)?;

    let direct = |hap: Point3, id: u64| -> Result<Vec<C64>, ModelError> {
        let mut r = stream(base, id);
        topo.device_pos
            .iter()
            .map(|&p| {
                let amp = path_loss(link_distance(hap, p)?, f.pathloss_hap_device, fc)?.sqrt();
                Ok(fading.draw(amp, C64::new(1.0, 0.0), &mut r))
            })
            .collect()
    };
    let h_d = direct(topo.hap_tx, 3)?;
    let h_d_bar = direct(topo.hap_rx, 4)?;

    let h_r = topo
        .device_pos
        .iter()
        .enumerate()
        .map(|(k, &p)| irs_link(p, f.pathloss_irs_device, -1.0, 5 + k as u64))
        .collect::<Result<Vec<_>, _>>()?;

    Ok(ChannelSet { g, g_bar, h_r, h_d, h_d_bar })
}

/// Draws topology and channels from a single seed.
pub fn realize(config: &SystemConfig, seed: u64) -> Result<(Topology, ChannelSet), ModelError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let topo = sample_topology(config, &mut rng);
    let ch = sample_channels(config, &topo, &mut rng)?;
    Ok((topo, ch))
}

/// Per-device composite vectors `q_k = diag(h_r,k^H) g` and
/// `q_bar_k = diag(g_bar^H) h_r_bar,k`, so that the reflected gains become
/// `|h_d,k + v^H q_k|^2` and `|h_d_bar,k + v^H q_bar_k|^2`.
#[derive(Debug, Clone, PartialEq)]
pub struct CompositeChannels {
    pub q: Vec<Vec<C64>>,
    pub q_bar: Vec<Vec<C64>>,
    pub h_d: Vec<C64>,
    pub h_d_bar: Vec<C64>,
}

pub fn composite(ch: &ChannelSet) -> CompositeChannels {
    let q = ch
        .h_r
        .iter()
        .map(|hr| hr.iter().zip(&ch.g).map(|(h, g)| h.conj() * g).collect())
        .collect();
    let q_bar = ch
        .h_r
        .iter()
        .map(|hr| hr.iter().zip(&ch.g_bar).map(|(h, gb)| gb.conj() * h.conj()).collect())
        .collect();
    CompositeChannels { q, q_bar, h_d: ch.h_d.clone(), h_d_bar: ch.h_d_bar.clone() }
}

impl CompositeChannels {
    pub fn devices(&self) -> usize {
        self.h_d.len()
    }

    pub fn elements(&self) -> usize {
        self.q.first().map_or(0, Vec::len)
    }

    /// Device `order[j]` of `self` becomes device `j` of the result.
    pub fn reordered(&self, order: &[usize]) -> Self {
        Self {
            q: order.iter().map(|&k| self.q[k].clone()).collect(),
            q_bar: order.iter().map(|&k| self.q_bar[k].clone()).collect(),
            h_d: order.iter().map(|&k| self.h_d[k]).collect(),
            h_d_bar: order.iter().map(|&k| self.h_d_bar[k]).collect(),
        }
    }

    /// The same direct links with the IRS removed (`M = 0`).
    pub fn without_irs(&self) -> Self {
        Self {
            q: vec![Vec::new(); self.devices()],
            q_bar: vec![Vec::new(); self.devices()],
            h_d: self.h_d.clone(),
            h_d_bar: self.h_d_bar.clone(),
        }
    }

    /// FNV-1a over the bit patterns of every entry; equal checksums mean
    /// bit-identical channels.
    pub fn checksum(&self) -> u64 {
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        let mut feed = |x: f64| {
            for b in x.to_bits().to_le_bytes() {
                h ^= b as u64;
                h = h.wrapping_mul(0x0100_0000_01b3);
            }
        };
        for z in self.h_d.iter().chain(&self.h_d_bar) {
            feed(z.re);
            feed(z.im);
        }
        for row in self.q.iter().chain(&self.q_bar) {
            for z in row {
                feed(z.re);
                feed(z.im);
            }
        }
        h
    }
}
