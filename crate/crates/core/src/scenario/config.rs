use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::algorithms::{AlgoSettings, PenaltyParams};
use crate::convex_core::SolverParams;
use crate::error::ConfigError;
use crate::model::SicModel;

pub type Point3 = [f64; 3];

/// Speed of light in m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// Energy-conversion efficiency: one value for every device or one per device.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Eta {
    Common(f64),
    PerDevice(Vec<f64>),
}

/// On-disk form of [`SystemConfig`]: TOML `key = value` pairs with dB
/// quantities, plus optional `[solver]`, `[penalty]` and `[algo]` tables.
/// Every key is optional and falls back to the default scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConfigFile {
    pub devices: usize,
    pub irs_mx: usize,
    pub irs_mz: usize,
    pub frame_s: f64,
    pub pmax_dbm: f64,
    pub noise_density_dbm_per_hz: f64,
    pub bandwidth_hz: f64,
    pub capacity_gap_db: f64,
    pub quantization_beta_db: f64,
    pub si_gamma_db: f64,
    pub perfect_sic: bool,
    pub eta: Eta,
    pub rician_k_db: f64,
    pub pathloss_hap_irs: f64,
    pub pathloss_irs_device: f64,
    pub pathloss_hap_device: f64,
    pub carrier_hz: f64,
    pub element_spacing_m: f64,
    pub device_center: Point3,
    pub device_radius_m: f64,
    pub hap_pos: Point3,
    /// Receive antenna position; defaults to the transmit antenna position.
    pub hap_rx_pos: Option<Point3>,
    pub irs_pos: Point3,
    pub rng_seed: u64,
    pub solver: SolverParams,
    pub penalty: PenaltyParams,
    pub algo: AlgoSettings,
}

impl Default for ConfigFile {
    fn default() -> Self {
        Self {
            devices: 10,
            irs_mx: 5,
            irs_mz: 8,
            frame_s: 1.0,
            pmax_dbm: 30.0,
            noise_density_dbm_per_hz: -150.0,
            bandwidth_hz: 1e6,
            capacity_gap_db: 9.8,
            quantization_beta_db: -60.0,
            si_gamma_db: -65.0,
            perfect_sic: false,
            eta: Eta::Common(0.8),
            rician_k_db: 3.0,
            pathloss_hap_irs: 2.2,
            pathloss_irs_device: 2.2,
            pathloss_hap_device: 2.6,
            carrier_hz: 750e6,
            element_spacing_m: 0.2,
            device_center: [10.0, 0.0, 0.0],
            device_radius_m: 1.5,
            hap_pos: [0.0, 0.0, 0.0],
            hap_rx_pos: None,
            irs_pos: [10.0, 0.0, 2.5],
            rng_seed: 1,
            solver: SolverParams::default(),
            penalty: PenaltyParams::default(),
            algo: AlgoSettings::default(),
        }
    }
}

impl ConfigFile {
    pub fn build(self) -> Result<SystemConfig, ConfigError> {
        SystemConfig::try_from(self)
    }
}

/// Linear-scale values derived once from the dB fields.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearParams {
    pub pmax_w: f64,
    pub sigma2_w: f64,
    pub capacity_gap: f64,
    pub beta: f64,
    /// Zero under perfect cancellation.
    pub gamma: f64,
    pub rician_k: f64,
    pub wavelength_m: f64,
    pub eta: Vec<f64>,
}

/// Validated system and algorithm parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ConfigFile", into = "ConfigFile")]
pub struct SystemConfig {
    file: ConfigFile,
    lin: LinearParams,
}

impl TryFrom<ConfigFile> for SystemConfig {
    type Error = ConfigError;

    fn try_from(file: ConfigFile) -> Result<Self, ConfigError> {
        let invalid = |msg: String| Err(ConfigError::Invalid(msg));
        if file.devices == 0 {
            return invalid("devices must be at least 1".into());
        }
        if file.irs_mx == 0 || file.irs_mz == 0 {
            return invalid("irs_mx and irs_mz must be at least 1".into());
        }
        if !(file.frame_s > 0.0) || !(file.bandwidth_hz > 0.0) || !(file.carrier_hz > 0.0) {
            return invalid("frame_s, bandwidth_hz and carrier_hz must be positive".into());
        }
        if !(file.device_radius_m >= 0.0) || !(file.element_spacing_m >= 0.0) {
            return invalid("device_radius_m and element_spacing_m must be non-negative".into());
        }
        if file.capacity_gap_db < 0.0 {
            return invalid("capacity_gap_db must be >= 0 (gap >= 1)".into());
        }
        let eta = match &file.eta {
            Eta::Common(e) => vec![*e; file.devices],
            Eta::PerDevice(v) if v.len() == file.devices => v.clone(),
            Eta::PerDevice(v) => {
                return invalid(format!("eta lists {} values for {} devices", v.len(), file.devices))
            }
        };
        if eta.iter().any(|e| !(0.0..=1.0).contains(e)) {
            return invalid("eta values must lie in [0, 1]".into());
        }
        file.solver.validate().map_err(|e| ConfigError::Invalid(e.to_string()))?;
        file.penalty.validate().map_err(ConfigError::Invalid)?;

        let lin = LinearParams {
            pmax_w: db_to_linear(file.pmax_dbm - 30.0),
            sigma2_w: db_to_linear(file.noise_density_dbm_per_hz - 30.0) * file.bandwidth_hz,
            capacity_gap: db_to_linear(file.capacity_gap_db),
            beta: db_to_linear(file.quantization_beta_db),
            gamma: if file.perfect_sic { 0.0 } else { db_to_linear(file.si_gamma_db) },
            rician_k: db_to_linear(file.rician_k_db),
            wavelength_m: SPEED_OF_LIGHT / file.carrier_hz,
            eta,
        };
        Ok(Self { file, lin })
    }
}

impl From<SystemConfig> for ConfigFile {
    fn from(c: SystemConfig) -> Self {
        c.file
    }
}

impl Default for SystemConfig {
    fn default() -> Self {
        ConfigFile::default().build().expect("default configuration is valid")
    }
}

impl SystemConfig {
    pub fn from_toml_str(s: &str) -> Result<Self, ConfigError> {
        toml::from_str::<ConfigFile>(s)?.build()
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, ConfigError> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(&self.file).expect("config serializes")
    }

    pub fn file(&self) -> &ConfigFile {
        &self.file
    }

    /// Applies `edit` to a copy of the on-disk form and revalidates.
    pub fn modified(&self, edit: impl FnOnce(&mut ConfigFile)) -> Result<Self, ConfigError> {
        let mut file = self.file.clone();
        edit(&mut file);
        file.build()
    }

    pub fn linear(&self) -> &LinearParams {
        &self.lin
    }

    pub fn devices(&self) -> usize {
        self.file.devices
    }

    pub fn elements(&self) -> usize {
        self.file.irs_mx * self.file.irs_mz
    }

    pub fn frame(&self) -> f64 {
        self.file.frame_s
    }

    pub fn pmax(&self) -> f64 {
        self.lin.pmax_w
    }

    pub fn sigma2(&self) -> f64 {
        self.lin.sigma2_w
    }

    pub fn eta(&self) -> &[f64] {
        &self.lin.eta
    }

    pub fn seed(&self) -> u64 {
        self.file.rng_seed
    }

    pub fn solver(&self) -> &SolverParams {
        &self.file.solver
    }

    pub fn penalty(&self) -> &PenaltyParams {
        &self.file.penalty
    }

    pub fn algo(&self) -> &AlgoSettings {
        &self.file.algo
    }

    pub fn sic(&self) -> SicModel {
        if self.file.perfect_sic {
            SicModel::perfect(self.lin.capacity_gap, self.lin.beta)
        } else {
            SicModel::imperfect(self.lin.gamma, self.lin.beta, self.lin.capacity_gap)
        }
    }

    pub fn hap_rx(&self) -> Point3 {
        self.file.hap_rx_pos.unwrap_or(self.file.hap_pos)
    }
}
