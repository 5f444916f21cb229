//! Monte-Carlo sweeps over one scenario parameter, CSV/JSON output and
//! convergence traces.
//!
//! An experiment file is an ordinary configuration file with an extra
//! `[experiment]` table:
//!
//! ```toml
//! devices = 10
//! [experiment]
//! sweep_axis = "pmax_dbm"        # pmax_dbm | m | k | gamma_db
//! sweep_values = [10, 20, 30]
//! schemes = ["fully", "no-irs"]
//! n_seeds = 20
//! seed0 = 1
//! output = "results.csv"
//! ```

use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::algorithms::OptimizationResult;
use crate::error::{ConfigError, HarnessError};
use crate::scenario::{composite, realize, SystemConfig};
use crate::schemes::SchemeRegistry;

pub const CSV_HEADER: &str = "scheme,axis,value,seed,objective,iterations,xi_final,wallclock_ms";
pub const AGGREGATE_HEADER: &str = "scheme,axis,value,n,mean,stderr";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepAxis {
    PmaxDbm,
    /// Total element count; the row length `irs_mx` is kept.
    M,
    K,
    /// Also switches to imperfect cancellation.
    GammaDb,
}

impl fmt::Display for SweepAxis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SweepAxis::PmaxDbm => "pmax_dbm",
            SweepAxis::M => "m",
            SweepAxis::K => "k",
            SweepAxis::GammaDb => "gamma_db",
        })
    }
}

impl SweepAxis {
    /// `base` with this axis set to `value`.
    pub fn apply(self, base: &SystemConfig, value: f64) -> Result<SystemConfig, ConfigError> {
        let count = |what: &str| -> Result<usize, ConfigError> {
            if value >= 1.0 && value.fract() == 0.0 {
                Ok(value as usize)
            } else {
                Err(ConfigError::Invalid(format!("{what} must be a positive integer, got {value}")))
            }
        };
        match self {
            SweepAxis::PmaxDbm => base.modified(|f| f.pmax_dbm = value),
            SweepAxis::GammaDb => base.modified(|f| {
                f.si_gamma_db = value;
                f.perfect_sic = false;
            }),
            SweepAxis::K => {
                let k = count("device count")?;
                base.modified(|f| f.devices = k)
            }
            SweepAxis::M => {
                let m = count("element count")?;
                let mx = base.file().irs_mx;
                if m % mx != 0 {
                    return Err(ConfigError::Invalid(format!("element count {m} is not a multiple of irs_mx = {mx}")));
                }
                base.modified(|f| f.irs_mz = m / mx)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentKeys {
    pub sweep_axis: SweepAxis,
    pub sweep_values: Vec<f64>,
    pub schemes: Vec<String>,
    #[serde(default = "one")]
    pub n_seeds: usize,
    #[serde(default)]
    pub seed0: u64,
    #[serde(default)]
    pub output: Option<PathBuf>,
    /// Fill the `wallclock_ms` column. Off by default so that reruns are
    /// byte-identical.
    #[serde(default)]
    pub record_timing: bool,
    /// Reuse the same channel seeds for every sweep value (paired
    /// comparisons along the axis).
    #[serde(default)]
    pub common_seeds: bool,
}

fn one() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub base: SystemConfig,
    pub experiment: ExperimentKeys,
}

impl ExperimentSpec {
    pub fn from_toml_str(s: &str) -> Result<Self, ConfigError> {
        let mut table: toml::Table = toml::from_str(s)?;
        let keys = table
            .remove("experiment")
            .ok_or_else(|| ConfigError::Invalid("missing [experiment] table".into()))?;
        let experiment: ExperimentKeys = keys.try_into()?;
        let base = SystemConfig::from_toml_str(&toml::to_string(&table).expect("table serializes"))?;
        Ok(Self { base, experiment })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, ConfigError> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }

    /// Checks the sweep against the registry and the scenario constraints.
    pub fn validate(&self, registry: &SchemeRegistry) -> Result<(), ConfigError> {
        let e = &self.experiment;
        if e.sweep_values.is_empty() {
            return Err(ConfigError::Invalid("sweep_values must not be empty".into()));
        }
        if e.n_seeds == 0 {
            return Err(ConfigError::Invalid("n_seeds must be at least 1".into()));
        }
        if e.schemes.is_empty() {
            return Err(ConfigError::Invalid("schemes must not be empty".into()));
        }
        if let Some(bad) = e.schemes.iter().find(|s| !registry.contains(s)) {
            return Err(ConfigError::Invalid(format!("unknown scheme `{bad}`")));
        }
        for &v in &e.sweep_values {
            e.sweep_axis.apply(&self.base, v)?;
        }
        Ok(())
    }
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Channel seed of one cell: `s(s(s(seed0) ^ value_index) ^ seed_index)`
/// with `s` the SplitMix64 finalizer. Appending sweep values or seeds
/// leaves existing cells untouched.
pub fn derive_seed(seed0: u64, value_index: usize, seed_index: usize) -> u64 {
    splitmix(splitmix(splitmix(seed0) ^ value_index as u64) ^ seed_index as u64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub scheme: String,
    pub value_index: usize,
    pub value: f64,
    pub seed_index: usize,
    pub seed: u64,
    /// `None` if the cell failed.
    pub objective: Option<f64>,
    pub iterations: Option<usize>,
    pub xi_final: Option<f64>,
    pub wallclock_ms: Option<f64>,
    /// Fingerprint of the channels the cell was solved on.
    pub channel_checksum: Option<u64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateRow {
    pub scheme: String,
    pub value: f64,
    pub n: usize,
    pub mean: f64,
    /// Sample standard deviation over `sqrt(n)`; zero for a single seed.
    pub stderr: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultsTable {
    pub axis: SweepAxis,
    pub rows: Vec<ResultRow>,
    pub aggregates: Vec<AggregateRow>,
}

fn opt<T: fmt::Display>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

impl ResultsTable {
    fn from_rows(axis: SweepAxis, mut rows: Vec<ResultRow>, schemes: &[String]) -> Self {
        let rank = |s: &str| schemes.iter().position(|x| x == s).unwrap_or(usize::MAX);
        rows.sort_by(|a, b| {
            (rank(&a.scheme), &a.scheme, a.value_index, a.seed_index).cmp(&(
                rank(&b.scheme),
                &b.scheme,
                b.value_index,
                b.seed_index,
            ))
        });
        let mut aggregates: Vec<AggregateRow> = Vec::new();
        for chunk in rows.chunk_by(|a, b| a.scheme == b.scheme && a.value_index == b.value_index) {
            let vals: Vec<f64> = chunk.iter().filter_map(|r| r.objective).collect();
            let n = vals.len();
            let mean = if n == 0 { f64::NAN } else { vals.iter().sum::<f64>() / n as f64 };
            let stderr = if n < 2 {
                0.0
            } else {
                let var = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
                (var / n as f64).sqrt()
            };
            aggregates.push(AggregateRow { scheme: chunk[0].scheme.clone(), value: chunk[0].value, n, mean, stderr });
        }
        Self { axis, rows, aggregates }
    }

    pub fn has_errors(&self) -> bool {
        self.rows.iter().any(|r| r.error.is_some())
    }

    pub fn mean(&self, scheme: &str, value: f64) -> Option<f64> {
        self.aggregates.iter().find(|a| a.scheme == scheme && a.value == value).map(|a| a.mean)
    }

    /// Per-cell rows. Failed cells carry `error` in the objective column.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "{CSV_HEADER}")?;
        for r in &self.rows {
            let objective = if r.error.is_some() { "error".to_string() } else { opt(r.objective) };
            writeln!(
                w,
                "{},{},{},{},{},{},{},{}",
                r.scheme,
                self.axis,
                r.value,
                r.seed,
                objective,
                opt(r.iterations),
                opt(r.xi_final),
                opt(r.wallclock_ms.map(|t| format!("{t:.3}")))
            )?;
        }
        Ok(())
    }

    pub fn write_aggregates_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "{AGGREGATE_HEADER}")?;
        for a in &self.aggregates {
            writeln!(w, "{},{},{},{},{},{}", a.scheme, self.axis, a.value, a.n, a.mean, a.stderr)?;
        }
        Ok(())
    }

    /// Writes `path`, `<stem>_aggregate.csv` and `<stem>.json` side by side.
    /// Returns the three paths.
    pub fn write_outputs(&self, spec: &ExperimentSpec, path: &Path) -> Result<[PathBuf; 3], HarnessError> {
        let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("results");
        let agg = path.with_file_name(format!("{stem}_aggregate.csv"));
        let json = path.with_file_name(format!("{stem}.json"));
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir)?;
        }
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        std::fs::write(path, buf)?;
        let mut buf = Vec::new();
        self.write_aggregates_csv(&mut buf)?;
        std::fs::write(&agg, buf)?;
        let summary = serde_json::json!({
            "experiment": spec.experiment,
            "config": spec.base.file(),
            "rows": self.rows,
            "aggregates": self.aggregates,
        });
        std::fs::write(&json, serde_json::to_string_pretty(&summary)? + "\n")?;
        Ok([path.to_path_buf(), agg, json])
    }
}

/// Runs every (value, seed, scheme) cell. Cell failures become error rows;
/// only an invalid spec is an `Err`.
pub fn run_experiment(spec: &ExperimentSpec, registry: &SchemeRegistry) -> Result<ResultsTable, HarnessError> {
    spec.validate(registry)?;
    let e = &spec.experiment;
    let mut rows = Vec::new();
    for (vi, &value) in e.sweep_values.iter().enumerate() {
        let cfg = e.sweep_axis.apply(&spec.base, value)?;
        for si in 0..e.n_seeds {
            let seed = derive_seed(e.seed0, if e.common_seeds { 0 } else { vi }, si);
            let cell_cfg = cfg.modified(|f| f.rng_seed = seed)?;
            let channels = realize(&cell_cfg, seed).map(|(_, ch)| composite(&ch));
            for name in &e.schemes {
                let mut row = ResultRow {
                    scheme: name.clone(),
                    value_index: vi,
                    value,
                    seed_index: si,
                    seed,
                    objective: None,
                    iterations: None,
                    xi_final: None,
                    wallclock_ms: None,
                    channel_checksum: None,
                    error: None,
                };
                match &channels {
                    Err(err) => row.error = Some(err.to_string()),
                    Ok(ch) => {
                        row.channel_checksum = Some(ch.checksum());
                        let start = Instant::now();
                        match registry.get(name).and_then(|s| s.solve(ch, &cell_cfg, seed)) {
                            Ok(res) => {
                                row.objective = Some(res.objective);
                                row.iterations = Some(res.iterations);
                                row.xi_final = res.xi_final;
                            }
                            Err(err) => row.error = Some(err.to_string()),
                        }
                        if e.record_timing {
                            row.wallclock_ms = Some(start.elapsed().as_secs_f64() * 1e3);
                        }
                    }
                }
                rows.push(row);
            }
        }
    }
    Ok(ResultsTable::from_rows(e.sweep_axis, rows, &e.schemes))
}

/// Solves one realization (channel seed `seed`) with `scheme` and writes
/// its objective trace as `iter,outer,objective[,xi]`; the `xi` column is
/// present only when the scheme reports constraint violations.
pub fn convergence_trace<W: Write>(
    config: &SystemConfig,
    registry: &SchemeRegistry,
    scheme: &str,
    seed: u64,
    mut out: W,
) -> Result<OptimizationResult, HarnessError> {
    let cfg = config.modified(|f| f.rng_seed = seed)?;
    let (_, ch) = realize(&cfg, seed)?;
    let res = registry.get(scheme)?.solve(&composite(&ch), &cfg, seed)?;
    let with_xi = res.objective_trace.iter().any(|p| p.xi.is_some());
    writeln!(out, "iter,outer,objective{}", if with_xi { ",xi" } else { "" })?;
    for (i, p) in res.objective_trace.iter().enumerate() {
        write!(out, "{i},{},{}", p.outer, p.value)?;
        if with_xi {
            write!(out, ",{}", opt(p.xi))?;
        }
        writeln!(out)?;
    }
    Ok(res)
}
