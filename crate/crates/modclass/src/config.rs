//! Experiment configuration: a flat TOML table.
//!
//! ```toml
//! name = "table2"
//! n = 128                    # subcarriers N
//! k = 2                      # OFDM symbols per frame K
//! mt = 2
//! mr = 2
//! l = 3                      # true tap count
//! l_hat = 3                  # assumed tap count (one value or a list)
//! tap_powers_db = [0.0, -2.0, -2.5]
//! snr_db = [5.0]             # one value or a list
//! pool = ["QPSK", "8PSK", "16QAM"]
//! # transmitted = ["8PSK"]   # subset of the pool to send, default all
//! method = "gibbs+restarts+annealing"   # one value or a list
//! trials_per_modulation = 500
//! base_seed = 2014
//! output_dir = "out/table2"
//! iterations = 2000          # M, one value or a list
//! burn_in_fraction = 0.85    # M0 = round(fraction * M)
//! restarts = 5               # N_run for the restart methods
//! # gamma = 40               # default floor(0.08 N K Mt)
//! alpha0 = 0.001
//! beta0 = 0.001
//! alpha_h = 1000.0
//! switch_iteration = 9       # hybrid only
//! ```

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use modclass_core::gibbs::{InferenceConfig, Variant};
use modclass_core::sigmodel::{ModulationPool, Scenario};
use serde::de::{self, Deserializer};
use serde::{Deserialize, Serialize};

use crate::error::{HarnessError, Result};

/// Inference method applied to every trial of a cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Method {
    #[serde(rename = "gibbs")]
    Gibbs,
    #[serde(rename = "gibbs+restarts")]
    GibbsRestarts,
    #[serde(rename = "gibbs+annealing")]
    GibbsAnnealing,
    #[serde(rename = "gibbs+restarts+annealing")]
    GibbsRestartsAnnealing,
    #[serde(rename = "meanfield")]
    MeanField,
    #[serde(rename = "hybrid")]
    Hybrid,
    /// Superconstellation p_A update, run with restarts and annealing.
    #[serde(rename = "superconstellation")]
    Superconstellation,
}

impl Method {
    pub const ALL: [Method; 7] = [
        Method::Gibbs,
        Method::GibbsRestarts,
        Method::GibbsAnnealing,
        Method::GibbsRestartsAnnealing,
        Method::MeanField,
        Method::Hybrid,
        Method::Superconstellation,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::Gibbs => "gibbs",
            Method::GibbsRestarts => "gibbs+restarts",
            Method::GibbsAnnealing => "gibbs+annealing",
            Method::GibbsRestartsAnnealing => "gibbs+restarts+annealing",
            Method::MeanField => "meanfield",
            Method::Hybrid => "hybrid",
            Method::Superconstellation => "superconstellation",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s.trim())
            .ok_or_else(|| {
                let names: Vec<_> = Method::ALL.iter().map(|m| m.name()).collect();
                HarnessError::Config(format!("unknown method '{s}' (expected one of {})", names.join(", ")))
            })
    }
}

/// Accepts either a scalar or an array for list-valued keys.
fn one_or_many<'de, D, T>(deserializer: D) -> std::result::Result<Vec<T>, D::Error>
where
    D: Deserializer<'de>,
    T: Deserialize<'de>,
{
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum OneOrMany<T> {
        One(T),
        Many(Vec<T>),
    }
    match OneOrMany::<T>::deserialize(deserializer) {
        Ok(OneOrMany::One(x)) => Ok(vec![x]),
        Ok(OneOrMany::Many(v)) => Ok(v),
        Err(_) => Err(de::Error::custom("expected a value or a list of values")),
    }
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}
fn default_iterations() -> Vec<usize> {
    vec![2000]
}
fn default_burn_in() -> f64 {
    0.85
}
fn default_restarts() -> usize {
    5
}
fn default_weak() -> f64 {
    1e-3
}
fn default_alpha_h() -> f64 {
    1e3
}
fn default_switch() -> usize {
    9
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub name: String,
    pub n: usize,
    pub k: usize,
    pub mt: usize,
    pub mr: usize,
    pub l: usize,
    #[serde(deserialize_with = "one_or_many")]
    pub l_hat: Vec<usize>,
    pub tap_powers_db: Vec<f64>,
    #[serde(deserialize_with = "one_or_many")]
    pub snr_db: Vec<f64>,
    pub pool: Vec<String>,
    /// Pool members actually transmitted; all of them when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub transmitted: Option<Vec<String>>,
    #[serde(deserialize_with = "one_or_many")]
    pub method: Vec<Method>,
    pub trials_per_modulation: usize,
    pub base_seed: u64,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    #[serde(default = "default_iterations", deserialize_with = "one_or_many")]
    pub iterations: Vec<usize>,
    #[serde(default = "default_burn_in")]
    pub burn_in_fraction: f64,
    #[serde(default = "default_restarts")]
    pub restarts: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    #[serde(default = "default_weak")]
    pub alpha0: f64,
    #[serde(default = "default_weak")]
    pub beta0: f64,
    #[serde(default = "default_alpha_h")]
    pub alpha_h: f64,
    #[serde(default = "default_switch")]
    pub switch_iteration: usize,
    /// Worker threads; `MODCLASS_WORKERS` and `--workers` take precedence.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub workers: Option<usize>,
}

/// One (SNR, method, L̂, M) combination; every modulation and trial index is
/// run under each cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cell {
    pub snr_index: usize,
    pub snr_db: f64,
    pub method: Method,
    pub l_hat: usize,
    pub iterations: usize,
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| HarnessError::Config(e.message().to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
        Self::from_toml_str(&text).map_err(|e| match e {
            HarnessError::Config(msg) => HarnessError::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| HarnessError::Config(e.to_string()))
    }

    pub fn modulation_pool(&self) -> Result<ModulationPool> {
        Ok(ModulationPool::from_names(&self.pool)?)
    }

    /// Scenario for one SNR, assumed tap count and true modulation.
    pub fn scenario(&self, snr_db: f64, l_hat: usize, truth: &str) -> Result<Scenario> {
        let sc = Scenario {
            n: self.n,
            k: self.k,
            mt: self.mt,
            mr: self.mr,
            l: self.l,
            l_hat,
            tap_powers_db: self.tap_powers_db.clone(),
            snr_db,
            pool: self.modulation_pool()?,
            true_modulation: truth.to_string(),
        };
        sc.validate()?;
        Ok(sc)
    }

    /// Inference settings for `method` at the given L̂ and M.
    pub fn inference(&self, method: Method, l_hat: usize, iterations: usize) -> Result<InferenceConfig> {
        let pool_len = self.pool.len();
        let dims = modclass_core::sigmodel::FrameDims {
            n: self.n,
            k: self.k,
            mt: self.mt,
            mr: self.mr,
            l_hat,
        };
        let mut cfg = InferenceConfig::new(&dims, pool_len);
        if let Some(g) = self.gamma {
            cfg.gamma = vec![g; pool_len];
        }
        cfg.alpha0 = self.alpha0;
        cfg.beta0 = self.beta0;
        cfg.alpha_h = self.alpha_h;
        cfg.switch_iteration = self.switch_iteration;
        let cfg = cfg.with_iterations(iterations, self.burn_in_fraction);
        let cfg = match method {
            Method::Gibbs | Method::MeanField | Method::Hybrid => cfg,
            Method::GibbsRestarts => cfg.with_restarts(self.restarts),
            Method::GibbsAnnealing => cfg.with_annealing(true),
            Method::GibbsRestartsAnnealing => cfg.with_restarts(self.restarts).with_annealing(true),
            Method::Superconstellation => cfg
                .with_restarts(self.restarts)
                .with_annealing(true)
                .with_variant(Variant::Superconstellation),
        };
        let cfg = if method == Method::MeanField { cfg.with_switch(1) } else { cfg };
        cfg.validate(pool_len)?;
        Ok(cfg)
    }

    /// Pool indices of the transmitted modulations, in pool order.
    pub fn transmitted_indices(&self) -> Vec<usize> {
        match &self.transmitted {
            None => (0..self.pool.len()).collect(),
            Some(names) => (0..self.pool.len()).filter(|&i| names.contains(&self.pool[i])).collect(),
        }
    }

    /// All cells in canonical order: SNR, then method, then L̂, then M.
    pub fn cells(&self) -> Vec<Cell> {
        let mut out = Vec::new();
        for (snr_index, &snr_db) in self.snr_db.iter().enumerate() {
            for &method in &self.method {
                for &l_hat in &self.l_hat {
                    for &iterations in &self.iterations {
                        out.push(Cell {
                            snr_index,
                            snr_db,
                            method,
                            l_hat,
                            iterations,
                        });
                    }
                }
            }
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(HarnessError::Config(msg));
        if self.trials_per_modulation == 0 {
            return fail("trials_per_modulation must be at least 1".into());
        }
        if self.snr_db.is_empty() || self.method.is_empty() || self.l_hat.is_empty() || self.iterations.is_empty() {
            return fail("snr_db, method, l_hat and iterations must each have at least one entry".into());
        }
        if self.pool.is_empty() {
            return fail("the modulation pool is empty".into());
        }
        if !(self.burn_in_fraction >= 0.0 && self.burn_in_fraction < 1.0) {
            return fail(format!("burn_in_fraction must lie in [0, 1), got {}", self.burn_in_fraction));
        }
        if self.base_seed > i64::MAX as u64 {
            return fail("base_seed must fit in a signed 64-bit integer".into());
        }
        let pool = self.modulation_pool()?;
        for (i, a) in pool.iter().enumerate() {
            if pool.iter().skip(i + 1).any(|b| b.name() == a.name()) {
                return fail(format!("modulation '{}' appears twice in the pool", a.name()));
            }
        }
        if let Some(names) = &self.transmitted {
            if names.is_empty() {
                return fail("transmitted must name at least one modulation".into());
            }
            if let Some(bad) = names.iter().find(|n| !self.pool.contains(n)) {
                return fail(format!("transmitted modulation '{bad}' is not in the pool"));
            }
        }
        for &l_hat in &self.l_hat {
            self.scenario(self.snr_db[0], l_hat, pool.get(0).name())?;
            for &snr in &self.snr_db {
                if !snr.is_finite() {
                    return fail("SNR values must be finite".into());
                }
            }
            for &method in &self.method {
                for &m in &self.iterations {
                    self.inference(method, l_hat, m)?;
                }
            }
        }
        Ok(())
    }
}
