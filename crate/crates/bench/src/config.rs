use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use bpr_core::SolverSpec;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{BenchError, Result};
use crate::select::{select_k, KMode, DEFAULT_EMPIRICAL_C};

/// Number of blocks: fixed, or chosen from `N` by [`select_k`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum KChoice {
    Fixed(usize),
    Auto,
}

impl FromStr for KChoice {
    type Err = BenchError;

    fn from_str(s: &str) -> Result<Self> {
        if s.eq_ignore_ascii_case("auto") {
            return Ok(KChoice::Auto);
        }
        s.parse::<usize>()
            .ok()
            .filter(|&k| k > 0)
            .map(KChoice::Fixed)
            .ok_or_else(|| BenchError::Config(format!("K must be a positive integer or `auto`, got `{s}`")))
    }
}

impl fmt::Display for KChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            KChoice::Fixed(k) => write!(f, "{k}"),
            KChoice::Auto => f.write_str("auto"),
        }
    }
}

impl Serialize for KChoice {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            KChoice::Fixed(k) => s.serialize_u64(*k as u64),
            KChoice::Auto => s.serialize_str("auto"),
        }
    }
}

impl<'de> Deserialize<'de> for KChoice {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(usize),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(k) if k > 0 => Ok(KChoice::Fixed(k)),
            Raw::Num(_) => Err(serde::de::Error::custom("K must be positive")),
            Raw::Text(t) => t.parse().map_err(serde::de::Error::custom),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MatrixKind {
    Gaussian,
    Binary01,
}

impl FromStr for MatrixKind {
    type Err = BenchError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gaussian" => Ok(MatrixKind::Gaussian),
            "binary01" | "binary" => Ok(MatrixKind::Binary01),
            other => Err(BenchError::Config(format!("unknown matrix kind `{other}`"))),
        }
    }
}

/// Parses `30`, `inf`, `none` or `noiseless` into an optional SNR in dB.
pub fn parse_snr(s: &str) -> Result<Option<f64>> {
    match s.to_ascii_lowercase().as_str() {
        "inf" | "+inf" | "none" | "noiseless" => Ok(None),
        other => other
            .parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .map(Some)
            .ok_or_else(|| BenchError::Config(format!("bad SNR `{s}`"))),
    }
}

/// One experiment setting. Field names double as the JSON config keys.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub n: usize,
    pub k: KChoice,
    pub alpha: f64,
    pub beta: f64,
    /// `None` is noiseless.
    pub snr_db: Option<f64>,
    pub trials: usize,
    pub seed: u64,
    pub solver: SolverSpec,
    pub tune_solver: SolverSpec,
    pub matrix_kind: MatrixKind,
    pub noisy_tuning: bool,
    /// Worker count for the blocking step; `None` is `min(K, cores)`.
    pub parallelism: Option<usize>,
    pub output_path: Option<PathBuf>,
    pub baseline_include_tuning_rows: bool,
    pub k_mode: KMode,
    pub k_constant: f64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            n: 256,
            k: KChoice::Auto,
            alpha: 6.0,
            beta: 20.0,
            snr_db: Some(30.0),
            trials: 10,
            seed: 0,
            solver: SolverSpec::wf(0).with_restarts(3),
            tune_solver: SolverSpec::tuner(0),
            matrix_kind: MatrixKind::Gaussian,
            noisy_tuning: true,
            parallelism: None,
            output_path: None,
            baseline_include_tuning_rows: false,
            k_mode: KMode::Empirical,
            k_constant: DEFAULT_EMPIRICAL_C,
        }
    }
}

impl ExperimentConfig {
    pub fn from_json_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        serde_json::from_str(&text).map_err(|e| BenchError::Config(format!("{}: {e}", path.display())))
    }

    /// Resolves `K`, validates the shape arithmetic and returns `K`.
    pub fn resolved_k(&self) -> Result<usize> {
        if self.n == 0 {
            return Err(BenchError::Config("N must be positive".into()));
        }
        let k = match self.k {
            KChoice::Fixed(k) => k,
            KChoice::Auto => {
                if self.n < 4 {
                    return Err(BenchError::Config("auto K needs N >= 4".into()));
                }
                select_k(self.n, self.k_mode, self.k_constant)
            }
        };
        if !self.n.is_multiple_of(k) {
            return Err(BenchError::Config(format!("N={} is not divisible by K={k}", self.n)));
        }
        Ok(k)
    }

    pub fn parallelism_for(&self, k: usize) -> usize {
        self.parallelism.unwrap_or_else(|| {
            let cores = std::thread::available_parallelism().map_or(1, |c| c.get());
            k.min(cores)
        })
    }

    pub fn validate(&self) -> Result<()> {
        self.resolved_k()?;
        if !(self.alpha.is_finite() && self.alpha >= 1.0) {
            return Err(BenchError::Config(format!("alpha must be >= 1, got {}", self.alpha)));
        }
        if !(self.beta.is_finite() && self.beta > 0.0) {
            return Err(BenchError::Config(format!("beta must be positive, got {}", self.beta)));
        }
        if self.trials == 0 {
            return Err(BenchError::Config("trials must be positive".into()));
        }
        if self.parallelism == Some(0) {
            return Err(BenchError::Config("parallelism must be positive".into()));
        }
        if let Some(snr) = self.snr_db {
            if !snr.is_finite() {
                return Err(BenchError::Config(
                    "snr_db must be finite (use null for noiseless)".into(),
                ));
            }
        }
        self.solver
            .validate()
            .map_err(|e| BenchError::Config(format!("solver: {e}")))?;
        self.tune_solver
            .validate()
            .map_err(|e| BenchError::Config(format!("tune_solver: {e}")))?;
        Ok(())
    }
}
