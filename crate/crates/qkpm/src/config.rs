//! Run configuration: a TOML file of named sections, every key optional.

use std::fmt::Display;
use std::path::PathBuf;
use std::str::FromStr;

use qkpm_core::kpm::Kernel;
use qkpm_core::random::Scheme;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::oracle::BoundsMethod;
use crate::CliError;

/// Serde through `Display`/`FromStr` for the core enums.
mod text {
    use super::*;

    pub fn serialize<T: Display, S: Serializer>(v: &T, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(v)
    }

    pub fn deserialize<'de, T, D>(d: D) -> Result<T, D::Error>
    where
        T: FromStr,
        T::Err: Display,
        D: Deserializer<'de>,
    {
        String::deserialize(d)?.parse().map_err(serde::de::Error::custom)
    }
}

mod text_vec {
    use super::*;

    pub fn serialize<T: Display, S: Serializer>(v: &[T], s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(v.iter().map(|x| x.to_string()))
    }

    pub fn deserialize<'de, T, D>(d: D) -> Result<Vec<T>, D::Error>
    where
        T: FromStr,
        T::Err: Display,
        D: Deserializer<'de>,
    {
        Vec::<String>::deserialize(d)?
            .iter()
            .map(|s| s.parse().map_err(serde::de::Error::custom))
            .collect()
    }
}

/// Staggered XYZ ring. Defaults are the production couplings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelConfig {
    /// Number of sites, 12.
    pub l: usize,
    /// 1.
    pub jx: f64,
    /// 1/3.
    pub jy: f64,
    /// 1/2.
    pub jz: f64,
    /// 1/2.
    pub lambda: f64,
    /// Spectral margin kept inside `(−1, 1)`, 0.01.
    pub epsilon: f64,
    /// `auto`, `exact` or `coefficient-norm`.
    pub bounds_method: BoundsMethod,
}

impl Default for ModelConfig {
    fn default() -> Self {
        Self { l: 12, jx: 1.0, jy: 1.0 / 3.0, jz: 0.5, lambda: 0.5, epsilon: 0.01, bounds_method: BoundsMethod::Auto }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RandomConfig {
    /// `par`, `seq` or `ric`.
    #[serde(with = "text")]
    pub scheme: Scheme,
    /// 5.
    pub layers: usize,
    /// Jump stride; 0 picks the default.
    pub s: usize,
    /// 4.
    pub replicas: usize,
    /// Master seed for circuits and shots, 1.
    pub seed: u64,
}

impl Default for RandomConfig {
    fn default() -> Self {
        Self { scheme: Scheme::Par, layers: 5, s: 0, replicas: 4, seed: 1 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Ed,
    Recursion,
    Arccos,
    St,
    Circuit,
    CircuitShots,
}

impl FromStr for Method {
    type Err = CliError;
    fn from_str(s: &str) -> Result<Self, CliError> {
        Ok(match s {
            "ed" => Method::Ed,
            "recursion" => Method::Recursion,
            "arccos" => Method::Arccos,
            "st" => Method::St,
            "circuit" | "circuit-exact" => Method::Circuit,
            "circuit-shots" => Method::CircuitShots,
            _ => return Err(CliError::Config(format!("unknown method {s:?}"))),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EstimatorConfig {
    /// `ed`, `recursion`, `arccos`, `st`, `circuit` or `circuit-shots`; default `ed`.
    pub method: Method,
    /// Highest moment, 25.
    pub m: usize,
    /// Arc-cosine order, 0 or 1.
    pub k: usize,
    /// Product-formula steps per circuit, 1.
    pub steps: usize,
    /// Shots per circuit, 1000. Also the billing budget for costs.
    pub shots: u64,
}

impl Default for EstimatorConfig {
    fn default() -> Self {
        Self { method: Method::Ed, m: 25, k: 0, steps: 1, shots: 1000 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct KpmConfig {
    /// `jackson` or `dirichlet`.
    #[serde(with = "text")]
    pub kernel: Kernel,
    /// Expansion order; 0 uses every moment in the file.
    pub order: usize,
    /// Moments above this index are set to zero; 0 keeps all.
    pub keep: usize,
    /// Chebyshev grid size, 1024.
    pub grid_points: usize,
}

impl Default for KpmConfig {
    fn default() -> Self {
        Self { kernel: Kernel::Jackson, order: 0, keep: 0, grid_points: 1024 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ThermoConfig {
    /// 0.
    pub beta_min: f64,
    /// 5.
    pub beta_max: f64,
    /// 51.
    pub beta_points: usize,
}

impl Default for ThermoConfig {
    fn default() -> Self {
        Self { beta_min: 0.0, beta_max: 5.0, beta_points: 51 }
    }
}

impl ThermoConfig {
    pub fn betas(&self) -> Vec<f64> {
        match self.beta_points {
            0 => Vec::new(),
            1 => vec![self.beta_min],
            n => (0..n)
                .map(|i| self.beta_min + (self.beta_max - self.beta_min) * i as f64 / (n - 1) as f64)
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BenchConfig {
    /// Register sizes for `entropy-bench`, `[10, 12, 14]`.
    pub entropy_sizes: Vec<usize>,
    /// Register sizes for `trace-bench`, `[6, 8, 10, 12]`.
    pub trace_sizes: Vec<usize>,
    #[serde(with = "text_vec")]
    pub schemes: Vec<Scheme>,
    /// Random states (seeds) per point, 20.
    pub states: usize,
    /// Deepest circuit in `entropy-bench`, 20 layers.
    pub max_layers: usize,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self {
            entropy_sizes: vec![10, 12, 14],
            trace_sizes: vec![6, 8, 10, 12],
            schemes: vec![Scheme::Par, Scheme::Seq, Scheme::Ric],
            states: 20,
            max_layers: 20,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    /// Falls back to `QKPM_OUT_DIR`, then `qkpm-out`.
    pub directory: Option<PathBuf>,
    /// Any of `csv`, `json`, `circuits`; default `["csv", "json"]`.
    pub formats: Vec<String>,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self { directory: None, formats: vec!["csv".into(), "json".into()] }
    }
}

impl OutputConfig {
    pub fn wants(&self, f: &str) -> bool {
        self.formats.iter().any(|x| x == f)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct ParallelConfig {
    /// Worker threads; 0 uses every available core.
    pub threads: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub model: ModelConfig,
    pub random: RandomConfig,
    pub estimator: EstimatorConfig,
    pub kpm: KpmConfig,
    pub thermo: ThermoConfig,
    pub bench: BenchConfig,
    pub output: OutputConfig,
    pub parallel: ParallelConfig,
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        let c: RunConfig = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        c.validate()?;
        Ok(c)
    }

    /// Canonical text; parsing it back gives the same config.
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config always serialises")
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |m: &str| Err(CliError::Config(m.into()));
        let m = &self.model;
        if m.l < 2 {
            return bad("model.l must be at least 2");
        }
        if !(m.epsilon > 0.0 && m.epsilon < 1.0) {
            return bad("model.epsilon must lie in (0, 1)");
        }
        if ![m.jx, m.jy, m.jz, m.lambda].iter().all(|x| x.is_finite()) {
            return bad("couplings must be finite");
        }
        if self.random.replicas == 0 || self.random.layers == 0 {
            return bad("random.replicas and random.layers must be positive");
        }
        if self.estimator.steps == 0 || self.estimator.shots == 0 {
            return bad("estimator.steps and estimator.shots must be positive");
        }
        if self.estimator.k > 1 {
            return bad("estimator.k must be 0 or 1");
        }
        if self.kpm.grid_points < 2 {
            return bad("kpm.grid_points must be at least 2");
        }
        if let Some(f) = self.output.formats.iter().find(|f| !["csv", "json", "circuits"].contains(&f.as_str())) {
            return Err(CliError::Config(format!("unknown output format {f:?}")));
        }
        if self.bench.states == 0 || self.bench.max_layers == 0 {
            return bad("bench.states and bench.max_layers must be positive");
        }
        Ok(())
    }
}
