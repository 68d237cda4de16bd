//! Suite configuration: which suite, seed, dimension, tolerances and grid
//! parameters, plus a TOML file loader and `key=value` overrides.

use serde::Deserialize;
use std::path::PathBuf;
use std::str::FromStr;

#[derive(Debug)]
pub enum ConfigError {
    UnknownSuite(String),
    UnknownKey(String),
    BadValue { key: String, value: String },
    Io(String),
    Parse(String),
}

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ConfigError::UnknownSuite(s) => write!(f, "unknown suite '{s}'"),
            ConfigError::UnknownKey(k) => write!(f, "unknown override key '{k}'"),
            ConfigError::BadValue { key, value } => {
                write!(f, "cannot parse value '{value}' for key '{key}'")
            }
            ConfigError::Io(e) => write!(f, "config file error: {e}"),
            ConfigError::Parse(e) => write!(f, "config file parse error: {e}"),
        }
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    Group,
    Charges,
    Dynamics,
    Quantum,
    Fluid,
    All,
}

impl Suite {
    pub fn name(&self) -> &'static str {
        match self {
            Suite::Group => "group",
            Suite::Charges => "charges",
            Suite::Dynamics => "dynamics",
            Suite::Quantum => "quantum",
            Suite::Fluid => "fluid",
            Suite::All => "all",
        }
    }
}

impl FromStr for Suite {
    type Err = ConfigError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "group" => Ok(Suite::Group),
            "charges" => Ok(Suite::Charges),
            "dynamics" => Ok(Suite::Dynamics),
            "quantum" => Ok(Suite::Quantum),
            "fluid" => Ok(Suite::Fluid),
            "all" => Ok(Suite::All),
            other => Err(ConfigError::UnknownSuite(other.to_string())),
        }
    }
}

/// Tunable suite parameters. Tolerances of individual checks are pinned in
/// the suites themselves; these knobs size the sampled ensembles and grids.
#[derive(Debug, Clone)]
pub struct Params {
    pub group_cases: usize,
    pub coset_cases: usize,
    pub schwarzian_points: usize,
    pub window_lo: f64,
    pub window_hi: f64,
    pub cm_particles: usize,
    pub cm_steps: usize,
    pub cm_t_end: f64,
    pub invariance_elements: usize,
    pub counterexample_floor_min: f64,
    pub quantum_n: usize,
    pub quantum_dt: f64,
    pub quantum_t_end: f64,
    pub weyl_pairs: usize,
    pub fluid_cells: usize,
    pub fluid_gamma0: f64,
    pub fluid_t_end: f64,
    pub fluid_window: f64,
    pub fluid_exp_gamma: f64,
}

impl Default for Params {
    fn default() -> Self {
        Self {
            group_cases: 1000,
            coset_cases: 100,
            schwarzian_points: 100,
            window_lo: -1.0,
            window_hi: 1.0,
            cm_particles: 3,
            cm_steps: 10_000,
            cm_t_end: 2.0,
            invariance_elements: 50,
            counterexample_floor_min: 1e-3,
            quantum_n: 1024,
            quantum_dt: 1e-4,
            quantum_t_end: 0.5,
            weyl_pairs: 20,
            fluid_cells: 400,
            fluid_gamma0: 3.0,
            fluid_t_end: 0.4,
            fluid_window: 3.0,
            fluid_exp_gamma: 0.2,
        }
    }
}

impl Params {
    /// Apply one `key=value` override.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        macro_rules! parse {
            ($field:ident) => {
                self.$field = value.parse().map_err(|_| ConfigError::BadValue {
                    key: key.to_string(),
                    value: value.to_string(),
                })?
            };
        }
        match key {
            "group_cases" => parse!(group_cases),
            "coset_cases" => parse!(coset_cases),
            "schwarzian_points" => parse!(schwarzian_points),
            "window_lo" => parse!(window_lo),
            "window_hi" => parse!(window_hi),
            "cm_particles" => parse!(cm_particles),
            "cm_steps" => parse!(cm_steps),
            "cm_t_end" => parse!(cm_t_end),
            "invariance_elements" => parse!(invariance_elements),
            "counterexample_floor_min" => parse!(counterexample_floor_min),
            "quantum_n" => parse!(quantum_n),
            "quantum_dt" => parse!(quantum_dt),
            "quantum_t_end" => parse!(quantum_t_end),
            "weyl_pairs" => parse!(weyl_pairs),
            "fluid_cells" => parse!(fluid_cells),
            "fluid_gamma0" => parse!(fluid_gamma0),
            "fluid_t_end" => parse!(fluid_t_end),
            "fluid_window" => parse!(fluid_window),
            "fluid_exp_gamma" => parse!(fluid_exp_gamma),
            other => return Err(ConfigError::UnknownKey(other.to_string())),
        }
        Ok(())
    }
}

/// Full configuration of one run.
#[derive(Debug, Clone)]
pub struct SuiteConfig {
    pub suite: Suite,
    pub seed: u64,
    pub dim: usize,
    pub out: Option<PathBuf>,
    pub csv_dir: Option<PathBuf>,
    pub params: Params,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        Self {
            suite: Suite::All,
            seed: 42,
            dim: 3,
            out: None,
            csv_dir: None,
            params: Params::default(),
        }
    }
}

/// Optional TOML config file shape.
#[derive(Debug, Default, Deserialize)]
pub struct FileConfig {
    pub suite: Option<String>,
    pub seed: Option<u64>,
    pub dim: Option<usize>,
    pub out: Option<PathBuf>,
    pub csv_dir: Option<PathBuf>,
    #[serde(default)]
    pub overrides: std::collections::BTreeMap<String, toml::Value>,
}

impl SuiteConfig {
    pub fn from_file(path: &std::path::Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Io(e.to_string()))?;
        let file: FileConfig = toml::from_str(&text).map_err(|e| ConfigError::Parse(e.to_string()))?;
        let mut cfg = SuiteConfig::default();
        if let Some(s) = file.suite {
            cfg.suite = s.parse()?;
        }
        if let Some(seed) = file.seed {
            cfg.seed = seed;
        }
        if let Some(dim) = file.dim {
            cfg.dim = dim;
        }
        cfg.out = file.out;
        cfg.csv_dir = file.csv_dir;
        for (k, v) in &file.overrides {
            let as_text = match v {
                toml::Value::String(s) => s.clone(),
                other => other.to_string(),
            };
            cfg.params.set(k, &as_text)?;
        }
        Ok(cfg)
    }

    pub fn apply_override(&mut self, spec: &str) -> Result<(), ConfigError> {
        let (key, value) = spec
            .split_once('=')
            .ok_or_else(|| ConfigError::BadValue { key: spec.to_string(), value: String::new() })?;
        match key {
            "seed" => {
                self.seed = value.parse().map_err(|_| ConfigError::BadValue {
                    key: key.into(),
                    value: value.into(),
                })?
            }
            "dim" => {
                self.dim = value.parse().map_err(|_| ConfigError::BadValue {
                    key: key.into(),
                    value: value.into(),
                })?
            }
            _ => self.params.set(key, value)?,
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_parse() {
        assert_eq!("fluid".parse::<Suite>().unwrap(), Suite::Fluid);
        assert!("nope".parse::<Suite>().is_err());
    }

    #[test]
    fn apply_overrides() {
        let mut cfg = SuiteConfig::default();
        cfg.apply_override("fluid_gamma0=1.4").unwrap();
        assert_eq!(cfg.params.fluid_gamma0, 1.4);
        cfg.apply_override("seed=7").unwrap();
        assert_eq!(cfg.seed, 7);
        assert!(cfg.apply_override("no_such_key=1").is_err());
        assert!(cfg.apply_override("fluid_cells=abc").is_err());
    }
}
