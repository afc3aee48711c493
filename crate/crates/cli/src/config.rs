//! TOML run configuration.
//!
//! ```toml
//! manifold = "P1"
//! bundle = "LineP1(2)"
//! order = 8
//! tol = 1e-8
//! spread_max = 1e6
//! max_iter = 500
//! deterministic = true
//!
//! [init]
//! kind = "random"   # or "identity", or "file" with `path`
//! seed = 7
//! amplitude = 0.2
//!
//! [output]
//! trace_csv = "trace.csv"
//! result_json = "result.json"
//! ```
//!
//! Relative paths are resolved against the directory holding the config file.

use std::path::{Path, PathBuf};

use balanced::iteration::{RunOptions, DEFAULT_MAX_ITER, DEFAULT_SPREAD_MAX, DEFAULT_TOL};
use balanced::{BundleId, Manifold};
use serde::{Deserialize, Serialize};

use crate::{CliError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum InitSpec {
    Identity,
    Random { seed: u64, amplitude: f64 },
    File { path: PathBuf },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputPaths {
    pub trace_csv: PathBuf,
    pub result_json: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub manifold: String,
    pub bundle: String,
    pub order: usize,
    #[serde(default = "default_init")]
    pub init: InitSpec,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_spread_max")]
    pub spread_max: f64,
    #[serde(default = "default_max_iter")]
    pub max_iter: usize,
    #[serde(default)]
    pub deterministic: bool,
    pub output: OutputPaths,
}

fn default_init() -> InitSpec {
    InitSpec::Identity
}
fn default_tol() -> f64 {
    DEFAULT_TOL
}
fn default_spread_max() -> f64 {
    DEFAULT_SPREAD_MAX
}
fn default_max_iter() -> usize {
    DEFAULT_MAX_ITER
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    /// Reads, parses and validates a config file, resolving relative paths
    /// against its directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|source| CliError::Read { path: path.display().to_string(), source })?;
        let mut cfg = Self::from_toml(&text)?;
        let base = path.parent().unwrap_or(Path::new("."));
        cfg.resolve_paths(base);
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn resolve_paths(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        fix(&mut self.output.trace_csv);
        fix(&mut self.output.result_json);
        if let InitSpec::File { path } = &mut self.init {
            fix(path);
        }
    }

    pub fn manifold(&self) -> Result<Manifold> {
        self.manifold.parse().map_err(|e: balanced::Error| CliError::Config(e.to_string()))
    }

    pub fn bundle(&self) -> Result<BundleId> {
        self.bundle.parse().map_err(|e: balanced::Error| CliError::Config(e.to_string()))
    }

    pub fn options(&self) -> RunOptions {
        RunOptions { tol: self.tol, spread_max: self.spread_max, max_iter: self.max_iter }
    }

    pub fn validate(&self) -> Result<()> {
        let manifold = self.manifold()?;
        let bundle = self.bundle()?;
        bundle.validate().map_err(|e| CliError::Config(e.to_string()))?;
        if bundle.manifold() != manifold {
            return Err(CliError::Config(format!("bundle {bundle} lives on {}, not {manifold}", bundle.manifold())));
        }
        if self.order < 2 {
            return Err(CliError::Config(format!("order must be >= 2, got {}", self.order)));
        }
        self.options().validate().map_err(|e| CliError::Config(e.to_string()))?;
        if let InitSpec::Random { amplitude, .. } = self.init {
            if !(amplitude > 0.0 && amplitude < 1.0) {
                return Err(CliError::Config(format!("amplitude must lie in (0, 1), got {amplitude}")));
            }
        }
        Ok(())
    }
}
