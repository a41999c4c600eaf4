//! Run configuration and potential specifications.
//!
//! A [`RunConfig`] is plain JSON. Every command writes the resolved config
//! (defaults filled in) into its sidecar, and `--config` accepts either a bare
//! config or such a sidecar, so a run can be repeated from its own output.

use bsweak_core::grid::{Grid2D, GridOptions, Scheme};
use bsweak_core::potential::{Potential, PotentialError};
use bsweak_core::weakcoupling::RootOptions;
use bsweak_core::Discretization;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

/// A config problem located by its JSON field path.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError {
    pub path: String,
    pub message: String,
}

impl ConfigError {
    pub fn new(path: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            path: path.into(),
            message: message.into(),
        }
    }

    pub fn with_prefix(mut self, prefix: &str) -> Self {
        self.path = if self.path.is_empty() || self.path == "." {
            prefix.to_string()
        } else {
            format!("{prefix}.{}", self.path)
        };
        self
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.path.is_empty() || self.path == "." {
            f.write_str(&self.message)
        } else {
            write!(f, "{}: {}", self.path, self.message)
        }
    }
}

impl std::error::Error for ConfigError {}

fn parse_located<T: for<'de> Deserialize<'de>>(text: &str) -> Result<T, ConfigError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        let msg = inner.to_string();
        // serde_json appends " at line L column C"; the path says more.
        let msg = match msg.rfind(" at line ") {
            Some(i) if inner.line() > 0 => msg[..i].to_string(),
            _ => msg,
        };
        ConfigError::new(path, msg)
    })
}

/// `{name, params}`, `{piecewise_radial}` or `{file}`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PotentialSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub params: BTreeMap<String, f64>,
    /// `[[r, v], ...]` with increasing `r`; linear in `r` between knots.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub piecewise_radial: Option<Vec<[f64; 2]>>,
    /// JSON file holding one of the other two forms.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub file: Option<PathBuf>,
}

impl PotentialSpec {
    pub fn named(name: &str, params: &[(&str, f64)]) -> Self {
        Self {
            name: Some(name.to_string()),
            params: params.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
            ..Self::default()
        }
    }

    pub fn build(&self) -> Result<Potential, ConfigError> {
        let forms = [self.name.is_some(), self.piecewise_radial.is_some(), self.file.is_some()];
        if forms.iter().filter(|x| **x).count() != 1 {
            return Err(ConfigError::new(
                "",
                "exactly one of `name`, `piecewise_radial` or `file` is required",
            ));
        }
        if let Some(path) = &self.file {
            if !self.params.is_empty() {
                return Err(ConfigError::new("params", "not allowed together with `file`"));
            }
            let text = std::fs::read_to_string(path)
                .map_err(|e| ConfigError::new("file", format!("{}: {e}", path.display())))?;
            return load_potential(&text).map_err(|e| e.with_prefix("file"));
        }
        if let Some(knots) = &self.piecewise_radial {
            if !self.params.is_empty() {
                return Err(ConfigError::new("params", "not allowed together with `piecewise_radial`"));
            }
            let knots = knots.iter().map(|k| (k[0], k[1])).collect();
            return Potential::piecewise_radial(knots)
                .map_err(|e| ConfigError::new("piecewise_radial", e.to_string()));
        }
        let name = self.name.as_deref().unwrap_or_default();
        let params: Vec<(&str, f64)> = self.params.iter().map(|(k, v)| (k.as_str(), *v)).collect();
        Potential::builtin(name, &params).map_err(|e| match &e {
            PotentialError::UnknownPotential(_) => ConfigError::new("name", e.to_string()),
            PotentialError::UnknownParameter { param, .. } | PotentialError::InvalidParameter { param, .. } => {
                ConfigError::new(format!("params.{param}"), e.to_string())
            }
            _ => ConfigError::new("", e.to_string()),
        })
    }
}

/// Parses a potential document and constructs the potential.
pub fn load_potential(text: &str) -> Result<Potential, ConfigError> {
    parse_located::<PotentialSpec>(text)?.build()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum SchemeName {
    Polar,
    Cartesian,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    /// Polar for radial potentials, cartesian otherwise, when absent.
    #[serde(default)]
    pub scheme: Option<SchemeName>,
    #[serde(default = "default_resolution")]
    pub resolution: usize,
    #[serde(default = "default_grading")]
    pub grading: f64,
    /// Outer radius; the potential's support radius when absent.
    #[serde(default)]
    pub radius: Option<f64>,
}

fn default_resolution() -> usize {
    64
}

fn default_grading() -> f64 {
    1.0
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            scheme: None,
            resolution: default_resolution(),
            grading: default_grading(),
            radius: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DiscretizationName {
    Auto,
    Dense,
    Radial,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSpec {
    #[serde(default = "default_t_tol")]
    pub t_tol: f64,
    #[serde(default = "default_lambda_tol")]
    pub lambda_tol: f64,
    #[serde(default = "default_max_iter")]
    pub max_iter: usize,
    #[serde(default = "default_discretization")]
    pub discretization: DiscretizationName,
    /// Box size in decay lengths over 10 for the finite-difference oracle.
    #[serde(default = "default_safety")]
    pub fd_safety: f64,
}

fn default_t_tol() -> f64 {
    1e-10
}

fn default_lambda_tol() -> f64 {
    1e-12
}

fn default_max_iter() -> usize {
    200
}

fn default_discretization() -> DiscretizationName {
    DiscretizationName::Auto
}

fn default_safety() -> f64 {
    1.0
}

impl Default for SolverSpec {
    fn default() -> Self {
        Self {
            t_tol: default_t_tol(),
            lambda_tol: default_lambda_tol(),
            max_iter: default_max_iter(),
            discretization: default_discretization(),
            fd_safety: default_safety(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    /// Table destination; stdout when absent. The sidecar goes to
    /// `<path>.json`.
    #[serde(default)]
    pub path: Option<PathBuf>,
    #[serde(default)]
    pub format: Format,
}

/// Everything that determines a command's output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub potential: PotentialSpec,
    #[serde(default)]
    pub grid: GridSpec,
    #[serde(default)]
    pub solver: SolverSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eta: Option<Vec<f64>>,
    /// Hypotheses for `check-assumptions`; all when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub conditions: Option<Vec<String>>,
    /// Eigenvalues reported by `hs-norm`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub quick: bool,
    #[serde(default)]
    pub output: OutputSpec,
}

#[derive(Deserialize)]
struct Sidecar {
    config: serde_json::Value,
}

impl RunConfig {
    pub fn new(potential: PotentialSpec) -> Self {
        Self {
            potential,
            grid: GridSpec::default(),
            solver: SolverSpec::default(),
            eps: None,
            alpha: None,
            s: None,
            eta: None,
            conditions: None,
            k: None,
            seed: 0,
            quick: false,
            output: OutputSpec::default(),
        }
    }

    /// Parses a config, or the `config` member of a sidecar.
    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        if let Ok(side) = serde_json::from_str::<Sidecar>(text) {
            if side.config.is_object() {
                let inner = side.config.to_string();
                let cfg: RunConfig = parse_located(&inner).map_err(|e| e.with_prefix("config"))?;
                cfg.validate().map_err(|e| e.with_prefix("config"))?;
                return Ok(cfg);
            }
        }
        let cfg: RunConfig = parse_located(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: &Path) -> Result<Self, ConfigError> {
        let text =
            std::fs::read_to_string(path).map_err(|e| ConfigError::new("", format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).unwrap_or(serde_json::Value::Null)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.grid.resolution < 2 {
            return Err(ConfigError::new("grid.resolution", "must be at least 2"));
        }
        if !(self.grid.grading > 0.0 && self.grid.grading.is_finite()) {
            return Err(ConfigError::new("grid.grading", "must be positive"));
        }
        if let Some(r) = self.grid.radius {
            if !(r > 0.0 && r.is_finite()) {
                return Err(ConfigError::new("grid.radius", "must be positive"));
            }
        }
        for (name, list) in [("eps", &self.eps), ("alpha", &self.alpha)] {
            if let Some(xs) = list {
                if xs.is_empty() {
                    return Err(ConfigError::new(name, "must not be empty"));
                }
                for (i, x) in xs.iter().enumerate() {
                    if !(*x > 0.0 && x.is_finite()) {
                        return Err(ConfigError::new(format!("{name}[{i}]"), format!("must be positive, got {x}")));
                    }
                }
            }
        }
        if let Some(k) = self.k {
            if k == 0 {
                return Err(ConfigError::new("k", "must be at least 1"));
            }
        }
        if !(self.solver.fd_safety >= 1.0) {
            return Err(ConfigError::new("solver.fd_safety", "must be at least 1"));
        }
        if !(self.solver.t_tol > 0.0) {
            return Err(ConfigError::new("solver.t_tol", "must be positive"));
        }
        Ok(())
    }

    /// Resolution after `quick` halving.
    pub fn resolution(&self) -> usize {
        if self.quick {
            (self.grid.resolution / 2).max(2)
        } else {
            self.grid.resolution
        }
    }

    pub fn grid_for(&self, v: &Potential) -> Result<Grid2D, ConfigError> {
        let scheme = match self.grid.scheme {
            Some(SchemeName::Polar) => Scheme::Polar,
            Some(SchemeName::Cartesian) => Scheme::Cartesian,
            None => GridOptions::default_for(v.is_radial()).scheme,
        };
        let opts = GridOptions {
            scheme,
            resolution: self.resolution(),
            radial_grading: self.grid.grading,
        };
        let radius = match self.grid.radius.or_else(|| v.support_radius()) {
            Some(r) => r,
            None => return Err(ConfigError::new("grid.radius", "required for this potential")),
        };
        opts.build(radius).map_err(|e| ConfigError::new("grid", e.to_string()))
    }

    pub fn root_options(&self) -> RootOptions {
        let scale = if self.quick { 2.0 } else { 1.0 };
        RootOptions {
            t_tol: self.solver.t_tol * scale,
            lambda_tol: self.solver.lambda_tol * scale,
            max_iter: self.solver.max_iter,
            discretization: match self.solver.discretization {
                DiscretizationName::Auto => Discretization::Auto,
                DiscretizationName::Dense => Discretization::Dense,
                DiscretizationName::Radial => Discretization::Radial,
            },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn error_paths() {
        let e = RunConfig::from_json(r#"{"potential":{"name":"disk"},"grid":{"resolution":"x"}}"#).unwrap_err();
        assert_eq!(e.path, "grid.resolution");
        let e = RunConfig::from_json(r#"{"potential":{"name":"disk"},"eps":[0.5,-1]}"#).unwrap_err();
        assert_eq!(e.path, "eps[1]");
        let e = RunConfig::from_json(r#"{"potential":{"name":"disk"},"bogus":1}"#).unwrap_err();
        assert!(e.message.contains("bogus"));
    }

    #[test]
    fn sidecar_round_trip() {
        let mut cfg = RunConfig::new(PotentialSpec::named("gaussian", &[("a", 2.0)]));
        cfg.eps = Some(vec![0.5, 0.25]);
        let side = serde_json::json!({"command": "sweep", "config": cfg.to_json()});
        assert_eq!(RunConfig::from_json(&side.to_string()).unwrap(), cfg);
        assert_eq!(RunConfig::from_json(&cfg.to_json().to_string()).unwrap(), cfg);
    }
}
