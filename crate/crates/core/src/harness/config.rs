use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::dynamics::{EpidemicParams, InitialInfection, DEFAULT_CONV_TOL, DEFAULT_T_MAX};
use crate::error::{Error, Result};
use crate::graph::{GeoParams, PhotonicParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    DegreeDist,
    ThresholdScaling,
    LoglogAsymptote,
    DynamicsSweep,
    MethodCompare,
    PhotonSweep,
    RadiusSweep,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::DegreeDist => "degree-dist",
            ExperimentKind::ThresholdScaling => "threshold-scaling",
            ExperimentKind::LoglogAsymptote => "loglog-asymptote",
            ExperimentKind::DynamicsSweep => "dynamics-sweep",
            ExperimentKind::MethodCompare => "method-compare",
            ExperimentKind::PhotonSweep => "photon-sweep",
            ExperimentKind::RadiusSweep => "radius-sweep",
        }
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Which network family a threshold pipeline covers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NetworkChoice {
    Classical,
    Quantum,
    #[default]
    Both,
}

impl NetworkChoice {
    pub fn classical(self) -> bool {
        matches!(self, NetworkChoice::Classical | NetworkChoice::Both)
    }

    pub fn quantum(self) -> bool {
        matches!(self, NetworkChoice::Quantum | NetworkChoice::Both)
    }
}

/// Waxman parameters without the node count, which comes from `n_values`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GeoConfig {
    pub r_max: f64,
    pub alpha_l: f64,
    pub beta_l: f64,
}

impl Default for GeoConfig {
    fn default() -> Self {
        let g = GeoParams::us_backbone(1);
        Self {
            r_max: g.r_max,
            alpha_l: g.alpha_l,
            beta_l: g.beta_l,
        }
    }
}

impl GeoConfig {
    pub fn with_nodes(&self, n_nodes: usize) -> GeoParams {
        GeoParams {
            r_max: self.r_max,
            alpha_l: self.alpha_l,
            beta_l: self.beta_l,
            n_nodes,
        }
    }
}

/// Photon-number, attenuation and radius grids for the sweep pipelines.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepConfig {
    pub n_photons: Vec<u64>,
    pub gammas: Vec<f64>,
    pub r_max_values: Vec<f64>,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            n_photons: vec![1, 10, 100, 1_000, 10_000, 100_000, 1_000_000],
            gammas: vec![0.1, 0.15, 0.2],
            r_max_values: vec![200.0, 400.0, 800.0, 1600.0],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DynamicsConfig {
    /// Step cap for the mNLDS recursion.
    pub t_max: usize,
    pub conv_tol: f64,
    pub direct_runs: usize,
    /// Steps simulated per Monte Carlo run.
    pub direct_t_max: usize,
    /// Trailing fraction of the Monte Carlo series averaged into its
    /// steady-state estimate.
    pub steady_window: f64,
    /// Outer ensemble index of the topology used.
    pub instance: usize,
}

impl Default for DynamicsConfig {
    fn default() -> Self {
        Self {
            t_max: DEFAULT_T_MAX,
            conv_tol: DEFAULT_CONV_TOL,
            direct_runs: 20,
            direct_t_max: 500,
            steady_window: 0.1,
            instance: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FitConfig {
    /// Smallest N included in the `c / N` fits.
    pub min_n: usize,
    /// Number of largest-N points in the log-log slope fit.
    pub loglog_points: usize,
}

impl Default for FitConfig {
    fn default() -> Self {
        Self {
            min_n: 0,
            loglog_points: 3,
        }
    }
}

fn default_epidemic() -> EpidemicParams {
    EpidemicParams {
        beta: 0.05,
        delta: 0.0,
        initial_infection: InitialInfection::Uniform(0.5),
    }
}

fn default_delta_ratios() -> Vec<f64> {
    vec![0.1, 0.4, 0.5, 1.0]
}

fn default_ensemble_size() -> usize {
    50
}

fn default_inner_samples() -> usize {
    20
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    #[serde(default)]
    pub network: NetworkChoice,
    #[serde(default)]
    pub geo: GeoConfig,
    #[serde(default = "PhotonicParams::telecom")]
    pub photonic: PhotonicParams,
    #[serde(default = "default_epidemic")]
    pub epidemic: EpidemicParams,
    pub n_values: Vec<usize>,
    #[serde(default = "default_delta_ratios")]
    pub delta_ratios: Vec<f64>,
    #[serde(default = "default_ensemble_size")]
    pub ensemble_size: usize,
    #[serde(default = "default_inner_samples")]
    pub inner_samples: usize,
    pub master_seed: u64,
    /// Falls back to a caller-supplied directory when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    /// Size of the worker pool; all cores when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub workers: Option<usize>,
    #[serde(default)]
    pub sweep: SweepConfig,
    #[serde(default)]
    pub dynamics: DynamicsConfig,
    #[serde(default)]
    pub fit: FitConfig,
}

impl ExperimentConfig {
    /// Parses and validates a TOML document. `origin` names it in messages.
    pub fn from_toml_str(text: &str, origin: &str) -> Result<Self> {
        let cfg: Self =
            toml::from_str(text).map_err(|e| Error::Config(format!("{origin}: {e}")))?;
        cfg.validate()
            .map_err(|e| Error::Config(format!("{origin}: {}", strip_prefix(e))))?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml_str(&text, &path.display().to_string())
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config is always serializable")
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |key: &str, what: &str| Err(Error::Config(format!("`{key}`: {what}")));
        if self.n_values.is_empty() {
            return bad("n_values", "must not be empty");
        }
        if self.n_values.contains(&0) {
            return bad("n_values", "node counts must be >= 1");
        }
        if self.delta_ratios.is_empty() {
            return bad("delta_ratios", "must not be empty");
        }
        if self
            .delta_ratios
            .iter()
            .any(|r| !(*r >= 0.0 && r.is_finite()))
        {
            return bad("delta_ratios", "ratios must be finite and >= 0");
        }
        if self.ensemble_size == 0 {
            return bad("ensemble_size", "must be >= 1");
        }
        if self.workers == Some(0) {
            return bad("workers", "must be >= 1");
        }
        self.geo
            .with_nodes(1)
            .validate()
            .map_err(|e| Error::Config(format!("`geo`: {}", strip_prefix(e))))?;
        self.photonic
            .validate()
            .map_err(|e| Error::Config(format!("`photonic`: {}", strip_prefix(e))))?;
        self.epidemic
            .validate()
            .map_err(|e| Error::Config(format!("`epidemic`: {}", strip_prefix(e))))?;

        match self.experiment {
            ExperimentKind::MethodCompare if self.inner_samples == 0 => {
                return bad("inner_samples", "must be >= 1");
            }
            ExperimentKind::DynamicsSweep => {
                if self.n_values.len() != 1 {
                    return bad("n_values", "dynamics-sweep takes exactly one N");
                }
                let d = &self.dynamics;
                if d.t_max == 0 || d.direct_t_max == 0 {
                    return bad("dynamics", "t_max and direct_t_max must be >= 1");
                }
                if d.direct_runs == 0 {
                    return bad("dynamics.direct_runs", "must be >= 1");
                }
                if !(d.conv_tol > 0.0) {
                    return bad("dynamics.conv_tol", "must be > 0");
                }
                if !(d.steady_window > 0.0 && d.steady_window <= 1.0) {
                    return bad("dynamics.steady_window", "must lie in (0, 1]");
                }
            }
            ExperimentKind::PhotonSweep | ExperimentKind::RadiusSweep => {
                let s = &self.sweep;
                if s.n_photons.is_empty() || s.gammas.is_empty() {
                    return bad("sweep", "n_photons and gammas must not be empty");
                }
                if s.n_photons.contains(&0) {
                    return bad("sweep.n_photons", "photon counts must be >= 1");
                }
                if s.gammas.iter().any(|g| !(*g >= 0.0 && g.is_finite())) {
                    return bad("sweep.gammas", "attenuations must be finite and >= 0");
                }
                if self.experiment == ExperimentKind::RadiusSweep {
                    if s.r_max_values.is_empty() {
                        return bad("sweep.r_max_values", "must not be empty");
                    }
                    if s.r_max_values.iter().any(|r| !(*r > 0.0 && r.is_finite())) {
                        return bad("sweep.r_max_values", "radii must be finite and > 0");
                    }
                }
            }
            ExperimentKind::LoglogAsymptote if self.fit.loglog_points < 3 => {
                return bad("fit.loglog_points", "must be >= 3");
            }
            _ => {}
        }
        Ok(())
    }
}

fn strip_prefix(e: Error) -> String {
    match e {
        Error::InvalidArgument(m) | Error::Config(m) => m,
        other => other.to_string(),
    }
}
