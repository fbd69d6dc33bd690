use std::collections::HashSet;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use langevin_coupling::dynamics::{
    lj_unit_sigma, make_cosine_well, make_harmonic, make_lj_cluster, DEFAULT_TILT_EPS,
};
use langevin_coupling::estimators::SweepOptions;
use langevin_coupling::{CouplingKind, Forcing, ModelSpec, Observable, SimParams};

use crate::error::{CliError, Result};

const BUNDLED: [(&str, &str); 3] = [
    (
        "harmonic_sweep",
        include_str!("../configs/harmonic_sweep.toml"),
    ),
    ("lj_small", include_str!("../configs/lj_small.toml")),
    ("cosine", include_str!("../configs/cosine.toml")),
];

pub fn bundled_names() -> impl Iterator<Item = &'static str> {
    BUNDLED.iter().map(|(n, _)| *n)
}

pub fn bundled(name: &str) -> Option<&'static str> {
    BUNDLED.iter().find(|(n, _)| *n == name).map(|(_, s)| *s)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ModelConfig {
    // Empty braces rather than a unit variant so unknown keys are still rejected.
    Harmonic {},
    CosineWell {
        half_width: f64,
    },
    LjCluster {
        n_particles: usize,
        confinement: f64,
        box_half_width: f64,
        epsilon: f64,
        /// Defaults to `2^{-1/6}`, which puts the pair minimum at distance 1.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        sigma: Option<f64>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ForcingKey {
    Zero,
    LinearShear,
    SinusoidalShear,
    LjShear,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ObservableConfig {
    Cov {},
    Mobility {
        /// Defaults to the LJ box half-width.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        box_half_width: Option<f64>,
    },
    Tilt {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        eps: Option<f64>,
    },
}

fn default_batches() -> usize {
    langevin_coupling::estimators::DEFAULT_BATCHES
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub forcing: ForcingKey,
    pub kinds: Vec<CouplingKind>,
    pub beta: f64,
    pub dt: f64,
    pub etas: Vec<f64>,
    pub n_steps: u64,
    pub n_burnin: u64,
    pub replicas: u64,
    pub seed: u64,
    pub output_dir: PathBuf,
    #[serde(default = "default_batches")]
    pub n_batches: usize,
    /// Subtracted from the observable by standard NEMD.
    #[serde(default)]
    pub r0_mean: f64,
    pub model: ModelConfig,
    pub observable: ObservableConfig,
}

/// A validated configuration turned into simulation inputs.
#[derive(Debug, Clone)]
pub struct Experiment {
    pub model: ModelSpec,
    pub observable: Observable,
    pub params: SimParams,
    pub options: SweepOptions,
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str, origin: &str) -> Result<Self> {
        let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| CliError::Parse {
            path: origin.to_string(),
            message: e.to_string(),
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config serializes to TOML")
    }

    /// Reads `source` as a file path, falling back to a bundled config name.
    pub fn load(source: &str) -> Result<Self> {
        let path = Path::new(source);
        if path.is_file() {
            let text = std::fs::read_to_string(path).map_err(|e| CliError::Io {
                path: path.to_path_buf(),
                source: e,
            })?;
            return Self::from_toml_str(&text, source);
        }
        match bundled(source) {
            Some(text) => Self::from_toml_str(text, &format!("bundled:{source}")),
            None => Err(CliError::config(format!(
                "{source} is neither a file nor a bundled config ({})",
                bundled_names().collect::<Vec<_>>().join(", ")
            ))),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |v: f64| v > 0.0 && v.is_finite();
        if !positive(self.dt) {
            return Err(CliError::config(format!("dt must be > 0, got {}", self.dt)));
        }
        if !positive(self.beta) {
            return Err(CliError::config(format!(
                "beta must be > 0, got {}",
                self.beta
            )));
        }
        if self.replicas == 0 {
            return Err(CliError::config("replicas must be >= 1"));
        }
        if self.n_steps == 0 {
            return Err(CliError::config("n_steps must be >= 1"));
        }
        if self.kinds.is_empty() {
            return Err(CliError::config(
                "kinds must list at least one coupling kind",
            ));
        }
        if self.kinds.iter().collect::<HashSet<_>>().len() != self.kinds.len() {
            return Err(CliError::config("kinds contains duplicates"));
        }
        if self.etas.is_empty() {
            return Err(CliError::config("etas must not be empty"));
        }
        if let Some(e) = self.etas.iter().find(|e| **e == 0.0 || !e.is_finite()) {
            return Err(CliError::config(format!(
                "etas must be finite and nonzero, got {e}"
            )));
        }
        let distinct: HashSet<u64> = self.etas.iter().map(|e| e.to_bits()).collect();
        if distinct.len() != self.etas.len() {
            return Err(CliError::config("etas contains duplicates"));
        }
        if self.n_batches < 2 {
            return Err(CliError::config("n_batches must be >= 2"));
        }
        if !self.r0_mean.is_finite() {
            return Err(CliError::config("r0_mean must be finite"));
        }
        self.build().map(|_| ())
    }

    fn lj_box(&self) -> Option<f64> {
        match self.model {
            ModelConfig::LjCluster { box_half_width, .. } => Some(box_half_width),
            _ => None,
        }
    }

    pub fn build(&self) -> Result<Experiment> {
        let model = match self.model {
            ModelConfig::Harmonic {} => make_harmonic(),
            ModelConfig::CosineWell { half_width } => make_cosine_well(half_width)?,
            ModelConfig::LjCluster {
                n_particles,
                confinement,
                box_half_width,
                epsilon,
                sigma,
            } => make_lj_cluster(
                n_particles,
                confinement,
                box_half_width,
                epsilon,
                sigma.unwrap_or_else(lj_unit_sigma),
            )?,
        };
        let forcing = match self.forcing {
            ForcingKey::Zero => Forcing::Zero,
            ForcingKey::LinearShear => Forcing::linear_shear(),
            ForcingKey::SinusoidalShear => Forcing::sinusoidal_shear(),
            ForcingKey::LjShear => Forcing::lj_shear(
                self.lj_box()
                    .ok_or_else(|| CliError::config("forcing lj_shear needs model lj_cluster"))?,
            ),
        };
        let observable = match self.observable {
            ObservableConfig::Cov {} => Observable::r_cov(),
            ObservableConfig::Mobility { box_half_width } => {
                let l = box_half_width.or_else(|| self.lj_box()).ok_or_else(|| {
                    CliError::config("observable mobility needs box_half_width outside lj_cluster")
                })?;
                if !(l > 0.0 && l.is_finite()) {
                    return Err(CliError::config("mobility box_half_width must be > 0"));
                }
                Observable::r_mobility(l)
            }
            ObservableConfig::Tilt { eps } => {
                let eps = eps.unwrap_or(DEFAULT_TILT_EPS);
                if !(eps > 0.0 && eps.is_finite()) {
                    return Err(CliError::config("tilt eps must be > 0"));
                }
                Observable::r_tilt(eps)
            }
        };
        let params = SimParams::new(self.dt, self.beta, self.etas[0])
            .with_steps(self.n_steps, self.n_burnin)
            .with_seed(self.seed);
        params.validate()?;
        Ok(Experiment {
            model: model.with_forcing(forcing),
            observable,
            params,
            options: SweepOptions {
                n_batches: self.n_batches,
                r0_mean: self.r0_mean,
            },
        })
    }
}
