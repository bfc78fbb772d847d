//! JSON run and sweep configurations, and their translation into core types.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use dps_core::{
    AnnealProfile, ConditioningMethod, Covariance, GaussianMixturePrior, GuidanceConfig,
    ImageShape, LinearOperator, NoiseModel, SamplerConfig, SamplerKind, Schedule, VarianceMode,
};
use nalgebra::{DMatrix, DVector};

use crate::error::{HarnessError, Result};

fn default_beta_start() -> f64 {
    1e-4
}
fn default_beta_end() -> f64 {
    0.02
}
fn default_cosine_s() -> f64 {
    0.008
}
fn default_eta() -> f64 {
    0.0
}
fn default_true() -> bool {
    true
}
fn default_variance_mode() -> String {
    "beta_tilde".into()
}
fn default_model_mean_type() -> String {
    "epsilon".into()
}
fn default_anneal() -> String {
    "linear".into()
}
fn default_noise_model() -> String {
    "gaussian".into()
}
fn default_poisson_eps() -> f64 {
    1e-8
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct SamplerSection {
    pub sampler: String,
    pub steps: usize,
    pub noise_schedule: String,
    #[serde(default = "default_model_mean_type")]
    pub model_mean_type: String,
    #[serde(default = "default_true")]
    pub clip_denoised: bool,
    pub timestep_respacing: usize,
    #[serde(default = "default_eta")]
    pub eta: f64,
    #[serde(default = "default_beta_start")]
    pub beta_start: f64,
    #[serde(default = "default_beta_end")]
    pub beta_end: f64,
    #[serde(default = "default_cosine_s")]
    pub cosine_s: f64,
    #[serde(default = "default_variance_mode")]
    pub variance_mode: String,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct PriorSection {
    pub weights: Vec<f64>,
    pub means: Vec<Vec<f64>>,
    pub covariances: CovarianceSection,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub enum CovarianceSection {
    #[serde(rename = "diag")]
    Diag(Vec<Vec<f64>>),
    #[serde(rename = "full")]
    Full(Vec<Vec<Vec<f64>>>),
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct OperatorSection {
    pub kind: String,
    #[serde(default)]
    pub factor: Option<usize>,
    /// [H, W, C]
    pub shape: [usize; 3],
    #[serde(default)]
    pub mask: Option<Vec<bool>>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct MeasurementSection {
    pub sigma: f64,
    #[serde(default)]
    pub y_file: Option<PathBuf>,
    #[serde(default)]
    pub synthesize_from: Option<PathBuf>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ConditioningSection {
    pub method: String,
    #[serde(default)]
    pub scale: f64,
    #[serde(default = "default_noise_model")]
    pub noise_model: String,
    #[serde(default = "default_anneal")]
    pub anneal: String,
    #[serde(default = "default_poisson_eps")]
    pub poisson_eps: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct MetricsSection {
    pub reference_file: PathBuf,
}

/// Top-level run configuration.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub sampler: SamplerSection,
    pub prior: PriorSection,
    #[serde(default)]
    pub operator: Option<OperatorSection>,
    #[serde(default)]
    pub measurement: Option<MeasurementSection>,
    #[serde(default)]
    pub conditioning: Option<ConditioningSection>,
    #[serde(default)]
    pub metrics: Option<MetricsSection>,
    #[serde(default)]
    pub seed: u64,
}

/// Sweep specification over guidance scales and noise levels.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    #[serde(default)]
    pub base: Option<RunConfig>,
    #[serde(default)]
    pub base_file: Option<PathBuf>,
    pub scales: Vec<f64>,
    pub sigmas: Vec<f64>,
    pub chains_per_cell: usize,
    pub base_seed: u64,
}

impl RunConfig {
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| HarnessError::Config(format!("cannot read {}: {e}", path.display())))?;
        let cfg: RunConfig = serde_json::from_str(&text)
            .map_err(|e| HarnessError::Config(format!("{}: {e}", path.display())))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.sampler.model_mean_type != "epsilon" {
            return Err(HarnessError::Config(format!(
                "model_mean_type must be \"epsilon\", got {:?}",
                self.sampler.model_mean_type
            )));
        }
        if self.conditioning.is_some() && self.measurement.is_none() {
            return Err(HarnessError::Config(
                "conditioning requires a measurement section".into(),
            ));
        }
        if self.measurement.is_some() && self.operator.is_none() {
            return Err(HarnessError::Config(
                "measurement requires an operator section".into(),
            ));
        }
        if let Some(m) = &self.measurement {
            match (&m.y_file, &m.synthesize_from) {
                (Some(_), Some(_)) => {
                    return Err(HarnessError::Config(
                        "measurement: set exactly one of y_file / synthesize_from".into(),
                    ))
                }
                (None, None) => {
                    return Err(HarnessError::Config(
                        "measurement: one of y_file / synthesize_from is required".into(),
                    ))
                }
                _ => {}
            }
        }
        Ok(())
    }

    /// SHA-256 over the canonical serialized config.
    pub fn digest(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("config serializes");
        hex::encode(Sha256::digest(bytes))
    }

    /// Build the (respaced) schedule.
    pub fn build_schedule(&self) -> Result<Schedule> {
        let s = &self.sampler;
        let full = match s.noise_schedule.as_str() {
            "linear" => Schedule::linear(s.steps, s.beta_start, s.beta_end)?,
            "cosine" => Schedule::cosine(s.steps, s.cosine_s)?,
            other => {
                return Err(HarnessError::Config(format!(
                    "unknown noise_schedule {other:?}"
                )))
            }
        };
        Ok(full.respace(s.timestep_respacing)?)
    }

    pub fn build_sampler(&self) -> Result<SamplerConfig> {
        let s = &self.sampler;
        let kind = match s.sampler.as_str() {
            "ddpm" => SamplerKind::Ddpm,
            "ddim" => SamplerKind::Ddim,
            other => return Err(HarnessError::Config(format!("unknown sampler {other:?}"))),
        };
        let variance_mode = match s.variance_mode.as_str() {
            "beta_tilde" => VarianceMode::BetaTilde,
            "beta" => VarianceMode::Beta,
            other => {
                return Err(HarnessError::Config(format!(
                    "unknown variance_mode {other:?}"
                )))
            }
        };
        if !(0.0..=1.0).contains(&s.eta) {
            return Err(HarnessError::Config(format!(
                "eta {} outside [0, 1]",
                s.eta
            )));
        }
        Ok(SamplerConfig {
            kind,
            eta: s.eta,
            clip_denoised: s.clip_denoised,
            variance_mode,
        })
    }

    pub fn build_prior(&self) -> Result<GaussianMixturePrior> {
        let p = &self.prior;
        let means: Vec<DVector<f64>> = p
            .means
            .iter()
            .map(|m| DVector::from_vec(m.clone()))
            .collect();
        let covariances: Vec<Covariance> = match &p.covariances {
            CovarianceSection::Diag(rows) => rows
                .iter()
                .map(|r| Covariance::Diagonal(DVector::from_vec(r.clone())))
                .collect(),
            CovarianceSection::Full(mats) => mats
                .iter()
                .map(|m| {
                    let rows = m.len();
                    let cols = m.first().map(|r| r.len()).unwrap_or(0);
                    Covariance::Full(DMatrix::from_fn(rows, cols, |i, j| m[i][j]))
                })
                .collect(),
        };
        Ok(GaussianMixturePrior::new(
            p.weights.clone(),
            means,
            covariances,
        )?)
    }

    pub fn build_operator(&self) -> Result<Option<LinearOperator>> {
        let Some(o) = &self.operator else {
            return Ok(None);
        };
        let shape = ImageShape::new(o.shape[0], o.shape[1], o.shape[2]);
        let op = match o.kind.as_str() {
            "identity" => LinearOperator::identity(shape),
            "downsample" => {
                let factor = o.factor.ok_or_else(|| {
                    HarnessError::Config("downsample operator requires \"factor\"".into())
                })?;
                LinearOperator::downsample(shape, factor)?
            }
            "mask" => {
                let mask = o.mask.clone().ok_or_else(|| {
                    HarnessError::Config("mask operator requires \"mask\"".into())
                })?;
                LinearOperator::mask(shape, mask)?
            }
            other => {
                return Err(HarnessError::Config(format!(
                    "unknown operator kind {other:?}"
                )))
            }
        };
        Ok(Some(op))
    }

    pub fn build_guidance(&self) -> Result<Option<GuidanceConfig>> {
        let Some(c) = &self.conditioning else {
            return Ok(None);
        };
        let method = match c.method.as_str() {
            "vanilla" => ConditioningMethod::Vanilla,
            "projection" => ConditioningMethod::Projection,
            "ps" => ConditioningMethod::Ps,
            "ps_annealed" => ConditioningMethod::PsAnnealed,
            "mcg" => ConditioningMethod::Mcg,
            other => {
                return Err(HarnessError::Config(format!(
                    "unknown conditioning method {other:?}"
                )))
            }
        };
        let noise_model = match c.noise_model.as_str() {
            "gaussian" => NoiseModel::Gaussian,
            "poisson" => NoiseModel::Poisson,
            other => {
                return Err(HarnessError::Config(format!(
                    "unknown noise_model {other:?}"
                )))
            }
        };
        let anneal = match c.anneal.as_str() {
            "linear" => AnnealProfile::Linear,
            "constant" => AnnealProfile::Constant,
            other => {
                return Err(HarnessError::Config(format!(
                    "unknown anneal profile {other:?}"
                )))
            }
        };
        let cfg = GuidanceConfig {
            method,
            noise_model,
            scale: c.scale,
            anneal,
            poisson_eps: c.poisson_eps,
        };
        cfg.validate()?;
        Ok(Some(cfg))
    }
}

impl SweepSpec {
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| HarnessError::Config(format!("cannot read {}: {e}", path.display())))?;
        let spec: SweepSpec = serde_json::from_str(&text)
            .map_err(|e| HarnessError::Config(format!("{}: {e}", path.display())))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.scales.is_empty() || self.sigmas.is_empty() {
            return Err(HarnessError::Config(
                "scales and sigmas must be non-empty".into(),
            ));
        }
        if self.chains_per_cell < 1 {
            return Err(HarnessError::Config("chains_per_cell must be >= 1".into()));
        }
        match (&self.base, &self.base_file) {
            (None, None) => Err(HarnessError::Config(
                "sweep requires \"base\" or \"base_file\"".into(),
            )),
            (Some(_), Some(_)) => Err(HarnessError::Config(
                "set exactly one of \"base\" / \"base_file\"".into(),
            )),
            _ => Ok(()),
        }
    }

    /// Resolve the base run config, loading `base_file` relative to `dir`.
    /// Also returns the directory that anchors relative paths inside the
    /// base config: the base file's own directory when one is used.
    pub fn resolve_base(&self, dir: &Path) -> Result<(RunConfig, PathBuf)> {
        let (cfg, anchor) = match (&self.base, &self.base_file) {
            (Some(cfg), None) => (cfg.clone(), dir.to_path_buf()),
            (None, Some(p)) => {
                let path = if p.is_absolute() {
                    p.clone()
                } else {
                    dir.join(p)
                };
                let anchor = path
                    .parent()
                    .map(|d| d.to_path_buf())
                    .unwrap_or_else(|| dir.to_path_buf());
                (RunConfig::from_file(&path)?, anchor)
            }
            _ => unreachable!("validated"),
        };
        cfg.validate()?;
        Ok((cfg, anchor))
    }
}
