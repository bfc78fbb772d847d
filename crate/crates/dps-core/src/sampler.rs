//! Reverse-diffusion sampling: DDPM ancestral and DDIM steps, and the full
//! guided chain loop.

use nalgebra::DVector;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::conditioning::{apply_conditioning, GuidanceConfig};
use crate::error::{DpsError, Result};
use crate::operators::{LinearOperator, Measurement};
use crate::prior::{DenoiserOutput, GaussianMixturePrior};
use crate::schedule::Schedule;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SamplerKind {
    Ddpm,
    Ddim,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VarianceMode {
    /// Posterior variance `beta_tilde_t = (1 - abar_{t-1}) / (1 - abar_t) * beta_t`.
    BetaTilde,
    /// Upper-bound variance `beta_t`.
    Beta,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SamplerConfig {
    pub kind: SamplerKind,
    /// DDIM stochasticity in [0, 1]; ignored for DDPM.
    pub eta: f64,
    pub clip_denoised: bool,
    pub variance_mode: VarianceMode,
}

impl SamplerConfig {
    pub fn ddpm() -> Self {
        Self {
            kind: SamplerKind::Ddpm,
            eta: 0.0,
            clip_denoised: true,
            variance_mode: VarianceMode::BetaTilde,
        }
    }

    pub fn ddim(eta: f64) -> Self {
        Self {
            kind: SamplerKind::Ddim,
            eta,
            clip_denoised: true,
            variance_mode: VarianceMode::BetaTilde,
        }
    }
}

/// One reverse step's proposal and intermediates.
#[derive(Debug, Clone)]
pub struct StepOutput {
    pub x_prev: DVector<f64>,
    /// The step's `pred_xstart` (clamped to [-1, 1] when clipping is on).
    pub x0_hat: DVector<f64>,
    pub mean: DVector<f64>,
    pub log_variance: f64,
}

/// Final chain state: the sample and the per-step guided residual trace.
#[derive(Debug, Clone)]
pub struct ChainOutput {
    pub sample: DVector<f64>,
    /// `(t, ||y - A(x0_hat)||_2)` per step, empty for unconditional runs.
    pub residual_trace: Vec<(usize, f64)>,
    pub steps: usize,
}

/// Everything a guided chain needs beyond the prior and sampler.
#[derive(Debug, Clone, Copy)]
pub struct Guidance<'a> {
    pub config: &'a GuidanceConfig,
    pub operator: &'a LinearOperator,
    pub measurement: &'a Measurement,
}

fn clip(x: &DVector<f64>) -> DVector<f64> {
    x.map(|v| v.clamp(-1.0, 1.0))
}

/// One DDPM ancestral step at time `t` given a denoiser query at `(x_t, t)`.
pub fn ddpm_step<R: Rng + ?Sized>(
    sched: &Schedule,
    cfg: &SamplerConfig,
    x_t: &DVector<f64>,
    t: usize,
    den: &DenoiserOutput,
    rng: &mut R,
) -> Result<StepOutput> {
    if t >= sched.len() {
        return Err(DpsError::TimestepOutOfRange {
            t,
            t_max: sched.len(),
        });
    }
    let x0_hat = if cfg.clip_denoised {
        clip(&den.x0_hat)
    } else {
        den.x0_hat.clone()
    };
    let beta = sched.beta(t);
    let alpha = sched.alpha(t);
    let bar = sched.alpha_bar(t);
    let bar_prev = sched.alpha_bar_prev(t);
    let coef_x0 = bar_prev.sqrt() * beta / (1.0 - bar);
    let coef_xt = alpha.sqrt() * (1.0 - bar_prev) / (1.0 - bar);
    let mean = &x0_hat * coef_x0 + x_t * coef_xt;
    let variance = match cfg.variance_mode {
        VarianceMode::BetaTilde => (1.0 - bar_prev) / (1.0 - bar) * beta,
        VarianceMode::Beta => beta,
    };
    let x_prev = if t == 0 {
        mean.clone()
    } else {
        let z = DVector::from_fn(x_t.len(), |_, _| rng.sample::<f64, _>(StandardNormal));
        &mean + z * variance.sqrt()
    };
    Ok(StepOutput {
        x_prev,
        x0_hat,
        mean,
        log_variance: variance.ln(),
    })
}

/// One DDIM step from `t` to `t_next` (`t_next = -1` denotes the final step
/// with `abar = 1`).
pub fn ddim_step<R: Rng + ?Sized>(
    sched: &Schedule,
    cfg: &SamplerConfig,
    x_t: &DVector<f64>,
    t: usize,
    t_next: i64,
    den: &DenoiserOutput,
    rng: &mut R,
) -> Result<StepOutput> {
    if t >= sched.len() {
        return Err(DpsError::TimestepOutOfRange {
            t,
            t_max: sched.len(),
        });
    }
    if t_next >= t as i64 {
        return Err(DpsError::InvalidStepOrder { t, t_next });
    }
    let _ = x_t;
    let x0_hat = if cfg.clip_denoised {
        clip(&den.x0_hat)
    } else {
        den.x0_hat.clone()
    };
    let bar = sched.alpha_bar(t);
    let bar_next = if t_next < 0 {
        1.0
    } else {
        sched.alpha_bar(t_next as usize)
    };
    let sigma = cfg.eta
        * ((1.0 - bar_next) / (1.0 - bar)).sqrt()
        * (1.0 - bar / bar_next).sqrt();
    let dir_coef = (1.0 - bar_next - sigma * sigma).max(0.0).sqrt();
    let mut x_prev = &x0_hat * bar_next.sqrt() + &den.eps_hat * dir_coef;
    let mean = x_prev.clone();
    if sigma > 0.0 {
        let z = DVector::from_fn(x0_hat.len(), |_, _| rng.sample::<f64, _>(StandardNormal));
        x_prev += z * sigma;
    }
    Ok(StepOutput {
        x_prev,
        x0_hat,
        mean,
        log_variance: (sigma * sigma).ln(),
    })
}

fn check_finite(x: &DVector<f64>, t: usize) -> Result<()> {
    if x.iter().any(|v| !v.is_finite()) {
        return Err(DpsError::NonFinite(format!(
            "iterate contains NaN/Inf at timestep {t}"
        )));
    }
    Ok(())
}

/// Run one full reverse chain from `x_T ~ N(0, I)` down to `x_0`, applying
/// measurement guidance when configured.
pub fn run_chain<R: Rng + ?Sized>(
    sched: &Schedule,
    cfg: &SamplerConfig,
    prior: &GaussianMixturePrior,
    guidance: Option<Guidance<'_>>,
    rng: &mut R,
) -> Result<ChainOutput> {
    let d = prior.dim();
    if let Some(g) = &guidance {
        g.config.validate()?;
        if g.operator.input_dim() != d {
            return Err(DpsError::DimensionMismatch {
                expected: d,
                got: g.operator.input_dim(),
            });
        }
        if g.measurement.y.len() != g.operator.output_dim() {
            return Err(DpsError::DimensionMismatch {
                expected: g.operator.output_dim(),
                got: g.measurement.y.len(),
            });
        }
    }
    let t_count = sched.len();
    let mut x = DVector::from_fn(d, |_, _| rng.sample::<f64, _>(StandardNormal));
    let mut trace = Vec::new();
    for t in (0..t_count).rev() {
        let den = prior.denoise(sched, &x, t)?;
        let step = match cfg.kind {
            SamplerKind::Ddpm => ddpm_step(sched, cfg, &x, t, &den, rng)?,
            SamplerKind::Ddim => ddim_step(sched, cfg, &x, t, t as i64 - 1, &den, rng)?,
        };
        x = match &guidance {
            None => step.x_prev.clone(),
            Some(g) => {
                let residual =
                    (&g.measurement.y - g.operator.forward(&step.x0_hat)?).norm();
                trace.push((t, residual));
                let (next, _) = apply_conditioning(
                    g.config,
                    prior,
                    sched,
                    g.operator,
                    &step,
                    &x,
                    t,
                    g.measurement,
                    rng,
                )?;
                next
            }
        };
        check_finite(&x, t)?;
    }
    Ok(ChainOutput {
        sample: x,
        residual_trace: trace,
        steps: t_count,
    })
}
