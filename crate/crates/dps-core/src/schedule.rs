//! Diffusion noise schedules: beta sequences, cumulative signal fractions,
//! and timestep respacing.

use nalgebra::DVector;

use crate::error::{DpsError, Result};

/// A diffusion noise schedule over `T` steps.
///
/// Time is zero-based and `t = 0` is the least-noisy step, so
/// `alpha_bars[t] = prod_{s<=t} (1 - betas[s])` is strictly decreasing in `t`.
/// Products are accumulated in `f64`; `alpha_bar` for T = 1000 underflows in
/// single precision.
#[derive(Debug, Clone, PartialEq)]
pub struct Schedule {
    betas: Vec<f64>,
    alphas: Vec<f64>,
    alpha_bars: Vec<f64>,
    respaced_indices: Vec<usize>,
}

impl Schedule {
    fn from_betas(betas: Vec<f64>) -> Result<Self> {
        for (t, &b) in betas.iter().enumerate() {
            if !(b > 0.0 && b < 1.0) {
                return Err(DpsError::InvalidBounds(format!(
                    "beta[{t}] = {b} outside (0, 1)"
                )));
            }
        }
        let alphas: Vec<f64> = betas.iter().map(|b| 1.0 - b).collect();
        let mut alpha_bars = Vec::with_capacity(betas.len());
        let mut acc = 1.0f64;
        for &a in &alphas {
            acc *= a;
            alpha_bars.push(acc);
        }
        let respaced_indices = (0..betas.len()).collect();
        Ok(Self {
            betas,
            alphas,
            alpha_bars,
            respaced_indices,
        })
    }

    /// Linear beta schedule interpolating `beta_start..=beta_end` over `T` steps.
    pub fn linear(t_count: usize, beta_start: f64, beta_end: f64) -> Result<Self> {
        if t_count < 1 {
            return Err(DpsError::InvalidBounds("T must be >= 1".into()));
        }
        if !(beta_start > 0.0 && beta_start <= beta_end && beta_end < 1.0) {
            return Err(DpsError::InvalidBounds(format!(
                "require 0 < beta_start <= beta_end < 1, got ({beta_start}, {beta_end})"
            )));
        }
        let betas = if t_count == 1 {
            vec![beta_start]
        } else {
            (0..t_count)
                .map(|t| {
                    beta_start + (beta_end - beta_start) * t as f64 / (t_count - 1) as f64
                })
                .collect()
        };
        Self::from_betas(betas)
    }

    /// Cosine schedule: `alpha_bar(t) = f(t+1)/f(0)` with
    /// `f(u) = cos^2(((u/T + s)/(1 + s)) * pi/2)`. Betas are clamped at 0.999.
    pub fn cosine(t_count: usize, s: f64) -> Result<Self> {
        if t_count < 1 {
            return Err(DpsError::InvalidBounds("T must be >= 1".into()));
        }
        if s <= 0.0 {
            return Err(DpsError::InvalidBounds(format!("offset s = {s} must be > 0")));
        }
        let f = |u: f64| {
            let arg = (u / t_count as f64 + s) / (1.0 + s) * std::f64::consts::FRAC_PI_2;
            arg.cos().powi(2)
        };
        let f0 = f(0.0);
        let mut betas = Vec::with_capacity(t_count);
        let mut prev_bar = 1.0;
        for t in 0..t_count {
            let bar = f((t + 1) as f64) / f0;
            let beta = (1.0 - bar / prev_bar).min(0.999);
            betas.push(beta);
            prev_bar = bar;
        }
        Self::from_betas(betas)
    }

    /// Number of diffusion steps on this schedule's own time axis.
    pub fn len(&self) -> usize {
        self.betas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.betas.is_empty()
    }

    pub fn betas(&self) -> &[f64] {
        &self.betas
    }

    pub fn alphas(&self) -> &[f64] {
        &self.alphas
    }

    pub fn alpha_bars(&self) -> &[f64] {
        &self.alpha_bars
    }

    /// Indices into the original schedule this schedule was respaced from.
    /// The identity mapping for a schedule built directly.
    pub fn respaced_indices(&self) -> &[usize] {
        &self.respaced_indices
    }

    pub fn beta(&self, t: usize) -> f64 {
        self.betas[t]
    }

    pub fn alpha(&self, t: usize) -> f64 {
        self.alphas[t]
    }

    pub fn alpha_bar(&self, t: usize) -> f64 {
        self.alpha_bars[t]
    }

    /// `alpha_bar(t - 1)` with the convention `alpha_bar(-1) = 1`.
    pub fn alpha_bar_prev(&self, t: usize) -> f64 {
        if t == 0 {
            1.0
        } else {
            self.alpha_bars[t - 1]
        }
    }

    fn check_t(&self, t: usize) -> Result<()> {
        if t >= self.len() {
            return Err(DpsError::TimestepOutOfRange {
                t,
                t_max: self.len(),
            });
        }
        Ok(())
    }

    /// Select `count` evenly spaced timesteps (always including 0) and rebuild
    /// betas so the respaced `alpha_bars` match the originals at the selected
    /// indices.
    pub fn respace(&self, count: usize) -> Result<Schedule> {
        let t_count = self.len();
        if count < 1 || count > t_count {
            return Err(DpsError::InvalidCount { count, t: t_count });
        }
        let indices: Vec<usize> = if count == 1 {
            vec![0]
        } else {
            (0..count)
                .map(|i| {
                    ((i * (t_count - 1)) as f64 / (count - 1) as f64).round() as usize
                })
                .collect()
        };
        let mut betas = Vec::with_capacity(count);
        let mut prev_idx: Option<usize> = None;
        for &idx in &indices {
            // Consecutive indices keep the original beta bit-exactly; gaps
            // fold the skipped alphas into one step via the alpha_bar ratio.
            let beta = match prev_idx {
                Some(p) if idx == p + 1 => self.betas[idx],
                Some(p) => 1.0 - self.alpha_bars[idx] / self.alpha_bars[p],
                None => {
                    if idx == 0 {
                        self.betas[0]
                    } else {
                        1.0 - self.alpha_bars[idx]
                    }
                }
            };
            betas.push(beta);
            prev_idx = Some(idx);
        }
        let alphas: Vec<f64> = betas.iter().map(|b| 1.0 - b).collect();
        let alpha_bars: Vec<f64> = indices.iter().map(|&i| self.alpha_bars[i]).collect();
        Ok(Schedule {
            betas,
            alphas,
            alpha_bars,
            respaced_indices: indices,
        })
    }

    /// Forward diffusion draw: `sqrt(alpha_bar_t) x0 + sqrt(1 - alpha_bar_t) noise`.
    pub fn q_sample(&self, x0: &DVector<f64>, t: usize, noise: &DVector<f64>) -> Result<DVector<f64>> {
        self.check_t(t)?;
        if x0.len() != noise.len() {
            return Err(DpsError::DimensionMismatch {
                expected: x0.len(),
                got: noise.len(),
            });
        }
        let bar = self.alpha_bars[t];
        Ok(x0 * bar.sqrt() + noise * (1.0 - bar).sqrt())
    }
}
