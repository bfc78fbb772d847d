//! Image fidelity metrics (PSNR, SSIM) and the combined selection score.
//!
//! All metrics operate on images in [0, 1], flattened row-major channel-last.

use crate::error::{DpsError, Result};
use crate::operators::ImageShape;

/// Uniform SSIM window size, fixed so small fixtures stay well-defined.
pub const SSIM_WINDOW: usize = 7;
const SSIM_K1: f64 = 0.01;
const SSIM_K2: f64 = 0.03;
/// Cap applied to PSNR inside the combined score so perfect reconstructions
/// stay finite.
pub const PSNR_CAP_DB: f64 = 100.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricReport {
    pub psnr_db: f64,
    pub ssim: f64,
    pub combined: f64,
}

/// Peak signal-to-noise ratio in dB for unit data range; infinite when the
/// images are identical.
pub fn psnr(x: &[f64], reference: &[f64]) -> Result<f64> {
    if x.len() != reference.len() || x.is_empty() {
        return Err(DpsError::ShapeMismatch(format!(
            "psnr inputs of length {} and {}",
            x.len(),
            reference.len()
        )));
    }
    let mse = x
        .iter()
        .zip(reference)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        / x.len() as f64;
    if mse == 0.0 {
        Ok(f64::INFINITY)
    } else {
        Ok(10.0 * (1.0 / mse).log10())
    }
}

/// Mean local SSIM with a uniform `7x7` window, per-channel averaged,
/// data range 1.0.
pub fn ssim(x: &[f64], reference: &[f64], shape: ImageShape) -> Result<f64> {
    if x.len() != shape.len() || reference.len() != shape.len() {
        return Err(DpsError::ShapeMismatch(format!(
            "ssim inputs of length {}/{} for shape size {}",
            x.len(),
            reference.len(),
            shape.len()
        )));
    }
    let w = SSIM_WINDOW;
    if shape.height < w || shape.width < w {
        return Err(DpsError::ImageTooSmall(format!(
            "{}x{} image smaller than {w}x{w} window",
            shape.height, shape.width
        )));
    }
    let c1 = (SSIM_K1 * 1.0f64).powi(2);
    let c2 = (SSIM_K2 * 1.0f64).powi(2);
    let n_win = (w * w) as f64;
    let mut total = 0.0;
    let mut count = 0usize;
    for ch in 0..shape.channels {
        for r0 in 0..=(shape.height - w) {
            for c0 in 0..=(shape.width - w) {
                let mut sx = 0.0;
                let mut sy = 0.0;
                let mut sxx = 0.0;
                let mut syy = 0.0;
                let mut sxy = 0.0;
                for dr in 0..w {
                    for dc in 0..w {
                        let idx = ((r0 + dr) * shape.width + c0 + dc) * shape.channels + ch;
                        let a = x[idx];
                        let b = reference[idx];
                        sx += a;
                        sy += b;
                        sxx += a * a;
                        syy += b * b;
                        sxy += a * b;
                    }
                }
                let mx = sx / n_win;
                let my = sy / n_win;
                let vx = sxx / n_win - mx * mx;
                let vy = syy / n_win - my * my;
                let cov = sxy / n_win - mx * my;
                let num = (2.0 * mx * my + c1) * (2.0 * cov + c2);
                let den = (mx * mx + my * my + c1) * (vx + vy + c2);
                total += num / den;
                count += 1;
            }
        }
    }
    Ok(total / count as f64)
}

/// `min(psnr, 100)/40 + ssim`.
pub fn combined_score(psnr_db: f64, ssim: f64) -> f64 {
    psnr_db.min(PSNR_CAP_DB) / 40.0 + ssim
}

/// Full report for a reconstruction against its reference.
pub fn report(x: &[f64], reference: &[f64], shape: ImageShape) -> Result<MetricReport> {
    let p = psnr(x, reference)?;
    let s = ssim(x, reference, shape)?;
    Ok(MetricReport {
        psnr_db: p,
        ssim: s,
        combined: combined_score(p, s),
    })
}
