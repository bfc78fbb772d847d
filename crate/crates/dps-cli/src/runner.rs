//! Single-run execution: build everything from a config, run the chain,
//! compute metrics, and persist artifacts.

use std::path::{Path, PathBuf};

use nalgebra::DVector;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};

use dps_core::{metrics, run_chain, Guidance, ImageShape, Measurement};

use crate::config::RunConfig;
use crate::error::{HarnessError, Result};
use crate::io;

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct MetricsRecord {
    /// Infinite PSNR (identical images) serializes as JSON null.
    pub psnr_db: f64,
    pub ssim: f64,
    pub combined: f64,
}

/// Contents of `result.json`.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct RunRecord {
    pub seed: u64,
    pub config_digest: String,
    pub steps: usize,
    pub guided: bool,
    pub metrics: Option<MetricsRecord>,
}

/// In-memory result of one run.
#[derive(Debug, Clone)]
pub struct RunResult {
    pub record: RunRecord,
    /// Final sample in the internal [-1, 1] domain.
    pub sample: DVector<f64>,
    pub residual_trace: Vec<(usize, f64)>,
    /// Image shape when the run has an operator (used for PGM output).
    pub shape: Option<ImageShape>,
}

fn resolve(base_dir: &Path, p: &Path) -> PathBuf {
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base_dir.join(p)
    }
}

/// Execute one run. `base_dir` anchors relative paths in the config.
pub fn run_single(cfg: &RunConfig, base_dir: &Path) -> Result<RunResult> {
    cfg.validate()?;
    let sched = cfg.build_schedule()?;
    let sampler = cfg.build_sampler()?;
    let prior = cfg.build_prior()?;
    let operator = cfg.build_operator()?;
    let guidance_cfg = cfg.build_guidance()?;

    if let Some(op) = &operator {
        if op.input_dim() != prior.dim() {
            return Err(HarnessError::Config(format!(
                "operator input dim {} != prior dim {}",
                op.input_dim(),
                prior.dim()
            )));
        }
    }

    // Measurement synthesis uses a separate rng stream so unconditional and
    // guided runs with the same seed share chain noise bit-exactly.
    let measurement: Option<Measurement> = match (&cfg.measurement, &operator) {
        (Some(m), Some(op)) => {
            let meas = if let Some(yf) = &m.y_file {
                let y = io::to_internal(&io::read_vector(&resolve(base_dir, yf))?);
                if y.len() != op.output_dim() {
                    return Err(HarnessError::Config(format!(
                        "y_file has {} values, operator output dim is {}",
                        y.len(),
                        op.output_dim()
                    )));
                }
                Measurement { y, sigma: m.sigma }
            } else {
                let src = m.synthesize_from.as_ref().expect("validated");
                let x = io::to_internal(&io::read_vector(&resolve(base_dir, src))?);
                if x.len() != op.input_dim() {
                    return Err(HarnessError::Config(format!(
                        "synthesize_from has {} values, operator input dim is {}",
                        x.len(),
                        op.input_dim()
                    )));
                }
                let mut synth_rng = ChaCha12Rng::seed_from_u64(cfg.seed);
                synth_rng.set_stream(1);
                op.measure(&x, m.sigma, &mut synth_rng)?
            };
            Some(meas)
        }
        _ => None,
    };

    let mut chain_rng = ChaCha12Rng::seed_from_u64(cfg.seed);
    let guidance = match (&guidance_cfg, &operator, &measurement) {
        (Some(gc), Some(op), Some(meas)) => Some(Guidance {
            config: gc,
            operator: op,
            measurement: meas,
        }),
        _ => None,
    };
    let out = run_chain(&sched, &sampler, &prior, guidance, &mut chain_rng)?;

    let metrics_record = match &cfg.metrics {
        None => None,
        Some(ms) => {
            let op = operator.as_ref().ok_or_else(|| {
                HarnessError::Config("metrics require an operator section (for the image shape)".into())
            })?;
            let reference = io::read_vector(&resolve(base_dir, &ms.reference_file))?;
            if reference.len() != prior.dim() {
                return Err(HarnessError::Config(format!(
                    "reference has {} values, prior dim is {}",
                    reference.len(),
                    prior.dim()
                )));
            }
            let sample_unit = io::to_unit(&out.sample);
            let report = metrics::report(
                sample_unit.as_slice(),
                reference.as_slice(),
                op.shape(),
            )?;
            Some(MetricsRecord {
                psnr_db: report.psnr_db,
                ssim: report.ssim,
                combined: report.combined,
            })
        }
    };

    Ok(RunResult {
        record: RunRecord {
            seed: cfg.seed,
            config_digest: cfg.digest(),
            steps: out.steps,
            guided: !out.residual_trace.is_empty(),
            metrics: metrics_record,
        },
        sample: out.sample,
        residual_trace: out.residual_trace,
        shape: operator.map(|o| o.shape()),
    })
}

/// Write `result.json`, `sample.csv`, `trace.csv` and (for single-channel
/// image runs) `sample.pgm` into `out_dir`.
pub fn write_artifacts(result: &RunResult, out_dir: &Path) -> Result<()> {
    std::fs::create_dir_all(out_dir)
        .map_err(|e| HarnessError::Io(format!("{}: {e}", out_dir.display())))?;
    let json = serde_json::to_string_pretty(&result.record).expect("record serializes");
    std::fs::write(out_dir.join("result.json"), json + "\n")
        .map_err(|e| HarnessError::Io(e.to_string()))?;

    io::write_csv_vector(&out_dir.join("sample.csv"), &result.sample)?;

    let mut trace = String::from("t,residual\n");
    for (t, r) in &result.residual_trace {
        trace.push_str(&format!("{t},{r:.6}\n"));
    }
    std::fs::write(out_dir.join("trace.csv"), trace)
        .map_err(|e| HarnessError::Io(e.to_string()))?;

    if let Some(shape) = result.shape {
        if shape.channels == 1 {
            io::write_pgm(
                &out_dir.join("sample.pgm"),
                &io::to_unit(&result.sample),
                shape.height,
                shape.width,
            )?;
        }
    }
    Ok(())
}
