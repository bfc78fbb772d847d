//! Analytic Gaussian-mixture prior with exact time-t log-density, score,
//! Tweedie posterior mean, and Hessian-vector products.
//!
//! This stands in for a learned denoiser: every quantity a sampler or
//! guidance rule needs (`eps_hat`, `x0_hat`, score) is available in closed
//! form, so guided sampling can be checked against exact oracles.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use crate::error::{DpsError, Result};
use crate::schedule::Schedule;

const LN_2PI: f64 = 1.8378770664093453;

/// Maximum dimension supported with full (non-diagonal) covariances.
/// Hessian products are O(K d^2) in that case.
pub const MAX_FULL_COV_DIM: usize = 256;

/// Covariance of one mixture component. Diagonal storage is the fast path.
#[derive(Debug, Clone, PartialEq)]
pub enum Covariance {
    Diagonal(DVector<f64>),
    Full(DMatrix<f64>),
}

impl Covariance {
    fn validate(&self, d: usize) -> Result<()> {
        match self {
            Covariance::Diagonal(v) => {
                if v.len() != d {
                    return Err(DpsError::DimensionMismatch {
                        expected: d,
                        got: v.len(),
                    });
                }
                if v.iter().any(|&x| x <= 0.0) {
                    return Err(DpsError::InvalidPrior(
                        "diagonal covariance has a non-positive entry".into(),
                    ));
                }
            }
            Covariance::Full(m) => {
                if m.nrows() != d || m.ncols() != d {
                    return Err(DpsError::DimensionMismatch {
                        expected: d,
                        got: m.nrows(),
                    });
                }
                if d > MAX_FULL_COV_DIM {
                    return Err(DpsError::InvalidPrior(format!(
                        "full covariance limited to d <= {MAX_FULL_COV_DIM}, got {d}"
                    )));
                }
                for i in 0..d {
                    for j in (i + 1)..d {
                        let diff = (m[(i, j)] - m[(j, i)]).abs();
                        let scale = m[(i, j)].abs().max(m[(j, i)].abs()).max(1.0);
                        if diff > 1e-9 * scale {
                            return Err(DpsError::InvalidPrior(
                                "full covariance is not symmetric".into(),
                            ));
                        }
                    }
                }
                if Cholesky::new(m.clone()).is_none() {
                    return Err(DpsError::InvalidPrior(
                        "full covariance is not positive definite".into(),
                    ));
                }
            }
        }
        Ok(())
    }

    /// `alpha_bar * Sigma + (1 - alpha_bar) * I`.
    fn diffused(&self, alpha_bar: f64) -> Covariance {
        match self {
            Covariance::Diagonal(v) => {
                Covariance::Diagonal(v.map(|s| alpha_bar * s + (1.0 - alpha_bar)))
            }
            Covariance::Full(m) => {
                let mut out = m * alpha_bar;
                for i in 0..out.nrows() {
                    out[(i, i)] += 1.0 - alpha_bar;
                }
                Covariance::Full(out)
            }
        }
    }

    /// Dense d x d matrix form.
    pub fn to_dense(&self) -> DMatrix<f64> {
        match self {
            Covariance::Diagonal(v) => DMatrix::from_diagonal(v),
            Covariance::Full(m) => m.clone(),
        }
    }
}

/// Mixture of Gaussians `p(x0) = sum_i w_i N(x0; mu_i, Sigma_i)`.
#[derive(Debug, Clone)]
pub struct GaussianMixturePrior {
    weights: Vec<f64>,
    means: Vec<DVector<f64>>,
    covariances: Vec<Covariance>,
    dim: usize,
}

impl GaussianMixturePrior {
    pub fn new(
        weights: Vec<f64>,
        means: Vec<DVector<f64>>,
        covariances: Vec<Covariance>,
    ) -> Result<Self> {
        if weights.is_empty() || weights.len() != means.len() || weights.len() != covariances.len()
        {
            return Err(DpsError::InvalidPrior(
                "weights, means and covariances must have the same non-zero length".into(),
            ));
        }
        if weights.iter().any(|&w| w <= 0.0) {
            return Err(DpsError::InvalidPrior("weights must be positive".into()));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(DpsError::InvalidPrior(format!(
                "weights sum to {total}, expected 1"
            )));
        }
        let dim = means[0].len();
        for m in &means {
            if m.len() != dim {
                return Err(DpsError::DimensionMismatch {
                    expected: dim,
                    got: m.len(),
                });
            }
        }
        for c in &covariances {
            c.validate(dim)?;
        }
        Ok(Self {
            weights,
            means,
            covariances,
            dim,
        })
    }

    /// Single standard-normal component in `d` dimensions.
    pub fn unit_gaussian(d: usize) -> Self {
        Self::new(
            vec![1.0],
            vec![DVector::zeros(d)],
            vec![Covariance::Diagonal(DVector::from_element(d, 1.0))],
        )
        .expect("unit gaussian is always valid")
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn component_count(&self) -> usize {
        self.weights.len()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn means(&self) -> &[DVector<f64>] {
        &self.means
    }

    pub fn covariances(&self) -> &[Covariance] {
        &self.covariances
    }

    /// The diffused mixture at time `t`: means scaled by `sqrt(alpha_bar_t)`,
    /// covariances `alpha_bar_t Sigma_i + (1 - alpha_bar_t) I`, weights kept.
    pub fn marginal_at(&self, sched: &Schedule, t: usize) -> Result<GaussianMixturePrior> {
        let bar = self.alpha_bar_checked(sched, t)?;
        let root = bar.sqrt();
        Ok(GaussianMixturePrior {
            weights: self.weights.clone(),
            means: self.means.iter().map(|m| m * root).collect(),
            covariances: self.covariances.iter().map(|c| c.diffused(bar)).collect(),
            dim: self.dim,
        })
    }

    fn alpha_bar_checked(&self, sched: &Schedule, t: usize) -> Result<f64> {
        if t >= sched.len() {
            return Err(DpsError::TimestepOutOfRange {
                t,
                t_max: sched.len(),
            });
        }
        Ok(sched.alpha_bar(t))
    }

    /// Factorize the diffused mixture at time `t` for repeated evaluation.
    pub fn at_time(&self, sched: &Schedule, t: usize) -> Result<DiffusedMixture> {
        let bar = self.alpha_bar_checked(sched, t)?;
        DiffusedMixture::new(self, bar)
    }

    /// Log-density of the diffused mixture at `x`.
    pub fn log_density_t(&self, sched: &Schedule, x: &DVector<f64>, t: usize) -> Result<f64> {
        Ok(self.at_time(sched, t)?.log_density(x))
    }

    /// Gradient of `log_density_t` at `x`.
    pub fn score_t(&self, sched: &Schedule, x: &DVector<f64>, t: usize) -> Result<DVector<f64>> {
        Ok(self.at_time(sched, t)?.score(x))
    }

    /// Hessian-vector product of `log_density_t` at `x`.
    pub fn score_jacobian_vp(
        &self,
        sched: &Schedule,
        x: &DVector<f64>,
        t: usize,
        v: &DVector<f64>,
    ) -> Result<DVector<f64>> {
        Ok(self.at_time(sched, t)?.hessian_vp(x, v))
    }

    /// Exact denoiser output at `(x, t)`: score, Tweedie mean, predicted noise.
    pub fn denoise(&self, sched: &Schedule, x: &DVector<f64>, t: usize) -> Result<DenoiserOutput> {
        let bar = self.alpha_bar_checked(sched, t)?;
        let score = self.at_time(sched, t)?.score(x);
        let x0_hat = (x + &score * (1.0 - bar)) / bar.sqrt();
        let eps_hat = &score * (-(1.0 - bar).sqrt());
        Ok(DenoiserOutput {
            eps_hat,
            x0_hat,
            score,
        })
    }
}

/// What a denoiser returns at one `(x_t, t)` query.
///
/// The three fields are tied together by `x0_hat = (x_t - sqrt(1-abar) eps_hat)
/// / sqrt(abar)` and `eps_hat = -sqrt(1-abar) score`.
#[derive(Debug, Clone)]
pub struct DenoiserOutput {
    pub eps_hat: DVector<f64>,
    pub x0_hat: DVector<f64>,
    pub score: DVector<f64>,
}

enum Precision {
    Diagonal(DVector<f64>),
    Chol(Cholesky<f64, Dyn>),
}

impl Precision {
    fn apply(&self, v: &DVector<f64>) -> DVector<f64> {
        match self {
            Precision::Diagonal(inv) => v.component_mul(inv),
            Precision::Chol(c) => c.solve(v),
        }
    }
}

struct DiffusedComponent {
    log_weight: f64,
    mean: DVector<f64>,
    precision: Precision,
    log_det: f64,
}

/// The diffused mixture at a fixed time, with per-component factorizations
/// computed once so density/score/Hessian queries reuse them.
pub struct DiffusedMixture {
    components: Vec<DiffusedComponent>,
    dim: usize,
}

impl DiffusedMixture {
    fn new(prior: &GaussianMixturePrior, alpha_bar: f64) -> Result<Self> {
        let root = alpha_bar.sqrt();
        let mut components = Vec::with_capacity(prior.weights.len());
        for i in 0..prior.weights.len() {
            let mean = &prior.means[i] * root;
            let (precision, log_det) = match prior.covariances[i].diffused(alpha_bar) {
                Covariance::Diagonal(v) => {
                    let log_det = v.iter().map(|s| s.ln()).sum();
                    (Precision::Diagonal(v.map(|s| 1.0 / s)), log_det)
                }
                Covariance::Full(m) => {
                    let chol = Cholesky::new(m).ok_or_else(|| {
                        DpsError::Singular("diffused covariance not positive definite".into())
                    })?;
                    let log_det = 2.0 * chol.l_dirty().diagonal().iter().map(|d| d.ln()).sum::<f64>();
                    (Precision::Chol(chol), log_det)
                }
            };
            components.push(DiffusedComponent {
                log_weight: prior.weights[i].ln(),
                mean,
                precision,
                log_det,
            });
        }
        Ok(Self {
            components,
            dim: prior.dim,
        })
    }

    /// Per-component joint log-densities `log w_i + log N(x; m_i, S_i)`.
    fn component_logs(&self, x: &DVector<f64>) -> Vec<f64> {
        self.components
            .iter()
            .map(|c| {
                let diff = x - &c.mean;
                let quad = diff.dot(&c.precision.apply(&diff));
                c.log_weight - 0.5 * (self.dim as f64 * LN_2PI + c.log_det + quad)
            })
            .collect()
    }

    pub fn log_density(&self, x: &DVector<f64>) -> f64 {
        log_sum_exp(&self.component_logs(x))
    }

    /// Responsibilities (softmax of component log-densities).
    fn responsibilities(&self, x: &DVector<f64>) -> Vec<f64> {
        let logs = self.component_logs(x);
        let total = log_sum_exp(&logs);
        logs.iter().map(|l| (l - total).exp()).collect()
    }

    pub fn score(&self, x: &DVector<f64>) -> DVector<f64> {
        let resp = self.responsibilities(x);
        let mut s = DVector::zeros(self.dim);
        for (c, r) in self.components.iter().zip(resp) {
            s += c.precision.apply(&(&c.mean - x)) * r;
        }
        s
    }

    /// `H v` where `H` is the Hessian of the mixture log-density:
    /// `H = sum_i r_i (-P_i + g_i g_i^T) - s s^T`, with `g_i = P_i (m_i - x)`
    /// and `s = score(x)`.
    pub fn hessian_vp(&self, x: &DVector<f64>, v: &DVector<f64>) -> DVector<f64> {
        let resp = self.responsibilities(x);
        let mut hv = DVector::zeros(self.dim);
        let mut s = DVector::zeros(self.dim);
        for (c, r) in self.components.iter().zip(resp) {
            let g = c.precision.apply(&(&c.mean - x));
            hv += (&g * (g.dot(v)) - c.precision.apply(v)) * r;
            s += g * r;
        }
        hv -= &s * s.dot(v);
        hv
    }
}

fn log_sum_exp(logs: &[f64]) -> f64 {
    let m = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if !m.is_finite() {
        return m;
    }
    m + logs.iter().map(|l| (l - m).exp()).sum::<f64>().ln()
}
