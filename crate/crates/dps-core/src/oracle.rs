//! Exact and brute-force posteriors used to validate guided sampling:
//! the conjugate linear-Gaussian posterior and a low-dimensional grid
//! posterior for mixture priors.

use nalgebra::{Cholesky, DMatrix, DVector};
use rand::Rng;

use crate::error::{DpsError, Result};
use crate::operators::LinearOperator;
use crate::prior::GaussianMixturePrior;

/// Exact Gaussian posterior `N(mean, covariance)`.
#[derive(Debug, Clone)]
pub struct GaussianPosterior {
    pub mean: DVector<f64>,
    pub covariance: DMatrix<f64>,
}

/// Closed-form Bayes update for `y = A x + n`, `n ~ N(0, sigma^2 I)`,
/// `x ~ N(mu0, Sigma0)`:
/// `cov = (Sigma0^{-1} + A^T A / sigma^2)^{-1}`,
/// `mean = cov (Sigma0^{-1} mu0 + A^T y / sigma^2)`.
pub fn exact_gaussian_posterior(
    prior_mean: &DVector<f64>,
    prior_cov: &DMatrix<f64>,
    op: &LinearOperator,
    y: &DVector<f64>,
    sigma: f64,
) -> Result<GaussianPosterior> {
    if sigma <= 0.0 {
        return Err(DpsError::InvalidBounds(format!(
            "sigma = {sigma} must be > 0"
        )));
    }
    let d = prior_mean.len();
    if prior_cov.nrows() != d || prior_cov.ncols() != d {
        return Err(DpsError::DimensionMismatch {
            expected: d,
            got: prior_cov.nrows(),
        });
    }
    if op.input_dim() != d || y.len() != op.output_dim() {
        return Err(DpsError::ShapeMismatch(
            "operator/measurement dimensions do not match the prior".into(),
        ));
    }
    let prior_chol = Cholesky::new(prior_cov.clone())
        .ok_or_else(|| DpsError::Singular("prior covariance is not positive definite".into()))?;
    let prior_precision = prior_chol.inverse();
    let a = op.to_dense();
    let precision = &prior_precision + a.transpose() * &a / (sigma * sigma);
    let chol = Cholesky::new(precision)
        .ok_or_else(|| DpsError::Singular("posterior precision is not positive definite".into()))?;
    let rhs = &prior_precision * prior_mean + op.adjoint(y)? / (sigma * sigma);
    let mean = chol.solve(&rhs);
    let covariance = chol.inverse();
    Ok(GaussianPosterior { mean, covariance })
}

/// Discrete posterior on a regular grid, for priors in `d <= 2`.
#[derive(Debug, Clone)]
pub struct GridPosterior {
    /// Grid point coordinates, one row-major cell per probability entry.
    points: Vec<DVector<f64>>,
    probs: Vec<f64>,
    dim: usize,
}

/// Axis-aligned box for the grid.
#[derive(Debug, Clone)]
pub struct GridBounds {
    pub lo: DVector<f64>,
    pub hi: DVector<f64>,
}

impl GridBounds {
    /// Prior mean +/- 6 standard deviations per axis, covering all components.
    pub fn from_prior(prior: &GaussianMixturePrior) -> GridBounds {
        let d = prior.dim();
        let mut lo = DVector::from_element(d, f64::INFINITY);
        let mut hi = DVector::from_element(d, f64::NEG_INFINITY);
        for (mean, cov) in prior.means().iter().zip(prior.covariances()) {
            let dense = cov.to_dense();
            for i in 0..d {
                let sd = dense[(i, i)].sqrt();
                lo[i] = lo[i].min(mean[i] - 6.0 * sd);
                hi[i] = hi[i].max(mean[i] + 6.0 * sd);
            }
        }
        GridBounds { lo, hi }
    }
}

/// Brute-force posterior `p(x0) exp(-||y - A x0||^2 / (2 sigma^2))` evaluated
/// on a regular grid and normalized to sum 1.
pub fn grid_posterior(
    prior: &GaussianMixturePrior,
    op: &LinearOperator,
    y: &DVector<f64>,
    sigma: f64,
    bounds: &GridBounds,
    resolution: usize,
) -> Result<GridPosterior> {
    let d = prior.dim();
    if d > 2 {
        return Err(DpsError::DimensionTooLarge { d });
    }
    if resolution < 2 || resolution > 512 {
        return Err(DpsError::InvalidBounds(format!(
            "resolution {resolution} outside [2, 512]"
        )));
    }
    if sigma <= 0.0 {
        return Err(DpsError::InvalidBounds(format!(
            "sigma = {sigma} must be > 0"
        )));
    }
    // Evaluate the prior log-density at t -> the clean distribution: reuse the
    // mixture machinery with alpha_bar = 1 via a dedicated one-step schedule.
    let axes: Vec<Vec<f64>> = (0..d)
        .map(|i| {
            let step = (bounds.hi[i] - bounds.lo[i]) / (resolution - 1) as f64;
            (0..resolution)
                .map(|j| bounds.lo[i] + j as f64 * step)
                .collect()
        })
        .collect();
    let mut points = Vec::new();
    if d == 1 {
        for &u in &axes[0] {
            points.push(DVector::from_vec(vec![u]));
        }
    } else {
        for &u in &axes[0] {
            for &v in &axes[1] {
                points.push(DVector::from_vec(vec![u, v]));
            }
        }
    }
    let mut log_probs = Vec::with_capacity(points.len());
    for p in &points {
        let log_prior = mixture_log_density(prior, p)?;
        let r = y - op.forward(p)?;
        let log_lik = -r.norm_squared() / (2.0 * sigma * sigma);
        log_probs.push(log_prior + log_lik);
    }
    let max = log_probs
        .iter()
        .cloned()
        .fold(f64::NEG_INFINITY, f64::max);
    let mut probs: Vec<f64> = log_probs.iter().map(|l| (l - max).exp()).collect();
    let total: f64 = probs.iter().sum();
    for p in probs.iter_mut() {
        *p /= total;
    }
    Ok(GridPosterior {
        points,
        probs,
        dim: d,
    })
}

/// Clean-data mixture log-density (no diffusion), shared by the grid oracle.
fn mixture_log_density(prior: &GaussianMixturePrior, x: &DVector<f64>) -> Result<f64> {
    let mut logs = Vec::with_capacity(prior.component_count());
    for i in 0..prior.component_count() {
        let cov = prior.covariances()[i].to_dense();
        let chol = Cholesky::new(cov)
            .ok_or_else(|| DpsError::Singular("mixture covariance not positive definite".into()))?;
        let log_det = 2.0
            * chol
                .l_dirty()
                .diagonal()
                .iter()
                .map(|v| v.ln())
                .sum::<f64>();
        let diff = x - &prior.means()[i];
        let quad = diff.dot(&chol.solve(&diff));
        logs.push(
            prior.weights()[i].ln()
                - 0.5 * (prior.dim() as f64 * (2.0 * std::f64::consts::PI).ln() + log_det + quad),
        );
    }
    let m = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    Ok(m + logs.iter().map(|l| (l - m).exp()).sum::<f64>().ln())
}

impl GridPosterior {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn points(&self) -> &[DVector<f64>] {
        &self.points
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn mean(&self) -> DVector<f64> {
        let mut m = DVector::zeros(self.dim);
        for (p, w) in self.points.iter().zip(&self.probs) {
            m += p * *w;
        }
        m
    }

    pub fn covariance(&self) -> DMatrix<f64> {
        let mean = self.mean();
        let mut cov = DMatrix::zeros(self.dim, self.dim);
        for (p, w) in self.points.iter().zip(&self.probs) {
            let d = p - &mean;
            cov += &d * d.transpose() * *w;
        }
        cov
    }

    /// Draw one grid point proportionally to its probability.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> DVector<f64> {
        let u: f64 = rng.random();
        let mut acc = 0.0;
        for (p, w) in self.points.iter().zip(&self.probs) {
            acc += w;
            if u <= acc {
                return p.clone();
            }
        }
        self.points.last().expect("grid is non-empty").clone()
    }
}
