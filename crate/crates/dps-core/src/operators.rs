//! Linear degradation operators: forward, adjoint, measurement-consistency
//! projection, and noisy measurement synthesis.
//!
//! Images are flattened row-major, channel-last: `index = (r * W + c) * C + ch`.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{DpsError, Result};

/// Spatial shape of the operator input.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ImageShape {
    pub height: usize,
    pub width: usize,
    pub channels: usize,
}

impl ImageShape {
    pub fn new(height: usize, width: usize, channels: usize) -> Self {
        Self {
            height,
            width,
            channels,
        }
    }

    pub fn len(&self) -> usize {
        self.height * self.width * self.channels
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// A linear degradation `A` with matrix-free forward and adjoint.
#[derive(Debug, Clone, PartialEq)]
pub enum LinearOperator {
    Identity { shape: ImageShape },
    /// Block mean over non-overlapping `factor x factor` blocks per channel.
    Downsample { shape: ImageShape, factor: usize },
    /// Elementwise selection of entries where the mask is true.
    Mask { shape: ImageShape, mask: Vec<bool> },
}

/// A measurement `y = A x + sigma z` together with its noise level.
#[derive(Debug, Clone, PartialEq)]
pub struct Measurement {
    pub y: DVector<f64>,
    pub sigma: f64,
}

impl LinearOperator {
    pub fn identity(shape: ImageShape) -> Self {
        LinearOperator::Identity { shape }
    }

    pub fn downsample(shape: ImageShape, factor: usize) -> Result<Self> {
        if factor < 1 {
            return Err(DpsError::InvalidOperator("factor must be >= 1".into()));
        }
        if shape.height % factor != 0 || shape.width % factor != 0 {
            return Err(DpsError::InvalidOperator(format!(
                "factor {factor} must divide height {} and width {}",
                shape.height, shape.width
            )));
        }
        Ok(LinearOperator::Downsample { shape, factor })
    }

    pub fn mask(shape: ImageShape, mask: Vec<bool>) -> Result<Self> {
        if mask.len() != shape.len() {
            return Err(DpsError::ShapeMismatch(format!(
                "mask length {} does not match shape size {}",
                mask.len(),
                shape.len()
            )));
        }
        Ok(LinearOperator::Mask { shape, mask })
    }

    pub fn shape(&self) -> ImageShape {
        match self {
            LinearOperator::Identity { shape }
            | LinearOperator::Downsample { shape, .. }
            | LinearOperator::Mask { shape, .. } => *shape,
        }
    }

    pub fn input_dim(&self) -> usize {
        self.shape().len()
    }

    pub fn output_dim(&self) -> usize {
        match self {
            LinearOperator::Identity { shape } => shape.len(),
            LinearOperator::Downsample { shape, factor } => {
                (shape.height / factor) * (shape.width / factor) * shape.channels
            }
            LinearOperator::Mask { mask, .. } => mask.iter().filter(|&&m| m).count(),
        }
    }

    fn check_input(&self, x: &DVector<f64>) -> Result<()> {
        if x.len() != self.input_dim() {
            return Err(DpsError::ShapeMismatch(format!(
                "input length {} does not match operator input dim {}",
                x.len(),
                self.input_dim()
            )));
        }
        Ok(())
    }

    fn check_output(&self, u: &DVector<f64>) -> Result<()> {
        if u.len() != self.output_dim() {
            return Err(DpsError::ShapeMismatch(format!(
                "measurement length {} does not match operator output dim {}",
                u.len(),
                self.output_dim()
            )));
        }
        Ok(())
    }

    /// Apply `A`.
    pub fn forward(&self, x: &DVector<f64>) -> Result<DVector<f64>> {
        self.check_input(x)?;
        match self {
            LinearOperator::Identity { .. } => Ok(x.clone()),
            LinearOperator::Downsample { shape, factor } => {
                let k = *factor;
                let (oh, ow, c) = (shape.height / k, shape.width / k, shape.channels);
                let mut out = DVector::zeros(oh * ow * c);
                let norm = 1.0 / (k * k) as f64;
                for br in 0..oh {
                    for bc in 0..ow {
                        for ch in 0..c {
                            let mut acc = 0.0;
                            for dr in 0..k {
                                for dc in 0..k {
                                    let idx = ((br * k + dr) * shape.width + bc * k + dc) * c + ch;
                                    acc += x[idx];
                                }
                            }
                            out[(br * ow + bc) * c + ch] = acc * norm;
                        }
                    }
                }
                Ok(out)
            }
            LinearOperator::Mask { mask, .. } => Ok(DVector::from_iterator(
                self.output_dim(),
                x.iter().zip(mask).filter(|(_, &m)| m).map(|(&v, _)| v),
            )),
        }
    }

    /// Apply `A^T`.
    pub fn adjoint(&self, u: &DVector<f64>) -> Result<DVector<f64>> {
        self.check_output(u)?;
        match self {
            LinearOperator::Identity { .. } => Ok(u.clone()),
            LinearOperator::Downsample { shape, factor } => {
                let k = *factor;
                let (oh, ow, c) = (shape.height / k, shape.width / k, shape.channels);
                let mut out = DVector::zeros(shape.len());
                let norm = 1.0 / (k * k) as f64;
                for br in 0..oh {
                    for bc in 0..ow {
                        for ch in 0..c {
                            let v = u[(br * ow + bc) * c + ch] * norm;
                            for dr in 0..k {
                                for dc in 0..k {
                                    let idx = ((br * k + dr) * shape.width + bc * k + dc) * c + ch;
                                    out[idx] = v;
                                }
                            }
                        }
                    }
                }
                Ok(out)
            }
            LinearOperator::Mask { mask, .. } => {
                let mut out = DVector::zeros(self.input_dim());
                let mut j = 0;
                for (i, &m) in mask.iter().enumerate() {
                    if m {
                        out[i] = u[j];
                        j += 1;
                    }
                }
                Ok(out)
            }
        }
    }

    /// Orthogonal projection of `x` onto `{z : A z = target}`:
    /// `x + A^T (A A^T)^{-1} (target - A x)`. For block averaging
    /// `A A^T = I / k^2`; for identity and mask `A A^T = I`.
    pub fn project(&self, x: &DVector<f64>, target: &DVector<f64>) -> Result<DVector<f64>> {
        self.check_input(x)?;
        self.check_output(target)?;
        let gram_inv = match self {
            LinearOperator::Downsample { factor, .. } => (factor * factor) as f64,
            _ => 1.0,
        };
        let residual = target - self.forward(x)?;
        Ok(x + self.adjoint(&(residual * gram_inv))?)
    }

    /// Synthesize `y = A x + sigma z`, `z ~ N(0, I)` drawn from `rng`.
    pub fn measure<R: Rng + ?Sized>(
        &self,
        x: &DVector<f64>,
        sigma: f64,
        rng: &mut R,
    ) -> Result<Measurement> {
        if sigma < 0.0 {
            return Err(DpsError::InvalidBounds(format!("sigma = {sigma} must be >= 0")));
        }
        let mut y = self.forward(x)?;
        if sigma > 0.0 {
            for v in y.iter_mut() {
                let z: f64 = rng.sample(StandardNormal);
                *v += sigma * z;
            }
        }
        Ok(Measurement { y, sigma })
    }

    /// Dense matrix form of `A`, for oracles at small dimension.
    pub fn to_dense(&self) -> DMatrix<f64> {
        let (m, n) = (self.output_dim(), self.input_dim());
        let mut out = DMatrix::zeros(m, n);
        for j in 0..n {
            let mut e = DVector::zeros(n);
            e[j] = 1.0;
            let col = self.forward(&e).expect("basis vector has the right length");
            out.set_column(j, &col);
        }
        out
    }
}
