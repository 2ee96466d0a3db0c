//! Isotropic Gaussian algebra and Monte-Carlo moment estimation.
//!
//! Every transition and marginal in the chain is `N(mean, var * I)` with a
//! scalar variance, so a full covariance type is never needed. `var == 0`
//! denotes a Dirac point mass: sampling returns the mean exactly and density
//! evaluation is an error.

use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::math::FloatExt;
use crate::{Error, Result, Rng};

/// `N(mean, var * I)`; `var == 0` is a Dirac point mass at `mean`.
#[derive(Debug, Clone, PartialEq)]
pub struct IsoGaussian {
    pub mean: Vec<f64>,
    pub var: f64,
}

impl IsoGaussian {
    pub fn new(mean: Vec<f64>, var: f64) -> Self {
        debug_assert!(var >= 0.0, "variance must be nonnegative");
        IsoGaussian { mean, var }
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    /// Draws one vector; a Dirac returns the mean without consuming
    /// randomness.
    pub fn sample(&self, rng: &mut Rng) -> Vec<f64> {
        if self.var == 0.0 {
            return self.mean.clone();
        }
        let sd = self.var.fsqrt();
        self.mean.iter().map(|m| m + sd * rng.standard_normal()).collect()
    }

    /// Log density at `x`: `-(d/2) ln(2 pi var) - |x - mean|^2 / (2 var)`.
    pub fn log_pdf(&self, x: &[f64]) -> Result<f64> {
        if self.var == 0.0 {
            return Err(Error::DegenerateVariance);
        }
        if x.len() != self.mean.len() {
            return Err(Error::DimensionMismatch {
                expected: self.mean.len(),
                got: x.len(),
            });
        }
        let d = self.mean.len() as f64;
        let sq: f64 = x
            .iter()
            .zip(&self.mean)
            .map(|(xi, mi)| (xi - mi) * (xi - mi))
            .sum();
        Ok(-0.5 * d * (2.0 * PI * self.var).fln() - sq / (2.0 * self.var))
    }

    /// Distribution of `scale * X + shift`.
    pub fn affine(&self, scale: f64, shift: &[f64]) -> Result<IsoGaussian> {
        if shift.len() != self.mean.len() {
            return Err(Error::DimensionMismatch {
                expected: self.mean.len(),
                got: shift.len(),
            });
        }
        let mean = self
            .mean
            .iter()
            .zip(shift)
            .map(|(m, s)| scale * m + s)
            .collect();
        Ok(IsoGaussian::new(mean, scale * scale * self.var))
    }

    /// Distribution of the sum of independent draws from `self` and `other`.
    pub fn convolve(&self, other: &IsoGaussian) -> Result<IsoGaussian> {
        if other.mean.len() != self.mean.len() {
            return Err(Error::DimensionMismatch {
                expected: self.mean.len(),
                got: other.mean.len(),
            });
        }
        let mean = self
            .mean
            .iter()
            .zip(&other.mean)
            .map(|(a, b)| a + b)
            .collect();
        Ok(IsoGaussian::new(mean, self.var + other.var))
    }
}

/// Empirical mean and pooled per-coordinate variance (unbiased) of a sample
/// cloud. Requires at least two samples.
pub fn mc_moments(samples: &[Vec<f64>]) -> Result<(Vec<f64>, f64)> {
    if samples.len() < 2 {
        return Err(Error::InsufficientSamples {
            needed: 2,
            got: samples.len(),
        });
    }
    let n = samples.len() as f64;
    let dim = samples[0].len();
    let mut mean = alloc::vec![0.0; dim];
    for s in samples {
        for (m, x) in mean.iter_mut().zip(s) {
            *m += x;
        }
    }
    for m in &mut mean {
        *m /= n;
    }
    let mut ss = 0.0;
    for s in samples {
        for (m, x) in mean.iter().zip(s) {
            ss += (x - m) * (x - m);
        }
    }
    let var = ss / ((n - 1.0) * dim as f64);
    Ok((mean, var))
}
