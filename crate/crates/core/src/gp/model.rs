use serde::{Deserialize, Serialize};

use super::kernel::{matern52_ard, KernelHyperparams};
use super::linalg::Cholesky;
use super::Point;
use crate::error::{Error, Result};

const JITTER_START: f64 = 1e-10;
const JITTER_MAX: f64 = 1e-4;

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct GpDataset {
    pub inputs: Vec<Point>,
    pub observations: Vec<f64>,
}

impl GpDataset {
    pub fn new(inputs: Vec<Point>, observations: Vec<f64>) -> Result<Self> {
        let d = Self { inputs, observations };
        d.validate()?;
        Ok(d)
    }

    pub fn len(&self) -> usize {
        self.inputs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inputs.is_empty()
    }

    pub fn push(&mut self, z: Point, y: f64) {
        self.inputs.push(z);
        self.observations.push(y);
    }

    pub fn validate(&self) -> Result<()> {
        if self.inputs.len() != self.observations.len() {
            return Err(Error::InvalidArgument(format!(
                "dataset has {} inputs but {} observations",
                self.inputs.len(),
                self.observations.len()
            )));
        }
        if self.observations.iter().any(|y| !y.is_finite()) || self.inputs.iter().flatten().any(|z| !z.is_finite()) {
            return Err(Error::InvalidArgument("dataset contains non-finite values".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PosteriorPrediction {
    pub mean: f64,
    pub variance: f64,
}

impl PosteriorPrediction {
    pub fn std_dev(&self) -> f64 {
        self.variance.sqrt()
    }
}

/// A GP conditioned on a dataset. Immutable once fitted.
#[derive(Debug, Clone)]
pub struct GpModel {
    dataset: GpDataset,
    hyper: KernelHyperparams,
    chol: Cholesky,
    alpha: Vec<f64>,
    jitter: f64,
}

/// `K + (sigma_n2 + jitter) I`, factorized with escalating jitter.
fn factor_covariance(dataset: &GpDataset, hyper: &KernelHyperparams) -> Result<(Cholesky, f64)> {
    let n = dataset.len();
    let mut k = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..=i {
            let v = matern52_ard(&dataset.inputs[i], &dataset.inputs[j], hyper);
            k[i * n + j] = v;
            k[j * n + i] = v;
        }
        k[i * n + i] += hyper.noise_variance;
    }
    let trace_mean = (0..n).map(|i| k[i * n + i]).sum::<f64>() / n as f64;
    let mut rel = JITTER_START;
    loop {
        let jitter = rel * trace_mean;
        let mut a = k.clone();
        for i in 0..n {
            a[i * n + i] += jitter;
        }
        if let Some(c) = Cholesky::factor(&a, n) {
            return Ok((c, jitter));
        }
        if rel >= JITTER_MAX {
            return Err(Error::NotPositiveDefinite { jitter });
        }
        rel *= 10.0;
    }
}

fn check_inputs(dataset: &GpDataset, hyper: &KernelHyperparams) -> Result<()> {
    if dataset.is_empty() {
        return Err(Error::InvalidArgument("cannot fit a GP to an empty dataset".into()));
    }
    dataset.validate()?;
    hyper.validate()
}

impl GpModel {
    pub fn fit(dataset: GpDataset, hyper: KernelHyperparams) -> Result<Self> {
        check_inputs(&dataset, &hyper)?;
        let (chol, jitter) = factor_covariance(&dataset, &hyper)?;
        let alpha = chol.solve(&dataset.observations);
        Ok(Self { dataset, hyper, chol, alpha, jitter })
    }

    pub fn dataset(&self) -> &GpDataset {
        &self.dataset
    }

    pub fn hyper(&self) -> &KernelHyperparams {
        &self.hyper
    }

    /// Diagonal jitter that was needed on top of the noise variance.
    pub fn jitter(&self) -> f64 {
        self.jitter
    }

    pub fn predict(&self, z: &Point) -> PosteriorPrediction {
        let k: Vec<f64> = self.dataset.inputs.iter().map(|x| matern52_ard(x, z, &self.hyper)).collect();
        let mean = k.iter().zip(&self.alpha).map(|(a, b)| a * b).sum();
        let v = self.chol.forward(&k);
        let prior = matern52_ard(z, z, &self.hyper);
        let variance = prior - v.iter().map(|x| x * x).sum::<f64>();
        PosteriorPrediction { mean, variance: variance.max(0.0) }
    }

    pub fn log_marginal_likelihood(&self) -> f64 {
        let y = &self.dataset.observations;
        let fit: f64 = y.iter().zip(&self.alpha).map(|(a, b)| a * b).sum();
        let n = y.len() as f64;
        -0.5 * fit - 0.5 * self.chol.log_det() - 0.5 * n * (2.0 * std::f64::consts::PI).ln()
    }
}

/// `-1/2 y^T (K + sn2 I)^-1 y - 1/2 log|K + sn2 I| - n/2 log 2pi`
pub fn log_marginal_likelihood(dataset: &GpDataset, hyper: &KernelHyperparams) -> Result<f64> {
    check_inputs(dataset, hyper)?;
    let (chol, _) = factor_covariance(dataset, hyper)?;
    let y = &dataset.observations;
    let alpha = chol.solve(y);
    let fit: f64 = y.iter().zip(&alpha).map(|(a, b)| a * b).sum();
    let n = y.len() as f64;
    Ok(-0.5 * fit - 0.5 * chol.log_det() - 0.5 * n * (2.0 * std::f64::consts::PI).ln())
}
