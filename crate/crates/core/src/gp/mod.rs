//! Exact Gaussian-process regression with a zero prior mean and an ARD
//! Matern-5/2 kernel over four-dimensional inputs.

mod hyper;
mod kernel;
pub mod linalg;
mod model;

pub use hyper::{optimize_hypers, optimize_hypers_with, HyperSearch};
pub use kernel::{matern52_ard, HyperBounds, KernelHyperparams};
pub use model::{log_marginal_likelihood, GpDataset, GpModel, PosteriorPrediction};

pub const DIM: usize = 4;

/// A point in the (log-gain) input space.
pub type Point = [f64; DIM];
