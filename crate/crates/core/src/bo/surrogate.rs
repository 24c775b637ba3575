use super::domain::SearchDomain;
use crate::controller::GainVector;
use crate::error::Result;
use crate::gp::{optimize_hypers_with, GpDataset, GpModel, HyperSearch, KernelHyperparams, Point, PosteriorPrediction};

/// GP over unit-cube inputs with standardized observations. Predictions are
/// available in both scaled and original cost units.
#[derive(Debug, Clone)]
pub struct Surrogate {
    model: GpModel,
    offset: f64,
    scale: f64,
}

impl Surrogate {
    /// Standardizes the observations, fits hyperparameters by marginal
    /// likelihood starting from `init`, and conditions the GP.
    pub fn fit(
        domain: &SearchDomain,
        thetas: &[GainVector],
        costs: &[f64],
        init: &KernelHyperparams,
        search: &HyperSearch,
    ) -> Result<Self> {
        let n = costs.len() as f64;
        let offset = costs.iter().sum::<f64>() / n;
        let var = costs.iter().map(|c| (c - offset).powi(2)).sum::<f64>() / n;
        let scale = if var.sqrt() > 1e-12 * offset.abs().max(1.0) { var.sqrt() } else { 1.0 };
        let inputs: Vec<Point> = thetas.iter().map(|t| domain.to_unit(t)).collect();
        let ys: Vec<f64> = costs.iter().map(|c| (c - offset) / scale).collect();
        let dataset = GpDataset::new(inputs, ys)?;
        let hyper = if dataset.len() >= 2 { optimize_hypers_with(&dataset, init, search)? } else { search.bounds.clamp(init) };
        Ok(Self { model: GpModel::fit(dataset, hyper)?, offset, scale })
    }

    pub fn model(&self) -> &GpModel {
        &self.model
    }

    pub fn hyper(&self) -> &KernelHyperparams {
        self.model.hyper()
    }

    pub fn to_scaled(&self, cost: f64) -> f64 {
        (cost - self.offset) / self.scale
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// Prediction at a unit-cube point, in scaled units.
    pub fn predict_scaled(&self, u: &Point) -> PosteriorPrediction {
        self.model.predict(u)
    }

    /// Prediction at a unit-cube point, in original cost units.
    pub fn predict(&self, u: &Point) -> PosteriorPrediction {
        let p = self.model.predict(u);
        PosteriorPrediction { mean: p.mean * self.scale + self.offset, variance: p.variance * self.scale * self.scale }
    }

    /// Smallest observation, in scaled units.
    pub fn best_scaled(&self) -> f64 {
        self.model.dataset().observations.iter().copied().fold(f64::INFINITY, f64::min)
    }
}
