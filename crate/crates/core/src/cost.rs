//! Lap cost: median-normalized absolute lateral and heading errors, their
//! weighted sum, and the completion penalty for laps that lost stability.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sim::LapResult;

/// Medians below this are treated as an all-zero channel.
pub const ZERO_MEDIAN: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CostWeights {
    pub w: f64,
    pub lambda_pen: f64,
}

impl Default for CostWeights {
    fn default() -> Self {
        Self { w: 0.1, lambda_pen: 7000.0 }
    }
}

impl CostWeights {
    pub fn validate(&self) -> Result<()> {
        let mut p = Vec::new();
        if !(self.w.is_finite() && self.w > 0.0) {
            p.push(format!("cost.w must be > 0, got {}", self.w));
        }
        if !(self.lambda_pen.is_finite() && self.lambda_pen >= 0.0) {
            p.push(format!("cost.lambda_pen must be >= 0, got {}", self.lambda_pen));
        }
        if p.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidConfig(p))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CostBreakdown {
    pub j_lat: f64,
    pub j_head: f64,
    pub j: f64,
    pub j_bo: f64,
    pub w: f64,
    pub lambda_pen: f64,
    pub completion_ratio: f64,
    pub median_lat: f64,
    pub median_head: f64,
    /// A channel had a zero median and used the constant-series value.
    pub degenerate_lat: bool,
    pub degenerate_head: bool,
}

impl CostBreakdown {
    pub fn penalty(&self) -> f64 {
        self.lambda_pen * (1.0 - self.completion_ratio)
    }
}

pub fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    match n {
        0 => f64::NAN,
        _ if n % 2 == 1 => v[n / 2],
        _ => 0.5 * (v[n / 2 - 1] + v[n / 2]),
    }
}

/// `sum |e| / median |e|`, or the sample count when the median vanishes.
/// Returns the normalized term, the median, and whether the fallback applied.
pub fn normalized_iae(errors: &[f64]) -> (f64, f64, bool) {
    let abs: Vec<f64> = errors.iter().map(|e| e.abs()).collect();
    let med = median(&abs);
    if med < ZERO_MEDIAN {
        (abs.len() as f64, med, true)
    } else {
        (abs.iter().sum::<f64>() / med, med, false)
    }
}

/// Costs a pair of error series with an explicit completion ratio.
pub fn cost_from_series(
    e_lat: &[f64],
    e_head: &[f64],
    completion_ratio: f64,
    weights: &CostWeights,
) -> Result<CostBreakdown> {
    weights.validate()?;
    if e_lat.len() < 2 || e_head.len() != e_lat.len() {
        return Err(Error::InvalidArgument(format!(
            "cost needs two equal-length series of at least 2 samples, got {} and {}",
            e_lat.len(),
            e_head.len()
        )));
    }
    if e_lat.iter().chain(e_head).any(|e| !e.is_finite()) {
        return Err(Error::InvalidArgument("error series contains non-finite values".into()));
    }
    if !(0.0..=1.0).contains(&completion_ratio) {
        return Err(Error::InvalidArgument(format!("completion ratio {completion_ratio} outside [0, 1]")));
    }
    let (j_lat, median_lat, degenerate_lat) = normalized_iae(e_lat);
    let (j_head, median_head, degenerate_head) = normalized_iae(e_head);
    let j = j_lat + weights.w * j_head;
    Ok(CostBreakdown {
        j_lat,
        j_head,
        j,
        j_bo: j + weights.lambda_pen * (1.0 - completion_ratio),
        w: weights.w,
        lambda_pen: weights.lambda_pen,
        completion_ratio,
        median_lat,
        median_head,
        degenerate_lat,
        degenerate_head,
    })
}

pub fn evaluate_cost(lap: &LapResult, weights: &CostWeights) -> Result<CostBreakdown> {
    let e_lat: Vec<f64> = lap.log.samples.iter().map(|s| s.e_lat).collect();
    let e_head: Vec<f64> = lap.log.samples.iter().map(|s| s.e_head).collect();
    cost_from_series(&e_lat, &e_head, lap.completion_ratio(), weights)
}
