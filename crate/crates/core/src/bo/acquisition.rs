//! Expected improvement and its maximization over the unit cube.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::design::halton;
use crate::gp::{GpModel, Point, PosteriorPrediction, DIM};

const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

pub fn normal_pdf(u: f64) -> f64 {
    INV_SQRT_2PI * (-0.5 * u * u).exp()
}

pub fn normal_cdf(u: f64) -> f64 {
    0.5 * libm::erfc(-u / std::f64::consts::SQRT_2)
}

/// `EI = (j_min - mu) Phi(u) + sigma phi(u)` with `u = (j_min - mu) / sigma`,
/// for minimization. Degenerates to `max(j_min - mu, 0)` at zero variance.
pub fn expected_improvement(pred: &PosteriorPrediction, j_min: f64) -> f64 {
    let sigma = pred.variance.max(0.0).sqrt();
    let gap = j_min - pred.mean;
    if sigma <= 0.0 || !(sigma > 1e-300) {
        return gap.max(0.0);
    }
    let u = gap / sigma;
    (gap * normal_cdf(u) + sigma * normal_pdf(u)).max(0.0)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AcquisitionSearch {
    pub candidates: usize,
    pub refine_starts: usize,
    pub refine_steps: usize,
    pub initial_step: f64,
}

impl Default for AcquisitionSearch {
    fn default() -> Self {
        Self { candidates: 4096, refine_starts: 8, refine_steps: 100, initial_step: 0.05 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Proposal {
    /// Unit-cube point.
    pub point: Point,
    pub ei: f64,
    pub mean: f64,
    /// Largest EI among the raw (unrefined) candidates.
    pub best_candidate_ei: f64,
}

fn score(model: &GpModel, u: &Point, j_min: f64) -> (f64, f64) {
    let p = model.predict(u);
    (expected_improvement(&p, j_min), p.mean)
}

/// Higher EI wins; ties go to the lower posterior mean.
fn better(a: (f64, f64), b: (f64, f64)) -> bool {
    a.0 > b.0 || (a.0 == b.0 && a.1 < b.1)
}

/// Maximizes EI over `[0,1]^4`: a shifted Halton sweep, then compass-search
/// refinement from the best few candidates. The result does not depend on
/// thread scheduling.
pub fn maximize_acquisition(model: &GpModel, j_min: f64, seed: u64, search: &AcquisitionSearch) -> Proposal {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let shift: Point = std::array::from_fn(|_| rng.random());
    let candidates = halton(search.candidates.max(1), &shift);
    let scores: Vec<(f64, f64)> = candidates.par_iter().map(|u| score(model, u, j_min)).collect();

    let mut order: Vec<usize> = (0..candidates.len()).collect();
    order.sort_by(|&a, &b| {
        scores[b].0.total_cmp(&scores[a].0).then(scores[a].1.total_cmp(&scores[b].1)).then(a.cmp(&b))
    });
    let best_candidate_ei = scores[order[0]].0;

    let refined: Vec<(Point, (f64, f64))> = order
        .iter()
        .take(search.refine_starts)
        .collect::<Vec<_>>()
        .par_iter()
        .map(|&&i| refine(model, candidates[i], scores[i], j_min, search))
        .collect();

    let mut best = (candidates[order[0]], scores[order[0]]);
    for r in refined {
        if better(r.1, best.1) {
            best = r;
        }
    }
    Proposal { point: best.0, ei: best.1 .0, mean: best.1 .1, best_candidate_ei }
}

fn refine(
    model: &GpModel,
    start: Point,
    start_score: (f64, f64),
    j_min: f64,
    search: &AcquisitionSearch,
) -> (Point, (f64, f64)) {
    let mut x = start;
    let mut fx = start_score;
    let mut step = search.initial_step;
    for _ in 0..search.refine_steps {
        let mut moved = None;
        for d in 0..DIM {
            for dir in [1.0, -1.0] {
                let mut y = x;
                y[d] = (y[d] + dir * step).clamp(0.0, 1.0);
                if y[d] == x[d] {
                    continue;
                }
                let fy = score(model, &y, j_min);
                if better(fy, moved.map_or(fx, |(_, f)| f)) {
                    moved = Some((y, fy));
                }
            }
        }
        match moved {
            Some((y, fy)) => {
                x = y;
                fx = fy;
            }
            None => {
                step *= 0.5;
                if step < 1e-7 {
                    break;
                }
            }
        }
    }
    (x, fx)
}
