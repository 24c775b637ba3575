//! Marginal-likelihood hyperparameter search: multi-start bounded
//! Nelder-Mead in log-hyperparameter space.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::kernel::{HyperBounds, KernelHyperparams};
use super::model::{log_marginal_likelihood, GpDataset};
use super::DIM;
use crate::error::{Error, Result};

const NP: usize = DIM + 2;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HyperSearch {
    pub bounds: HyperBounds,
    /// Random restarts in addition to the initial guess.
    pub restarts: usize,
    /// Likelihood evaluations per local search.
    pub evals_per_start: usize,
    pub seed: u64,
}

impl Default for HyperSearch {
    fn default() -> Self {
        Self { bounds: HyperBounds::default(), restarts: 8, evals_per_start: 200, seed: 0x5eed_9a55 }
    }
}

pub fn optimize_hypers(dataset: &GpDataset, init: &KernelHyperparams) -> Result<KernelHyperparams> {
    optimize_hypers_with(dataset, init, &HyperSearch::default())
}

/// Returns hyperparameters with likelihood no lower than the (clamped)
/// initial guess. Starts that fail to factorize are skipped.
pub fn optimize_hypers_with(
    dataset: &GpDataset,
    init: &KernelHyperparams,
    search: &HyperSearch,
) -> Result<KernelHyperparams> {
    if dataset.len() < 2 {
        return Err(Error::InvalidArgument("hyperparameter fitting needs at least 2 observations".into()));
    }
    init.validate()?;
    let (lo, hi) = search.bounds.log_box();
    let objective = |x: &[f64; NP]| -> f64 {
        let mut c = *x;
        for i in 0..NP {
            c[i] = c[i].clamp(lo[i], hi[i]);
        }
        match log_marginal_likelihood(dataset, &KernelHyperparams::from_log(&c)) {
            Ok(v) if v.is_finite() => -v,
            _ => f64::INFINITY,
        }
    };

    let start = search.bounds.clamp(init).to_log();
    let mut best_x = start;
    let mut best_f = objective(&start);

    let mut rng = ChaCha8Rng::seed_from_u64(search.seed ^ dataset.len() as u64);
    let mut starts = vec![start];
    for _ in 0..search.restarts {
        let mut x = [0.0; NP];
        for i in 0..NP {
            x[i] = rng.random_range(lo[i]..=hi[i]);
        }
        starts.push(x);
    }

    for s in starts {
        let (x, f) = nelder_mead(&objective, s, &lo, &hi, search.evals_per_start);
        if f < best_f {
            best_f = f;
            best_x = x;
        }
    }
    if !best_f.is_finite() {
        return Ok(search.bounds.clamp(init));
    }
    Ok(KernelHyperparams::from_log(&best_x))
}

/// Bounded Nelder-Mead; vertices are clamped into the box.
fn nelder_mead<F: Fn(&[f64; NP]) -> f64>(
    f: &F,
    start: [f64; NP],
    lo: &[f64; NP],
    hi: &[f64; NP],
    max_evals: usize,
) -> ([f64; NP], f64) {
    let clamp = |mut x: [f64; NP]| {
        for i in 0..NP {
            x[i] = x[i].clamp(lo[i], hi[i]);
        }
        x
    };
    let mut simplex: Vec<([f64; NP], f64)> = Vec::with_capacity(NP + 1);
    let x0 = clamp(start);
    simplex.push((x0, f(&x0)));
    for i in 0..NP {
        let mut x = x0;
        let step = 0.1 * (hi[i] - lo[i]);
        x[i] = if x[i] + step <= hi[i] { x[i] + step } else { x[i] - step };
        simplex.push((x, f(&x)));
    }
    let mut evals = NP + 1;

    while evals < max_evals {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let spread = simplex[NP].1 - simplex[0].1;
        if spread.abs() < 1e-10 && simplex[0].1.is_finite() {
            break;
        }
        let mut centroid = [0.0; NP];
        for (x, _) in &simplex[..NP] {
            for i in 0..NP {
                centroid[i] += x[i] / NP as f64;
            }
        }
        let worst = simplex[NP];
        let along = |t: f64| {
            let mut x = [0.0; NP];
            for i in 0..NP {
                x[i] = centroid[i] + t * (worst.0[i] - centroid[i]);
            }
            clamp(x)
        };

        let xr = along(-1.0);
        let fr = f(&xr);
        evals += 1;
        if fr < simplex[0].1 {
            let xe = along(-2.0);
            let fe = f(&xe);
            evals += 1;
            simplex[NP] = if fe < fr { (xe, fe) } else { (xr, fr) };
        } else if fr < simplex[NP - 1].1 {
            simplex[NP] = (xr, fr);
        } else {
            let (xc, fc) = if fr < worst.1 {
                let x = along(-0.5);
                (x, f(&x))
            } else {
                let x = along(0.5);
                (x, f(&x))
            };
            evals += 1;
            if fc < worst.1.min(fr) {
                simplex[NP] = (xc, fc);
            } else {
                let best = simplex[0].0;
                for v in simplex.iter_mut().skip(1) {
                    let mut x = [0.0; NP];
                    for i in 0..NP {
                        x[i] = best[i] + 0.5 * (v.0[i] - best[i]);
                    }
                    *v = (x, f(&x));
                    evals += 1;
                }
            }
        }
    }
    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    simplex[0]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gp::log_marginal_likelihood;

    fn points(n: usize, seed: u64) -> Vec<[f64; DIM]> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n).map(|_| [rng.random(), rng.random(), rng.random(), rng.random()]).collect()
    }

    #[test]
    fn never_worse_than_init() {
        let xs = points(12, 3);
        let ys: Vec<f64> = xs.iter().map(|x| (6.0 * x[0]).sin() + x[1] * x[1]).collect();
        let d = GpDataset::new(xs, ys).unwrap();
        let init = KernelHyperparams::default();
        let fitted = optimize_hypers(&d, &init).unwrap();
        assert!(HyperBounds::default().contains(&fitted));
        let before = log_marginal_likelihood(&d, &init).unwrap();
        let after = log_marginal_likelihood(&d, &fitted).unwrap();
        assert!(after >= before, "{after} < {before}");
    }

    #[test]
    fn zero_signal_shrinks_signal_variance() {
        let xs = points(10, 5);
        let d = GpDataset::new(xs, vec![0.0; 10]).unwrap();
        let fitted = optimize_hypers(&d, &KernelHyperparams::default()).unwrap();
        assert!(fitted.signal_variance < 1e-2, "{fitted:?}");
    }

    #[test]
    fn needs_two_points() {
        let d = GpDataset::new(vec![[0.0; DIM]], vec![1.0]).unwrap();
        assert!(optimize_hypers(&d, &KernelHyperparams::default()).is_err());
    }

    #[test]
    fn deterministic() {
        let xs = points(8, 9);
        let ys: Vec<f64> = xs.iter().map(|x| x.iter().sum()).collect();
        let d = GpDataset::new(xs, ys).unwrap();
        let a = optimize_hypers(&d, &KernelHyperparams::default()).unwrap();
        let b = optimize_hypers(&d, &KernelHyperparams::default()).unwrap();
        assert_eq!(a, b);
    }
}
