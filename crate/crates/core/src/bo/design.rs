//! Space-filling designs on the unit cube and the warm-start set.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::domain::SearchDomain;
use crate::controller::GainVector;
use crate::error::{Error, Result};
use crate::gp::{Point, DIM};

/// Per-coordinate std-dev of local perturbations, in unit-cube units.
pub const LOCAL_STD: f64 = 0.1;

const PRIMES: [u32; DIM] = [2, 3, 5, 7];

fn radical_inverse(mut i: u64, base: u32) -> f64 {
    let b = base as u64;
    let mut inv = 1.0 / base as f64;
    let mut out = 0.0;
    while i > 0 {
        out += (i % b) as f64 * inv;
        i /= b;
        inv /= base as f64;
    }
    out
}

/// `n` Halton points (indices `1..=n`) with a Cranley-Patterson rotation.
pub fn halton(n: usize, shift: &Point) -> Vec<Point> {
    (1..=n as u64)
        .map(|i| {
            let mut p = [0.0; DIM];
            for d in 0..DIM {
                p[d] = (radical_inverse(i, PRIMES[d]) + shift[d]).fract();
            }
            p
        })
        .collect()
}

/// Latin hypercube sample: every axis has exactly one point per `1/n` stratum.
pub fn latin_hypercube<R: Rng>(n: usize, rng: &mut R) -> Vec<Point> {
    let mut out = vec![[0.0; DIM]; n];
    for d in 0..DIM {
        let mut strata: Vec<usize> = (0..n).collect();
        strata.shuffle(rng);
        for (p, s) in out.iter_mut().zip(strata) {
            p[d] = (s as f64 + rng.random::<f64>()) / n as f64;
        }
    }
    out
}

/// `(local, space_filling)` point counts following the baseline.
pub fn warm_start_split(n_init: usize) -> (usize, usize) {
    if n_init <= 1 {
        return (0, 0);
    }
    let local = (n_init - 1) * 6 / 14;
    (local, n_init - 1 - local)
}

/// Baseline, then Gaussian perturbations of it in the unit cube, then a Latin
/// hypercube over the whole box.
pub fn warm_start(domain: &SearchDomain, baseline: &GainVector, n_init: usize, seed: u64) -> Result<Vec<GainVector>> {
    if n_init == 0 {
        return Err(Error::InvalidArgument("n_init must be >= 1".into()));
    }
    domain.check(baseline)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (n_local, n_lhs) = warm_start_split(n_init);
    let centre = domain.to_unit(baseline);
    let normal = Normal::new(0.0, LOCAL_STD).expect("positive std");
    let radius = LOCAL_STD * (DIM as f64).sqrt();

    let mut out = vec![*baseline];
    for _ in 0..n_local {
        let delta = loop {
            let d: Point = std::array::from_fn(|_| normal.sample(&mut rng));
            if d.iter().map(|v| v * v).sum::<f64>().sqrt() <= radius {
                break d;
            }
        };
        let u: Point = std::array::from_fn(|k| (centre[k] + delta[k]).clamp(0.0, 1.0));
        out.push(domain.from_unit(&u));
    }
    out.extend(latin_hypercube(n_lhs, &mut rng).iter().map(|u| domain.from_unit(u)));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn split_matches_fifteen_point_layout() {
        assert_eq!(warm_start_split(15), (6, 8));
        assert_eq!(warm_start_split(1), (0, 0));
        assert_eq!(warm_start_split(2), (0, 1));
        assert_eq!(warm_start_split(32), (13, 18));
    }

    #[test]
    fn warm_start_structure() {
        let d = SearchDomain::default();
        let pts = warm_start(&d, &GainVector::BASELINE, 15, 11).unwrap();
        assert_eq!(pts.len(), 15);
        assert_eq!(pts[0], GainVector::BASELINE);
        assert!(pts.iter().all(|p| d.contains(p)));
        let c = d.to_unit(&GainVector::BASELINE);
        for p in &pts[1..7] {
            let u = d.to_unit(p);
            let dist = (0..DIM).map(|k| (u[k] - c[k]).powi(2)).sum::<f64>().sqrt();
            assert!(dist <= LOCAL_STD * 2.0 + 1e-12);
        }
        // stratified: one point per eighth on every axis
        for k in 0..DIM {
            let mut strata: Vec<usize> = pts[7..].iter().map(|p| (d.to_unit(p)[k] * 8.0).floor() as usize).collect();
            strata.sort();
            assert_eq!(strata, (0..8).collect::<Vec<_>>());
        }
    }

    #[test]
    fn warm_start_single_and_errors() {
        let d = SearchDomain::default();
        assert_eq!(warm_start(&d, &GainVector::BASELINE, 1, 0).unwrap(), vec![GainVector::BASELINE]);
        let outside = GainVector { k2: 500.0, ..GainVector::BASELINE };
        assert!(warm_start(&d, &outside, 15, 0).is_err());
        assert!(warm_start(&d, &GainVector::BASELINE, 0, 0).is_err());
    }

    #[test]
    fn warm_start_deterministic() {
        let d = SearchDomain::default();
        let a = warm_start(&d, &GainVector::BASELINE, 15, 3).unwrap();
        let b = warm_start(&d, &GainVector::BASELINE, 15, 3).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, warm_start(&d, &GainVector::BASELINE, 15, 4).unwrap());
    }

    #[test]
    fn halton_first_points() {
        let p = halton(3, &[0.0; DIM]);
        assert_eq!(p[0], [0.5, 1.0 / 3.0, 0.2, 1.0 / 7.0]);
        assert_eq!(p[1][0], 0.25);
        assert_eq!(p[2][0], 0.75);
        assert!(halton(4096, &[0.3, 0.1, 0.9, 0.5]).iter().flatten().all(|v| (0.0..1.0).contains(v)));
    }
}
