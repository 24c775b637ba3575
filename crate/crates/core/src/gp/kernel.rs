use serde::{Deserialize, Serialize};

use super::{Point, DIM};
use crate::error::{Error, Result};

const SQRT5: f64 = 2.236_067_977_499_79;

/// Kernel hyperparameters and observation noise.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelHyperparams {
    #[serde(rename = "sigma_f2")]
    pub signal_variance: f64,
    #[serde(rename = "ell")]
    pub length_scales: Point,
    #[serde(rename = "sigma_n2")]
    pub noise_variance: f64,
}

impl Default for KernelHyperparams {
    fn default() -> Self {
        Self { signal_variance: 1.0, length_scales: [0.3; DIM], noise_variance: 0.1 }
    }
}

/// Box constraints for hyperparameter fitting.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HyperBounds {
    pub length_scale: (f64, f64),
    pub signal_variance: (f64, f64),
    pub noise_variance: (f64, f64),
}

impl Default for HyperBounds {
    fn default() -> Self {
        Self { length_scale: (0.05, 10.0), signal_variance: (1e-3, 1e3), noise_variance: (1e-6, 1e1) }
    }
}

impl HyperBounds {
    pub fn contains(&self, h: &KernelHyperparams) -> bool {
        let inside = |v: f64, (lo, hi): (f64, f64)| v >= lo && v <= hi;
        inside(h.signal_variance, self.signal_variance)
            && inside(h.noise_variance, self.noise_variance)
            && h.length_scales.iter().all(|&l| inside(l, self.length_scale))
    }

    /// Log-space lower and upper corners, ordered `[sigma_f2, ell.., sigma_n2]`.
    pub(crate) fn log_box(&self) -> ([f64; DIM + 2], [f64; DIM + 2]) {
        let mut lo = [self.length_scale.0.ln(); DIM + 2];
        let mut hi = [self.length_scale.1.ln(); DIM + 2];
        lo[0] = self.signal_variance.0.ln();
        hi[0] = self.signal_variance.1.ln();
        lo[DIM + 1] = self.noise_variance.0.ln();
        hi[DIM + 1] = self.noise_variance.1.ln();
        (lo, hi)
    }

    pub fn clamp(&self, h: &KernelHyperparams) -> KernelHyperparams {
        let mut l = h.length_scales;
        for v in &mut l {
            *v = v.clamp(self.length_scale.0, self.length_scale.1);
        }
        KernelHyperparams {
            signal_variance: h.signal_variance.clamp(self.signal_variance.0, self.signal_variance.1),
            length_scales: l,
            noise_variance: h.noise_variance.clamp(self.noise_variance.0, self.noise_variance.1),
        }
    }
}

impl KernelHyperparams {
    pub fn validate(&self) -> Result<()> {
        let ok = |v: f64| v.is_finite() && v > 0.0;
        if ok(self.signal_variance) && ok(self.noise_variance) && self.length_scales.iter().all(|&l| ok(l)) {
            Ok(())
        } else {
            Err(Error::InvalidArgument(format!("hyperparameters must be finite and > 0: {self:?}")))
        }
    }

    pub(crate) fn to_log(self) -> [f64; DIM + 2] {
        let mut v = [0.0; DIM + 2];
        v[0] = self.signal_variance.ln();
        for d in 0..DIM {
            v[d + 1] = self.length_scales[d].ln();
        }
        v[DIM + 1] = self.noise_variance.ln();
        v
    }

    pub(crate) fn from_log(v: &[f64; DIM + 2]) -> Self {
        let mut l = [0.0; DIM];
        for d in 0..DIM {
            l[d] = v[d + 1].exp();
        }
        Self { signal_variance: v[0].exp(), length_scales: l, noise_variance: v[DIM + 1].exp() }
    }
}

/// ARD Matern-5/2: `sf2 (1 + sqrt5 r + 5 r^2 / 3) exp(-sqrt5 r)`.
pub fn matern52_ard(z1: &Point, z2: &Point, hyper: &KernelHyperparams) -> f64 {
    let r2: f64 = (0..DIM)
        .map(|d| {
            let u = (z1[d] - z2[d]) / hyper.length_scales[d];
            u * u
        })
        .sum();
    let r = r2.sqrt();
    hyper.signal_variance * (1.0 + SQRT5 * r + 5.0 * r2 / 3.0) * (-SQRT5 * r).exp()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit() -> KernelHyperparams {
        KernelHyperparams { signal_variance: 1.0, length_scales: [1.0; DIM], noise_variance: 1e-6 }
    }

    #[test]
    fn zero_distance_gives_signal_variance() {
        let h = KernelHyperparams { signal_variance: 2.5, ..unit() };
        let z = [0.3, -1.0, 2.0, 0.0];
        assert_eq!(matern52_ard(&z, &z, &h), 2.5);
    }

    #[test]
    fn unit_distance_value() {
        // (1 + sqrt5 + 5/3) e^{-sqrt5}, evaluated independently
        let k = matern52_ard(&[1.0, 0.0, 0.0, 0.0], &[0.0; 4], &unit());
        assert!((k - 0.523_994_108_831_820_3).abs() < 1e-12, "{k}");
        assert!((SQRT5 - 5f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn decays_at_long_range() {
        assert!(matern52_ard(&[100.0, 0.0, 0.0, 0.0], &[0.0; 4], &unit()) < 1e-90);
    }

    #[test]
    fn ard_scales_each_dimension() {
        let mut h = unit();
        h.length_scales = [1.0, 2.0, 1.0, 1.0];
        let a = matern52_ard(&[0.0, 2.0, 0.0, 0.0], &[0.0; 4], &h);
        let b = matern52_ard(&[1.0, 0.0, 0.0, 0.0], &[0.0; 4], &h);
        assert!((a - b).abs() < 1e-15);
    }

    #[test]
    fn log_roundtrip_and_bounds() {
        let h = KernelHyperparams { signal_variance: 3.0, length_scales: [0.1, 0.2, 0.3, 0.4], noise_variance: 0.01 };
        let back = KernelHyperparams::from_log(&h.to_log());
        assert!((back.signal_variance - 3.0).abs() < 1e-12);
        assert!((back.length_scales[3] - 0.4).abs() < 1e-12);
        let b = HyperBounds::default();
        assert!(b.contains(&h));
        let wide = KernelHyperparams { signal_variance: 1e6, ..h };
        assert!(!b.contains(&wide));
        assert!(b.contains(&b.clamp(&wide)));
    }
}
