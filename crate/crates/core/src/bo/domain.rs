use serde::{Deserialize, Serialize};

use crate::controller::GainVector;
use crate::error::{Error, Result};
use crate::gp::{Point, DIM};

/// Admissible gain box, searched in `z = ln(theta)` and normalized to the
/// unit cube `u = (z - ln lb) / (ln ub - ln lb)` for the surrogate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SearchDomain {
    pub lower: GainVector,
    pub upper: GainVector,
}

impl Default for SearchDomain {
    fn default() -> Self {
        Self {
            lower: GainVector { lambda_v: 1e-4, lambda_a: 1e-3, k1: 1e-2, k2: 1e-1 },
            upper: GainVector { lambda_v: 0.5, lambda_a: 1.5, k1: 10.0, k2: 100.0 },
        }
    }
}

impl SearchDomain {
    pub fn new(lower: GainVector, upper: GainVector) -> Result<Self> {
        let d = Self { lower, upper };
        d.validate()?;
        Ok(d)
    }

    pub fn validate(&self) -> Result<()> {
        let lo = self.lower.to_array();
        let hi = self.upper.to_array();
        let mut p = Vec::new();
        for d in 0..DIM {
            let name = GainVector::NAMES[d];
            if !(lo[d].is_finite() && lo[d] > 0.0) {
                p.push(format!("domain.{name}: lower bound must be > 0, got {}", lo[d]));
            }
            if !(hi[d].is_finite() && hi[d] > lo[d]) {
                p.push(format!("domain.{name}: lower bound {} must be < upper bound {}", lo[d], hi[d]));
            }
        }
        if p.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidConfig(p))
        }
    }

    pub fn log_lower(&self) -> Point {
        self.lower.to_array().map(f64::ln)
    }

    pub fn log_upper(&self) -> Point {
        self.upper.to_array().map(f64::ln)
    }

    pub fn contains(&self, g: &GainVector) -> bool {
        let (lo, hi, v) = (self.lower.to_array(), self.upper.to_array(), g.to_array());
        (0..DIM).all(|d| v[d] >= lo[d] && v[d] <= hi[d])
    }

    pub fn check(&self, g: &GainVector) -> Result<()> {
        if self.contains(g) {
            Ok(())
        } else {
            let (lo, hi, v) = (self.lower.to_array(), self.upper.to_array(), g.to_array());
            let bad: Vec<String> = (0..DIM)
                .filter(|&d| !(v[d] >= lo[d] && v[d] <= hi[d]))
                .map(|d| format!("{} = {} not in [{}, {}]", GainVector::NAMES[d], v[d], lo[d], hi[d]))
                .collect();
            Err(Error::OutOfDomain(bad.join(", ")))
        }
    }

    pub fn to_log(g: &GainVector) -> Point {
        g.to_array().map(f64::ln)
    }

    /// `theta = exp(z)`, held inside the box against last-ulp rounding.
    /// Points on a log bound map exactly onto that bound.
    pub fn from_log(&self, z: &Point) -> GainVector {
        let (lo, hi) = (self.lower.to_array(), self.upper.to_array());
        let (zlo, zhi) = (self.log_lower(), self.log_upper());
        let mut t = [0.0; DIM];
        for d in 0..DIM {
            t[d] = if z[d] <= zlo[d] {
                lo[d]
            } else if z[d] >= zhi[d] {
                hi[d]
            } else {
                z[d].exp().clamp(lo[d], hi[d])
            };
        }
        GainVector::from_array(t)
    }

    pub fn normalize(&self, z: &Point) -> Point {
        let (lo, hi) = (self.log_lower(), self.log_upper());
        let mut u = [0.0; DIM];
        for d in 0..DIM {
            u[d] = (z[d] - lo[d]) / (hi[d] - lo[d]);
        }
        u
    }

    pub fn denormalize(&self, u: &Point) -> Point {
        let (lo, hi) = (self.log_lower(), self.log_upper());
        let mut z = [0.0; DIM];
        for d in 0..DIM {
            z[d] = if u[d] >= 1.0 { hi[d] } else { lo[d] + u[d].max(0.0) * (hi[d] - lo[d]) };
        }
        z
    }

    pub fn to_unit(&self, g: &GainVector) -> Point {
        self.normalize(&Self::to_log(g))
    }

    pub fn from_unit(&self, u: &Point) -> GainVector {
        self.from_log(&self.denormalize(u))
    }
}
