//! Lyapunov-based geometric path-following controller.
//!
//! With `V1 = rho^2 / 2` and `V2 = (1 - cos alpha)/k1 + (1 - cos beta)/k2`,
//! the velocity laws below make `dV2/dt = -(lambda_a/k1) sin^2 alpha`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::TrackingError;
use crate::track::TargetState;

/// `|sin alpha|` below which the angular-velocity law switches to its
/// regularized form.
pub const ALPHA_EPS: f64 = 1e-3;

/// Controller gains `[lambda_v, lambda_a, k1, k2]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GainVector {
    pub lambda_v: f64,
    pub lambda_a: f64,
    pub k1: f64,
    pub k2: f64,
}

impl GainVector {
    /// Hand-tuned gains used as the campaign baseline.
    pub const BASELINE: GainVector = GainVector { lambda_v: 0.02, lambda_a: 0.25, k1: 0.7, k2: 50.0 };

    pub const NAMES: [&'static str; 4] = ["lambda_v", "lambda_a", "k1", "k2"];

    pub fn new(lambda_v: f64, lambda_a: f64, k1: f64, k2: f64) -> Result<Self> {
        let g = Self { lambda_v, lambda_a, k1, k2 };
        g.validate()?;
        Ok(g)
    }

    pub fn from_array(a: [f64; 4]) -> Self {
        Self { lambda_v: a[0], lambda_a: a[1], k1: a[2], k2: a[3] }
    }

    pub fn to_array(self) -> [f64; 4] {
        [self.lambda_v, self.lambda_a, self.k1, self.k2]
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in Self::NAMES.iter().zip(self.to_array()) {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidArgument(format!("gain {name} must be finite and > 0, got {v}")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ActuatorLimits {
    pub v_max: f64,
    pub omega_max: f64,
}

impl Default for ActuatorLimits {
    fn default() -> Self {
        Self { v_max: 4.0, omega_max: 2.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
pub struct ControlCommand {
    pub v: f64,
    pub omega: f64,
    pub v_saturated: bool,
    pub omega_saturated: bool,
    /// The `sin alpha` singularity guard was active for this command.
    pub guarded: bool,
}

/// Raw angular-velocity law output, before saturation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AngularVelocity {
    pub omega: f64,
    pub guarded: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Lyapunov {
    pub v1: f64,
    pub v2: f64,
    pub total: f64,
}

/// `v = (v_t cos beta + lambda_v rho) cos alpha`
pub fn linear_velocity(err: &TrackingError, v_t: f64, gains: &GainVector) -> f64 {
    (v_t * err.beta.cos() + gains.lambda_v * err.rho) * err.alpha.cos()
}

/// Angular-velocity law with every removable `1/sin alpha` cancelled
/// analytically. The two terms that stay singular (`sin beta / sin alpha`)
/// use `sin alpha` clamped to `±ALPHA_EPS` when it is smaller than that.
pub fn angular_velocity(
    err: &TrackingError,
    v_t: f64,
    phi_t_dot: f64,
    gains: &GainVector,
) -> AngularVelocity {
    let (sa, ca) = err.alpha.sin_cos();
    let (sb, cb) = err.beta.sin_cos();
    let rho = err.rho;
    let ratio = gains.k1 / gains.k2;

    let guarded = sa.abs() <= ALPHA_EPS;
    let sa_div = if guarded { ALPHA_EPS.copysign(if sa == 0.0 { 1.0 } else { sa }) } else { sa };

    let regular = gains.lambda_a * sa
        + v_t * (sa * cb * ca - sb) / rho
        + ratio * v_t * sb * cb * ca / rho
        + gains.lambda_v * ca * (sa + ratio * sb);
    let singular = -ratio * sb * (v_t * sb / rho + phi_t_dot) / sa_div;

    AngularVelocity { omega: regular + singular, guarded }
}

/// Clamps a raw command to the actuator limits and records which channels hit them.
pub fn saturate(v: f64, omega: f64, limits: &ActuatorLimits) -> ControlCommand {
    let vs = v.clamp(-limits.v_max, limits.v_max);
    let ws = omega.clamp(-limits.omega_max, limits.omega_max);
    ControlCommand { v: vs, omega: ws, v_saturated: vs != v, omega_saturated: ws != omega, guarded: false }
}

/// Full saturated command for the current error and target.
pub fn control(
    err: &TrackingError,
    target: &TargetState,
    gains: &GainVector,
    limits: &ActuatorLimits,
) -> ControlCommand {
    let v = linear_velocity(err, target.v, gains);
    let w = angular_velocity(err, target.v, target.phi_dot, gains);
    ControlCommand { guarded: w.guarded, ..saturate(v, w.omega, limits) }
}

pub fn lyapunov(err: &TrackingError, gains: &GainVector) -> Lyapunov {
    let v1 = 0.5 * err.rho * err.rho;
    let v2 = (1.0 - err.alpha.cos()) / gains.k1 + (1.0 - err.beta.cos()) / gains.k2;
    Lyapunov { v1, v2, total: v1 + v2 }
}

/// `dV2/dt` under the designed angular velocity: `-(lambda_a/k1) sin^2 alpha`.
pub fn vdot2_closed_form(err: &TrackingError, gains: &GainVector) -> f64 {
    let s = err.alpha.sin();
    -(gains.lambda_a / gains.k1) * s * s
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn gains() -> GainVector {
        GainVector::BASELINE
    }

    /// Literal evaluation of the published angular-velocity law, term by term.
    fn omega_reference(rho: f64, alpha: f64, beta: f64, v_t: f64, phi_t_dot: f64, g: &GainVector) -> f64 {
        let (sa, ca, sb, cb) = (alpha.sin(), alpha.cos(), beta.sin(), beta.cos());
        let (k1, k2) = (g.k1, g.k2);
        let bracket = v_t
            * (sa * sa * cb * ca / (k1 * rho) - sa * sb / (k1 * rho) + sa * sb * cb * ca / (k2 * rho)
                - sb * sb / (k2 * rho))
            + g.lambda_v * ca * (sa * sa / k1 + sa * sb / k2);
        g.lambda_a * sa + k1 / sa * bracket - k1 * sb / (k2 * sa) * phi_t_dot
    }

    #[test]
    fn linear_velocity_examples() {
        let g = gains();
        assert_eq!(linear_velocity(&TrackingError::from_polar(0.0, 0.0, 0.0), 2.0, &g), 2.0);
        assert!((linear_velocity(&TrackingError::from_polar(1.0, 0.0, 0.0), 2.0, &g) - 2.02).abs() < 1e-15);
        assert!(linear_velocity(&TrackingError::from_polar(1.0, PI / 2.0, 0.0), 2.0, &g).abs() < 1e-15);
    }

    #[test]
    fn angular_velocity_aligned_is_zero() {
        for rho in [0.1, 1.0, 7.0] {
            let w = angular_velocity(&TrackingError::from_polar(rho, 0.0, 0.0), 2.0, 0.0, &gains());
            assert_eq!(w.omega, 0.0);
            assert!(w.guarded);
        }
    }

    #[test]
    fn angular_velocity_quarter_turn() {
        let w = angular_velocity(&TrackingError::from_polar(1.0, PI / 2.0, 0.0), 0.0, 0.0, &gains());
        assert!(!w.guarded);
        assert!((w.omega - 0.25).abs() < 1e-12);
    }

    #[test]
    fn angular_velocity_matches_literal_formula() {
        let g = gains();
        let w = angular_velocity(&TrackingError::from_polar(1.0, PI / 2.0, PI / 2.0), 1.0, 0.0, &g);
        let reference = omega_reference(1.0, PI / 2.0, PI / 2.0, 1.0, 0.0, &g);
        // lambda_a - k1/k2 - v_t = 0.25 - 0.014 - 1
        assert!((reference - (0.25 - 0.7 / 50.0 - 1.0)).abs() < 1e-12);
        assert!((w.omega - reference).abs() < 1e-12);

        let cases = [(0.4, 0.3, -1.1, 2.0, 0.2), (3.0, -2.0, 2.5, 0.7, -0.6), (1.2, 0.05, 0.01, 2.0, 0.0)];
        for (rho, a, b, vt, pd) in cases {
            let got = angular_velocity(&TrackingError::from_polar(rho, a, b), vt, pd, &g).omega;
            let want = omega_reference(rho, a, b, vt, pd, &g);
            assert!((got - want).abs() <= 1e-12 * want.abs().max(1.0), "{got} vs {want}");
        }
    }

    #[test]
    fn guard_clamps_singular_term() {
        let g = gains();
        let e = TrackingError::from_polar(1.0, 0.0, 0.1);
        let w = angular_velocity(&e, 2.0, 0.2, &g);
        assert!(w.guarded);
        assert!(w.omega.is_finite());
        // continuity across the guard boundary on the positive side
        let just_out = TrackingError::from_polar(1.0, (ALPHA_EPS * 1.0001).asin(), 0.1);
        let just_in = TrackingError::from_polar(1.0, (ALPHA_EPS * 0.9999).asin(), 0.1);
        let a = angular_velocity(&just_out, 2.0, 0.2, &g).omega;
        let b = angular_velocity(&just_in, 2.0, 0.2, &g).omega;
        assert!((a - b).abs() < 1e-2 * a.abs());
    }

    #[test]
    fn lyapunov_examples() {
        let g = gains();
        let l = lyapunov(&TrackingError::from_polar(0.0, 0.0, 0.0), &g);
        assert_eq!((l.v1, l.v2, l.total), (0.0, 0.0, 0.0));
        let l = lyapunov(&TrackingError::from_polar(2.0, PI, 0.0), &g);
        assert!((l.v1 - 2.0).abs() < 1e-15);
        assert!((l.v2 - 2.0 / 0.7).abs() < 1e-12);
        let l = lyapunov(&TrackingError::from_polar(1.0, 0.0, PI), &g);
        assert!((l.v2 - 0.04).abs() < 1e-15);
    }

    #[test]
    fn vdot2_examples() {
        let g = gains();
        assert_eq!(vdot2_closed_form(&TrackingError::from_polar(1.0, 0.0, 0.0), &g), 0.0);
        let v = vdot2_closed_form(&TrackingError::from_polar(1.0, PI / 2.0, 0.0), &g);
        assert!((v + 0.25 / 0.7).abs() < 1e-12);
        assert!((v + 0.357_142_857_142_857).abs() < 1e-12);
    }

    #[test]
    fn saturation_flags() {
        let lim = ActuatorLimits::default();
        let c = saturate(3.9, -1.9, &lim);
        assert!(!c.v_saturated && !c.omega_saturated);
        let c = saturate(4.5, -2.5, &lim);
        assert!(c.v_saturated && c.omega_saturated);
        assert_eq!((c.v, c.omega), (4.0, -2.0));
        let c = saturate(4.0, 2.0, &lim);
        assert!(!c.v_saturated && !c.omega_saturated);
    }

    #[test]
    fn gain_validation() {
        assert!(GainVector::new(0.02, 0.25, 0.7, 50.0).is_ok());
        assert!(GainVector::new(0.0, 0.25, 0.7, 50.0).is_err());
        assert!(GainVector::new(0.02, f64::NAN, 0.7, 50.0).is_err());
        let g = GainVector::from_array([1.0, 2.0, 3.0, 4.0]);
        assert_eq!(g.to_array(), [1.0, 2.0, 3.0, 4.0]);
    }
}
