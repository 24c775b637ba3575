//! Polar tracking-error state between the robot and the moving target.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::track::TargetState;

/// Below this distance the line-of-sight angle is undefined and is replaced
/// by the robot heading.
pub const RHO_EPS: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
pub struct RobotPose {
    pub x: f64,
    pub y: f64,
    pub phi: f64,
}

impl RobotPose {
    pub fn new(x: f64, y: f64, phi: f64) -> Self {
        Self { x, y, phi: wrap_angle(phi) }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
pub struct TrackingError {
    pub rho: f64,
    pub theta_t: f64,
    pub alpha: f64,
    pub beta: f64,
    /// Set when `rho < RHO_EPS` and `theta_t` fell back to the robot heading.
    #[serde(default)]
    pub degenerate: bool,
}

impl TrackingError {
    /// Builds an error state from its three independent coordinates, taking
    /// `theta_t = 0`. Handy for evaluating control laws at synthetic states.
    pub fn from_polar(rho: f64, alpha: f64, beta: f64) -> Self {
        Self { rho, theta_t: 0.0, alpha: wrap_angle(alpha), beta: wrap_angle(beta), degenerate: rho < RHO_EPS }
    }
}

/// Wraps an angle into `(-pi, pi]`.
pub fn wrap_angle(a: f64) -> f64 {
    let r = (a + PI).rem_euclid(2.0 * PI) - PI;
    if r <= -PI {
        PI
    } else {
        r
    }
}

pub fn compute_error(robot: &RobotPose, target: &TargetState) -> TrackingError {
    let dx = target.x - robot.x;
    let dy = target.y - robot.y;
    let rho = dx.hypot(dy);
    let degenerate = rho < RHO_EPS;
    let theta_t = if degenerate { wrap_angle(robot.phi) } else { dy.atan2(dx) };
    TrackingError {
        rho,
        theta_t: wrap_angle(theta_t),
        alpha: wrap_angle(theta_t - robot.phi),
        beta: wrap_angle(theta_t - target.phi),
        degenerate,
    }
}

/// Time derivatives `(rho_dot, alpha_dot, beta_dot)` of the error state.
pub fn error_derivatives(
    err: &TrackingError,
    v: f64,
    omega: f64,
    v_t: f64,
    phi_t_dot: f64,
) -> Result<(f64, f64, f64)> {
    if !(err.rho > RHO_EPS) {
        return Err(Error::InvalidArgument(format!(
            "error derivatives need rho > {RHO_EPS:e}, got {}",
            err.rho
        )));
    }
    let rho_dot = v_t * err.beta.cos() - v * err.alpha.cos();
    let lateral = (v * err.alpha.sin() - v_t * err.beta.sin()) / err.rho;
    Ok((rho_dot, lateral - omega, lateral - phi_t_dot))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn target(x: f64, y: f64, phi: f64) -> TargetState {
        TargetState { x, y, phi, v: 0.0, phi_dot: 0.0, s: 0.0 }
    }

    #[test]
    fn wrap_examples() {
        assert_eq!(wrap_angle(0.0), 0.0);
        assert!((wrap_angle(3.0 * PI) - PI).abs() < 1e-12);
        assert_eq!(wrap_angle(-PI), PI);
        assert_eq!(wrap_angle(PI), PI);
    }

    #[test]
    fn error_examples() {
        let e = compute_error(&RobotPose::new(0.0, 0.0, 0.0), &target(1.0, 0.0, 0.0));
        assert_eq!((e.rho, e.theta_t, e.alpha, e.beta), (1.0, 0.0, 0.0, 0.0));

        let e = compute_error(&RobotPose::new(0.0, 0.0, 0.0), &target(0.0, 1.0, PI / 2.0));
        assert!((e.rho - 1.0).abs() < 1e-15);
        assert!((e.theta_t - PI / 2.0).abs() < 1e-15);
        assert!((e.alpha - PI / 2.0).abs() < 1e-15);
        assert!(e.beta.abs() < 1e-15);

        let e = compute_error(&RobotPose::new(0.0, 0.0, PI), &target(1.0, 0.0, 0.0));
        assert_eq!(e.theta_t, 0.0);
        assert_eq!(e.alpha, PI);
    }

    #[test]
    fn degenerate_error_aligns_with_robot() {
        let e = compute_error(&RobotPose::new(1.0, 2.0, 0.7), &target(1.0, 2.0, 0.2));
        assert!(e.degenerate);
        assert_eq!(e.alpha, 0.0);
        assert!((e.theta_t - 0.7).abs() < 1e-15);
        assert!((e.beta - 0.5).abs() < 1e-15);
    }

    #[test]
    fn derivative_examples() {
        let d = error_derivatives(&TrackingError::from_polar(1.0, 0.0, 0.0), 2.0, 0.0, 2.0, 0.0).unwrap();
        assert_eq!(d, (0.0, 0.0, 0.0));

        let (r, a, b) =
            error_derivatives(&TrackingError::from_polar(1.0, PI / 2.0, 0.0), 1.0, 0.0, 0.0, 0.0).unwrap();
        assert!(r.abs() < 1e-15 && (a - 1.0).abs() < 1e-15 && (b - 1.0).abs() < 1e-15);

        let (r, a, b) =
            error_derivatives(&TrackingError::from_polar(2.0, 0.0, PI), 1.0, 0.5, 1.0, 0.0).unwrap();
        assert!((r + 2.0).abs() < 1e-15);
        assert!((a + 0.5).abs() < 1e-15);
        assert!(b.abs() < 1e-15);

        assert!(error_derivatives(&TrackingError::from_polar(0.0, 0.0, 0.0), 1.0, 0.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn derivatives_match_finite_differences() {
        // robot and target each move along their own unicycle for a short step
        let (v, omega, v_t, phi_t_dot) = (1.3, 0.4, 2.0, -0.2);
        let robot = RobotPose::new(0.3, -0.4, 0.25);
        let tgt = target(1.5, 0.6, -0.3);
        let h = 1e-6;
        let advance = |p: RobotPose, speed: f64, rate: f64, h: f64| {
            RobotPose::new(p.x + speed * p.phi.cos() * h, p.y + speed * p.phi.sin() * h, p.phi + rate * h)
        };
        let e0 = compute_error(&robot, &tgt);
        let r1 = advance(robot, v, omega, h);
        let t1p = advance(RobotPose::new(tgt.x, tgt.y, tgt.phi), v_t, phi_t_dot, h);
        let e1 = compute_error(&r1, &target(t1p.x, t1p.y, t1p.phi));
        let (rd, ad, bd) = error_derivatives(&e0, v, omega, v_t, phi_t_dot).unwrap();
        assert!(((e1.rho - e0.rho) / h - rd).abs() < 1e-4);
        assert!((wrap_angle(e1.alpha - e0.alpha) / h - ad).abs() < 1e-4);
        assert!((wrap_angle(e1.beta - e0.beta) / h - bd).abs() < 1e-4);
    }

    proptest! {
        #[test]
        fn wrap_is_idempotent_and_periodic(a in -1e3f64..1e3, k in -20i32..20) {
            let w = wrap_angle(a);
            prop_assert!(w > -PI && w <= PI);
            prop_assert_eq!(wrap_angle(w), w);
            let shifted = wrap_angle(a + 2.0 * PI * k as f64);
            prop_assert!(wrap_angle(shifted - w).abs() < 1e-9);
        }

        #[test]
        fn error_reconstructs_target(
            x in -50.0f64..50.0, y in -50.0f64..50.0, phi in -4.0f64..4.0,
            xt in -50.0f64..50.0, yt in -50.0f64..50.0, phit in -4.0f64..4.0,
        ) {
            let robot = RobotPose::new(x, y, phi);
            let e = compute_error(&robot, &target(xt, yt, wrap_angle(phit)));
            prop_assert!(e.rho >= 0.0);
            prop_assert!((x + e.rho * e.theta_t.cos() - xt).abs() < 1e-9);
            prop_assert!((y + e.rho * e.theta_t.sin() - yt).abs() < 1e-9);
            prop_assert!(wrap_angle(e.alpha - (e.theta_t - robot.phi)).abs() < 1e-12);
        }
    }
}
