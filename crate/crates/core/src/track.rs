//! Stadium-shaped reference track and the moving target point that runs
//! along its centerline at constant speed.
//!
//! The canonical (counterclockwise) layout starts at the origin heading +x:
//! bottom straight `(0,0) -> (L,0)`, left-turning semicircle about `(L,R)`,
//! top straight `(L,2R) -> (0,2R)`, semicircle about `(0,R)` back to the
//! origin. A clockwise track is the mirror image in the x axis.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::wrap_angle;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    #[default]
    Counterclockwise,
    Clockwise,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrackSpec {
    pub straight_length: f64,
    pub corner_radius: f64,
    pub direction: Direction,
}

impl Default for TrackSpec {
    fn default() -> Self {
        Self { straight_length: 20.0, corner_radius: 10.0, direction: Direction::Counterclockwise }
    }
}

/// Moving reference point: pose, speed and heading rate at arc length `s`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TargetState {
    pub x: f64,
    pub y: f64,
    pub phi: f64,
    pub v: f64,
    pub phi_dot: f64,
    pub s: f64,
}

/// Point on the centerline at a given arc length.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathPoint {
    pub x: f64,
    pub y: f64,
    pub heading: f64,
    /// Signed curvature, positive for left turns.
    pub curvature: f64,
}

/// Nearest centerline point to a query position.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Projection {
    /// Signed distance, positive to the left of the travel direction.
    pub lateral: f64,
    pub heading: f64,
    pub s: f64,
}

impl TrackSpec {
    pub fn new(straight_length: f64, corner_radius: f64, direction: Direction) -> Result<Self> {
        let spec = Self { straight_length, corner_radius, direction };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        let mut problems = Vec::new();
        if !(self.straight_length.is_finite() && self.straight_length >= 0.0) {
            problems.push(format!("track.straight_length must be >= 0, got {}", self.straight_length));
        }
        if !(self.corner_radius.is_finite() && self.corner_radius > 0.0) {
            problems.push(format!("track.corner_radius must be > 0, got {}", self.corner_radius));
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidConfig(problems))
        }
    }

    pub fn lap_length(&self) -> f64 {
        2.0 * self.straight_length + 2.0 * PI * self.corner_radius
    }

    fn mirror(&self) -> f64 {
        match self.direction {
            Direction::Counterclockwise => 1.0,
            Direction::Clockwise => -1.0,
        }
    }

    /// Centerline point at arc length `s` (wrapped into one lap).
    pub fn point_at(&self, s: f64) -> PathPoint {
        let p = self.point_ccw(s.rem_euclid(self.lap_length()));
        let m = self.mirror();
        PathPoint {
            x: p.x,
            y: m * p.y,
            heading: wrap_angle(m * p.heading),
            curvature: m * p.curvature,
        }
    }

    fn point_ccw(&self, s: f64) -> PathPoint {
        let l = self.straight_length;
        let r = self.corner_radius;
        let arc = PI * r;
        if s < l {
            PathPoint { x: s, y: 0.0, heading: 0.0, curvature: 0.0 }
        } else if s < l + arc {
            let a = (s - l) / r;
            PathPoint {
                x: l + r * a.sin(),
                y: r - r * a.cos(),
                heading: wrap_angle(a),
                curvature: 1.0 / r,
            }
        } else if s < 2.0 * l + arc {
            let d = s - l - arc;
            PathPoint { x: l - d, y: 2.0 * r, heading: PI, curvature: 0.0 }
        } else {
            let a = (s - 2.0 * l - arc) / r;
            PathPoint {
                x: -r * a.sin(),
                y: r + r * a.cos(),
                heading: wrap_angle(PI + a),
                curvature: 1.0 / r,
            }
        }
    }

    /// Target state at time `t` for a target that started at `s = 0`.
    pub fn target_at(&self, t: f64, v_t: f64) -> Result<TargetState> {
        self.target_at_arc(v_t * self.checked_time(t, v_t)?, v_t)
    }

    /// Target state at an explicit arc length.
    pub fn target_at_arc(&self, s: f64, v_t: f64) -> Result<TargetState> {
        if !(v_t.is_finite() && v_t > 0.0) {
            return Err(Error::InvalidArgument(format!("target speed must be > 0, got {v_t}")));
        }
        if !s.is_finite() {
            return Err(Error::InvalidArgument(format!("arc length must be finite, got {s}")));
        }
        let s = s.rem_euclid(self.lap_length());
        let p = self.point_at(s);
        Ok(TargetState { x: p.x, y: p.y, phi: p.heading, v: v_t, phi_dot: v_t * p.curvature, s })
    }

    fn checked_time(&self, t: f64, v_t: f64) -> Result<f64> {
        if !(t.is_finite() && t >= 0.0) {
            return Err(Error::InvalidArgument(format!("time must be finite and >= 0, got {t}")));
        }
        if !(v_t.is_finite() && v_t > 0.0) {
            return Err(Error::InvalidArgument(format!("target speed must be > 0, got {v_t}")));
        }
        Ok(t)
    }

    /// Closed-form projection of `(x, y)` onto the centerline.
    pub fn project(&self, x: f64, y: f64) -> Projection {
        let m = self.mirror();
        let p = self.project_ccw(x, m * y);
        Projection { lateral: m * p.lateral, heading: wrap_angle(m * p.heading), s: p.s }
    }

    fn project_ccw(&self, x: f64, y: f64) -> Projection {
        let l = self.straight_length;
        let r = self.corner_radius;
        let arc = PI * r;

        // each candidate: (unsigned distance, projection)
        let mut best: Option<(f64, Projection)> = None;
        let mut consider = |d: f64, p: Projection| {
            if best.is_none_or(|(bd, _)| d < bd) {
                best = Some((d, p));
            }
        };

        let xb = x.clamp(0.0, l);
        consider(
            (x - xb).hypot(y),
            Projection { lateral: y, heading: 0.0, s: xb },
        );
        consider(
            (x - xb).hypot(y - 2.0 * r),
            Projection { lateral: 2.0 * r - y, heading: PI, s: l + arc + (l - xb) },
        );

        // right arc spans angles [-pi/2, pi/2] about (l, r)
        let (dx, dy) = (x - l, y - r);
        let ang = dy.atan2(dx).clamp(-PI / 2.0, PI / 2.0);
        let (px, py) = (l + r * ang.cos(), r + r * ang.sin());
        let a = ang + PI / 2.0;
        consider(
            (x - px).hypot(y - py),
            Projection { lateral: r - dx.hypot(dy), heading: wrap_angle(a), s: l + r * a },
        );

        // left arc spans angles [pi/2, 3pi/2] about (0, r)
        let (dx, dy) = (x, y - r);
        let raw = dy.atan2(dx);
        let raw = if raw < 0.0 { raw + 2.0 * PI } else { raw };
        let ang = raw.clamp(PI / 2.0, 1.5 * PI);
        let (px, py) = (r * ang.cos(), r + r * ang.sin());
        let a = ang - PI / 2.0;
        consider(
            (x - px).hypot(y - py),
            Projection { lateral: r - dx.hypot(dy), heading: wrap_angle(PI + a), s: 2.0 * l + arc + r * a },
        );

        let (_, p) = best.expect("at least one segment");
        Projection { s: p.s.rem_euclid(self.lap_length()), ..p }
    }

    /// Lateral and heading error of a pose relative to the nearest centerline point.
    pub fn lateral_heading_errors(&self, x: f64, y: f64, phi: f64) -> (f64, f64) {
        let p = self.project(x, y);
        (p.lateral, wrap_angle(phi - p.heading))
    }

    /// Unsigned distance from `(x, y)` to the centerline.
    pub fn centerline_distance(&self, x: f64, y: f64) -> f64 {
        self.project(x, y).lateral.abs()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn stadium() -> TrackSpec {
        TrackSpec::default()
    }

    #[test]
    fn lap_length_closed_form() {
        assert!((stadium().lap_length() - (40.0 + 20.0 * PI)).abs() < 1e-12);
        assert!((stadium().lap_length() - 102.83185307179586).abs() < 1e-9);
        let circle = TrackSpec::new(0.0, 3.0, Direction::Counterclockwise).unwrap();
        assert!((circle.lap_length() - 6.0 * PI).abs() < 1e-12);
        let cw = TrackSpec { direction: Direction::Clockwise, ..stadium() };
        assert_eq!(cw.lap_length(), stadium().lap_length());
    }

    #[test]
    fn target_at_start() {
        let t = stadium().target_at(0.0, 2.0).unwrap();
        assert_eq!((t.x, t.y, t.phi, t.s, t.phi_dot), (0.0, 0.0, 0.0, 0.0, 0.0));
    }

    #[test]
    fn target_at_straight_arc_junction() {
        let spec = stadium();
        let before = spec.target_at(10.0 - 1e-9, 2.0).unwrap();
        assert_eq!(before.phi_dot, 0.0);
        let at = spec.target_at(10.0, 2.0).unwrap();
        assert!((at.s - 20.0).abs() < 1e-12);
        assert!((at.x - 20.0).abs() < 1e-12 && at.y.abs() < 1e-12);
        assert!((at.phi_dot - 0.2).abs() < 1e-15);
    }

    #[test]
    fn target_wraps_after_one_lap() {
        let spec = stadium();
        let a = spec.target_at(0.0, 2.0).unwrap();
        let b = spec.target_at(spec.lap_length() / 2.0, 2.0).unwrap();
        assert!((a.x - b.x).abs() < 1e-9 && (a.y - b.y).abs() < 1e-9);
        assert!(wrap_angle(a.phi - b.phi).abs() < 1e-9);
    }

    #[test]
    fn target_rejects_bad_inputs() {
        let spec = stadium();
        assert!(spec.target_at(f64::NAN, 2.0).is_err());
        assert!(spec.target_at(1.0, 0.0).is_err());
        assert!(spec.target_at(-1.0, 2.0).is_err());
        assert!(TrackSpec::new(-1.0, 1.0, Direction::Counterclockwise).is_err());
        assert!(TrackSpec::new(1.0, 0.0, Direction::Counterclockwise).is_err());
    }

    #[test]
    fn clockwise_turns_right() {
        let cw = TrackSpec { direction: Direction::Clockwise, ..stadium() };
        let t = cw.target_at(15.0, 2.0).unwrap();
        assert!(t.phi_dot < 0.0);
        assert!(t.y < 0.0);
    }

    #[test]
    fn targets_lie_on_centerline() {
        for dir in [Direction::Counterclockwise, Direction::Clockwise] {
            let spec = TrackSpec { direction: dir, ..stadium() };
            for i in 0..2000 {
                let t = spec.target_at(i as f64 * 0.0537, 2.0).unwrap();
                assert!(spec.centerline_distance(t.x, t.y) < 1e-9, "t={i}");
                let proj = spec.project(t.x, t.y);
                assert!(wrap_angle(proj.heading - t.phi).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn position_derivative_matches_heading() {
        let spec = stadium();
        let dt = 1e-6;
        for i in 0..500 {
            let t = i as f64 * 0.1 + 0.013;
            let a = spec.target_at(t, 2.0).unwrap();
            let b = spec.target_at(t + dt, 2.0).unwrap();
            let vx = (b.x - a.x) / dt;
            let vy = (b.y - a.y) / dt;
            assert!((vx - 2.0 * a.phi.cos()).abs() < 1e-4);
            assert!((vy - 2.0 * a.phi.sin()).abs() < 1e-4);
            let dphi = wrap_angle(b.phi - a.phi) / dt;
            if a.phi_dot == b.phi_dot {
                assert!((dphi - a.phi_dot).abs() < 1e-4);
            }
        }
    }

    #[test]
    fn lateral_heading_errors_examples() {
        let spec = stadium();
        assert_eq!(spec.lateral_heading_errors(5.0, 0.0, 0.0), (0.0, 0.0));
        let (e_lat, e_head) = spec.lateral_heading_errors(5.0, 0.5, 0.0);
        assert!((e_lat - 0.5).abs() < 1e-12 && e_head.abs() < 1e-12);
        let (e_lat, e_head) = spec.lateral_heading_errors(5.0, 0.0, 0.1);
        assert!(e_lat.abs() < 1e-12 && (e_head - 0.1).abs() < 1e-12);
        // inside the right arc: left of travel, positive
        let (e_lat, _) = spec.lateral_heading_errors(29.0, 10.0, PI / 2.0);
        assert!((e_lat - 1.0).abs() < 1e-12);
        // on the top straight, heading -x, +y is to the right
        let (e_lat, e_head) = spec.lateral_heading_errors(10.0, 20.3, PI);
        assert!((e_lat + 0.3).abs() < 1e-12 && e_head.abs() < 1e-12);
        // clockwise mirror: left of travel on the first straight is +y
        let cw = TrackSpec { direction: Direction::Clockwise, ..spec };
        let (e_lat, _) = cw.lateral_heading_errors(5.0, 0.5, 0.0);
        assert!((e_lat - 0.5).abs() < 1e-12);
    }

    #[test]
    fn behind_arc_center_projects_onto_straight() {
        // the right arc only covers x >= L, so the straights are nearest here
        let spec = stadium();
        let p = spec.project(19.9, 10.0);
        assert!((p.lateral - 10.0).abs() < 1e-12, "{p:?}");
    }
}
