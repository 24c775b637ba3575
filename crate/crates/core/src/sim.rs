//! Closed-loop lap simulation: unicycle kinematics integrated with RK4 under
//! the Lyapunov controller, with additive actuator and measurement noise.

use std::io::Write;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::controller::{self, ActuatorLimits, ControlCommand, GainVector};
use crate::error::{Error, Result};
use crate::geometry::{compute_error, wrap_angle, RobotPose, TrackingError};
use crate::track::{TargetState, TrackSpec};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ActuatorNoise {
    pub v: f64,
    pub omega: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeasurementNoise {
    pub x: f64,
    pub y: f64,
    pub phi: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct InitialOffset {
    /// Meters, positive to the left of the travel direction.
    pub lateral: f64,
    pub heading: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimConfig {
    pub dt_control: f64,
    pub dt_log: f64,
    pub v_t: f64,
    pub noise_du: ActuatorNoise,
    pub noise_dy: MeasurementNoise,
    pub divergence_rho: f64,
    /// Noise seed. Campaigns derive one per evaluation, so it is not part of
    /// the stored configuration.
    #[serde(skip)]
    pub seed: u64,
    pub initial_offset: InitialOffset,
    /// Arc length by which the target leads the robot's start point.
    pub lookahead: f64,
    pub limits: ActuatorLimits,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            dt_control: 0.01,
            dt_log: 0.1,
            v_t: 2.0,
            noise_du: ActuatorNoise { v: 0.05, omega: 0.02 },
            noise_dy: MeasurementNoise { x: 0.02, y: 0.02, phi: 0.01 },
            divergence_rho: 5.0,
            seed: 0,
            initial_offset: InitialOffset::default(),
            lookahead: 1.0,
            limits: ActuatorLimits::default(),
        }
    }
}

impl SimConfig {
    pub fn noiseless(self) -> Self {
        Self {
            noise_du: ActuatorNoise { v: 0.0, omega: 0.0 },
            noise_dy: MeasurementNoise { x: 0.0, y: 0.0, phi: 0.0 },
            ..self
        }
    }

    /// Control steps per logged sample.
    pub fn log_stride(&self) -> usize {
        (self.dt_log / self.dt_control).round() as usize
    }

    pub fn validate(&self) -> Result<()> {
        let mut p = Vec::new();
        let pos = |v: f64| v.is_finite() && v > 0.0;
        let nonneg = |v: f64| v.is_finite() && v >= 0.0;
        if !pos(self.dt_control) {
            p.push(format!("sim.dt_control must be > 0, got {}", self.dt_control));
        }
        if !pos(self.dt_log) {
            p.push(format!("sim.dt_log must be > 0, got {}", self.dt_log));
        } else if pos(self.dt_control) {
            let ratio = self.dt_log / self.dt_control;
            if ratio.round() < 1.0 || (ratio - ratio.round()).abs() > 1e-9 * ratio {
                p.push(format!(
                    "sim.dt_log ({}) must be an integer multiple of sim.dt_control ({})",
                    self.dt_log, self.dt_control
                ));
            }
        }
        if !pos(self.v_t) {
            p.push(format!("sim.v_t must be > 0, got {}", self.v_t));
        }
        for (name, v) in [
            ("sim.noise_du.v", self.noise_du.v),
            ("sim.noise_du.omega", self.noise_du.omega),
            ("sim.noise_dy.x", self.noise_dy.x),
            ("sim.noise_dy.y", self.noise_dy.y),
            ("sim.noise_dy.phi", self.noise_dy.phi),
        ] {
            if !nonneg(v) {
                p.push(format!("{name} must be >= 0, got {v}"));
            }
        }
        if !pos(self.divergence_rho) {
            p.push(format!("sim.divergence_rho must be > 0, got {}", self.divergence_rho));
        }
        if !pos(self.lookahead) {
            p.push(format!("sim.lookahead must be > 0, got {}", self.lookahead));
        }
        if !self.initial_offset.lateral.is_finite() || !self.initial_offset.heading.is_finite() {
            p.push("sim.initial_offset must be finite".to_string());
        }
        if !pos(self.limits.v_max) || !pos(self.limits.omega_max) {
            p.push("sim.limits must be > 0".to_string());
        }
        if p.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidConfig(p))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LapSample {
    pub t: f64,
    pub robot: RobotPose,
    pub target: TargetState,
    pub err: TrackingError,
    pub cmd: ControlCommand,
    pub e_lat: f64,
    pub e_head: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct LapLog {
    pub samples: Vec<LapSample>,
    pub dt: f64,
}

impl LapLog {
    /// Index of the last sample.
    pub fn last_index(&self) -> usize {
        self.samples.len().saturating_sub(1)
    }

    pub const CSV_HEADER: &'static str =
        "t,x,y,phi,x_t,y_t,phi_t,v_cmd,omega_cmd,rho,alpha,beta,e_lat,e_head";

    pub fn rows(&self) -> impl Iterator<Item = LapRow> + '_ {
        self.samples.iter().map(LapRow::from)
    }

    pub fn write_csv<W: Write>(&self, w: W) -> csv::Result<()> {
        let mut out = csv::Writer::from_writer(w);
        for row in self.rows() {
            out.serialize(row)?;
        }
        if self.samples.is_empty() {
            out.write_record(Self::CSV_HEADER.split(','))?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("csv is ascii")
    }
}

/// One line of a lap CSV.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LapRow {
    pub t: f64,
    pub x: f64,
    pub y: f64,
    pub phi: f64,
    pub x_t: f64,
    pub y_t: f64,
    pub phi_t: f64,
    pub v_cmd: f64,
    pub omega_cmd: f64,
    pub rho: f64,
    pub alpha: f64,
    pub beta: f64,
    pub e_lat: f64,
    pub e_head: f64,
}

impl From<&LapSample> for LapRow {
    fn from(s: &LapSample) -> Self {
        Self {
            t: s.t,
            x: s.robot.x,
            y: s.robot.y,
            phi: s.robot.phi,
            x_t: s.target.x,
            y_t: s.target.y,
            phi_t: s.target.phi,
            v_cmd: s.cmd.v,
            omega_cmd: s.cmd.omega,
            rho: s.err.rho,
            alpha: s.err.alpha,
            beta: s.err.beta,
            e_lat: s.e_lat,
            e_head: s.e_head,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    Completed,
    Diverged,
    Timeout,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LapResult {
    pub log: LapLog,
    pub completed: bool,
    pub l_comp: f64,
    pub l_lap: f64,
    pub diverged_at: Option<f64>,
    pub termination: Termination,
    pub guard_steps: usize,
    pub saturated_steps: usize,
    pub control_steps: usize,
}

impl LapResult {
    pub fn completion_ratio(&self) -> f64 {
        (self.l_comp / self.l_lap).clamp(0.0, 1.0)
    }

    pub fn summary(&self) -> LapSummary {
        LapSummary {
            completed: self.completed,
            termination: self.termination,
            l_comp: self.l_comp,
            l_lap: self.l_lap,
            diverged_at: self.diverged_at,
            samples: self.log.samples.len(),
            guard_steps: self.guard_steps,
            saturated_steps: self.saturated_steps,
        }
    }
}

/// Compact lap description stored alongside each campaign evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LapSummary {
    pub completed: bool,
    pub termination: Termination,
    pub l_comp: f64,
    pub l_lap: f64,
    pub diverged_at: Option<f64>,
    pub samples: usize,
    pub guard_steps: usize,
    pub saturated_steps: usize,
}

/// Derivative of the unicycle state `(x, y, phi)` under constant `(v, omega)`.
fn unicycle(state: [f64; 3], v: f64, omega: f64) -> [f64; 3] {
    [v * state[2].cos(), v * state[2].sin(), omega]
}

/// One RK4 step of the unicycle with a zero-order-hold command.
pub fn rk4_step(pose: RobotPose, v: f64, omega: f64, dt: f64) -> RobotPose {
    let s0 = [pose.x, pose.y, pose.phi];
    let add = |s: [f64; 3], k: [f64; 3], h: f64| [s[0] + h * k[0], s[1] + h * k[1], s[2] + h * k[2]];
    let k1 = unicycle(s0, v, omega);
    let k2 = unicycle(add(s0, k1, dt / 2.0), v, omega);
    let k3 = unicycle(add(s0, k2, dt / 2.0), v, omega);
    let k4 = unicycle(add(s0, k3, dt), v, omega);
    let mut out = [0.0; 3];
    for i in 0..3 {
        out[i] = s0[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    RobotPose::new(out[0], out[1], out[2])
}

struct Noise {
    rng: ChaCha8Rng,
}

impl Noise {
    fn sample(&mut self, std: f64) -> f64 {
        if std > 0.0 {
            Normal::new(0.0, std).expect("std checked positive").sample(&mut self.rng)
        } else {
            0.0
        }
    }
}

/// Initial robot pose: on the centerline at `s = 0`, shifted by the configured offset.
pub fn initial_pose(track: &TrackSpec, cfg: &SimConfig) -> RobotPose {
    let p = track.point_at(0.0);
    let (s, c) = p.heading.sin_cos();
    RobotPose::new(
        p.x - s * cfg.initial_offset.lateral,
        p.y + c * cfg.initial_offset.lateral,
        p.heading + cfg.initial_offset.heading,
    )
}

/// Simulates one lap. Instability ends the lap early and is reported in the
/// result; only invalid inputs produce an error.
pub fn run_lap(track: &TrackSpec, gains: &GainVector, cfg: &SimConfig) -> Result<LapResult> {
    track.validate()?;
    gains.validate()?;
    cfg.validate()?;

    let l_lap = track.lap_length();
    let dt = cfg.dt_control;
    let stride = cfg.log_stride();
    let lap_steps = (l_lap / (cfg.v_t * dt) - 1e-9).ceil() as usize;
    let timeout_steps = (2.0 * l_lap / (cfg.v_t * dt)).ceil() as usize;

    let mut noise = Noise { rng: ChaCha8Rng::seed_from_u64(cfg.seed) };
    let mut pose = initial_pose(track, cfg);
    let mut log = LapLog { samples: Vec::with_capacity(lap_steps / stride + 2), dt: cfg.dt_log };
    let mut guard_steps = 0;
    let mut saturated_steps = 0;
    let mut termination = Termination::Completed;
    let mut stop_step = lap_steps;

    for k in 0..lap_steps.min(timeout_steps) {
        let t = k as f64 * dt;
        let target = track.target_at_arc(cfg.lookahead + cfg.v_t * t, cfg.v_t)?;
        let err = compute_error(&pose, &target);
        let finite = pose.x.is_finite() && pose.y.is_finite() && pose.phi.is_finite();
        if !finite || err.rho > cfg.divergence_rho {
            termination = Termination::Diverged;
            stop_step = k;
            break;
        }

        let measured = RobotPose::new(
            pose.x + noise.sample(cfg.noise_dy.x),
            pose.y + noise.sample(cfg.noise_dy.y),
            pose.phi + noise.sample(cfg.noise_dy.phi),
        );
        let seen = compute_error(&measured, &target);
        let v_raw = controller::linear_velocity(&seen, target.v, gains);
        let (w_raw, guarded) = if seen.degenerate {
            (0.0, true)
        } else {
            let w = controller::angular_velocity(&seen, target.v, target.phi_dot, gains);
            (w.omega, w.guarded)
        };
        let v_in = v_raw + noise.sample(cfg.noise_du.v);
        let w_in = w_raw + noise.sample(cfg.noise_du.omega);
        let cmd = ControlCommand { guarded, ..controller::saturate(v_in, w_in, &cfg.limits) };
        guard_steps += usize::from(guarded);
        saturated_steps += usize::from(cmd.v_saturated || cmd.omega_saturated);

        if k % stride == 0 {
            let (e_lat, e_head) = track.lateral_heading_errors(pose.x, pose.y, pose.phi);
            log.samples.push(LapSample { t, robot: pose, target, err, cmd, e_lat, e_head });
        }

        pose = rk4_step(pose, cmd.v, cmd.omega, dt);
    }
    if termination == Termination::Completed && lap_steps > timeout_steps {
        termination = Termination::Timeout;
        stop_step = timeout_steps;
    }

    let completed = termination == Termination::Completed;
    let l_comp = if completed { l_lap } else { (cfg.v_t * stop_step as f64 * dt).min(l_lap) };
    Ok(LapResult {
        log,
        completed,
        l_comp,
        l_lap,
        diverged_at: (!completed).then_some(stop_step as f64 * dt),
        termination,
        guard_steps,
        saturated_steps,
        control_steps: stop_step,
    })
}

/// Heading error in degrees, for reporting.
pub fn to_degrees(rad: f64) -> f64 {
    wrap_angle(rad).to_degrees()
}
