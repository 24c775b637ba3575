//! C ABI over the gaintune lap simulator, cost, GP surrogate and expected
//! improvement.
//!
//! Every fallible function returns a [`GtStatus`]; on failure a message is
//! available from [`gt_last_error_message`] on the same thread. Handles are
//! opaque and must be released with their matching `*_free` function.
//! Panics never cross the boundary; they surface as [`GtStatus::Panic`].

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use gaintune::bo::expected_improvement;
use gaintune::controller::{control, ActuatorLimits, GainVector};
use gaintune::cost::{evaluate_cost, CostWeights};
use gaintune::geometry::TrackingError;
use gaintune::gp::{optimize_hypers, GpDataset, GpModel, KernelHyperparams, PosteriorPrediction, DIM};
use gaintune::sim::{run_lap, LapResult, LapRow, SimConfig, Termination};
use gaintune::track::{Direction, TargetState, TrackSpec};
use gaintune::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GtStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    OutOfDomain = 3,
    NotPositiveDefinite = 4,
    /// Index past the end of a lap log.
    OutOfRange = 5,
    Panic = 6,
    Internal = 7,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GtTermination {
    Completed = 0,
    Diverged = 1,
    Timeout = 2,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GtGains {
    pub lambda_v: f64,
    pub lambda_a: f64,
    pub k1: f64,
    pub k2: f64,
}

/// Lap settings exposed over the ABI. Everything else uses library defaults.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GtLapOptions {
    pub straight_length: f64,
    pub corner_radius: f64,
    pub clockwise: bool,
    /// Disables actuator and measurement noise.
    pub noiseless: bool,
    pub seed: u64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GtLapSummary {
    pub completed: bool,
    pub termination: GtTermination,
    pub l_comp: f64,
    pub l_lap: f64,
    pub completion_ratio: f64,
    /// NaN unless the lap diverged.
    pub diverged_at: f64,
    pub samples: usize,
    pub guard_steps: usize,
    pub saturated_steps: usize,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GtCost {
    pub j_lat: f64,
    pub j_head: f64,
    pub j: f64,
    pub j_bo: f64,
    pub penalty: f64,
    pub completion_ratio: f64,
}

/// One logged sample. Angles in radians.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GtSample {
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

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GtTrackingError {
    pub rho: f64,
    pub alpha: f64,
    pub beta: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GtCommand {
    pub v: f64,
    pub omega: f64,
    pub v_saturated: bool,
    pub omega_saturated: bool,
    pub guarded: bool,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GtHyper {
    pub signal_variance: f64,
    pub length_scales: [f64; 4],
    pub noise_variance: f64,
}

/// A simulated lap.
pub struct GtLap {
    result: LapResult,
}

/// A Gaussian process fitted to a dataset on the unit cube.
pub struct GtGp {
    model: GpModel,
}

const _: () = assert!(DIM == 4);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn fail(status: GtStatus, msg: impl Into<String>) -> GtStatus {
    set_error(msg.into());
    status
}

fn from_error(e: Error) -> GtStatus {
    let status = match &e {
        Error::InvalidArgument(_) | Error::InvalidConfig(_) | Error::Parse { .. } => GtStatus::InvalidArgument,
        Error::OutOfDomain(_) => GtStatus::OutOfDomain,
        Error::NotPositiveDefinite { .. } => GtStatus::NotPositiveDefinite,
        _ => GtStatus::Internal,
    };
    fail(status, e.to_string())
}

/// Runs `f`, turning a panic into [`GtStatus::Panic`].
fn guard(f: impl FnOnce() -> GtStatus) -> GtStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            fail(GtStatus::Panic, format!("panic: {msg}"))
        }
    }
}

macro_rules! deref {
    ($p:expr, $name:literal) => {
        match unsafe { $p.as_ref() } {
            Some(r) => r,
            None => return fail(GtStatus::NullPointer, concat!($name, " is null")),
        }
    };
}

macro_rules! out {
    ($p:expr, $name:literal) => {
        match unsafe { $p.as_mut() } {
            Some(r) => r,
            None => return fail(GtStatus::NullPointer, concat!($name, " is null")),
        }
    };
}

macro_rules! tri {
    ($e:expr) => {
        match $e {
            Ok(v) => v,
            Err(e) => return from_error(e),
        }
    };
}

impl From<GtGains> for GainVector {
    fn from(g: GtGains) -> Self {
        GainVector { lambda_v: g.lambda_v, lambda_a: g.lambda_a, k1: g.k1, k2: g.k2 }
    }
}

impl From<KernelHyperparams> for GtHyper {
    fn from(h: KernelHyperparams) -> Self {
        Self { signal_variance: h.signal_variance, length_scales: h.length_scales, noise_variance: h.noise_variance }
    }
}

impl From<GtHyper> for KernelHyperparams {
    fn from(h: GtHyper) -> Self {
        Self { signal_variance: h.signal_variance, length_scales: h.length_scales, noise_variance: h.noise_variance }
    }
}

impl From<LapRow> for GtSample {
    fn from(r: LapRow) -> Self {
        Self {
            t: r.t,
            x: r.x,
            y: r.y,
            phi: r.phi,
            x_t: r.x_t,
            y_t: r.y_t,
            phi_t: r.phi_t,
            v_cmd: r.v_cmd,
            omega_cmd: r.omega_cmd,
            rho: r.rho,
            alpha: r.alpha,
            beta: r.beta,
            e_lat: r.e_lat,
            e_head: r.e_head,
        }
    }
}

/// Message for the most recent failure on the calling thread, or null if
/// none. Valid until the next failing call on this thread.
#[no_mangle]
pub extern "C" fn gt_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn gt_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

#[no_mangle]
pub extern "C" fn gt_baseline_gains() -> GtGains {
    let g = GainVector::BASELINE;
    GtGains { lambda_v: g.lambda_v, lambda_a: g.lambda_a, k1: g.k1, k2: g.k2 }
}

/// Default stadium track with noise enabled and seed 0.
#[no_mangle]
pub extern "C" fn gt_lap_options_default() -> GtLapOptions {
    let t = TrackSpec::default();
    GtLapOptions {
        straight_length: t.straight_length,
        corner_radius: t.corner_radius,
        clockwise: t.direction == Direction::Clockwise,
        noiseless: false,
        seed: 0,
    }
}

/// Simulates one lap. On success `*out` owns a handle to free with
/// [`gt_lap_free`]; on failure it is set to null.
///
/// # Safety
/// Pointers must be null or valid for the access implied by their type.
#[no_mangle]
pub unsafe extern "C" fn gt_run_lap(gains: *const GtGains, options: *const GtLapOptions, out: *mut *mut GtLap) -> GtStatus {
    guard(|| {
        let out = out!(out, "out");
        *out = ptr::null_mut();
        let gains = deref!(gains, "gains");
        let opts = deref!(options, "options");
        let dir = if opts.clockwise { Direction::Clockwise } else { Direction::Counterclockwise };
        let track = tri!(TrackSpec::new(opts.straight_length, opts.corner_radius, dir));
        let mut sim = SimConfig { seed: opts.seed, ..SimConfig::default() };
        if opts.noiseless {
            sim = sim.noiseless();
        }
        let result = tri!(run_lap(&track, &GainVector::from(*gains), &sim));
        *out = Box::into_raw(Box::new(GtLap { result }));
        GtStatus::Ok
    })
}

/// # Safety
/// `lap` must be null or a handle from [`gt_run_lap`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn gt_lap_free(lap: *mut GtLap) {
    if !lap.is_null() {
        drop(Box::from_raw(lap));
    }
}

/// # Safety
/// `lap` must be a live handle and `out` writable, or null.
#[no_mangle]
pub unsafe extern "C" fn gt_lap_summary(lap: *const GtLap, out: *mut GtLapSummary) -> GtStatus {
    guard(|| {
        let lap = deref!(lap, "lap");
        let out = out!(out, "out");
        let r = &lap.result;
        let s = r.summary();
        *out = GtLapSummary {
            completed: s.completed,
            termination: match s.termination {
                Termination::Completed => GtTermination::Completed,
                Termination::Diverged => GtTermination::Diverged,
                Termination::Timeout => GtTermination::Timeout,
            },
            l_comp: s.l_comp,
            l_lap: s.l_lap,
            completion_ratio: r.completion_ratio(),
            diverged_at: s.diverged_at.unwrap_or(f64::NAN),
            samples: s.samples,
            guard_steps: s.guard_steps,
            saturated_steps: s.saturated_steps,
        };
        GtStatus::Ok
    })
}

/// Cost of the lap under the default weights.
///
/// # Safety
/// `lap` must be a live handle and `out` writable, or null.
#[no_mangle]
pub unsafe extern "C" fn gt_lap_cost(lap: *const GtLap, out: *mut GtCost) -> GtStatus {
    guard(|| {
        let lap = deref!(lap, "lap");
        let out = out!(out, "out");
        let c = tri!(evaluate_cost(&lap.result, &CostWeights::default()));
        *out = GtCost {
            j_lat: c.j_lat,
            j_head: c.j_head,
            j: c.j,
            j_bo: c.j_bo,
            penalty: c.penalty(),
            completion_ratio: c.completion_ratio,
        };
        GtStatus::Ok
    })
}

/// Copies logged sample `index`; the count is in [`GtLapSummary::samples`].
///
/// # Safety
/// `lap` must be a live handle and `out` writable, or null.
#[no_mangle]
pub unsafe extern "C" fn gt_lap_sample(lap: *const GtLap, index: usize, out: *mut GtSample) -> GtStatus {
    guard(|| {
        let lap = deref!(lap, "lap");
        let out = out!(out, "out");
        match lap.result.log.samples.get(index) {
            Some(s) => {
                *out = LapRow::from(s).into();
                GtStatus::Ok
            }
            None => fail(
                GtStatus::OutOfRange,
                format!("sample {index} out of range for {} samples", lap.result.log.samples.len()),
            ),
        }
    })
}

/// Saturated control command for a tracking error and a target moving at
/// `v_t` with heading rate `phi_dot_t`.
///
/// # Safety
/// Pointers must be null or valid for the access implied by their type.
#[no_mangle]
pub unsafe extern "C" fn gt_control(
    err: *const GtTrackingError,
    v_t: f64,
    phi_dot_t: f64,
    gains: *const GtGains,
    v_max: f64,
    omega_max: f64,
    out: *mut GtCommand,
) -> GtStatus {
    guard(|| {
        let err = deref!(err, "err");
        let gains = deref!(gains, "gains");
        let out = out!(out, "out");
        let g = GainVector::from(*gains);
        tri!(g.validate());
        if !(v_max > 0.0 && omega_max > 0.0) {
            return fail(GtStatus::InvalidArgument, "actuator limits must be > 0");
        }
        if ![err.rho, err.alpha, err.beta, v_t, phi_dot_t].iter().all(|x| x.is_finite()) || err.rho < 0.0 {
            return fail(GtStatus::InvalidArgument, "tracking error and target rates must be finite with rho >= 0");
        }
        let e = TrackingError::from_polar(err.rho, err.alpha, err.beta);
        let target = TargetState { s: 0.0, x: 0.0, y: 0.0, phi: 0.0, v: v_t, phi_dot: phi_dot_t };
        let c = control(&e, &target, &g, &ActuatorLimits { v_max, omega_max });
        *out = GtCommand {
            v: c.v,
            omega: c.omega,
            v_saturated: c.v_saturated,
            omega_saturated: c.omega_saturated,
            guarded: c.guarded,
        };
        GtStatus::Ok
    })
}

/// Fits a GP to `n` points. `inputs` holds `4 * n` row-major coordinates in
/// the unit cube and `observations` holds `n` values. With `hyper` null the
/// hyperparameters are fitted by maximum marginal likelihood.
///
/// # Safety
/// `inputs` and `observations` must point to `4 * n` and `n` readable
/// doubles; other pointers must be null or valid.
#[no_mangle]
pub unsafe extern "C" fn gt_gp_fit(
    inputs: *const f64,
    observations: *const f64,
    n: usize,
    hyper: *const GtHyper,
    out: *mut *mut GtGp,
) -> GtStatus {
    guard(|| {
        let out = out!(out, "out");
        *out = ptr::null_mut();
        if n == 0 {
            return fail(GtStatus::InvalidArgument, "gp needs at least one observation");
        }
        if inputs.is_null() || observations.is_null() {
            return fail(GtStatus::NullPointer, "inputs or observations is null");
        }
        let flat = std::slice::from_raw_parts(inputs, n * DIM);
        let y = std::slice::from_raw_parts(observations, n).to_vec();
        let z = flat.chunks_exact(DIM).map(|c| [c[0], c[1], c[2], c[3]]).collect();
        let data = tri!(GpDataset::new(z, y));
        let h = match hyper.as_ref() {
            Some(h) => KernelHyperparams::from(*h),
            None => tri!(optimize_hypers(&data, &KernelHyperparams::default())),
        };
        let model = tri!(GpModel::fit(data, h));
        *out = Box::into_raw(Box::new(GtGp { model }));
        GtStatus::Ok
    })
}

/// # Safety
/// `gp` must be null or a handle from [`gt_gp_fit`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn gt_gp_free(gp: *mut GtGp) {
    if !gp.is_null() {
        drop(Box::from_raw(gp));
    }
}

/// Posterior mean and variance of the latent function at `z` (4 doubles).
///
/// # Safety
/// `z` must point to 4 readable doubles; other pointers null or valid.
#[no_mangle]
pub unsafe extern "C" fn gt_gp_predict(gp: *const GtGp, z: *const f64, mean: *mut f64, variance: *mut f64) -> GtStatus {
    guard(|| {
        let gp = deref!(gp, "gp");
        let mean = out!(mean, "mean");
        let variance = out!(variance, "variance");
        if z.is_null() {
            return fail(GtStatus::NullPointer, "z is null");
        }
        let p: [f64; DIM] = *z.cast::<[f64; DIM]>();
        if !p.iter().all(|x| x.is_finite()) {
            return fail(GtStatus::InvalidArgument, "z must be finite");
        }
        let pred = gp.model.predict(&p);
        *mean = pred.mean;
        *variance = pred.variance;
        GtStatus::Ok
    })
}

/// # Safety
/// `gp` must be a live handle and `out` writable, or null.
#[no_mangle]
pub unsafe extern "C" fn gt_gp_hyper(gp: *const GtGp, out: *mut GtHyper) -> GtStatus {
    guard(|| {
        let gp = deref!(gp, "gp");
        let out = out!(out, "out");
        *out = (*gp.model.hyper()).into();
        GtStatus::Ok
    })
}

/// Expected improvement below `j_min` for a Gaussian prediction. Returns NaN
/// for non-finite inputs or negative variance.
#[no_mangle]
pub extern "C" fn gt_expected_improvement(mean: f64, variance: f64, j_min: f64) -> f64 {
    if !(mean.is_finite() && variance.is_finite() && j_min.is_finite()) || variance < 0.0 {
        return f64::NAN;
    }
    expected_improvement(&PosteriorPrediction { mean, variance }, j_min)
}
