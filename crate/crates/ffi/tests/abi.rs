use std::ffi::CStr;
use std::ptr;

use gaintune_ffi::*;

fn last_error() -> String {
    let p = gt_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn noiseless() -> GtLapOptions {
    GtLapOptions { noiseless: true, ..gt_lap_options_default() }
}

fn run(gains: GtGains, opts: GtLapOptions) -> *mut GtLap {
    let mut lap = ptr::null_mut();
    assert_eq!(unsafe { gt_run_lap(&gains, &opts, &mut lap) }, GtStatus::Ok);
    assert!(!lap.is_null());
    lap
}

#[test]
fn baseline_lap_matches_the_library() {
    let lap = run(gt_baseline_gains(), noiseless());
    let mut s = unsafe { std::mem::zeroed::<GtLapSummary>() };
    let mut c = unsafe { std::mem::zeroed::<GtCost>() };
    unsafe {
        assert_eq!(gt_lap_summary(lap, &mut s), GtStatus::Ok);
        assert_eq!(gt_lap_cost(lap, &mut c), GtStatus::Ok);
    }
    assert!(s.completed);
    assert_eq!(s.termination, GtTermination::Completed);
    assert!(s.diverged_at.is_nan());
    assert_eq!(s.completion_ratio, 1.0);
    assert_eq!(c.penalty, 0.0);
    assert_eq!(c.j_bo, c.j);

    let track = gaintune::track::TrackSpec::default();
    let sim = gaintune::sim::SimConfig::default().noiseless();
    let lib = gaintune::sim::run_lap(&track, &gaintune::GainVector::BASELINE, &sim).unwrap();
    let cost = gaintune::cost::evaluate_cost(&lib, &Default::default()).unwrap();
    assert_eq!(s.samples, lib.log.samples.len());
    assert_eq!(c.j_bo, cost.j_bo);

    let mut first = unsafe { std::mem::zeroed::<GtSample>() };
    let mut last = first;
    unsafe {
        assert_eq!(gt_lap_sample(lap, 0, &mut first), GtStatus::Ok);
        assert_eq!(gt_lap_sample(lap, s.samples - 1, &mut last), GtStatus::Ok);
        assert_eq!(gt_lap_sample(lap, s.samples, &mut last), GtStatus::OutOfRange);
    }
    assert!(last_error().contains("out of range"));
    assert_eq!(first.t, 0.0);
    let end = lib.log.samples.last().unwrap();
    assert_eq!((last.t, last.x, last.e_lat), (end.t, end.robot.x, end.e_lat));
    unsafe { gt_lap_free(lap) };
}

#[test]
fn same_seed_same_lap_different_seed_different_lap() {
    let opts = GtLapOptions { seed: 9, ..gt_lap_options_default() };
    let cost = |o| {
        let lap = run(gt_baseline_gains(), o);
        let mut c = unsafe { std::mem::zeroed::<GtCost>() };
        unsafe {
            assert_eq!(gt_lap_cost(lap, &mut c), GtStatus::Ok);
            gt_lap_free(lap);
        }
        c.j_bo
    };
    assert_eq!(cost(opts), cost(opts));
    assert_ne!(cost(opts), cost(GtLapOptions { seed: 10, ..opts }));
}

#[test]
fn invalid_inputs_report_status_and_message() {
    let mut lap = ptr::dangling_mut::<GtLap>();
    let bad = GtGains { k2: -1.0, ..gt_baseline_gains() };
    assert_eq!(unsafe { gt_run_lap(&bad, &noiseless(), &mut lap) }, GtStatus::InvalidArgument);
    assert!(lap.is_null());
    assert!(last_error().contains("k2"));

    let track = GtLapOptions { corner_radius: 0.0, ..noiseless() };
    assert_eq!(unsafe { gt_run_lap(&gt_baseline_gains(), &track, &mut lap) }, GtStatus::InvalidArgument);

    assert_eq!(unsafe { gt_run_lap(ptr::null(), &noiseless(), &mut lap) }, GtStatus::NullPointer);
    assert_eq!(last_error(), "gains is null");
    assert_eq!(unsafe { gt_run_lap(&gt_baseline_gains(), &noiseless(), ptr::null_mut()) }, GtStatus::NullPointer);
    assert_eq!(unsafe { gt_lap_summary(ptr::null(), ptr::null_mut()) }, GtStatus::NullPointer);
    unsafe {
        gt_lap_free(ptr::null_mut());
        gt_gp_free(ptr::null_mut());
    }
}

#[test]
fn control_matches_the_library_and_saturates() {
    let g = gt_baseline_gains();
    let e = GtTrackingError { rho: 1.2, alpha: 0.4, beta: -0.3 };
    let mut cmd = unsafe { std::mem::zeroed::<GtCommand>() };
    assert_eq!(unsafe { gt_control(&e, 2.0, 0.2, &g, 4.0, 2.0, &mut cmd) }, GtStatus::Ok);

    let err = gaintune::geometry::TrackingError::from_polar(1.2, 0.4, -0.3);
    let target = gaintune::track::TargetState { s: 0.0, x: 0.0, y: 0.0, phi: 0.0, v: 2.0, phi_dot: 0.2 };
    let lib = gaintune::controller::control(&err, &target, &gaintune::GainVector::BASELINE, &Default::default());
    assert_eq!((cmd.v, cmd.omega, cmd.guarded), (lib.v, lib.omega, lib.guarded));

    assert_eq!(unsafe { gt_control(&e, 2.0, 0.2, &g, 0.5, 0.01, &mut cmd) }, GtStatus::Ok);
    assert!(cmd.v_saturated && cmd.omega_saturated);
    assert_eq!((cmd.v.abs(), cmd.omega.abs()), (0.5, 0.01));

    assert_eq!(unsafe { gt_control(&e, 2.0, 0.2, &g, 0.0, 2.0, &mut cmd) }, GtStatus::InvalidArgument);
    let nan = GtTrackingError { rho: f64::NAN, ..e };
    assert_eq!(unsafe { gt_control(&nan, 2.0, 0.2, &g, 4.0, 2.0, &mut cmd) }, GtStatus::InvalidArgument);
}

fn dataset() -> (Vec<f64>, Vec<f64>) {
    let mut z = Vec::new();
    let mut y = Vec::new();
    for i in 0..12 {
        let p = [i as f64 / 11.0, (i * 7 % 12) as f64 / 11.0, (i * 5 % 12) as f64 / 11.0, 0.5];
        y.push(p.iter().map(|v| (v - 0.4) * (v - 0.4)).sum::<f64>());
        z.extend(p);
    }
    (z, y)
}

#[test]
fn gp_with_fixed_hyperparameters_matches_the_library() {
    let (z, y) = dataset();
    let hyper = GtHyper { signal_variance: 0.5, length_scales: [0.4; 4], noise_variance: 1e-4 };
    let mut gp = ptr::null_mut();
    assert_eq!(unsafe { gt_gp_fit(z.as_ptr(), y.as_ptr(), 12, &hyper, &mut gp) }, GtStatus::Ok);

    let points = z.chunks_exact(4).map(|c| [c[0], c[1], c[2], c[3]]).collect();
    let data = gaintune::gp::GpDataset::new(points, y.clone()).unwrap();
    let model = gaintune::gp::GpModel::fit(data, hyper.into()).unwrap();

    let q = [0.3, 0.6, 0.2, 0.5];
    let (mut m, mut v) = (0.0, 0.0);
    assert_eq!(unsafe { gt_gp_predict(gp, q.as_ptr(), &mut m, &mut v) }, GtStatus::Ok);
    let lib = model.predict(&q);
    assert_eq!((m, v), (lib.mean, lib.variance));

    let mut h = unsafe { std::mem::zeroed::<GtHyper>() };
    assert_eq!(unsafe { gt_gp_hyper(gp, &mut h) }, GtStatus::Ok);
    assert_eq!(h, hyper);
    assert_eq!(unsafe { gt_gp_predict(gp, ptr::null(), &mut m, &mut v) }, GtStatus::NullPointer);
    unsafe { gt_gp_free(gp) };
}

#[test]
fn gp_fitted_by_likelihood_interpolates_training_data() {
    let (z, y) = dataset();
    let mut gp = ptr::null_mut();
    assert_eq!(unsafe { gt_gp_fit(z.as_ptr(), y.as_ptr(), 12, ptr::null(), &mut gp) }, GtStatus::Ok);
    let spread = y.iter().cloned().fold(f64::MIN, f64::max) - y.iter().cloned().fold(f64::MAX, f64::min);
    for (p, yi) in z.chunks_exact(4).zip(&y) {
        let (mut m, mut v) = (0.0, 0.0);
        assert_eq!(unsafe { gt_gp_predict(gp, p.as_ptr(), &mut m, &mut v) }, GtStatus::Ok);
        assert!((m - yi).abs() < 0.1 * spread, "{m} vs {yi}");
        assert!(v >= 0.0);
    }
    unsafe { gt_gp_free(gp) };
}

#[test]
fn gp_rejects_bad_data() {
    let (z, mut y) = dataset();
    let mut gp = ptr::dangling_mut::<GtGp>();
    assert_eq!(unsafe { gt_gp_fit(z.as_ptr(), y.as_ptr(), 0, ptr::null(), &mut gp) }, GtStatus::InvalidArgument);
    assert!(gp.is_null());
    y[3] = f64::NAN;
    assert_eq!(unsafe { gt_gp_fit(z.as_ptr(), y.as_ptr(), 12, ptr::null(), &mut gp) }, GtStatus::InvalidArgument);
    let bad = GtHyper { signal_variance: -1.0, length_scales: [0.3; 4], noise_variance: 0.1 };
    y[3] = 0.0;
    assert_eq!(unsafe { gt_gp_fit(z.as_ptr(), y.as_ptr(), 12, &bad, &mut gp) }, GtStatus::InvalidArgument);
    assert_eq!(unsafe { gt_gp_fit(ptr::null(), y.as_ptr(), 12, ptr::null(), &mut gp) }, GtStatus::NullPointer);
}

#[test]
fn expected_improvement_closed_form() {
    // At mean == j_min, EI = sigma * phi(0).
    let ei = gt_expected_improvement(1.0, 4.0, 1.0);
    assert!((ei - 2.0 * 0.398_942_280_401_432_7).abs() < 1e-15);
    assert_eq!(gt_expected_improvement(0.5, 0.0, 1.0), 0.5);
    assert_eq!(gt_expected_improvement(1.5, 0.0, 1.0), 0.0);
    assert!(gt_expected_improvement(0.0, -1.0, 1.0).is_nan());
    assert!(gt_expected_improvement(f64::NAN, 1.0, 1.0).is_nan());
}

#[test]
fn version_is_the_crate_version() {
    let v = unsafe { CStr::from_ptr(gt_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}
