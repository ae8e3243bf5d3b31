use std::ffi::CStr;
use std::ptr;

use gqfpe::coefficients::coefficient_at;
use gqfpe::spectral::ThermalParams;
use gqfpe_ffi::*;

fn last_error() -> String {
    let mut buf = [0 as std::ffi::c_char; 256];
    let n = unsafe { gqfpe_last_error_message(buf.as_mut_ptr(), buf.len()) };
    assert!(n > 0);
    unsafe { CStr::from_ptr(buf.as_ptr()) }.to_string_lossy().into_owned()
}

#[test]
fn spectral_density_and_kernels() {
    let mut eta = 0.0;
    assert_eq!(unsafe { gqfpe_eta_e(0.1, 1.0, &mut eta) }, GqfpeStatus::Ok);
    assert!((eta - 0.1).abs() < 1e-15);
    assert_eq!(unsafe { gqfpe_eta_e(0.1, -1.0, &mut eta) }, GqfpeStatus::Domain);
    assert!(last_error().contains("omega"));

    let mut k = GqfpeKernels::default();
    assert_eq!(unsafe { gqfpe_kernels(0.1, 1.0, 0.0, &mut k) }, GqfpeStatus::Ok);
    assert_eq!(k, GqfpeKernels::default());
    assert_eq!(unsafe { gqfpe_kernels(0.1, 1.0, 3.0, &mut k) }, GqfpeStatus::Ok);
    assert!(k.ki0 > 0.0 && k.kr0 > 0.0);
}

#[test]
fn coefficients_match_the_library() {
    let mut c = GqfpeCoefficients::default();
    assert_eq!(unsafe { gqfpe_coefficient_at(0.1, 1.0, 2.5, &mut c) }, GqfpeStatus::Ok);
    let direct = coefficient_at(2.5, 0.1, 1.0, &ThermalParams::new(1.0).unwrap()).unwrap();
    assert_eq!(c.gamma, direct.gamma);
    assert_eq!(c.d, direct.d);

    assert_eq!(unsafe { gqfpe_coefficient_at(0.1, 1.0, f64::INFINITY, &mut c) }, GqfpeStatus::Ok);
    assert!((c.gamma - 1.25).abs() < 1e-12);
    assert!((c.r_m - 0.8).abs() < 1e-12);

    assert_eq!(unsafe { gqfpe_coefficient_at(0.7, 1.0, 10.0, &mut c) }, GqfpeStatus::Numerical);
    assert!(last_error().contains("effective mass"));
    assert_eq!(unsafe { gqfpe_coefficient_at(0.1, -1.0, 1.0, &mut c) }, GqfpeStatus::InvalidArgument);
    assert_eq!(unsafe { gqfpe_coefficient_at(0.1, 1.0, 1.0, ptr::null_mut()) }, GqfpeStatus::NullPointer);
}

#[test]
fn track_handle_lifecycle() {
    let mut t = ptr::null_mut();
    assert_eq!(unsafe { gqfpe_track_new(0.1, 5.0, 10.0, 100, &mut t) }, GqfpeStatus::Ok);
    assert_eq!(unsafe { gqfpe_track_len(t) }, 101);
    let mut c = GqfpeCoefficients::default();
    assert_eq!(unsafe { gqfpe_track_get(t, 100, &mut c) }, GqfpeStatus::Ok);
    assert!((c.t_s - 10.0).abs() < 1e-12);
    assert_eq!(unsafe { gqfpe_track_get(t, 101, &mut c) }, GqfpeStatus::Ok);
    assert!(c.t_s.is_infinite());
    assert_eq!(unsafe { gqfpe_track_get(t, 102, &mut c) }, GqfpeStatus::InvalidArgument);
    unsafe { gqfpe_track_free(t) };
    unsafe { gqfpe_track_free(ptr::null_mut()) };
    assert_eq!(unsafe { gqfpe_track_len(ptr::null()) }, 0);

    assert_eq!(unsafe { gqfpe_track_new(0.1, 1.0, 10.0, 0, &mut t) }, GqfpeStatus::InvalidArgument);
    assert!(t.is_null());
}

#[test]
fn propagator_handle_lifecycle() {
    let mut p = GqfpePropagatorParams::default();
    assert_eq!(unsafe { gqfpe_propagator_params_default(&mut p) }, GqfpeStatus::Ok);
    p.n_basis = 32;
    p.dt = 0.01;
    let mut h = ptr::null_mut();
    assert_eq!(unsafe { gqfpe_propagator_new(&p, &mut h) }, GqfpeStatus::Ok);
    let mut o = GqfpeObservables::default();
    assert_eq!(unsafe { gqfpe_propagator_observables(h, true, &mut o) }, GqfpeStatus::Ok);
    assert!(o.q_mean.abs() < 1e-12);
    assert!(o.min_eig > -1e-10);
    assert_eq!(unsafe { gqfpe_propagator_step(h, 100) }, GqfpeStatus::Ok);
    assert!((unsafe { gqfpe_propagator_time(h) } - 1.0).abs() < 1e-12);
    assert_eq!(unsafe { gqfpe_propagator_observables(h, false, &mut o) }, GqfpeStatus::Ok);
    assert!((o.trace - 1.0).abs() < 1e-9);
    // the mean is pulled toward the excited minimum at q = 1
    assert!(o.q_mean > 0.3 && o.q_mean < 0.6);
    assert!(o.min_eig.is_nan());
    unsafe { gqfpe_propagator_free(h) };

    p.quartic = -1.0;
    assert_eq!(unsafe { gqfpe_propagator_new(&p, &mut h) }, GqfpeStatus::InvalidArgument);
    assert!(h.is_null());
    assert_eq!(unsafe { gqfpe_propagator_step(ptr::null_mut(), 1) }, GqfpeStatus::NullPointer);
    assert!(unsafe { gqfpe_propagator_time(ptr::null()) }.is_nan());
}

#[test]
fn version_and_empty_error() {
    let v = unsafe { CStr::from_ptr(gqfpe_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
    std::thread::spawn(|| assert_eq!(unsafe { gqfpe_last_error_message(ptr::null_mut(), 0) }, 0)).join().unwrap();
}
