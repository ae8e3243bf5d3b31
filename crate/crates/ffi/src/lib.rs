//! C interface to the `gqfpe` library.
//!
//! Every function returns a [`GqfpeStatus`]; on failure the message is
//! available from [`gqfpe_last_error_message`] on the same thread. Handles are
//! created by `*_new` and released by the matching `*_free`.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use gqfpe::coefficients::{coefficient_at, coefficient_steady, coefficient_track, CoefficientSample, CoefficientTrack};
use gqfpe::kernels::{ohmic_kernels, uniform_grid, KernelValues};
use gqfpe::propagator::{
    initial_state_thermal, BasisSpec, Monitors, Observables, PotentialModel, PropagationConfig, Propagator,
};
use gqfpe::spectral::{SpectralDensityModel, ThermalParams};
use gqfpe::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GqfpeStatus {
    Ok = 0,
    InvalidArgument = 1,
    Domain = 2,
    Numerical = 3,
    Unsupported = 4,
    NullPointer = 5,
    Panic = 6,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> GqfpeStatus {
    match e {
        Error::InvalidParameter { .. } | Error::Config { .. } | Error::DimensionMismatch { .. } => {
            GqfpeStatus::InvalidArgument
        }
        Error::Domain(_) | Error::Singularity { .. } | Error::NotIntegrable { .. } => GqfpeStatus::Domain,
        Error::Unsupported(_) => GqfpeStatus::Unsupported,
        _ => GqfpeStatus::Numerical,
    }
}

struct Fail(GqfpeStatus);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        set_error(e.to_string());
        Fail(status_of(&e))
    }
}

fn null(what: &str) -> Fail {
    set_error(format!("null pointer: {what}"));
    Fail(GqfpeStatus::NullPointer)
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> GqfpeStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => GqfpeStatus::Ok,
        Ok(Err(Fail(s))) => s,
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("panic: {msg}"));
            GqfpeStatus::Panic
        }
    }
}

unsafe fn out_ref<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Fail> {
    p.as_mut().ok_or_else(|| null(what))
}

/// Copies the last error message of this thread into `buf` (NUL-terminated,
/// truncated to `len`). Returns the full message length including the NUL,
/// or 0 when there is no error.
///
/// # Safety
/// `buf` must be null or valid for `len` bytes.
#[no_mangle]
pub unsafe extern "C" fn gqfpe_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| match e.borrow().as_ref() {
        None => 0,
        Some(msg) => {
            let bytes = msg.as_bytes_with_nul();
            if !buf.is_null() && len > 0 {
                let n = bytes.len().min(len);
                ptr::copy_nonoverlapping(bytes.as_ptr() as *const c_char, buf, n);
                *buf.add(n - 1) = 0;
            }
            bytes.len()
        }
    })
}

/// Static version string.
#[no_mangle]
pub extern "C" fn gqfpe_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Ohmic-Drude spectral density `η_e(ω)`.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn gqfpe_eta_e(gamma_s: f64, omega: f64, out: *mut f64) -> GqfpeStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        *out = SpectralDensityModel::ohmic(gamma_s)?.eta(omega)?;
        Ok(())
    })
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct GqfpeKernels {
    pub ki0: f64,
    pub ki1: f64,
    pub ki2: f64,
    pub kr0: f64,
    pub kr1: f64,
    pub kr2: f64,
    pub ki1_tilde: f64,
    pub kr1_tilde: f64,
}

impl From<KernelValues> for GqfpeKernels {
    fn from(k: KernelValues) -> Self {
        Self {
            ki0: k.ki0,
            ki1: k.ki1,
            ki2: k.ki2,
            kr0: k.kr0,
            kr1: k.kr1,
            kr2: k.kr2,
            ki1_tilde: k.ki1_tilde,
            kr1_tilde: k.kr1_tilde,
        }
    }
}

/// All eight Ohmic-Drude kernels at `t_s` (closed form).
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn gqfpe_kernels(gamma_s: f64, beta_s: f64, t_s: f64, out: *mut GqfpeKernels) -> GqfpeStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        *out = ohmic_kernels(gamma_s, t_s, &ThermalParams::new(beta_s)?)?.into();
        Ok(())
    })
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct GqfpeCoefficients {
    pub t_s: f64,
    pub r_m: f64,
    pub gamma: f64,
    pub r_pq: f64,
    pub r_qq: f64,
    pub r_pp: f64,
    pub alpha: f64,
    pub d: f64,
    pub branch: f64,
    pub weak_damping_ok: bool,
}

impl From<&CoefficientSample> for GqfpeCoefficients {
    fn from(c: &CoefficientSample) -> Self {
        Self {
            t_s: c.t_s,
            r_m: c.r_m,
            gamma: c.gamma,
            r_pq: c.r_pq,
            r_qq: c.r_qq,
            r_pp: c.r_pp,
            alpha: c.alpha,
            d: c.d,
            branch: c.branch,
            weak_damping_ok: c.weak_damping_ok,
        }
    }
}

/// Coefficients at `t_s`; pass `INFINITY` for the steady limit.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn gqfpe_coefficient_at(
    gamma_s: f64,
    beta_s: f64,
    t_s: f64,
    out: *mut GqfpeCoefficients,
) -> GqfpeStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        let thermal = ThermalParams::new(beta_s)?;
        let s = if t_s == f64::INFINITY {
            coefficient_steady(gamma_s, beta_s, &thermal)?
        } else {
            coefficient_at(t_s, gamma_s, beta_s, &thermal)?
        };
        *out = (&s).into();
        Ok(())
    })
}

/// Coefficient samples on `t_s = i·t_max/steps`, `i = 0..=steps`.
pub struct GqfpeTrack(CoefficientTrack);

/// # Safety
/// `out` must be valid for writes. The handle must be released with
/// [`gqfpe_track_free`].
#[no_mangle]
pub unsafe extern "C" fn gqfpe_track_new(
    gamma_s: f64,
    beta_s: f64,
    t_max: f64,
    steps: usize,
    out: *mut *mut GqfpeTrack,
) -> GqfpeStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        *out = ptr::null_mut();
        let grid = uniform_grid(t_max, steps)?;
        let track = coefficient_track(&grid, gamma_s, beta_s, &ThermalParams::new(beta_s)?)?;
        *out = Box::into_raw(Box::new(GqfpeTrack(track)));
        Ok(())
    })
}

/// Number of samples, or 0 for a null handle.
///
/// # Safety
/// `track` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn gqfpe_track_len(track: *const GqfpeTrack) -> usize {
    track.as_ref().map_or(0, |t| t.0.samples.len())
}

/// Sample `index`; `index == len` returns the steady-limit sample.
///
/// # Safety
/// `track` must be null or a live handle; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn gqfpe_track_get(
    track: *const GqfpeTrack,
    index: usize,
    out: *mut GqfpeCoefficients,
) -> GqfpeStatus {
    guard(|| {
        let t = track.as_ref().ok_or_else(|| null("track"))?;
        let out = out_ref(out, "out")?;
        let n = t.0.samples.len();
        let s = match index.cmp(&n) {
            std::cmp::Ordering::Less => &t.0.samples[index],
            std::cmp::Ordering::Equal => &t.0.steady,
            std::cmp::Ordering::Greater => {
                set_error(format!("index {index} out of range (len {n})"));
                return Err(Fail(GqfpeStatus::InvalidArgument));
            }
        };
        *out = s.into();
        Ok(())
    })
}

/// # Safety
/// `track` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn gqfpe_track_free(track: *mut GqfpeTrack) {
    if !track.is_null() {
        drop(Box::from_raw(track));
    }
}

/// Propagation setup. `quartic = 0` selects the harmonic potential. The
/// initial state is the thermal state of the ground oscillator `omega_g` at
/// `beta_s`.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GqfpePropagatorParams {
    pub gamma_s: f64,
    pub beta_s: f64,
    pub omega_e: f64,
    pub shift: f64,
    pub quartic: f64,
    pub omega_g: f64,
    pub q0: f64,
    pub cross_gamma_s: f64,
    pub n_basis: usize,
    /// Basis frequency; 0 means `omega_e`.
    pub omega_ref: f64,
    pub dt: f64,
    pub symmetrize: bool,
}

impl Default for GqfpePropagatorParams {
    fn default() -> Self {
        Self {
            gamma_s: 0.1,
            beta_s: 1.0,
            omega_e: 1.0,
            shift: 1.0,
            quartic: 0.0,
            omega_g: 1.0,
            q0: 0.0,
            cross_gamma_s: 0.0,
            n_basis: 64,
            omega_ref: 0.0,
            dt: 1e-3,
            symmetrize: false,
        }
    }
}

/// Fills `out` with the defaults.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn gqfpe_propagator_params_default(out: *mut GqfpePropagatorParams) -> GqfpeStatus {
    guard(|| {
        *out_ref(out, "out")? = GqfpePropagatorParams::default();
        Ok(())
    })
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct GqfpeObservables {
    pub t_s: f64,
    pub trace: f64,
    pub q_mean: f64,
    pub p_mean: f64,
    pub q_var: f64,
    pub p_var: f64,
    pub qp_sym: f64,
    pub purity: f64,
    /// NaN unless requested.
    pub min_eig: f64,
    pub energy: f64,
}

impl From<&Observables> for GqfpeObservables {
    fn from(o: &Observables) -> Self {
        Self {
            t_s: o.t_s,
            trace: o.trace,
            q_mean: o.q_mean,
            p_mean: o.p_mean,
            q_var: o.q_var(),
            p_var: o.p_var(),
            qp_sym: o.qp_sym,
            purity: o.purity,
            min_eig: o.min_eig.unwrap_or(f64::NAN),
            energy: o.energy.unwrap_or(f64::NAN),
        }
    }
}

pub struct GqfpePropagator(Propagator);

/// # Safety
/// `params` must be readable and `out` valid for writes. The handle must be
/// released with [`gqfpe_propagator_free`].
#[no_mangle]
pub unsafe extern "C" fn gqfpe_propagator_new(
    params: *const GqfpePropagatorParams,
    out: *mut *mut GqfpePropagator,
) -> GqfpeStatus {
    guard(|| {
        let p = *params.as_ref().ok_or_else(|| null("params"))?;
        let out = out_ref(out, "out")?;
        *out = ptr::null_mut();
        let potential = if p.quartic == 0.0 {
            PotentialModel::harmonic(p.omega_e, p.shift)?
        } else {
            PotentialModel::Quartic { omega_e: p.omega_e, shift: p.shift, quartic: p.quartic }.validated()?
        };
        let omega_ref = if p.omega_ref == 0.0 { p.omega_e } else { p.omega_ref };
        let basis = BasisSpec::new(p.n_basis, omega_ref)?;
        let config = PropagationConfig {
            basis,
            t_end: p.dt,
            dt: p.dt,
            gamma_s: p.gamma_s,
            beta_s: p.beta_s,
            q0: p.q0,
            cross_gamma_s: p.cross_gamma_s,
            monitors: Monitors::default(),
            symmetrize: p.symmetrize,
        };
        config.validate()?;
        let rho0 = initial_state_thermal(p.beta_s, p.omega_g, &basis)?.rho;
        let prop = Propagator::new(&rho0, &potential, &config)?;
        *out = Box::into_raw(Box::new(GqfpePropagator(prop)));
        Ok(())
    })
}

/// Advances `n_steps` RK4 steps. Stops at the first step that fails or leaves
/// the state unstable; the handle then holds the last state reached.
///
/// # Safety
/// `prop` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn gqfpe_propagator_step(prop: *mut GqfpePropagator, n_steps: usize) -> GqfpeStatus {
    guard(|| {
        let p = &mut prop.as_mut().ok_or_else(|| null("propagator"))?.0;
        p.precompute(p.steps_taken() + n_steps)?;
        for _ in 0..n_steps {
            p.step()?;
            if let Some(reason) = p.instability() {
                set_error(format!("integration unstable at t_s = {}: {reason}", p.time()));
                return Err(Fail(GqfpeStatus::Numerical));
            }
        }
        Ok(())
    })
}

/// Current time, or NaN for a null handle.
///
/// # Safety
/// `prop` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn gqfpe_propagator_time(prop: *const GqfpePropagator) -> f64 {
    prop.as_ref().map_or(f64::NAN, |p| p.0.time())
}

/// # Safety
/// `prop` must be a live handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn gqfpe_propagator_observables(
    prop: *const GqfpePropagator,
    with_min_eig: bool,
    out: *mut GqfpeObservables,
) -> GqfpeStatus {
    guard(|| {
        let p = &prop.as_ref().ok_or_else(|| null("propagator"))?.0;
        *out_ref(out, "out")? = (&p.observables(with_min_eig)).into();
        Ok(())
    })
}

/// # Safety
/// `prop` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn gqfpe_propagator_free(prop: *mut GqfpePropagator) {
    if !prop.is_null() {
        drop(Box::from_raw(prop));
    }
}
