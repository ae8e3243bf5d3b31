//! Single-time-integral bath kernels `K_I^(n)`, `K_R^(n)` and their tilde
//! combinations, in units of `m γ_e ω_c^{1-n}`.

use std::cell::RefCell;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matsubara::{self, FKind};
use crate::quadrature::{adaptive, Tolerance};
use crate::spectral::{Method, SpectralDensityModel, ThermalParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum KernelKind {
    /// Dissipative kernels built from `η̃_I`.
    I,
    /// Fluctuation kernels built from `η̃_R`.
    R,
}

/// Moment `n` of `∫_0^t η̃(t₂) t₂^n dt₂`, or the tilde combination
/// `K^(1) + ½ dK^(2)/dt`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum KernelOrder {
    Zero,
    One,
    Two,
    OneTilde,
}

impl KernelOrder {
    pub const ALL: [KernelOrder; 4] = [KernelOrder::Zero, KernelOrder::One, KernelOrder::Two, KernelOrder::OneTilde];
}

/// All eight kernels at one time.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct KernelValues {
    pub ki0: f64,
    pub ki1: f64,
    pub ki2: f64,
    pub kr0: f64,
    pub kr1: f64,
    pub kr2: f64,
    pub ki1_tilde: f64,
    pub kr1_tilde: f64,
}

impl KernelValues {
    pub fn get(&self, kind: KernelKind, order: KernelOrder) -> f64 {
        use KernelKind::*;
        use KernelOrder::*;
        match (kind, order) {
            (I, Zero) => self.ki0,
            (I, One) => self.ki1,
            (I, Two) => self.ki2,
            (I, OneTilde) => self.ki1_tilde,
            (R, Zero) => self.kr0,
            (R, One) => self.kr1,
            (R, Two) => self.kr2,
            (R, OneTilde) => self.kr1_tilde,
        }
    }

    pub fn as_array(&self) -> [f64; 8] {
        [self.ki0, self.ki1, self.ki2, self.kr0, self.kr1, self.kr2, self.ki1_tilde, self.kr1_tilde]
    }

    pub const NAMES: [&'static str; 8] = ["KI0", "KI1", "KI2", "KR0", "KR1", "KR2", "KI1_tilde", "KR1_tilde"];
}

/// `F_n(t_s)` for `n ∈ {0, 1, 2}`.
pub fn f_n(n: u8, t_s: f64) -> Result<f64> {
    check_time(t_s)?;
    Ok(match n {
        0 => matsubara::f0(t_s),
        1 => matsubara::f1(t_s),
        2 => matsubara::f2(t_s),
        _ => return Err(Error::invalid("n", format!("F_n defined for n in 0..=2, got {n}"))),
    })
}

/// `F̃_1(t_s)`.
pub fn f1_tilde(t_s: f64) -> Result<f64> {
    check_time(t_s)?;
    Ok(matsubara::f1_tilde(t_s))
}

/// `G_n(β_s, t_s)` for `n ∈ {0, 1, 2}`.
pub fn g_n(n: u8, beta_s: f64, t_s: f64, thermal: &ThermalParams) -> Result<f64> {
    let kind = match n {
        0 => FKind::F0,
        1 => FKind::F1,
        2 => FKind::F2,
        _ => return Err(Error::invalid("n", format!("G_n defined for n in 0..=2, got {n}"))),
    };
    Ok(matsubara::g_values(beta_s, t_s, thermal)?.get(kind))
}

/// `G̃_1(β_s, t_s)`.
pub fn g1_tilde(beta_s: f64, t_s: f64, thermal: &ThermalParams) -> Result<f64> {
    Ok(matsubara::g_values(beta_s, t_s, thermal)?.g1_tilde)
}

/// Closed-form Drude kernels from the F and G functions.
pub fn ohmic_kernels(gamma_s: f64, t_s: f64, thermal: &ThermalParams) -> Result<KernelValues> {
    check_time(t_s)?;
    if t_s == 0.0 || gamma_s == 0.0 {
        return Ok(KernelValues::default());
    }
    let g = matsubara::g_values(thermal.beta_s, t_s, thermal)?;
    Ok(KernelValues {
        ki0: gamma_s * matsubara::f0(t_s),
        ki1: gamma_s * matsubara::f1(t_s),
        ki2: 2.0 * gamma_s * matsubara::f2(t_s),
        kr0: gamma_s * g.g0,
        kr1: gamma_s * g.g1,
        kr2: 2.0 * gamma_s * g.g2,
        ki1_tilde: gamma_s * matsubara::f1_tilde(t_s),
        kr1_tilde: gamma_s * g.g1_tilde,
    })
}

/// `t_s → ∞` limits of the Drude kernels.
pub fn ohmic_kernels_steady(gamma_s: f64, thermal: &ThermalParams) -> Result<KernelValues> {
    let g = matsubara::g_steady(thermal.beta_s, thermal)?;
    Ok(KernelValues {
        ki0: gamma_s,
        ki1: gamma_s,
        ki2: 2.0 * gamma_s,
        kr0: gamma_s * g.g0,
        kr1: gamma_s * g.g1,
        kr2: 2.0 * gamma_s * g.g2,
        ki1_tilde: gamma_s,
        kr1_tilde: gamma_s * g.g1_tilde,
    })
}

/// Kernels by numerical quadrature of their defining integrals: the inner
/// Fourier transforms give `η̃_I`, `η̃_R` and the outer integral runs over
/// `t₂ = t u²`, which absorbs the logarithmic singularity of `η̃_R` at 0.
pub fn quadrature_kernels(model: &SpectralDensityModel, t_s: f64, thermal: &ThermalParams) -> Result<KernelValues> {
    check_time(t_s)?;
    if t_s == 0.0 || model.gamma_s() == Some(0.0) {
        return Ok(KernelValues::default());
    }
    let failure: RefCell<Option<Error>> = RefCell::new(None);
    let eval = |s: f64| -> (f64, f64) {
        let i = model.eta_i(s, Method::Quadrature);
        let r = model.eta_r(thermal, s, Method::Quadrature);
        match (i, r) {
            (Ok(i), Ok(r)) => (i, r),
            (Err(e), _) | (_, Err(e)) => {
                failure.borrow_mut().get_or_insert(e);
                (f64::NAN, f64::NAN)
            }
        }
    };
    let tol = Tolerance { abs: 1e-300, rel: 1e-10, max_intervals: 200 };
    let est = adaptive(
        |u: f64| {
            let s = t_s * u * u;
            let jac = 2.0 * t_s * u;
            let (ei, er) = eval(s);
            [ei * jac, ei * s * jac, ei * s * s * jac, er * jac, er * s * jac, er * s * s * jac]
        },
        0.0,
        1.0,
        tol,
    );
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    let v = est?.value;
    let (ei, er) = (model.eta_i(t_s, Method::Quadrature)?, model.eta_r(thermal, t_s, Method::Quadrature)?);
    let half_t2 = 0.5 * t_s * t_s;
    Ok(KernelValues {
        ki0: v[0],
        ki1: v[1],
        ki2: v[2],
        kr0: v[3],
        kr1: v[4],
        kr2: v[5],
        ki1_tilde: v[1] + half_t2 * ei,
        kr1_tilde: v[4] + half_t2 * er,
    })
}

/// All eight kernels at `t_s` by the requested method.
pub fn kernel_values(
    model: &SpectralDensityModel,
    t_s: f64,
    thermal: &ThermalParams,
    method: Method,
) -> Result<KernelValues> {
    match (method, model) {
        (Method::ClosedForm, SpectralDensityModel::OhmicDrude { gamma_s }) => ohmic_kernels(*gamma_s, t_s, thermal),
        (Method::ClosedForm, SpectralDensityModel::Tabulated(_)) => {
            Err(Error::Unsupported("closed-form kernels need the Ohmic-Drude density".into()))
        }
        (Method::Quadrature, _) => quadrature_kernels(model, t_s, thermal),
    }
}

/// A single kernel.
pub fn kernel(
    kind: KernelKind,
    order: KernelOrder,
    t_s: f64,
    model: &SpectralDensityModel,
    thermal: &ThermalParams,
    method: Method,
) -> Result<f64> {
    Ok(kernel_values(model, t_s, thermal, method)?.get(kind, order))
}

/// Kernels sampled on a time grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelTrack {
    pub grid: Vec<f64>,
    pub values: Vec<KernelValues>,
}

impl KernelTrack {
    /// Evaluates every grid point (in parallel); the first failure is returned.
    pub fn compute(
        grid: &[f64],
        model: &SpectralDensityModel,
        thermal: &ThermalParams,
        method: Method,
    ) -> Result<Self> {
        check_grid(grid)?;
        let values = grid.par_iter().map(|&t| kernel_values(model, t, thermal, method)).collect::<Result<Vec<_>>>()?;
        Ok(Self { grid: grid.to_vec(), values })
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    pub fn column(&self, kind: KernelKind, order: KernelOrder) -> Vec<f64> {
        self.values.iter().map(|v| v.get(kind, order)).collect()
    }
}

/// `steps + 1` equally spaced points on `[0, t_max]`.
pub fn uniform_grid(t_max: f64, steps: usize) -> Result<Vec<f64>> {
    if !(t_max > 0.0) || steps == 0 {
        return Err(Error::invalid("grid", format!("need t_max > 0 and steps >= 1, got {t_max}, {steps}")));
    }
    Ok((0..=steps).map(|i| t_max * i as f64 / steps as f64).collect())
}

pub(crate) fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::invalid("grid", "empty"));
    }
    if let Some(&t) = grid.iter().find(|t| !(**t >= 0.0) || !t.is_finite()) {
        return Err(Error::invalid("grid", format!("times must be finite and >= 0, got {t}")));
    }
    if let Some(w) = grid.windows(2).find(|w| !(w[1] > w[0])) {
        return Err(Error::invalid("grid", format!("not strictly increasing at {} -> {}", w[0], w[1])));
    }
    Ok(())
}

fn check_time(t_s: f64) -> Result<()> {
    if !(t_s >= 0.0) {
        return Err(Error::Domain(format!("t_s must be >= 0, got {t_s}")));
    }
    Ok(())
}
