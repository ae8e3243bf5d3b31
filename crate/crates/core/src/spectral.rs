//! Bath spectral densities and the two single-time bath kernels
//! `η̃_I(t)` and `η̃_R(t)`.
//!
//! Units are `ħ = m = ω_c = 1`: frequencies are in units of the Drude cutoff,
//! the Ohmic–Drude density is `η(ω) = 2γ_s ω/(ω² + 1)`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matsubara;
use crate::quadrature::{fourier_integral, integrate, FourierOptions, Tolerance, Trig};

/// Largest frequency spacing accepted in a tabulated density.
pub const MAX_TABLE_SPACING: f64 = 0.1;

/// Evaluation route for kernels that have both an analytic and a numerical form.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    ClosedForm,
    Quadrature,
}

impl std::str::FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "closed_form" | "closed-form" | "closed" => Ok(Method::ClosedForm),
            "quadrature" | "quad" => Ok(Method::Quadrature),
            other => Err(Error::invalid("method", format!("expected closed_form or quadrature, got `{other}`"))),
        }
    }
}

/// Piecewise-linear `η(ω)` table; zero outside its range.
#[derive(Debug, Clone, PartialEq)]
pub struct TabulatedDensity {
    omega: Vec<f64>,
    eta: Vec<f64>,
}

impl TabulatedDensity {
    pub fn new(points: &[(f64, f64)]) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::invalid("table", "needs at least two (omega, eta) points"));
        }
        for w in points.windows(2) {
            if !(w[1].0 > w[0].0) {
                return Err(Error::invalid("table", format!("omega not strictly increasing at {}", w[1].0)));
            }
            if w[1].0 - w[0].0 > MAX_TABLE_SPACING * (1.0 + 1e-9) {
                return Err(Error::invalid(
                    "table",
                    format!("spacing {} near omega = {} does not resolve the cutoff", w[1].0 - w[0].0, w[0].0),
                ));
            }
        }
        if let Some(&(w, e)) = points.iter().find(|(w, e)| !(*w >= 0.0) || !(*e >= 0.0) || !e.is_finite()) {
            return Err(Error::invalid("table", format!("invalid point ({w}, {e}); need omega >= 0, eta >= 0")));
        }
        Ok(Self { omega: points.iter().map(|p| p.0).collect(), eta: points.iter().map(|p| p.1).collect() })
    }

    /// Samples `model` on `[0, omega_max]` with the given spacing.
    pub fn sample(model: &SpectralDensityModel, omega_max: f64, spacing: f64) -> Result<Self> {
        let n = (omega_max / spacing).ceil() as usize;
        let pts: Result<Vec<_>> = (0..=n)
            .map(|i| {
                let w = omega_max * i as f64 / n as f64;
                model.eta(w).map(|e| (w, e))
            })
            .collect();
        Self::new(&pts?)
    }

    pub fn omega_max(&self) -> f64 {
        *self.omega.last().unwrap()
    }

    pub fn points(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.omega.iter().cloned().zip(self.eta.iter().cloned())
    }

    fn eval(&self, w: f64) -> f64 {
        let (first, last) = (self.omega[0], self.omega_max());
        if w < first || w > last {
            return 0.0;
        }
        let i = self.omega.partition_point(|&x| x <= w).clamp(1, self.omega.len() - 1);
        let (w0, w1) = (self.omega[i - 1], self.omega[i]);
        let (e0, e1) = (self.eta[i - 1], self.eta[i]);
        e0 + (e1 - e0) * (w - w0) / (w1 - w0)
    }

    /// `∫ η(ω)/ω dω` over the table, exact for the linear interpolant.
    fn integral_eta_over_omega(&self) -> Result<f64> {
        let mut total = 0.0;
        for i in 1..self.omega.len() {
            let (a, b) = (self.omega[i - 1], self.omega[i]);
            let (ea, eb) = (self.eta[i - 1], self.eta[i]);
            let slope = (eb - ea) / (b - a);
            let intercept = ea - slope * a;
            if a == 0.0 {
                if ea != 0.0 {
                    return Err(Error::NotIntegrable { eta0: ea });
                }
                total += slope * b;
            } else {
                total += intercept * (b / a).ln() + slope * (b - a);
            }
        }
        Ok(total)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SpectralDensityModel {
    /// `η(ω) = 2γ_s ω/(ω² + 1)`.
    OhmicDrude {
        gamma_s: f64,
    },
    Tabulated(TabulatedDensity),
}

impl SpectralDensityModel {
    pub fn ohmic(gamma_s: f64) -> Result<Self> {
        if !(gamma_s >= 0.0) || !gamma_s.is_finite() {
            return Err(Error::invalid("gamma_s", format!("must be >= 0, got {gamma_s}")));
        }
        Ok(SpectralDensityModel::OhmicDrude { gamma_s })
    }

    pub fn gamma_s(&self) -> Option<f64> {
        match self {
            SpectralDensityModel::OhmicDrude { gamma_s } => Some(*gamma_s),
            SpectralDensityModel::Tabulated(_) => None,
        }
    }

    /// `η_e(ω)` for `ω >= 0`.
    pub fn eta(&self, omega: f64) -> Result<f64> {
        if !(omega >= 0.0) {
            return Err(Error::Domain(format!("omega must be >= 0, got {omega}")));
        }
        Ok(self.eta_unchecked(omega))
    }

    fn eta_unchecked(&self, omega: f64) -> f64 {
        match self {
            SpectralDensityModel::OhmicDrude { gamma_s } => 2.0 * gamma_s * omega / (omega * omega + 1.0),
            SpectralDensityModel::Tabulated(t) => t.eval(omega),
        }
    }

    /// Counterterm spring constant `κ_e = (2/π) ∫ η(ω)/ω dω`.
    pub fn kappa(&self) -> Result<f64> {
        match self {
            SpectralDensityModel::OhmicDrude { gamma_s } => Ok(2.0 * gamma_s),
            SpectralDensityModel::Tabulated(t) => Ok(2.0 / PI * t.integral_eta_over_omega()?),
        }
    }

    /// Upper end of the support, if finite.
    fn support(&self) -> Option<f64> {
        match self {
            SpectralDensityModel::OhmicDrude { .. } => None,
            SpectralDensityModel::Tabulated(t) => Some(t.omega_max()),
        }
    }

    /// `(1/π) ∫ amplitude(ω) trig(ω t) dω` over the support of the density.
    fn transform<F>(&self, amplitude: F, t_s: f64, trig: Trig) -> Result<f64>
    where
        F: Fn(f64) -> f64,
    {
        let value = match self.support() {
            None => fourier_integral(amplitude, t_s, trig, FourierOptions::default())?.0,
            Some(_) => {
                let SpectralDensityModel::Tabulated(table) = self else { unreachable!() };
                let tol = Tolerance { abs: 1e-15, rel: 1e-12, max_intervals: 2000 };
                let mut total = 0.0;
                for w in table.omega.windows(2) {
                    let f = |x: f64| {
                        amplitude(x)
                            * match trig {
                                Trig::Sin => (x * t_s).sin(),
                                Trig::Cos => (x * t_s).cos(),
                            }
                    };
                    total += integrate(f, w[0], w[1], tol)?.0;
                }
                total
            }
        };
        Ok(value / PI)
    }

    /// `η̃_I(t_s) = (1/π) ∫ η(ω) sin(ω t_s) dω`.
    pub fn eta_i(&self, t_s: f64, method: Method) -> Result<f64> {
        check_time(t_s)?;
        match (self, method) {
            (SpectralDensityModel::OhmicDrude { gamma_s }, Method::ClosedForm) => Ok(gamma_s * (-t_s).exp()),
            (SpectralDensityModel::OhmicDrude { gamma_s }, _) if *gamma_s == 0.0 => Ok(0.0),
            (SpectralDensityModel::Tabulated(_), Method::ClosedForm) => {
                Err(Error::Unsupported("closed-form eta_I needs the Ohmic-Drude density".into()))
            }
            (_, Method::Quadrature) => {
                if t_s == 0.0 {
                    return Ok(0.0);
                }
                self.transform(|w| self.eta_unchecked(w), t_s, Trig::Sin)
            }
        }
    }

    /// `η̃_R(t_s) = (1/π) ∫ η(ω) coth(ωβ_s/2) cos(ω t_s) dω`.
    ///
    /// For the Drude density the integrand decays only like `1/ω`, so the
    /// kernel has a logarithmic singularity at `t_s = 0`.
    pub fn eta_r(&self, thermal: &ThermalParams, t_s: f64, method: Method) -> Result<f64> {
        check_time(t_s)?;
        match (self, method) {
            (SpectralDensityModel::OhmicDrude { gamma_s }, _) if *gamma_s == 0.0 => Ok(0.0),
            (SpectralDensityModel::OhmicDrude { gamma_s }, Method::ClosedForm) => {
                Ok(gamma_s * matsubara::eta_r_series(thermal.beta_s, t_s, thermal)?)
            }
            (SpectralDensityModel::Tabulated(_), Method::ClosedForm) => {
                Err(Error::Unsupported("closed-form eta_R needs the Ohmic-Drude density".into()))
            }
            (_, Method::Quadrature) => {
                if t_s == 0.0 && self.support().is_none() {
                    return Err(Error::Divergent { quantity: "eta_R", t_s });
                }
                let half_beta = 0.5 * thermal.beta_s;
                let amplitude = |w: f64| self.eta_unchecked(w) / (w * half_beta).tanh();
                if t_s == 0.0 {
                    let SpectralDensityModel::Tabulated(table) = self else { unreachable!() };
                    let tol = Tolerance { abs: 1e-15, rel: 1e-12, max_intervals: 2000 };
                    let mut total = 0.0;
                    for w in table.omega.windows(2) {
                        total += integrate(amplitude, w[0], w[1], tol)?.0;
                    }
                    return Ok(total / PI);
                }
                self.transform(amplitude, t_s, Trig::Cos)
            }
        }
    }
}

/// Excited, cross and ground densities built from one set of bath modes.
#[derive(Debug, Clone, PartialEq)]
pub struct BathPair {
    pub excited: SpectralDensityModel,
    /// Dimensionless friction of `η_c`; may be negative for anti-correlated couplings.
    pub cross_gamma_s: f64,
    /// Carried for completeness; `η_g` only enters the imaginary-time path measure.
    pub ground_gamma_s: f64,
}

impl BathPair {
    pub fn new(excited: SpectralDensityModel, cross_gamma_s: f64, ground_gamma_s: f64) -> Result<Self> {
        if !(ground_gamma_s >= 0.0) {
            return Err(Error::invalid("ground_gamma_s", format!("must be >= 0, got {ground_gamma_s}")));
        }
        if let Some(ge) = excited.gamma_s() {
            // Cauchy–Schwarz on c_{α,e} c_{α,g}
            if cross_gamma_s * cross_gamma_s > ge * ground_gamma_s * (1.0 + 1e-12) {
                return Err(Error::invalid(
                    "cross_gamma_s",
                    format!(
                        "cross_gamma_s² = {} exceeds gamma_s * ground_gamma_s = {}",
                        cross_gamma_s.powi(2),
                        ge * ground_gamma_s
                    ),
                ));
            }
        }
        Ok(Self { excited, cross_gamma_s, ground_gamma_s })
    }

    /// Non-fatal observations about the parameter set.
    pub fn warnings(&self) -> Vec<String> {
        let mut w = Vec::new();
        if self.cross_gamma_s < 0.0 {
            w.push(format!("cross_gamma_s = {} < 0: anti-correlated excited/ground couplings", self.cross_gamma_s));
        }
        w
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThermalParams {
    pub beta_s: f64,
    pub matsubara_tol: f64,
    pub matsubara_max_terms: usize,
}

impl ThermalParams {
    pub const DEFAULT_TOL: f64 = 1e-10;
    pub const DEFAULT_MAX_TERMS: usize = 1_000_000;

    pub fn new(beta_s: f64) -> Result<Self> {
        Self::with_tolerance(beta_s, Self::DEFAULT_TOL, Self::DEFAULT_MAX_TERMS)
    }

    pub fn with_tolerance(beta_s: f64, matsubara_tol: f64, matsubara_max_terms: usize) -> Result<Self> {
        if !(beta_s > 0.0) || !beta_s.is_finite() {
            return Err(Error::invalid("beta_s", format!("must be positive, got {beta_s}")));
        }
        if !(matsubara_tol > 0.0) {
            return Err(Error::invalid("matsubara_tol", format!("must be positive, got {matsubara_tol}")));
        }
        Ok(Self { beta_s, matsubara_tol, matsubara_max_terms })
    }
}

/// Converts physical parameters to the scaled variables used everywhere else.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaledUnits {
    pub gamma_s: f64,
    pub beta_s: f64,
    pub t_s: f64,
}

impl ScaledUnits {
    /// `γ_s = γ_e/ω_c`, `β_s = βħ ω_c`, `t_s = ω_c t`.
    pub fn from_physical(gamma_e: f64, omega_c: f64, beta_hbar: f64, t: f64) -> Self {
        Self { gamma_s: gamma_e / omega_c, beta_s: beta_hbar * omega_c, t_s: omega_c * t }
    }
}

/// Force from the cross kernel `η̃_c` for a constant imaginary-time path
/// `q_g(τ) ≡ q0` and a Drude `η_c`: `2 γ_c q0 e^{-t_s}`.
pub fn drive_eta_c(t_s: f64, q0: f64, cross_gamma_s: f64) -> f64 {
    2.0 * cross_gamma_s * q0 * (-t_s).exp()
}

fn check_time(t_s: f64) -> Result<()> {
    if !(t_s >= 0.0) {
        return Err(Error::Domain(format!("t_s must be >= 0, got {t_s}")));
    }
    Ok(())
}
