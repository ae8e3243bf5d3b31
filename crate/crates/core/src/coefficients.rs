//! Dekker-form coefficients of the master equation and the Lindblad
//! positivity determinant `D = 4 R_pp R_qq - R_pq² - Γ²`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::{check_grid, ohmic_kernels, ohmic_kernels_steady, KernelValues};
use crate::matsubara;
use crate::spectral::ThermalParams;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct CoefficientSample {
    pub t_s: f64,
    pub r_m: f64,
    #[serde(rename = "Gamma")]
    pub gamma: f64,
    #[serde(rename = "R_pq")]
    pub r_pq: f64,
    #[serde(rename = "R_qq")]
    pub r_qq: f64,
    #[serde(rename = "R_pp")]
    pub r_pp: f64,
    pub alpha: f64,
    #[serde(rename = "D")]
    pub d: f64,
    /// `s = K_R^(2)/m_e`.
    pub branch: f64,
    /// `s < 1`.
    pub weak_damping_ok: bool,
}

impl CoefficientSample {
    fn zero(t_s: f64) -> Self {
        Self { t_s, r_m: 1.0, weak_damping_ok: true, ..Default::default() }
    }

    fn with_determinant(mut self) -> Self {
        self.d = 4.0 * self.r_pp * self.r_qq - self.r_pq * self.r_pq - self.gamma * self.gamma;
        self
    }
}

/// Coefficients from raw kernel values (any spectral density).
///
/// `m_e = 1 - K_I^(2)`, `Γ = K̃_I^(1)/(γ m_e)`, `R_pq = (K̃_R^(1)/m_e - 2 K_R^(2) K̃_I^(1)/m_e²)/γ`,
/// `R_qq = K_R^(2)/(2 m_e²)`, `R_pp = α/γ²`.
pub fn generic_coefficients(t_s: f64, gamma_s: f64, k: &KernelValues) -> Result<CoefficientSample> {
    let m_e = 1.0 - k.ki2;
    if !(m_e > 0.0) {
        let critical = if k.ki2 > 0.0 && gamma_s > 0.0 { gamma_s / k.ki2 } else { f64::NAN };
        return Err(Error::EffectiveMass { t_s, r_m: m_e, critical_gamma_s: critical });
    }
    if gamma_s == 0.0 {
        return Ok(CoefficientSample::zero(t_s));
    }
    let alpha = k.kr0 - 2.0 / m_e * k.ki1_tilde * (k.kr1_tilde - k.kr2 * k.ki1_tilde / m_e);
    let branch = k.kr2 / m_e;
    Ok(CoefficientSample {
        t_s,
        r_m: m_e,
        gamma: k.ki1_tilde / (gamma_s * m_e),
        r_pq: (k.kr1_tilde / m_e - 2.0 * k.kr2 * k.ki1_tilde / (m_e * m_e)) / gamma_s,
        r_qq: k.kr2 / (2.0 * m_e * m_e),
        r_pp: alpha / (gamma_s * gamma_s),
        alpha,
        d: 0.0,
        branch,
        weak_damping_ok: branch < 1.0,
    }
    .with_determinant())
}

fn check_gamma(gamma_s: f64) -> Result<()> {
    if !(gamma_s >= 0.0) || !gamma_s.is_finite() {
        return Err(Error::invalid("gamma_s", format!("must be >= 0, got {gamma_s}")));
    }
    Ok(())
}

/// Ohmic–Drude closed form in terms of `F_n`, `F̃_1`, `G_n`, `G̃_1`.
/// `α` is taken from the kernel expression so the identity `α = γ_s² R_pp`
/// compares two separate evaluations.
fn ohmic_from_fg(
    t_s: f64,
    gamma_s: f64,
    f2: f64,
    f1t: f64,
    g: &matsubara::GValues,
    k: &KernelValues,
) -> Result<CoefficientSample> {
    let r_m = 1.0 - 2.0 * gamma_s * f2;
    if !(r_m > 0.0) {
        return Err(Error::EffectiveMass { t_s, r_m, critical_gamma_s: 1.0 / (2.0 * f2) });
    }
    if gamma_s == 0.0 {
        return Ok(CoefficientSample::zero(t_s));
    }
    let gamma = f1t / r_m;
    let r_pq = g.g1_tilde / r_m - 4.0 * gamma_s * g.g2 * f1t / (r_m * r_m);
    let r_qq = gamma_s * g.g2 / (r_m * r_m);
    let r_pp = g.g0 / gamma_s - 2.0 * gamma * g.g1_tilde + 4.0 * gamma_s * gamma * gamma * g.g2;
    let alpha = k.kr0 - 2.0 / r_m * k.ki1_tilde * (k.kr1_tilde - k.kr2 * k.ki1_tilde / r_m);
    let branch = 2.0 * gamma_s * g.g2 / r_m;
    Ok(CoefficientSample { t_s, r_m, gamma, r_pq, r_qq, r_pp, alpha, d: 0.0, branch, weak_damping_ok: branch < 1.0 }
        .with_determinant())
}

/// All coefficients at one time for the Ohmic–Drude bath.
pub fn coefficient_at(t_s: f64, gamma_s: f64, beta_s: f64, thermal: &ThermalParams) -> Result<CoefficientSample> {
    check_gamma(gamma_s)?;
    if !(t_s >= 0.0) {
        return Err(Error::Domain(format!("t_s must be >= 0, got {t_s}")));
    }
    let thermal = ThermalParams { beta_s, ..*thermal };
    let g = matsubara::g_values(beta_s, t_s, &thermal)?;
    let k = ohmic_kernels(gamma_s, t_s, &thermal)?;
    ohmic_from_fg(t_s, gamma_s, matsubara::f2(t_s), matsubara::f1_tilde(t_s), &g, &k)
}

/// `t_s → ∞` limit (every F → 1, G at their steady sums).
pub fn coefficient_steady(gamma_s: f64, beta_s: f64, thermal: &ThermalParams) -> Result<CoefficientSample> {
    check_gamma(gamma_s)?;
    let thermal = ThermalParams { beta_s, ..*thermal };
    let g = matsubara::g_steady(beta_s, &thermal)?;
    let k = ohmic_kernels_steady(gamma_s, &thermal)?;
    ohmic_from_fg(f64::INFINITY, gamma_s, 1.0, 1.0, &g, &k)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoefficientTrack {
    pub gamma_s: f64,
    pub beta_s: f64,
    pub samples: Vec<CoefficientSample>,
    pub steady: CoefficientSample,
}

pub fn coefficient_track(grid: &[f64], gamma_s: f64, beta_s: f64, thermal: &ThermalParams) -> Result<CoefficientTrack> {
    check_grid(grid)?;
    if grid[0] != 0.0 {
        return Err(Error::invalid("grid", format!("must start at 0, starts at {}", grid[0])));
    }
    let samples = grid.par_iter().map(|&t| coefficient_at(t, gamma_s, beta_s, thermal)).collect::<Result<Vec<_>>>()?;
    let steady = coefficient_steady(gamma_s, beta_s, thermal)?;
    Ok(CoefficientTrack { gamma_s, beta_s, samples, steady })
}

fn relative_deviation(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}

/// Largest relative difference in `Γ, R_pq, R_qq, R_pp` between the generic
/// kernel expressions and the Ohmic closed forms.
pub fn generic_vs_ohmic_check(t_s: f64, gamma_s: f64, beta_s: f64) -> Result<f64> {
    let thermal = ThermalParams::new(beta_s)?;
    if t_s == 0.0 {
        return Ok(0.0);
    }
    let k = ohmic_kernels(gamma_s, t_s, &thermal)?;
    let generic = generic_coefficients(t_s, gamma_s, &k)?;
    let ohmic = coefficient_at(t_s, gamma_s, beta_s, &thermal)?;
    Ok([
        relative_deviation(generic.gamma, ohmic.gamma),
        relative_deviation(generic.r_pq, ohmic.r_pq),
        relative_deviation(generic.r_qq, ohmic.r_qq),
        relative_deviation(generic.r_pp, ohmic.r_pp),
    ]
    .into_iter()
    .fold(0.0, f64::max))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sign {
    Negative,
    Zero,
    Positive,
}

impl Sign {
    pub fn of(x: f64) -> Self {
        if x > 0.0 {
            Sign::Positive
        } else if x < 0.0 {
            Sign::Negative
        } else {
            Sign::Zero
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SignChange {
    /// Linear-interpolation estimate of the zero of `D`.
    pub t_s: f64,
    pub to: Sign,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PositivityReport {
    pub gamma_s: f64,
    pub beta_s: f64,
    pub d_at_start: f64,
    pub sign_changes: Vec<SignChange>,
    /// Sign of `D` for every sample with `t_s > 0`, if it never changes.
    pub uniform_sign: Option<Sign>,
    pub final_sign: Sign,
    pub steady_d: f64,
    pub steady_sign: Sign,
    /// `R_pq`, `R_qq`, `R_pp` all strictly positive at every `t_s > 0`.
    pub r_positive_throughout: bool,
    pub weak_damping_ok: bool,
    pub max_branch: f64,
    pub steady: CoefficientSample,
}

pub fn positivity_report(track: &CoefficientTrack) -> Result<PositivityReport> {
    let first = track.samples.first().ok_or_else(|| Error::invalid("track", "no samples"))?;
    let interior: Vec<&CoefficientSample> = track.samples.iter().filter(|s| s.t_s > 0.0).collect();

    let mut sign_changes = Vec::new();
    let mut previous: Option<&CoefficientSample> = None;
    for s in interior.iter().copied().filter(|s| s.d != 0.0) {
        if let Some(p) = previous {
            if Sign::of(p.d) != Sign::of(s.d) {
                let t = p.t_s + (s.t_s - p.t_s) * p.d / (p.d - s.d);
                sign_changes.push(SignChange { t_s: t, to: Sign::of(s.d) });
            }
        }
        previous = Some(s);
    }
    let signs: Vec<Sign> = interior.iter().map(|s| Sign::of(s.d)).collect();
    let uniform_sign = match signs.first() {
        Some(&s0) if signs.iter().all(|&s| s == s0) => Some(s0),
        _ => None,
    };
    let last = track.samples.last().unwrap();
    Ok(PositivityReport {
        gamma_s: track.gamma_s,
        beta_s: track.beta_s,
        d_at_start: first.d,
        sign_changes,
        uniform_sign,
        final_sign: Sign::of(last.d),
        steady_d: track.steady.d,
        steady_sign: Sign::of(track.steady.d),
        r_positive_throughout: interior.iter().all(|s| s.r_pq > 0.0 && s.r_qq > 0.0 && s.r_pp > 0.0),
        weak_damping_ok: track.samples.iter().all(|s| s.weak_damping_ok) && track.steady.weak_damping_ok,
        max_branch: track.samples.iter().map(|s| s.branch).fold(track.steady.branch, f64::max),
        steady: track.steady,
    })
}
