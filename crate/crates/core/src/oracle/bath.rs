//! Finite set of bath oscillators reproducing a spectral density.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::{BathPair, SpectralDensityModel};

pub const MIN_MODES: usize = 8;
pub const MIN_OMEGA_MAX: f64 = 10.0;

/// Unit-mass bath modes with excited- and ground-state couplings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscretizedBath {
    pub omega: Vec<f64>,
    pub c_e: Vec<f64>,
    pub c_g: Vec<f64>,
}

impl DiscretizedBath {
    pub fn n_modes(&self) -> usize {
        self.omega.len()
    }

    /// `Σ c_e²/ω²`, the discrete counterterm spring constant.
    pub fn kappa_e(&self) -> f64 {
        self.omega.iter().zip(&self.c_e).map(|(w, c)| c * c / (w * w)).sum()
    }

    pub fn kappa_g(&self) -> f64 {
        self.omega.iter().zip(&self.c_g).map(|(w, c)| c * c / (w * w)).sum()
    }

    /// `∫ η/ω dω` over each `[edges[i], edges[i+1])` as carried by the modes.
    pub fn binned_weight(&self, edges: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; edges.len().saturating_sub(1)];
        for (w, c) in self.omega.iter().zip(&self.c_e) {
            if let Some(i) = edges.windows(2).position(|e| *w >= e[0] && *w < e[1]) {
                out[i] += 0.5 * PI * c * c / (w * w);
            }
        }
        out
    }
}

/// Cumulative `W(ω) = ∫_0^ω η(x)/x dx` on a fine grid, for densities
/// without a closed form.
struct CumulativeWeight {
    omega: Vec<f64>,
    w: Vec<f64>,
}

impl CumulativeWeight {
    fn new(model: &SpectralDensityModel, omega_max: f64) -> Result<Self> {
        const M: usize = 200_000;
        let h = omega_max / M as f64;
        let g = |x: f64| -> Result<f64> {
            let x = x.max(1e-6 * h);
            Ok(model.eta(x)? / x)
        };
        let mut omega = Vec::with_capacity(M + 1);
        let mut w = Vec::with_capacity(M + 1);
        let mut prev = g(0.0)?;
        let mut acc = 0.0;
        omega.push(0.0);
        w.push(0.0);
        for i in 1..=M {
            let x = i as f64 * h;
            let cur = g(x)?;
            acc += 0.5 * h * (prev + cur);
            omega.push(x);
            w.push(acc);
            prev = cur;
        }
        Ok(Self { omega, w })
    }

    fn total(&self) -> f64 {
        *self.w.last().unwrap()
    }

    fn invert(&self, target: f64) -> f64 {
        let i = self.w.partition_point(|&v| v < target).clamp(1, self.w.len() - 1);
        let (w0, w1) = (self.w[i - 1], self.w[i]);
        let f = if w1 > w0 { (target - w0) / (w1 - w0) } else { 0.0 };
        self.omega[i - 1] + f * (self.omega[i] - self.omega[i - 1])
    }
}

/// Places mode `α` at the midpoint of the `α`-th equal slice of `∫_0^{ω_max} η/ω`,
/// with `c_α² = (2/π) ω_α² ΔW`, so each mode carries its slice of `κ_e`.
pub fn discretize_bath(bath: &BathPair, n_modes: usize, omega_max: f64) -> Result<DiscretizedBath> {
    if n_modes < MIN_MODES {
        return Err(Error::invalid("n_modes", format!("need at least {MIN_MODES}, got {n_modes}")));
    }
    if !(omega_max >= MIN_OMEGA_MAX) || !omega_max.is_finite() {
        return Err(Error::invalid(
            "omega_max",
            format!("bath coverage needs omega_max >= {MIN_OMEGA_MAX} (cutoff units), got {omega_max}"),
        ));
    }
    let n = n_modes as f64;
    let (omega, slice_weight) = match &bath.excited {
        SpectralDensityModel::OhmicDrude { gamma_s } => {
            let a = omega_max.atan();
            let omega: Vec<f64> = (0..n_modes).map(|k| ((k as f64 + 0.5) * a / n).tan()).collect();
            (omega, 2.0 * gamma_s * a / n)
        }
        model => {
            let cum = CumulativeWeight::new(model, omega_max)?;
            let total = cum.total();
            if !(total > 0.0) {
                return Err(Error::Domain("spectral density has no weight below omega_max".into()));
            }
            let omega = (0..n_modes).map(|k| cum.invert((k as f64 + 0.5) * total / n)).collect();
            (omega, total / n)
        }
    };
    let c_e: Vec<f64> = omega.iter().map(|w| w * (2.0 / PI * slice_weight).sqrt()).collect();

    let c_g = if bath.ground_gamma_s == 0.0 {
        vec![0.0; n_modes]
    } else {
        let gamma_e = match bath.excited.gamma_s() {
            Some(g) if g > 0.0 => g,
            _ => {
                return Err(Error::Unsupported(
                    "ground couplings are scaled from a non-zero Ohmic excited-state friction".into(),
                ))
            }
        };
        let scale = (bath.ground_gamma_s / gamma_e).sqrt();
        c_e.iter().map(|c| c * scale).collect()
    };
    Ok(DiscretizedBath { omega, c_e, c_g })
}
