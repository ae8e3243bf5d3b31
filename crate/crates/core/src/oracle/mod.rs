//! Exact Gaussian dynamics of a harmonic system coupled to a discretized
//! harmonic bath, used as the reference for the propagator.

mod bath;
mod gaussian;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use bath::{discretize_bath, DiscretizedBath, MIN_MODES, MIN_OMEGA_MAX};
pub use gaussian::{
    evolve_gaussian, reduced_moments, thermal_state, Flow, GaussianState, HarmonicModel, NormalModes, ReducedMoments,
    SystemTrajectory,
};

use crate::error::{Error, Result};
use crate::spectral::{BathPair, SpectralDensityModel};

/// `½ω²(q − d)² + Σ ½ω_α²(x_α − c_α q/ω_α²)²` as a quadratic model on `(q, x_1..x_n)`.
pub fn system_bath_model(omega: f64, center: f64, couplings: &[f64], bath_omega: &[f64]) -> Result<HarmonicModel> {
    if !(omega > 0.0) {
        return Err(Error::invalid("omega", format!("must be positive, got {omega}")));
    }
    if couplings.len() != bath_omega.len() {
        return Err(Error::DimensionMismatch { expected: bath_omega.len(), found: couplings.len() });
    }
    let n = 1 + bath_omega.len();
    let mut k = DMatrix::zeros(n, n);
    let mut minimum = DVector::zeros(n);
    k[(0, 0)] = omega * omega;
    minimum[0] = center;
    for (a, (&c, &w)) in couplings.iter().zip(bath_omega).enumerate() {
        let w2 = w * w;
        k[(0, 0)] += c * c / w2;
        k[(0, a + 1)] = -c;
        k[(a + 1, 0)] = -c;
        k[(a + 1, a + 1)] = w2;
        minimum[a + 1] = c * center / w2;
    }
    HarmonicModel::new(k, minimum)
}

/// Physical parameters of an exact run. The ground state is centred at `q = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OracleConfig {
    pub gamma_s: f64,
    pub beta_s: f64,
    pub omega_e: f64,
    pub shift: f64,
    pub omega_g: f64,
    pub ground_gamma_s: f64,
    pub n_modes: usize,
    pub omega_max: f64,
}

impl OracleConfig {
    pub fn bath(&self) -> Result<DiscretizedBath> {
        let cross = (self.gamma_s * self.ground_gamma_s).sqrt();
        let pair = BathPair::new(SpectralDensityModel::ohmic(self.gamma_s)?, cross, self.ground_gamma_s)?;
        discretize_bath(&pair, self.n_modes, self.omega_max)
    }
}

/// The two Hamiltonians of a run and the initial state.
#[derive(Debug, Clone)]
pub struct OracleSetup {
    pub bath: DiscretizedBath,
    pub ground: HarmonicModel,
    pub excited: HarmonicModel,
    pub initial: GaussianState,
}

impl OracleSetup {
    pub fn new(cfg: &OracleConfig) -> Result<Self> {
        let bath = cfg.bath()?;
        let ground = system_bath_model(cfg.omega_g, 0.0, &bath.c_g, &bath.omega)?;
        let excited = system_bath_model(cfg.omega_e, cfg.shift, &bath.c_e, &bath.omega)?;
        let initial = thermal_state(&ground, cfg.beta_s)?;
        Ok(Self { bath, ground, excited, initial })
    }

    /// Reduced moments of the excited-state Gibbs state.
    pub fn steady(&self, beta_s: f64) -> Result<ReducedMoments> {
        Ok(reduced_moments(&thermal_state(&self.excited, beta_s)?))
    }
}

/// Reduced system moments at each requested time.
pub fn oracle_trajectory(cfg: &OracleConfig, times: &[f64]) -> Result<Vec<(f64, ReducedMoments)>> {
    if let Some(&t) = times.iter().find(|t| !(**t >= 0.0)) {
        return Err(Error::invalid("t_s", format!("times must be >= 0, got {t}")));
    }
    let setup = OracleSetup::new(cfg)?;
    let flow = Flow::new(&setup.excited)?;
    let traj = SystemTrajectory::new(&flow, &setup.initial)?;
    Ok(times.par_iter().map(|&t| (t, traj.at(t))).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(gamma_s: f64) -> OracleConfig {
        OracleConfig {
            gamma_s,
            beta_s: 1.0,
            omega_e: 1.0,
            shift: 1.0,
            omega_g: 1.0,
            ground_gamma_s: 0.0,
            n_modes: 64,
            omega_max: 30.0,
        }
    }

    #[test]
    fn zero_coupling_is_single_mode() {
        let c = cfg(0.0);
        let times: Vec<f64> = (0..50).map(|i| 0.3 * i as f64).collect();
        let v0 = 0.5 / (0.5f64).tanh();
        for (t, m) in oracle_trajectory(&c, &times).unwrap() {
            assert!((m.q_mean - (1.0 - t.cos())).abs() < 1e-12);
            assert!((m.q_var() - v0).abs() < 1e-12);
            assert!((m.p_var() - v0).abs() < 1e-12);
        }
    }

    #[test]
    fn vertical_excitation_keeps_ground_moments() {
        let mut c = cfg(0.1);
        c.ground_gamma_s = 0.05;
        let setup = OracleSetup::new(&c).unwrap();
        let at0 = oracle_trajectory(&c, &[0.0]).unwrap()[0].1;
        let g = reduced_moments(&setup.initial);
        assert!((at0.q2 - g.q2).abs() < 1e-12 && (at0.p2 - g.p2).abs() < 1e-12);
        assert_eq!(at0.p_mean, 0.0);
        setup.initial.validate().unwrap();
    }

    #[test]
    fn excited_minimum_is_stationary() {
        let setup = OracleSetup::new(&cfg(0.2)).unwrap();
        let (x, b) = (&setup.excited.minimum, &setup.bath);
        assert!((x[0] - 1.0).abs() < 1e-15);
        let mut dq = x[0] - 1.0;
        for (a, (&c, &w)) in b.c_e.iter().zip(&b.omega).enumerate() {
            let stretch = x[a + 1] - c * x[0] / (w * w);
            assert!(stretch.abs() < 1e-12);
            dq -= c * stretch;
        }
        assert!(dq.abs() < 1e-12);
    }

    #[test]
    fn damped_mean_relaxes_to_shift() {
        let mut c = cfg(0.2);
        c.n_modes = 256;
        let end = oracle_trajectory(&c, &[40.0]).unwrap()[0].1;
        assert!((end.q_mean - 1.0).abs() < 0.05, "{}", end.q_mean);
    }
}
