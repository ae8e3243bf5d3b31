//! First and second moments under a harmonic `V_e`, where the master
//! equation closes on `(⟨q⟩, ⟨p⟩, Var q, Var p, Cov_sym(q, p))`.

use serde::{Deserialize, Serialize};

use super::hamiltonian::PotentialModel;
use super::liouvillian::StageCoefficients;
use super::observables::Observables;
use crate::coefficients::{coefficient_at, coefficient_steady};
use crate::error::{Error, Result};
use crate::spectral::ThermalParams;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Moments {
    pub q: f64,
    pub p: f64,
    pub q_var: f64,
    pub p_var: f64,
    pub qp_cov: f64,
}

impl Moments {
    pub fn q2(&self) -> f64 {
        self.q_var + self.q * self.q
    }

    pub fn from_observables(o: &Observables) -> Self {
        Self { q: o.q_mean, p: o.p_mean, q_var: o.q_var(), p_var: o.p_var(), qp_cov: o.qp_cov() }
    }

    fn axpy(&self, a: f64, d: &Moments) -> Moments {
        Moments {
            q: self.q + a * d.q,
            p: self.p + a * d.p,
            q_var: self.q_var + a * d.q_var,
            p_var: self.p_var + a * d.p_var,
            qp_cov: self.qp_cov + a * d.qp_cov,
        }
    }
}

fn harmonic_params(potential: &PotentialModel) -> Result<(f64, f64)> {
    if !potential.is_harmonic() {
        return Err(Error::Unsupported("moment equations close only for a harmonic potential".into()));
    }
    let w2 = potential.omega_e().powi(2);
    Ok((w2, w2 * potential.shift()))
}

/// Time derivative of the moments.
pub fn moment_rhs(m: &Moments, c: &StageCoefficients, potential: &PotentialModel) -> Result<Moments> {
    let (w2, wd) = harmonic_params(potential)?;
    let k = w2 + 2.0 * c.counterterm;
    let f = wd + c.drive;
    let fr = 2.0 * c.gamma_s * c.big_gamma;
    let g = c.gamma_s;
    Ok(Moments {
        q: m.p / c.r_m,
        p: -k * m.q + f - fr * m.p,
        q_var: 2.0 * m.qp_cov / c.r_m + 2.0 * c.r_qq,
        p_var: -2.0 * k * m.qp_cov - 2.0 * fr * m.p_var + 2.0 * g * g * c.r_pp,
        qp_cov: m.p_var / c.r_m - k * m.q_var - fr * m.qp_cov + g * c.r_pq,
    })
}

/// RK4 solution of the moment equations on the grid `i·dt`, `i = 0..=steps`.
#[allow(clippy::too_many_arguments)]
pub fn moment_trajectory(
    initial: Moments,
    potential: &PotentialModel,
    gamma_s: f64,
    beta_s: f64,
    q0: f64,
    cross_gamma_s: f64,
    dt: f64,
    steps: usize,
) -> Result<Vec<(f64, Moments)>> {
    let thermal = ThermalParams::new(beta_s)?;
    let at = |t: f64| -> Result<StageCoefficients> {
        let s = coefficient_at(t, gamma_s, beta_s, &thermal)?;
        Ok(StageCoefficients::from_sample(&s, gamma_s, q0, cross_gamma_s))
    };
    let mut out = Vec::with_capacity(steps + 1);
    let mut m = initial;
    out.push((0.0, m));
    let mut c0 = at(0.0)?;
    for i in 0..steps {
        let t = i as f64 * dt;
        let ch = at(t + 0.5 * dt)?;
        let c1 = at(t + dt)?;
        let k1 = moment_rhs(&m, &c0, potential)?;
        let k2 = moment_rhs(&m.axpy(0.5 * dt, &k1), &ch, potential)?;
        let k3 = moment_rhs(&m.axpy(0.5 * dt, &k2), &ch, potential)?;
        let k4 = moment_rhs(&m.axpy(dt, &k3), &c1, potential)?;
        m = m.axpy(dt / 6.0, &k1).axpy(dt / 3.0, &k2).axpy(dt / 3.0, &k3).axpy(dt / 6.0, &k4);
        out.push((t + dt, m));
        c0 = c1;
    }
    Ok(out)
}

/// Fixed point of the moment equations with the `t → ∞` coefficients.
pub fn steady_moments(gamma_s: f64, beta_s: f64, potential: &PotentialModel) -> Result<Moments> {
    let (w2, _) = harmonic_params(potential)?;
    if gamma_s == 0.0 {
        return Err(Error::Unsupported("no unique steady state without dissipation".into()));
    }
    let s = coefficient_steady(gamma_s, beta_s, &ThermalParams::new(beta_s)?)?;
    let c = StageCoefficients::from_sample(&s, gamma_s, 0.0, 0.0);
    let fr = 2.0 * gamma_s * c.big_gamma;
    let qp_cov = -c.r_m * c.r_qq;
    let p_var = (2.0 * gamma_s * gamma_s * c.r_pp - 2.0 * w2 * qp_cov) / (2.0 * fr);
    let q_var = (p_var / c.r_m - fr * qp_cov + gamma_s * c.r_pq) / w2;
    Ok(Moments { q: potential.shift(), p: 0.0, q_var, p_var, qp_cov })
}
