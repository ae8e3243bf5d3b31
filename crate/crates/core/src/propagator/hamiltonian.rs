use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::banded::Banded;
use super::basis::Operators;
use crate::error::{Error, Result};

type C = Complex64;

/// Excited-state potential `V_e(q)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PotentialModel {
    /// `ω_e² (q - d)² / 2`.
    Harmonic { omega_e: f64, shift: f64 },
    /// `ω_e² (q - d)² / 2 + λ (q - d)⁴`.
    Quartic { omega_e: f64, shift: f64, quartic: f64 },
}

impl PotentialModel {
    pub fn harmonic(omega_e: f64, shift: f64) -> Result<Self> {
        Self::Harmonic { omega_e, shift }.validated()
    }

    pub fn validated(self) -> Result<Self> {
        let (w, d) = (self.omega_e(), self.shift());
        if !(w > 0.0) || !w.is_finite() {
            return Err(Error::invalid("omega_e", format!("must be positive, got {w}")));
        }
        if !d.is_finite() {
            return Err(Error::invalid("shift", "must be finite"));
        }
        if let PotentialModel::Quartic { quartic, .. } = self {
            if !(quartic >= 0.0) {
                return Err(Error::invalid("quartic", format!("must be >= 0 for a bounded potential, got {quartic}")));
            }
        }
        Ok(self)
    }

    pub fn omega_e(&self) -> f64 {
        match *self {
            PotentialModel::Harmonic { omega_e, .. } | PotentialModel::Quartic { omega_e, .. } => omega_e,
        }
    }

    pub fn shift(&self) -> f64 {
        match *self {
            PotentialModel::Harmonic { shift, .. } | PotentialModel::Quartic { shift, .. } => shift,
        }
    }

    pub fn is_harmonic(&self) -> bool {
        matches!(self, PotentialModel::Harmonic { .. })
            || matches!(self, PotentialModel::Quartic { quartic, .. } if *quartic == 0.0)
    }

    pub fn value(&self, q: f64) -> f64 {
        let x = q - self.shift();
        let w = self.omega_e();
        let quartic = match *self {
            PotentialModel::Quartic { quartic, .. } => quartic,
            _ => 0.0,
        };
        0.5 * w * w * x * x + quartic * x.powi(4)
    }

    /// `V_e(q)` as a banded matrix.
    pub fn matrix(&self, ops: &Operators) -> Banded {
        let w = self.omega_e();
        let d = self.shift();
        let quad = ops.shifted_power(d, 2);
        match *self {
            PotentialModel::Quartic { quartic, .. } if quartic != 0.0 => {
                let q4 = ops.shifted_power(d, 4);
                Banded::combine(&[(C::new(0.5 * w * w, 0.0), &quad), (C::new(quartic, 0.0), &q4)])
            }
            _ => Banded::combine(&[(C::new(0.5 * w * w, 0.0), &quad)]),
        }
    }
}

/// Time-independent pieces of `H_eff(t)`, combined per stage with scalar weights.
#[derive(Debug, Clone)]
pub struct HamiltonianParts {
    pub potential: Banded,
    pub kinetic: Banded,
    pub q2: Banded,
    pub q: Banded,
    /// `p²/2 + V_e(q)`, the energy observable.
    pub energy: Banded,
}

impl HamiltonianParts {
    pub fn new(ops: &Operators, potential: &PotentialModel) -> Self {
        let v = potential.matrix(ops);
        let energy = Banded::combine(&[(C::new(0.5, 0.0), &ops.p2), (C::new(1.0, 0.0), &v)]);
        Self { potential: v, kinetic: ops.p2.clone(), q2: ops.q2.clone(), q: ops.q.clone(), energy }
    }

    /// `p²/(2 r_m) + V_e(q) + γ_s e^{-t} q² - f q` with the drive force `f`.
    pub fn assemble(&self, r_m: f64, counterterm: f64, drive: f64) -> Banded {
        Banded::combine(&[
            (C::new(0.5 / r_m, 0.0), &self.kinetic),
            (C::new(1.0, 0.0), &self.potential),
            (C::new(counterterm, 0.0), &self.q2),
            (C::new(-drive, 0.0), &self.q),
        ])
    }
}

/// `H_eff(t_s) = p²/(2 r_m) + V_e(q) + γ_s e^{-t_s} q² - 2 γ_c q0 e^{-t_s} q`.
pub fn effective_hamiltonian(
    ops: &Operators,
    potential: &PotentialModel,
    t_s: f64,
    gamma_s: f64,
    r_m: f64,
    q0: f64,
    cross_gamma_s: f64,
) -> Result<Banded> {
    if !(r_m > 0.0) {
        return Err(Error::EffectiveMass { t_s, r_m, critical_gamma_s: f64::NAN });
    }
    let decay = (-t_s).exp();
    let drive = crate::spectral::drive_eta_c(t_s, q0, cross_gamma_s);
    Ok(HamiltonianParts::new(ops, potential).assemble(r_m, gamma_s * decay, drive))
}
