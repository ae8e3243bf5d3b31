//! Right-hand side of the master equation in scaled units:
//! `−i[H,ρ] − iγΓ[q,{p,ρ}] + γR_pq[q,[p,ρ]] − γ²R_pp[q,[q,ρ]] − R_qq[p,[p,ρ]]`.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::banded::Banded;
use super::basis::Operators;
use super::hamiltonian::{HamiltonianParts, PotentialModel};
use crate::coefficients::CoefficientSample;
use crate::error::{Error, Result};

type C = Complex64;
const I: C = C { re: 0.0, im: 1.0 };

/// Everything time-dependent in the generator at one instant.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct StageCoefficients {
    pub t_s: f64,
    pub gamma_s: f64,
    pub r_m: f64,
    /// `γ_s e^{-t_s}`, the remaining counterterm.
    pub counterterm: f64,
    /// `2 γ_c q0 e^{-t_s}`.
    pub drive: f64,
    pub big_gamma: f64,
    pub r_pq: f64,
    pub r_qq: f64,
    pub r_pp: f64,
}

impl StageCoefficients {
    pub fn from_sample(c: &CoefficientSample, gamma_s: f64, q0: f64, cross_gamma_s: f64) -> Self {
        let decay = (-c.t_s).exp();
        Self {
            t_s: c.t_s,
            gamma_s,
            r_m: c.r_m,
            counterterm: gamma_s * decay,
            drive: crate::spectral::drive_eta_c(c.t_s, q0, cross_gamma_s),
            big_gamma: c.gamma,
            r_pq: c.r_pq,
            r_qq: c.r_qq,
            r_pp: c.r_pp,
        }
    }

    /// Closed dynamics under `p²/2 + V_e`.
    pub fn closed(t_s: f64) -> Self {
        Self { t_s, r_m: 1.0, ..Default::default() }
    }
}

/// Scratch buffers for [`Liouvillian::apply`].
#[derive(Debug, Clone)]
struct Scratch {
    pr: Vec<C>,
    rp: Vec<C>,
    y: Vec<C>,
}

#[derive(Debug, Clone)]
pub struct Liouvillian {
    parts: HamiltonianParts,
    q: Banded,
    p: Banded,
    n: usize,
    scratch: Scratch,
}

impl Liouvillian {
    pub fn new(ops: &Operators, potential: &PotentialModel) -> Self {
        let n = ops.dim();
        let zero = vec![C::new(0.0, 0.0); n * n];
        Self {
            parts: HamiltonianParts::new(ops, potential),
            q: ops.q.clone(),
            p: ops.p.clone(),
            n,
            scratch: Scratch { pr: zero.clone(), rp: zero.clone(), y: zero },
        }
    }

    pub fn parts(&self) -> &HamiltonianParts {
        &self.parts
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Writes `dρ/dt_s` into `out` (overwritten).
    pub fn apply(&mut self, rho: &[C], c: &StageCoefficients, out: &mut [C]) -> Result<()> {
        let nn = self.n * self.n;
        if rho.len() != nn || out.len() != nn {
            return Err(Error::DimensionMismatch { expected: nn, found: rho.len().min(out.len()) });
        }
        if !(c.r_m > 0.0) {
            return Err(Error::EffectiveMass { t_s: c.t_s, r_m: c.r_m, critical_gamma_s: f64::NAN });
        }
        out.iter_mut().for_each(|z| *z = C::new(0.0, 0.0));
        let h = self.parts.assemble(c.r_m, c.counterterm, c.drive);
        h.commutator_acc(rho, out, -I);
        if c.gamma_s == 0.0 {
            return Ok(());
        }

        let Scratch { pr, rp, y } = &mut self.scratch;
        pr.iter_mut().for_each(|z| *z = C::new(0.0, 0.0));
        rp.iter_mut().for_each(|z| *z = C::new(0.0, 0.0));
        self.p.left_acc(rho, pr, C::new(1.0, 0.0));
        self.p.right_acc(rho, rp, C::new(1.0, 0.0));

        // y = −iγΓ{p,ρ} + γR_pq[p,ρ] − γ²R_pp[q,ρ]
        let g = c.gamma_s;
        let w_anti = -I * (g * c.big_gamma);
        let w_comm = C::new(g * c.r_pq, 0.0);
        for k in 0..nn {
            y[k] = w_anti * (pr[k] + rp[k]) + w_comm * (pr[k] - rp[k]);
        }
        self.q.commutator_acc(rho, y, C::new(-g * g * c.r_pp, 0.0));
        self.q.commutator_acc(y, out, C::new(1.0, 0.0));

        // −R_qq[p,[p,ρ]], reusing pr as [p,ρ]
        for k in 0..nn {
            pr[k] -= rp[k];
        }
        self.p.commutator_acc(pr, out, C::new(-c.r_qq, 0.0));
        Ok(())
    }
}

/// One-shot evaluation of the generator (allocates; use [`Liouvillian`] in loops).
pub fn liouvillian_apply(
    rho: &DMatrix<C>,
    c: &StageCoefficients,
    ops: &Operators,
    potential: &PotentialModel,
) -> Result<DMatrix<C>> {
    if rho.nrows() != ops.dim() || rho.ncols() != ops.dim() {
        return Err(Error::DimensionMismatch { expected: ops.dim(), found: rho.nrows() });
    }
    let mut l = Liouvillian::new(ops, potential);
    let mut out = DMatrix::zeros(ops.dim(), ops.dim());
    l.apply(rho.as_slice(), c, out.as_mut_slice())?;
    Ok(out)
}
