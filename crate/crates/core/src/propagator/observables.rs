use serde::{Deserialize, Serialize};

use super::banded::Banded;
use super::basis::Operators;
use super::state::DensityMatrix;

/// Expectation values of one density matrix. Second moments are raw
/// (uncentred); see the accessors for variances.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Observables {
    pub t_s: f64,
    pub trace: f64,
    pub q_mean: f64,
    pub p_mean: f64,
    pub q2: f64,
    pub p2: f64,
    /// `⟨{q, p}⟩/2`.
    pub qp_sym: f64,
    pub purity: f64,
    pub min_eig: Option<f64>,
    pub energy: Option<f64>,
    pub hermiticity: f64,
}

impl Observables {
    pub fn q_var(&self) -> f64 {
        self.q2 - self.q_mean * self.q_mean
    }

    pub fn p_var(&self) -> f64 {
        self.p2 - self.p_mean * self.p_mean
    }

    pub fn qp_cov(&self) -> f64 {
        self.qp_sym - self.q_mean * self.p_mean
    }
}

/// Measures `rho`; `energy` is the operator `p²/2 + V_e` when available.
pub fn observables(rho: &DensityMatrix, ops: &Operators, energy: Option<&Banded>, with_min_eig: bool) -> Observables {
    let x = rho.matrix().as_slice();
    let ev = |b: &Banded| b.trace_product(x).re;
    Observables {
        t_s: 0.0,
        trace: rho.trace(),
        q_mean: ev(&ops.q),
        p_mean: ev(&ops.p),
        q2: ev(&ops.q2),
        p2: ev(&ops.p2),
        qp_sym: ev(&ops.qp_sym),
        purity: rho.purity(),
        min_eig: with_min_eig.then(|| rho.min_eigenvalue()),
        energy: energy.map(ev),
        hermiticity: rho.hermiticity_error(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::propagator::basis::BasisSpec;
    use crate::propagator::state::number_state;

    #[test]
    fn ground_state_observables() {
        let b = BasisSpec::new(10, 2.0).unwrap();
        let ops = Operators::new(b);
        let o = observables(&number_state(0, &b).unwrap(), &ops, None, true);
        assert_eq!((o.q_mean, o.p_mean), (0.0, 0.0));
        assert!((o.q2 - 0.25).abs() < 1e-15);
        assert!((o.purity - 1.0).abs() < 1e-15);
        assert!(o.min_eig.unwrap().abs() < 1e-12);
        assert!(o.energy.is_none());
    }

    #[test]
    fn mixed_state_purity() {
        let ops = Operators::new(BasisSpec::new(6, 1.0).unwrap());
        let o = observables(&DensityMatrix::maximally_mixed(6), &ops, None, false);
        assert!((o.purity - 1.0 / 6.0).abs() < 1e-15);
        assert!(o.min_eig.is_none());
    }
}
