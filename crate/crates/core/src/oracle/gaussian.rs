//! Gaussian states of quadratic Hamiltonians `H = ½|p|² + ½(x − x₀)ᵀK(x − x₀)`
//! with unit masses. Phase-space vectors are ordered positions then momenta.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Quadratic Hamiltonian given by its Hessian and its minimum.
#[derive(Debug, Clone, PartialEq)]
pub struct HarmonicModel {
    pub hessian: DMatrix<f64>,
    pub minimum: DVector<f64>,
}

impl HarmonicModel {
    pub fn new(hessian: DMatrix<f64>, minimum: DVector<f64>) -> Result<Self> {
        let n = hessian.nrows();
        if hessian.ncols() != n || minimum.len() != n {
            return Err(Error::DimensionMismatch { expected: n, found: minimum.len() });
        }
        if (&hessian - hessian.transpose()).amax() > 1e-12 * hessian.amax().max(1.0) {
            return Err(Error::invalid("hessian", "must be symmetric"));
        }
        Ok(Self { hessian, minimum })
    }

    pub fn dof(&self) -> usize {
        self.minimum.len()
    }

    /// Classical energy of a phase-space point.
    pub fn energy(&self, z: &DVector<f64>) -> f64 {
        let n = self.dof();
        let y = z.rows(0, n) - &self.minimum;
        let p = z.rows(n, n);
        0.5 * p.dot(&p) + 0.5 * y.dot(&(&self.hessian * &y))
    }
}

/// Eigen-decomposition `K = U diag(ν²) Uᵀ` of a positive-definite Hessian.
#[derive(Debug, Clone)]
pub struct NormalModes {
    pub u: DMatrix<f64>,
    pub nu: DVector<f64>,
}

impl NormalModes {
    pub fn new(model: &HarmonicModel) -> Result<Self> {
        let eig = SymmetricEigen::new(model.hessian.clone());
        let min = eig.eigenvalues.min();
        if !(min > 0.0) {
            return Err(Error::NotPositiveDefinite(format!("Hessian has eigenvalue {min:.6e}")));
        }
        Ok(Self { u: eig.eigenvectors, nu: eig.eigenvalues.map(f64::sqrt) })
    }
}

/// Mean and symmetrized covariance `½⟨{Δz_i, Δz_j}⟩`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianState {
    pub mean: DVector<f64>,
    pub cov: DMatrix<f64>,
}

impl GaussianState {
    pub fn dof(&self) -> usize {
        self.mean.len() / 2
    }

    /// Symplectic eigenvalues in ascending order; all are `>= ½` for a physical state.
    pub fn symplectic_eigenvalues(&self) -> Result<Vec<f64>> {
        let n = self.dof();
        let chol = self.cov.clone().cholesky().ok_or_else(|| Error::NotPositiveDefinite("covariance".into()))?;
        let l = chol.l();
        // M = Lᵀ J L is antisymmetric with eigenvalues ±iν_k
        let mut jl = DMatrix::zeros(2 * n, 2 * n);
        jl.rows_mut(0, n).copy_from(&l.rows(n, n));
        jl.rows_mut(n, n).copy_from(&(-l.rows(0, n)));
        let m = l.transpose() * jl;
        let mut ev: Vec<f64> =
            SymmetricEigen::new(m.transpose() * &m).eigenvalues.iter().map(|v| v.max(0.0).sqrt()).collect();
        ev.sort_by(f64::total_cmp);
        Ok(ev.chunks(2).map(|p| 0.5 * (p[0] + p[1])).collect())
    }

    /// Checks symmetry, positive definiteness and the uncertainty principle.
    pub fn validate(&self) -> Result<()> {
        let d = self.mean.len();
        if !d.is_multiple_of(2) || self.cov.nrows() != d || self.cov.ncols() != d {
            return Err(Error::DimensionMismatch { expected: d, found: self.cov.nrows() });
        }
        if (&self.cov - self.cov.transpose()).amax() > 1e-10 * self.cov.amax().max(1.0) {
            return Err(Error::invalid("cov", "must be symmetric"));
        }
        let low = self.symplectic_eigenvalues()?[0];
        if low < 0.5 - 1e-9 {
            return Err(Error::invalid("cov", format!("violates uncertainty: symplectic eigenvalue {low:.6e} < 1/2")));
        }
        Ok(())
    }
}

fn coth(x: f64) -> f64 {
    if x > 20.0 {
        1.0
    } else {
        1.0 / x.tanh()
    }
}

/// Canonical state `e^{−βH}/Z` of a quadratic Hamiltonian.
pub fn thermal_state(model: &HarmonicModel, beta_s: f64) -> Result<GaussianState> {
    if !(beta_s > 0.0) {
        return Err(Error::invalid("beta_s", format!("must be positive, got {beta_s}")));
    }
    let modes = NormalModes::new(model)?;
    let n = model.dof();
    let xq = modes.nu.map(|v| coth(0.5 * beta_s * v) / (2.0 * v));
    let xp = modes.nu.map(|v| 0.5 * v * coth(0.5 * beta_s * v));
    let u = &modes.u;
    let mut cov = DMatrix::zeros(2 * n, 2 * n);
    cov.view_mut((0, 0), (n, n)).copy_from(&(u * DMatrix::from_diagonal(&xq) * u.transpose()));
    cov.view_mut((n, n), (n, n)).copy_from(&(u * DMatrix::from_diagonal(&xp) * u.transpose()));
    let mut mean = DVector::zeros(2 * n);
    mean.rows_mut(0, n).copy_from(&model.minimum);
    Ok(GaussianState { mean, cov })
}

/// Exact phase-space flow `S(t)` of a quadratic Hamiltonian.
#[derive(Debug, Clone)]
pub struct Flow {
    modes: NormalModes,
    minimum: DVector<f64>,
}

impl Flow {
    pub fn new(model: &HarmonicModel) -> Result<Self> {
        Ok(Self { modes: NormalModes::new(model)?, minimum: model.minimum.clone() })
    }

    pub fn modes(&self) -> &NormalModes {
        &self.modes
    }

    pub fn matrix(&self, t_s: f64) -> DMatrix<f64> {
        let n = self.minimum.len();
        let u = &self.modes.u;
        let nu = &self.modes.nu;
        let c = DMatrix::from_diagonal(&nu.map(|v| (v * t_s).cos()));
        let s_over = DMatrix::from_diagonal(&nu.map(|v| (v * t_s).sin() / v));
        let s_times = DMatrix::from_diagonal(&nu.map(|v| -(v * t_s).sin() * v));
        let ut = u.transpose();
        let mut s = DMatrix::zeros(2 * n, 2 * n);
        let cc = u * c * &ut;
        s.view_mut((0, 0), (n, n)).copy_from(&cc);
        s.view_mut((0, n), (n, n)).copy_from(&(u * s_over * &ut));
        s.view_mut((n, 0), (n, n)).copy_from(&(u * s_times * &ut));
        s.view_mut((n, n), (n, n)).copy_from(&cc);
        s
    }

    pub fn evolve(&self, state: &GaussianState, t_s: f64) -> Result<GaussianState> {
        let n = self.minimum.len();
        if state.mean.len() != 2 * n {
            return Err(Error::DimensionMismatch { expected: 2 * n, found: state.mean.len() });
        }
        let s = self.matrix(t_s);
        let mut shifted = state.mean.clone();
        {
            let mut head = shifted.rows_mut(0, n);
            head -= &self.minimum;
        }
        let mut mean = &s * shifted;
        {
            let mut head = mean.rows_mut(0, n);
            head += &self.minimum;
        }
        let cov = &s * &state.cov * s.transpose();
        Ok(GaussianState { mean, cov })
    }
}

pub fn evolve_gaussian(state: &GaussianState, model: &HarmonicModel, t_s: f64) -> Result<GaussianState> {
    if !(t_s >= 0.0) {
        return Err(Error::invalid("t_s", format!("must be >= 0, got {t_s}")));
    }
    Flow::new(model)?.evolve(state, t_s)
}

/// System-mode (index 0) moments; second moments are raw.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ReducedMoments {
    pub q_mean: f64,
    pub p_mean: f64,
    pub q2: f64,
    pub p2: f64,
    pub qp_sym: f64,
}

impl ReducedMoments {
    pub fn q_var(&self) -> f64 {
        self.q2 - self.q_mean * self.q_mean
    }

    pub fn p_var(&self) -> f64 {
        self.p2 - self.p_mean * self.p_mean
    }

    pub fn qp_cov(&self) -> f64 {
        self.qp_sym - self.q_mean * self.p_mean
    }

    fn from_parts(q: f64, p: f64, vq: f64, vp: f64, c: f64) -> Self {
        Self { q_mean: q, p_mean: p, q2: vq + q * q, p2: vp + p * p, qp_sym: c + q * p }
    }
}

pub fn reduced_moments(state: &GaussianState) -> ReducedMoments {
    let n = state.dof();
    let (q, p) = (state.mean[0], state.mean[n]);
    ReducedMoments::from_parts(q, p, state.cov[(0, 0)], state.cov[(n, n)], state.cov[(0, n)])
}

/// Reduced moments of an evolving state at arbitrary times in `O(n²)` each,
/// by projecting the initial state onto the normal modes once.
#[derive(Debug, Clone)]
pub struct SystemTrajectory {
    u0: DVector<f64>,
    nu: DVector<f64>,
    offset: f64,
    mean: DVector<f64>,
    cov: DMatrix<f64>,
}

impl SystemTrajectory {
    pub fn new(flow: &Flow, state: &GaussianState) -> Result<Self> {
        let n = flow.minimum.len();
        if state.mean.len() != 2 * n {
            return Err(Error::DimensionMismatch { expected: 2 * n, found: state.mean.len() });
        }
        let u = &flow.modes.u;
        let ut = u.transpose();
        let mut w = DMatrix::zeros(2 * n, 2 * n);
        w.view_mut((0, 0), (n, n)).copy_from(&ut);
        w.view_mut((n, n), (n, n)).copy_from(&ut);
        let mut shifted = state.mean.clone();
        {
            let mut head = shifted.rows_mut(0, n);
            head -= &flow.minimum;
        }
        Ok(Self {
            u0: u.row(0).transpose(),
            nu: flow.modes.nu.clone(),
            offset: flow.minimum[0],
            mean: &w * shifted,
            cov: &w * &state.cov * w.transpose(),
        })
    }

    pub fn at(&self, t_s: f64) -> ReducedMoments {
        let n = self.nu.len();
        let mut a = DVector::zeros(2 * n);
        let mut b = DVector::zeros(2 * n);
        for k in 0..n {
            let (s, c) = (self.nu[k] * t_s).sin_cos();
            let u = self.u0[k];
            a[k] = u * c;
            a[n + k] = u * s / self.nu[k];
            b[k] = -u * s * self.nu[k];
            b[n + k] = u * c;
        }
        let ca = &self.cov * &a;
        let cb = &self.cov * &b;
        ReducedMoments::from_parts(
            self.offset + a.dot(&self.mean),
            b.dot(&self.mean),
            a.dot(&ca),
            b.dot(&cb),
            a.dot(&cb),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn oscillator(w: f64, d: f64) -> HarmonicModel {
        HarmonicModel::new(DMatrix::from_element(1, 1, w * w), DVector::from_element(1, d)).unwrap()
    }

    fn coupled() -> HarmonicModel {
        let k = DMatrix::from_row_slice(3, 3, &[2.0, -0.3, -0.2, -0.3, 1.5, 0.1, -0.2, 0.1, 0.8]);
        HarmonicModel::new(k, DVector::from_vec(vec![0.4, -0.1, 0.2])).unwrap()
    }

    #[test]
    fn ground_and_classical_limits() {
        let s = thermal_state(&oscillator(1.0, 0.0), 200.0).unwrap();
        let m = reduced_moments(&s);
        assert!((m.q2 - 0.5).abs() < 1e-15 && (m.p2 - 0.5).abs() < 1e-15);
        let s = thermal_state(&oscillator(1.3, 0.0), 1e-3).unwrap();
        let m = reduced_moments(&s);
        assert!((m.q2 * 1e-3 * 1.69 - 1.0).abs() < 1e-6);
        assert!((s.symplectic_eigenvalues().unwrap()[0] - 0.5 / (0.5e-3 * 1.3f64).tanh()).abs() < 1e-6);
    }

    #[test]
    fn thermal_formula() {
        let (beta, w) = (0.7, 1.4);
        let m = reduced_moments(&thermal_state(&oscillator(w, 0.3), beta).unwrap());
        let c = 1.0 / (0.5 * beta * w).tanh();
        assert!((m.q_var() - c / (2.0 * w)).abs() < 1e-14);
        assert!((m.q_mean - 0.3).abs() < 1e-15 && m.p_mean == 0.0);
    }

    #[test]
    fn rejects_indefinite_hessian() {
        let k = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]);
        let m = HarmonicModel::new(k, DVector::zeros(2)).unwrap();
        assert!(matches!(thermal_state(&m, 1.0), Err(Error::NotPositiveDefinite(_))));
    }

    #[test]
    fn displaced_oscillator_moves_harmonically() {
        let start = thermal_state(&oscillator(1.0, 0.0), 2.0).unwrap();
        let target = oscillator(1.0, 1.0);
        for &t in &[0.0, 0.7, 3.1] {
            let s = evolve_gaussian(&start, &target, t).unwrap();
            assert!((s.mean[0] - (1.0 - t.cos())).abs() < 1e-14);
            assert!((s.cov[(0, 0)] - start.cov[(0, 0)]).abs() < 1e-14);
        }
    }

    #[test]
    fn flow_is_symplectic_and_conserves_invariants() {
        let model = coupled();
        let start =
            thermal_state(&HarmonicModel::new(DMatrix::identity(3, 3), DVector::zeros(3)).unwrap(), 0.8).unwrap();
        let flow = Flow::new(&model).unwrap();
        let s = flow.matrix(2.3);
        let mut j = DMatrix::zeros(6, 6);
        for i in 0..3 {
            j[(i, 3 + i)] = 1.0;
            j[(3 + i, i)] = -1.0;
        }
        assert!((&s * &j * s.transpose() - &j).amax() < 1e-12);
        let end = flow.evolve(&start, 2.3).unwrap();
        assert!((end.cov.determinant() / start.cov.determinant() - 1.0).abs() < 1e-8);
        let (a, b) = (start.symplectic_eigenvalues().unwrap(), end.symplectic_eigenvalues().unwrap());
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-8);
        }
        assert!((model.energy(&start.mean) - model.energy(&end.mean)).abs() < 1e-12);
        assert!(flow.evolve(&start, 0.0).unwrap().cov.relative_eq(&start.cov, 1e-12, 1e-12));
        end.validate().unwrap();
    }

    #[test]
    fn system_trajectory_matches_full_evolution() {
        let model = coupled();
        let start =
            thermal_state(&HarmonicModel::new(DMatrix::identity(3, 3), DVector::zeros(3)).unwrap(), 0.8).unwrap();
        let flow = Flow::new(&model).unwrap();
        let traj = SystemTrajectory::new(&flow, &start).unwrap();
        for &t in &[0.0, 1.0, 5.5] {
            let a = traj.at(t);
            let b = reduced_moments(&flow.evolve(&start, t).unwrap());
            for (x, y) in [(a.q_mean, b.q_mean), (a.p_mean, b.p_mean), (a.q2, b.q2), (a.p2, b.p2), (a.qp_sym, b.qp_sym)]
            {
                assert!((x - y).abs() < 1e-12, "{x} {y}");
            }
        }
    }

    #[test]
    fn uncertainty_violation_is_rejected() {
        let s = GaussianState { mean: DVector::zeros(2), cov: DMatrix::from_diagonal_element(2, 2, 0.3) };
        assert!(s.validate().is_err());
    }
}
