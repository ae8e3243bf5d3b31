//! Density matrices and initial states.

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::basis::{ladder_qp, BasisSpec};
use crate::error::{Error, Result};

type C = Complex64;

/// Largest acceptable probability lost to basis truncation when preparing a state.
pub const LEAKAGE_LIMIT: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    m: DMatrix<C>,
}

impl DensityMatrix {
    /// Checks hermiticity (1e-12) and unit trace (1e-10).
    pub fn new(m: DMatrix<C>) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::DimensionMismatch { expected: m.nrows(), found: m.ncols() });
        }
        let rho = Self { m };
        let herm = rho.hermiticity_error();
        if herm > 1e-12 {
            return Err(Error::invalid("rho", format!("not Hermitian (max |rho - rho^+| = {herm:.3e})")));
        }
        let tr = rho.trace();
        if (tr - 1.0).abs() > 1e-10 {
            return Err(Error::invalid("rho", format!("trace {tr} differs from 1")));
        }
        Ok(rho)
    }

    pub(crate) fn from_raw(m: DMatrix<C>) -> Self {
        Self { m }
    }

    /// `|ψ><ψ|` for a normalized vector.
    pub fn pure(psi: &[C]) -> Self {
        let v = nalgebra::DVector::from_column_slice(psi);
        Self { m: &v * v.adjoint() }
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self { m: DMatrix::identity(dim, dim) * C::new(1.0 / dim as f64, 0.0) }
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<C> {
        &self.m
    }

    pub fn into_matrix(self) -> DMatrix<C> {
        self.m
    }

    pub fn trace(&self) -> f64 {
        self.m.trace().re
    }

    pub fn hermiticity_error(&self) -> f64 {
        let n = self.dim();
        let mut worst: f64 = 0.0;
        for j in 0..n {
            for i in 0..=j {
                worst = worst.max((self.m[(i, j)] - self.m[(j, i)].conj()).norm());
            }
        }
        worst
    }

    pub fn purity(&self) -> f64 {
        // Tr ρ² = Σ ρ_ij ρ_ji
        let n = self.dim();
        let mut acc = 0.0;
        for j in 0..n {
            for i in 0..n {
                acc += (self.m[(i, j)] * self.m[(j, i)]).re;
            }
        }
        acc
    }

    /// Eigenvalues of the Hermitian part, ascending.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let h = (&self.m + self.m.adjoint()) * C::new(0.5, 0.0);
        let mut ev: Vec<f64> = h.symmetric_eigenvalues().iter().cloned().collect();
        ev.sort_by(f64::total_cmp);
        ev
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues()[0]
    }

    /// `ρ ← (ρ + ρ†)/2`.
    pub fn symmetrize(&mut self) {
        self.m = (&self.m + self.m.adjoint()) * C::new(0.5, 0.0);
    }
}

/// A prepared state and the population that did not fit into the basis.
#[derive(Debug, Clone)]
pub struct PreparedState {
    pub rho: DensityMatrix,
    pub leakage: f64,
}

fn check_leakage(leakage: f64) -> Result<()> {
    if leakage > LEAKAGE_LIMIT {
        return Err(Error::BasisTooSmall { leakage, limit: LEAKAGE_LIMIT });
    }
    Ok(())
}

/// Thermal state of `p²/2 + ω_g² q²/2` at inverse temperature `β_s`.
pub fn initial_state_thermal(beta_s: f64, omega_g: f64, basis: &BasisSpec) -> Result<PreparedState> {
    if !(beta_s > 0.0) {
        return Err(Error::invalid("beta_s", format!("must be positive, got {beta_s}")));
    }
    if !(omega_g > 0.0) || !omega_g.is_finite() {
        return Err(Error::invalid("omega_g", format!("must be positive, got {omega_g}")));
    }
    if (omega_g - basis.omega_ref).abs() <= 1e-14 * basis.omega_ref {
        let n = basis.dim;
        let x = (-beta_s * omega_g).exp();
        let leakage = x.powi(n as i32);
        check_leakage(leakage)?;
        let mut m = DMatrix::zeros(n, n);
        let mut w = 1.0;
        let mut total = 0.0;
        for k in 0..n {
            m[(k, k)] = C::new(w, 0.0);
            total += w;
            w *= x;
        }
        m /= C::new(total, 0.0);
        return Ok(PreparedState { rho: DensityMatrix { m }, leakage });
    }
    let c = 1.0 / (0.5 * beta_s * omega_g).tanh();
    gaussian_state([0.0, 0.0], [[c / (2.0 * omega_g), 0.0], [0.0, 0.5 * omega_g * c]], basis)
}

/// Gaussian state with mean `(⟨q⟩, ⟨p⟩)` and symmetric covariance
/// `[[σ_qq, σ_qp], [σ_qp, σ_pp]]`, built as the thermal state of the quadratic
/// Hamiltonian `½ (x - μ)ᵀ ν Σ⁻¹ (x - μ)` at `β = 2 acoth(2ν)`.
pub fn gaussian_state(mean: [f64; 2], cov: [[f64; 2]; 2], basis: &BasisSpec) -> Result<PreparedState> {
    let (sqq, spp, sqp) = (cov[0][0], cov[1][1], cov[0][1]);
    if (cov[0][1] - cov[1][0]).abs() > 1e-12 * (sqq.abs() + spp.abs()) {
        return Err(Error::NotPositiveDefinite("covariance is not symmetric".into()));
    }
    let det = sqq * spp - sqp * sqp;
    if !(sqq > 0.0) || !(det > 0.0) {
        return Err(Error::NotPositiveDefinite(format!("covariance has det {det}, sigma_qq {sqq}")));
    }
    let nu = det.sqrt();
    if nu < 0.5 * (1.0 - 1e-10) {
        return Err(Error::NotPositiveDefinite(format!(
            "symplectic eigenvalue {nu} violates the uncertainty bound 1/2"
        )));
    }
    let n = basis.dim;
    let m = (2 * n).max(n + 40);
    let (q, p) = ladder_qp(m + 4, basis.omega_ref);
    let id = DMatrix::<C>::identity(m + 4, m + 4);
    let qs = &q - &id * C::new(mean[0], 0.0);
    let ps = &p - &id * C::new(mean[1], 0.0);
    // ν Σ⁻¹ = (ν/det) [[σ_pp, -σ_qp], [-σ_qp, σ_qq]]
    let k = nu / det;
    let h_full =
        (&qs * &qs * C::new(spp, 0.0) + (&qs * &ps + &ps * &qs) * C::new(-sqp, 0.0) + &ps * &ps * C::new(sqq, 0.0))
            * C::new(0.5 * k, 0.0);
    let h = h_full.view((0, 0), (m, m)).into_owned();
    let h = (&h + h.adjoint()) * C::new(0.5, 0.0);
    let eig = h.symmetric_eigen();
    let e_min = eig.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
    let pure = nu <= 0.5 * (1.0 + 1e-10);
    let beta = if pure { f64::INFINITY } else { 2.0 * (2.0 * nu).recip().atanh() };
    let weights: Vec<f64> = eig
        .eigenvalues
        .iter()
        .map(|&e| {
            if pure {
                if e == e_min {
                    1.0
                } else {
                    0.0
                }
            } else {
                (-beta * (e - e_min)).exp()
            }
        })
        .collect();
    let z: f64 = weights.iter().sum();
    let mut rho = DMatrix::<C>::zeros(n, n);
    for (kx, w) in weights.iter().enumerate() {
        let w = w / z;
        if w < 1e-300 {
            continue;
        }
        let v = eig.eigenvectors.column(kx);
        for j in 0..n {
            let vj = v[j].conj() * w;
            for i in 0..n {
                rho[(i, j)] += v[i] * vj;
            }
        }
    }
    let kept = rho.trace().re;
    let leakage = (1.0 - kept).max(0.0);
    check_leakage(leakage)?;
    rho /= C::new(kept, 0.0);
    let mut rho = DensityMatrix { m: rho };
    rho.symmetrize();
    Ok(PreparedState { rho, leakage })
}

/// Coherent state centred at `(q0, p0)` for the basis frequency.
pub fn coherent_state(q0: f64, p0: f64, basis: &BasisSpec) -> Result<PreparedState> {
    let w = basis.omega_ref;
    let alpha = C::new((0.5 * w).sqrt() * q0, p0 / (2.0 * w).sqrt());
    let mut c = Vec::with_capacity(basis.dim);
    let mut term = C::new((-0.5 * alpha.norm_sqr()).exp(), 0.0);
    for k in 0..basis.dim {
        c.push(term);
        term *= alpha / ((k + 1) as f64).sqrt();
    }
    let kept: f64 = c.iter().map(|z| z.norm_sqr()).sum();
    let leakage = (1.0 - kept).max(0.0);
    check_leakage(leakage)?;
    let s = kept.sqrt();
    c.iter_mut().for_each(|z| *z /= s);
    Ok(PreparedState { rho: DensityMatrix::pure(&c), leakage })
}

/// `|n><n|`.
pub fn number_state(n: usize, basis: &BasisSpec) -> Result<DensityMatrix> {
    if n >= basis.dim {
        return Err(Error::invalid("n", format!("level {n} outside basis of size {}", basis.dim)));
    }
    let mut psi = vec![C::new(0.0, 0.0); basis.dim];
    psi[n] = C::new(1.0, 0.0);
    Ok(DensityMatrix::pure(&psi))
}
