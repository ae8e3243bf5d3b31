//! Truncated harmonic-oscillator basis and the position/momentum operators.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::banded::Banded;
use crate::error::{Error, Result};

type C = Complex64;

/// Extra levels used when forming operator products so that every kept
/// matrix element equals its infinite-basis value.
const PAD: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BasisSpec {
    pub dim: usize,
    pub omega_ref: f64,
}

impl BasisSpec {
    pub fn new(dim: usize, omega_ref: f64) -> Result<Self> {
        if dim < 2 {
            return Err(Error::invalid("dim", format!("basis needs at least 2 states, got {dim}")));
        }
        if !(omega_ref > 0.0) || !omega_ref.is_finite() {
            return Err(Error::invalid("omega_ref", format!("must be positive, got {omega_ref}")));
        }
        Ok(Self { dim, omega_ref })
    }
}

/// `q` and `p` in an `m`-level basis.
pub(crate) fn ladder_qp(m: usize, omega: f64) -> (DMatrix<C>, DMatrix<C>) {
    let mut q = DMatrix::zeros(m, m);
    let mut p = DMatrix::zeros(m, m);
    let sq = 1.0 / (2.0 * omega).sqrt();
    let sp = (0.5 * omega).sqrt();
    for n in 1..m {
        let a = (n as f64).sqrt();
        // a|n> = √n |n-1>
        q[(n - 1, n)] = C::new(sq * a, 0.0);
        q[(n, n - 1)] = C::new(sq * a, 0.0);
        p[(n - 1, n)] = C::new(0.0, -sp * a);
        p[(n, n - 1)] = C::new(0.0, sp * a);
    }
    (q, p)
}

/// Operators needed by the propagator, all `dim × dim`.
#[derive(Debug, Clone)]
pub struct Operators {
    pub basis: BasisSpec,
    pub q: Banded,
    pub p: Banded,
    /// Untruncated-product matrix elements of `q²`, `p²` and `(qp + pq)/2`.
    pub q2: Banded,
    pub p2: Banded,
    pub qp_sym: Banded,
    q_ext: DMatrix<C>,
}

impl Operators {
    pub fn new(basis: BasisSpec) -> Self {
        let n = basis.dim;
        let (q_ext, p_ext) = ladder_qp(n + PAD, basis.omega_ref);
        let crop = |m: DMatrix<C>| Banded::from_dense(&m.view((0, 0), (n, n)).into_owned(), 1e-300);
        let q2 = crop(&q_ext * &q_ext);
        let p2 = crop(&p_ext * &p_ext);
        let qp_sym = crop((&q_ext * &p_ext + &p_ext * &q_ext) * C::new(0.5, 0.0));
        let q = crop(q_ext.clone());
        let p = crop(p_ext);
        Self { basis, q, p, q2, p2, qp_sym, q_ext }
    }

    pub fn dim(&self) -> usize {
        self.basis.dim
    }

    /// `(q - d)^k` with exact elements, for `k <= 4`.
    pub fn shifted_power(&self, d: f64, k: u32) -> Banded {
        assert!(k as usize <= PAD);
        let n = self.dim();
        let m = self.q_ext.nrows();
        let shifted = &self.q_ext - DMatrix::<C>::identity(m, m) * C::new(d, 0.0);
        let mut acc = DMatrix::<C>::identity(m, m);
        for _ in 0..k {
            acc = &acc * &shifted;
        }
        Banded::from_dense(&acc.view((0, 0), (n, n)).into_owned(), 1e-300)
    }
}

/// `(q, p)` as dense `dim × dim` matrices (plain truncation of the ladder form).
pub fn build_operators(basis: &BasisSpec) -> (DMatrix<C>, DMatrix<C>) {
    ladder_qp(basis.dim, basis.omega_ref)
}

/// Oscillator eigenfunctions `ψ_0..ψ_{n-1}` at `x` for frequency `omega`.
pub fn hermite_functions(n: usize, omega: f64, x: f64, out: &mut [f64]) {
    let xi = omega.sqrt() * x;
    let norm = (omega / std::f64::consts::PI).powf(0.25);
    out[0] = norm * (-0.5 * xi * xi).exp();
    if n > 1 {
        out[1] = std::f64::consts::SQRT_2 * xi * out[0];
    }
    for k in 1..n.saturating_sub(1) {
        let kf = k as f64;
        out[k + 1] = ((2.0 / (kf + 1.0)).sqrt() * xi * out[k]) - (kf / (kf + 1.0)).sqrt() * out[k - 1];
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_level_matrix_element() {
        let (q, p) = build_operators(&BasisSpec::new(2, 1.0).unwrap());
        assert!((q[(0, 1)].re - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-15);
        assert!((p[(1, 0)].im - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-15);
    }

    #[test]
    fn canonical_commutator_in_interior() {
        let b = BasisSpec::new(12, 1.7).unwrap();
        let (q, p) = build_operators(&b);
        let comm = &q * &p - &p * &q;
        for k in 0..11 {
            for l in 0..11 {
                let expect = if k == l { C::new(0.0, 1.0) } else { C::new(0.0, 0.0) };
                assert!((comm[(k, l)] - expect).norm() < 1e-12);
            }
        }
        assert!((&q - q.adjoint()).norm() < 1e-15 && q.iter().all(|z| z.im == 0.0));
        assert!((&p + p.transpose()).norm() < 1e-15 && p.iter().all(|z| z.re == 0.0));
    }

    #[test]
    fn exact_squares() {
        let b = BasisSpec::new(6, 2.0).unwrap();
        let ops = Operators::new(b);
        let q2 = ops.q2.to_dense();
        assert!((q2[(0, 0)].re - 1.0 / 4.0).abs() < 1e-15);
        // last diagonal element keeps its infinite-basis value (2n+1)/(2ω)
        assert!((q2[(5, 5)].re - 11.0 / 4.0).abs() < 1e-14);
        let p2 = ops.p2.to_dense();
        assert!((p2[(5, 5)].re - 11.0).abs() < 1e-14);
        let q4 = ops.shifted_power(0.0, 4).to_dense();
        let q2sq = &q2 * &q2;
        assert!((q4[(0, 0)] - q2sq[(0, 0)]).norm() < 1e-14);
    }

    #[test]
    fn hermite_functions_are_orthonormal() {
        let n = 10;
        let omega = 1.3;
        let mut psi = vec![0.0; n];
        let mut gram = DMatrix::<f64>::zeros(n, n);
        let h = 0.01;
        for i in -1500..=1500 {
            let x = i as f64 * h;
            hermite_functions(n, omega, x, &mut psi);
            for a in 0..n {
                for b in 0..n {
                    gram[(a, b)] += h * psi[a] * psi[b];
                }
            }
        }
        assert!((gram - DMatrix::identity(n, n)).amax() < 1e-12);
    }
}
