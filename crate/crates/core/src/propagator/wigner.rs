//! Wigner function `W(q,p) = (1/π) ∫ dy e^{2ipy} ⟨q−y|ρ|q+y⟩`.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::basis::{hermite_functions, BasisSpec};
use super::state::DensityMatrix;
use crate::error::{Error, Result};

type C = Complex64;

/// Boundary probability above which the grid is reported as too small.
pub const COVERAGE_LIMIT: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UniformGrid {
    pub min: f64,
    pub max: f64,
    pub step: f64,
}

impl UniformGrid {
    pub fn default_phase_space() -> Self {
        Self { min: -8.0, max: 8.0, step: 0.1 }
    }

    pub fn points(&self) -> Result<Vec<f64>> {
        if !(self.step > 0.0) || !(self.max > self.min) {
            return Err(Error::invalid("grid", format!("need min < max and step > 0, got {self:?}")));
        }
        let n = ((self.max - self.min) / self.step).round() as usize;
        if ((n as f64) * self.step - (self.max - self.min)).abs() > 1e-9 * self.step {
            return Err(Error::invalid("grid", "range is not a multiple of the step"));
        }
        Ok((0..=n).map(|i| self.min + i as f64 * self.step).collect())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WignerGrid {
    pub q: Vec<f64>,
    pub p: Vec<f64>,
    /// `values[i][j] = W(q[i], p[j])`.
    pub values: Vec<Vec<f64>>,
    /// Trapezoidal `∬ W dq dp` over the grid.
    pub integral: f64,
    /// Probability in position or momentum outside the grid ranges.
    pub boundary_mass: f64,
    pub coverage_warning: Option<String>,
}

fn check_uniform(x: &[f64], name: &'static str) -> Result<f64> {
    if x.len() < 2 {
        return Err(Error::invalid(name, "needs at least two points"));
    }
    let h = x[1] - x[0];
    if !(h > 0.0) || x.windows(2).any(|w| ((w[1] - w[0]) - h).abs() > 1e-9 * h.abs()) {
        return Err(Error::invalid(name, "grid must be uniform and increasing"));
    }
    Ok(h)
}

fn trapezoid_weights(n: usize, h: f64) -> Vec<f64> {
    let mut w = vec![h; n];
    w[0] *= 0.5;
    w[n - 1] *= 0.5;
    w
}

/// Probability density of `ρ` in a representation whose basis functions are
/// `phase_n · ψ_n(x; ω)`.
fn marginal(rho: &DMatrix<C>, omega: f64, phases: &[C], x: f64, buf: &mut [f64]) -> f64 {
    let n = rho.nrows();
    hermite_functions(n, omega, x, buf);
    let v = DVector::from_iterator(n, (0..n).map(|k| phases[k] * buf[k]));
    let u = rho * v.map(|z| z.conj());
    (v.transpose() * u)[(0, 0)].re
}

/// Probability outside `[lo, hi]` of the density computed by `marginal`.
fn outside_mass(rho: &DMatrix<C>, omega: f64, phases: &[C], lo: f64, hi: f64) -> f64 {
    let m = 2 * ((hi - lo) / 0.01).ceil() as usize;
    let h = (hi - lo) / m as f64;
    let mut buf = vec![0.0; rho.nrows()];
    // Simpson
    let mut inside = 0.0;
    for i in 0..=m {
        let w = if i == 0 || i == m {
            1.0
        } else if i % 2 == 1 {
            4.0
        } else {
            2.0
        };
        inside += w * marginal(rho, omega, phases, lo + i as f64 * h, &mut buf);
    }
    inside *= h / 3.0;
    (rho.trace().re - inside).max(0.0)
}

pub fn wigner(rho: &DensityMatrix, basis: &BasisSpec, q_grid: &[f64], p_grid: &[f64]) -> Result<WignerGrid> {
    if rho.dim() != basis.dim {
        return Err(Error::DimensionMismatch { expected: basis.dim, found: rho.dim() });
    }
    let hq = check_uniform(q_grid, "q_grid")?;
    let hp = check_uniform(p_grid, "p_grid")?;
    let n = basis.dim;
    let w = basis.omega_ref;
    let m = rho.matrix();

    // ψ_n is negligible beyond its turning point plus a few decay lengths.
    let reach = ((2.0 * n as f64 + 1.0).sqrt() + 8.0) / w.sqrt();
    let p_max = p_grid.iter().fold(0.0f64, |a, &p| a.max(p.abs()));
    let k_max = 2.0 * ((2.0 * n as f64 + 1.0) * w).sqrt() + 2.0 * p_max;
    let hy = PI / (1.5 * k_max).max(1.0);

    let mut a = vec![0.0; n];
    let mut b = vec![0.0; n];
    let mut values = vec![vec![0.0; p_grid.len()]; q_grid.len()];
    for (iq, &q) in q_grid.iter().enumerate() {
        let y_max = (reach - q.abs()).max(0.0);
        let ny = (y_max / hy).ceil() as usize;
        // f(y) = Σ ψ_m(q−y) ρ_mn ψ_n(q+y); f(−y) = conj f(y)
        let mut f = Vec::with_capacity(ny + 1);
        for k in 0..=ny {
            let y = k as f64 * hy;
            hermite_functions(n, w, q - y, &mut a);
            hermite_functions(n, w, q + y, &mut b);
            let mut acc = C::new(0.0, 0.0);
            for (col, &bn) in b.iter().enumerate() {
                if bn == 0.0 {
                    continue;
                }
                let column = m.column(col);
                let mut s = C::new(0.0, 0.0);
                for (row, &am) in a.iter().enumerate() {
                    s += column[row] * am;
                }
                acc += s * bn;
            }
            f.push(acc);
        }
        for (ip, &p) in p_grid.iter().enumerate() {
            let mut total = f[0].re;
            for (k, fk) in f.iter().enumerate().skip(1) {
                let phase = C::from_polar(1.0, 2.0 * p * k as f64 * hy);
                total += 2.0 * (phase * fk).re;
            }
            values[iq][ip] = total * hy / PI;
        }
    }

    let wq = trapezoid_weights(q_grid.len(), hq);
    let wp = trapezoid_weights(p_grid.len(), hp);
    let integral: f64 =
        values.iter().zip(&wq).map(|(row, a)| a * row.iter().zip(&wp).map(|(v, b)| v * b).sum::<f64>()).sum();

    let pos_phase = vec![C::new(1.0, 0.0); n];
    // ⟨p|n⟩ = (−i)^n ψ_n(p; 1/ω)
    let mom_phase: Vec<C> = (0..n).map(|k| C::new(0.0, -1.0).powu(k as u32)).collect();
    let outside_q = outside_mass(m, w, &pos_phase, q_grid[0], *q_grid.last().unwrap());
    let outside_p = outside_mass(m, 1.0 / w, &mom_phase, p_grid[0], *p_grid.last().unwrap());
    let boundary_mass = outside_q + outside_p;
    let coverage_warning = (boundary_mass > COVERAGE_LIMIT).then(|| {
        format!("grid misses probability {boundary_mass:.3e} (position {outside_q:.3e}, momentum {outside_p:.3e})")
    });
    Ok(WignerGrid { q: q_grid.to_vec(), p: p_grid.to_vec(), values, integral, boundary_mass, coverage_warning })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::propagator::state::{coherent_state, initial_state_thermal, number_state};

    fn grid() -> Vec<f64> {
        UniformGrid::default_phase_space().points().unwrap()
    }

    #[test]
    fn ground_state_is_gaussian() {
        let b = BasisSpec::new(12, 1.0).unwrap();
        let g = grid();
        let w = wigner(&number_state(0, &b).unwrap(), &b, &g, &g).unwrap();
        let c = 80;
        assert!((w.values[c][c] - 1.0 / PI).abs() < 1e-10);
        assert!((w.values[c + 10][c] - (-1.0f64).exp() / PI).abs() < 1e-10);
        assert!((w.integral - 1.0).abs() < 1e-6);
        assert!(w.coverage_warning.is_none());
    }

    #[test]
    fn coherent_state_is_displaced() {
        let b = BasisSpec::new(40, 1.0).unwrap();
        let s = coherent_state(1.5, -1.0, &b).unwrap();
        let g = grid();
        let w = wigner(&s.rho, &b, &g, &g).unwrap();
        let (iq, ip) = (95, 70);
        assert!((g[iq] - 1.5).abs() < 1e-9 && (g[ip] + 1.0).abs() < 1e-9);
        assert!((w.values[iq][ip] - 1.0 / PI).abs() < 1e-8);
        let expect = |q: f64, p: f64| (-(q - 1.5).powi(2) - (p + 1.0).powi(2)).exp() / PI;
        assert!((w.values[100][60] - expect(g[100], g[60])).abs() < 1e-8);
        assert!((w.integral - 1.0).abs() < 1e-4);
    }

    #[test]
    fn thermal_normalization_and_coverage() {
        let b = BasisSpec::new(64, 1.0).unwrap();
        let s = initial_state_thermal(1.0, 1.0, &b).unwrap();
        let g = grid();
        let w = wigner(&s.rho, &b, &g, &g).unwrap();
        assert!((w.integral - 1.0).abs() < 1e-4);
        let narrow = UniformGrid { min: -1.0, max: 1.0, step: 0.1 }.points().unwrap();
        let w = wigner(&s.rho, &b, &narrow, &narrow).unwrap();
        assert!(w.coverage_warning.is_some());
    }

    #[test]
    fn rejects_non_uniform_grid() {
        let b = BasisSpec::new(4, 1.0).unwrap();
        let rho = number_state(0, &b).unwrap();
        assert!(wigner(&rho, &b, &[0.0, 0.1, 0.3], &[0.0, 1.0]).is_err());
    }
}
