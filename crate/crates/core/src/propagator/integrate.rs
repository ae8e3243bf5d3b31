//! Fixed-step RK4 time evolution.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::basis::{BasisSpec, Operators};
use super::hamiltonian::PotentialModel;
use super::liouvillian::{Liouvillian, StageCoefficients};
use super::observables::{observables, Observables};
use super::state::DensityMatrix;
use crate::coefficients::coefficient_at;
use crate::error::{Error, Result};
use crate::spectral::ThermalParams;

type C = Complex64;

/// Trace drift or entry size beyond which a run is declared unstable.
pub const TRACE_ABORT: f64 = 1e-6;
pub const ENTRY_ABORT: f64 = 1e6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Monitors {
    /// Record observables every this many steps (the last step is always recorded).
    pub record_every: usize,
    /// Diagonalize ρ at each record to get its smallest eigenvalue.
    pub min_eig: bool,
    /// Eigenvalues below `-eps_pos` count as positivity violations.
    pub eps_pos: f64,
}

impl Default for Monitors {
    fn default() -> Self {
        Self { record_every: 10, min_eig: true, eps_pos: 1e-10 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PropagationConfig {
    pub basis: BasisSpec,
    pub t_end: f64,
    pub dt: f64,
    pub gamma_s: f64,
    pub beta_s: f64,
    /// Displacement of the representative imaginary-time path.
    pub q0: f64,
    pub cross_gamma_s: f64,
    pub monitors: Monitors,
    pub symmetrize: bool,
}

impl PropagationConfig {
    pub fn validate(&self) -> Result<usize> {
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(Error::invalid("dt", format!("must be positive, got {}", self.dt)));
        }
        if !(self.t_end >= self.dt) || !self.t_end.is_finite() {
            return Err(Error::invalid("t_end", format!("must be >= dt, got {}", self.t_end)));
        }
        if !(self.gamma_s >= 0.0) {
            return Err(Error::invalid("gamma_s", format!("must be >= 0, got {}", self.gamma_s)));
        }
        if !(self.beta_s > 0.0) {
            return Err(Error::invalid("beta_s", format!("must be positive, got {}", self.beta_s)));
        }
        if self.monitors.record_every == 0 {
            return Err(Error::invalid("record_every", "must be >= 1"));
        }
        let steps = (self.t_end / self.dt).round() as usize;
        if ((steps as f64) * self.dt - self.t_end).abs() > 1e-9 * self.t_end {
            return Err(Error::invalid("dt", format!("t_end = {} is not a multiple of dt = {}", self.t_end, self.dt)));
        }
        Ok(steps)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub samples: Vec<Observables>,
    pub steps: usize,
    pub max_trace_drift: f64,
    pub max_hermiticity: f64,
    /// Smallest recorded eigenvalue, if eigenvalues were monitored.
    pub min_eig: Option<f64>,
    /// Number of records with an eigenvalue below `-eps_pos`.
    pub positivity_violations: usize,
    #[serde(skip)]
    pub final_state: Option<DensityMatrix>,
}

impl Trajectory {
    fn push(&mut self, o: Observables, eps_pos: f64) {
        self.max_trace_drift = self.max_trace_drift.max((o.trace - 1.0).abs());
        self.max_hermiticity = self.max_hermiticity.max(o.hermiticity);
        if let Some(e) = o.min_eig {
            self.min_eig = Some(self.min_eig.map_or(e, |m| m.min(e)));
            if e < -eps_pos {
                self.positivity_violations += 1;
            }
        }
        self.samples.push(o);
    }
}

/// Where the generator coefficients come from.
#[derive(Debug, Clone, Copy)]
enum Source {
    Ohmic { gamma_s: f64, beta_s: f64, q0: f64, cross_gamma_s: f64, thermal: ThermalParams },
}

impl Source {
    fn at(&self, t_s: f64) -> Result<StageCoefficients> {
        match *self {
            Source::Ohmic { gamma_s, beta_s, q0, cross_gamma_s, thermal } => {
                let c = coefficient_at(t_s, gamma_s, beta_s, &thermal)?;
                Ok(StageCoefficients::from_sample(&c, gamma_s, q0, cross_gamma_s))
            }
        }
    }
}

/// Step-by-step propagation with coefficients cached on the half-step grid.
#[derive(Debug, Clone)]
pub struct Propagator {
    ops: Operators,
    liouvillian: Liouvillian,
    rho: Vec<C>,
    n: usize,
    dt: f64,
    steps_taken: usize,
    source: Source,
    cache: Vec<StageCoefficients>,
    symmetrize: bool,
    k: [Vec<C>; 4],
    tmp: Vec<C>,
}

impl Propagator {
    pub fn new(rho0: &DensityMatrix, potential: &PotentialModel, config: &PropagationConfig) -> Result<Self> {
        if !(config.dt > 0.0) {
            return Err(Error::invalid("dt", format!("must be positive, got {}", config.dt)));
        }
        if rho0.dim() != config.basis.dim {
            return Err(Error::DimensionMismatch { expected: config.basis.dim, found: rho0.dim() });
        }
        let potential = potential.validated()?;
        let ops = Operators::new(config.basis);
        let liouvillian = Liouvillian::new(&ops, &potential);
        let n = config.basis.dim;
        let thermal = ThermalParams::new(config.beta_s)?;
        let zero = vec![C::new(0.0, 0.0); n * n];
        Ok(Self {
            ops,
            liouvillian,
            rho: rho0.matrix().as_slice().to_vec(),
            n,
            dt: config.dt,
            steps_taken: 0,
            source: Source::Ohmic {
                gamma_s: config.gamma_s,
                beta_s: config.beta_s,
                q0: config.q0,
                cross_gamma_s: config.cross_gamma_s,
                thermal,
            },
            cache: Vec::new(),
            symmetrize: config.symmetrize,
            k: [zero.clone(), zero.clone(), zero.clone(), zero.clone()],
            tmp: zero,
        })
    }

    /// Fills the coefficient cache for the first `steps` steps in parallel.
    pub fn precompute(&mut self, steps: usize) -> Result<()> {
        let need = 2 * steps + 1;
        if self.cache.len() >= need {
            return Ok(());
        }
        let (source, half) = (self.source, 0.5 * self.dt);
        let extra =
            (self.cache.len()..need).into_par_iter().map(|j| source.at(j as f64 * half)).collect::<Result<Vec<_>>>()?;
        self.cache.extend(extra);
        Ok(())
    }

    fn stage(&mut self, j: usize) -> Result<StageCoefficients> {
        while self.cache.len() <= j {
            let t = self.cache.len() as f64 * 0.5 * self.dt;
            let c = self.source.at(t)?;
            self.cache.push(c);
        }
        Ok(self.cache[j])
    }

    pub fn time(&self) -> f64 {
        self.steps_taken as f64 * self.dt
    }

    pub fn steps_taken(&self) -> usize {
        self.steps_taken
    }

    pub fn operators(&self) -> &Operators {
        &self.ops
    }

    pub fn state(&self) -> DensityMatrix {
        DensityMatrix::from_raw(DMatrix::from_column_slice(self.n, self.n, &self.rho))
    }

    pub fn observables(&self, with_min_eig: bool) -> Observables {
        let mut o = observables(&self.state(), &self.ops, Some(&self.liouvillian.parts().energy), with_min_eig);
        o.t_s = self.time();
        o
    }

    /// One classic RK4 step.
    pub fn step(&mut self) -> Result<()> {
        let j = 2 * self.steps_taken;
        let c = [self.stage(j)?, self.stage(j + 1)?, self.stage(j + 2)?];
        let dt = self.dt;
        let nn = self.n * self.n;
        let [k1, k2, k3, k4] = &mut self.k;

        let stage = |tmp: &mut [C], rho: &[C], k: &[C], h: f64| {
            for ((t, r), k) in tmp.iter_mut().zip(rho).zip(k) {
                *t = r + k * h;
            }
        };
        self.liouvillian.apply(&self.rho, &c[0], k1)?;
        stage(&mut self.tmp, &self.rho, k1, 0.5 * dt);
        self.liouvillian.apply(&self.tmp, &c[1], k2)?;
        stage(&mut self.tmp, &self.rho, k2, 0.5 * dt);
        self.liouvillian.apply(&self.tmp, &c[1], k3)?;
        stage(&mut self.tmp, &self.rho, k3, dt);
        self.liouvillian.apply(&self.tmp, &c[2], k4)?;
        let w = dt / 6.0;
        for i in 0..nn {
            self.rho[i] += (k1[i] + (k2[i] + k3[i]) * 2.0 + k4[i]) * w;
        }
        if self.symmetrize {
            let n = self.n;
            for jj in 0..n {
                for ii in 0..jj {
                    let a = self.rho[jj * n + ii];
                    let b = self.rho[ii * n + jj];
                    let avg = (a + b.conj()) * 0.5;
                    self.rho[jj * n + ii] = avg;
                    self.rho[ii * n + jj] = avg.conj();
                }
                let d = &mut self.rho[jj * n + jj];
                d.im = 0.0;
            }
        }
        self.steps_taken += 1;
        Ok(())
    }

    /// `None` if the state is sane, otherwise the reason it is not.
    pub fn instability(&self) -> Option<String> {
        let n = self.n;
        let trace: f64 = (0..n).map(|i| self.rho[i * n + i].re).sum();
        if !trace.is_finite() || (trace - 1.0).abs() > TRACE_ABORT {
            return Some(format!("trace drifted to {trace:e}"));
        }
        let worst = self.rho.iter().map(|z| z.norm()).fold(0.0, f64::max);
        if !worst.is_finite() || worst > ENTRY_ABORT {
            return Some(format!("matrix entry magnitude {worst:e}"));
        }
        None
    }
}

/// Integrates from `t = 0` to `config.t_end`, recording observables.
pub fn propagate(rho0: &DensityMatrix, config: &PropagationConfig, potential: &PotentialModel) -> Result<Trajectory> {
    let steps = config.validate()?;
    let mut prop = Propagator::new(rho0, potential, config)?;
    prop.precompute(steps)?;
    let mon = config.monitors;
    let mut traj = Trajectory::default();
    traj.push(prop.observables(mon.min_eig), mon.eps_pos);
    for s in 1..=steps {
        prop.step()?;
        if let Some(reason) = prop.instability() {
            traj.steps = s;
            return Err(Error::Unstable { t_s: prop.time(), reason, partial: Box::new(traj) });
        }
        if s % mon.record_every == 0 || s == steps {
            traj.push(prop.observables(mon.min_eig), mon.eps_pos);
        }
    }
    traj.steps = steps;
    traj.final_state = Some(prop.state());
    Ok(traj)
}
