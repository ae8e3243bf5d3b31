use thiserror::Error;

use crate::propagator::Trajectory;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("{quantity} diverges at t_s = {t_s}")]
    Divergent { quantity: &'static str, t_s: f64 },

    #[error("cot(beta_s/2) pole at beta_s = {beta_s} (k = {k}) without removable-singularity handling")]
    Singularity { beta_s: f64, k: u64 },

    #[error("Matsubara series not converged after {terms} terms (estimated relative remainder {remainder:.3e})")]
    Truncation { terms: usize, remainder: f64 },

    #[error("quadrature did not reach tolerance: estimate {value:.6e} +/- {error:.3e}")]
    Quadrature { value: f64, error: f64 },

    #[error("integral of eta(omega)/omega diverges at omega = 0 (eta(0) = {eta0})")]
    NotIntegrable { eta0: f64 },

    #[error("non-positive effective mass at t_s = {t_s}: r_m = {r_m:.6e} (critical gamma_s = {critical_gamma_s:.6e})")]
    EffectiveMass { t_s: f64, r_m: f64, critical_gamma_s: f64 },

    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("basis too small: truncation leakage {leakage:.3e} exceeds {limit:.1e}")]
    BasisTooSmall { leakage: f64, limit: f64 },

    #[error("integration unstable at t_s = {t_s}: {reason}")]
    Unstable { t_s: f64, reason: String, partial: Box<Trajectory> },

    #[error("not positive definite: {0}")]
    NotPositiveDefinite(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("config error{}: {message}", line.map(|l| format!(" at line {l}")).unwrap_or_default())]
    Config { line: Option<usize>, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter { name, reason: reason.into() }
    }

    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidParameter { .. } | Error::Config { .. } => 2,
            Error::Unsupported(_) => 4,
            Error::Io(_) => 1,
            _ => 3,
        }
    }
}
