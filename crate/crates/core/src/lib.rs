pub mod coefficients;
pub mod commands;
pub mod config;
pub mod error;
pub mod kernels;
pub mod matsubara;
pub mod oracle;
pub mod output;
pub mod propagator;
pub mod quadrature;
pub mod spectral;

pub use error::{Error, Result};
