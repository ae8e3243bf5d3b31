//! Density-matrix propagation of the master equation in a truncated
//! harmonic-oscillator basis.

mod banded;
mod basis;
mod hamiltonian;
mod integrate;
mod liouvillian;
mod moments;
mod observables;
mod state;
mod wigner;

pub use banded::Banded;
pub use basis::{build_operators, hermite_functions, BasisSpec, Operators};
pub use hamiltonian::{effective_hamiltonian, HamiltonianParts, PotentialModel};
pub use integrate::{propagate, Monitors, PropagationConfig, Propagator, Trajectory, ENTRY_ABORT, TRACE_ABORT};
pub use liouvillian::{liouvillian_apply, Liouvillian, StageCoefficients};
pub use moments::{moment_rhs, moment_trajectory, steady_moments, Moments};
pub use observables::{observables, Observables};
pub use state::{
    coherent_state, gaussian_state, initial_state_thermal, number_state, DensityMatrix, PreparedState, LEAKAGE_LIMIT,
};
pub use wigner::{wigner, UniformGrid, WignerGrid, COVERAGE_LIMIT};
