//! Galerkin truncations of the wave and NLS equations, integrated by
//! Strang splitting with dealiased pseudospectral products.

mod evolve;
mod monitor;
mod problem;

pub use evolve::{evolve, model_distance, rotating_frame, step, EvolveOptions, Stepper};
pub use monitor::{ConservedColumn, MonitorSeries};
pub use problem::{
    hamiltonian, hamiltonian_complex, minimal_padding, nonlinear_field, vector_field,
    EquationKind, EvolutionProblem, NonlinearityScale, PdeState,
};
