//! Resonant energy transfer between Fourier modes of Hamiltonian PDEs on the
//! circle: resonance analysis, diffusion channels of the resonant models,
//! Galerkin PDE integration and experiment orchestration.

pub mod error;
pub mod harness;
pub mod model;
pub mod pde;
pub mod resonance;
pub mod spectral;

pub use error::{Error, Result};
