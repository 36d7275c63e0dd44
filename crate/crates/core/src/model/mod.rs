//! Finite-dimensional resonant models: diffusion channels, their crossing
//! times and the rescaled lift to Fourier amplitudes.

mod channel;
mod lift;
pub mod ode;
pub mod quadrature;

pub use channel::{
    channel_field, diffusion_time_bounds, diffusion_time_quadrature, integrate_channel,
    integrate_channel_with, reduced_gradient, reduced_hamiltonian, resonant_field, Branch,
    ChannelKind, ChannelOptions, ChannelOrbit, ChannelSpec, ChannelSummary, Endpoints, TimeBounds,
};
pub use lift::{lift_and_rescale, LiftedOrbit, TangentialTrajectory};
