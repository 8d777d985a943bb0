//! Spectral Galerkin simulation and long-time-dynamics analysis of the
//! extensible beam with fractional rotational inertia
//!
//! ```text
//! u_tt + α A^{θ/2} u_tt + A u + M(‖A^{1/4}u‖²) A^{1/2} u + N(‖A^{1/4}u‖²) A^{θ'/2} u_t + f(u) = h
//! ```
//!
//! on a hinged interval `[0, L]`, `A = Δ²`.

pub mod attractor;
pub mod cli;
pub mod energy;
pub mod error;
pub mod fit;
pub mod initial;
pub mod integrator;
pub mod io;
pub mod model;
pub mod norms;
pub mod spectral;
pub mod stability;

pub use error::{BeamError, Result};
