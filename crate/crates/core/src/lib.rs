//! Numerical Szegő projections on the Heisenberg group ℍⁿ = ℂⁿ×ℝ and on the
//! CR sphere S³.
//!
//! * [`heis`]: grids, sampled fields, exact evaluators, parabolic scalings,
//!   the dense CR test class and the tangential Cauchy–Riemann defect.
//! * [`fock`]: Gaussian-weighted Fock spaces and their Bergman projections.
//! * [`szego`]: the Heisenberg Szegő projection (lattice, spectral-point and
//!   closed-form-kernel routes), frequency projectors and energy checks.
//! * [`norms`]: L^p norms, Rayleigh quotients, the Gamma-ratio reference bound
//!   and the variational search over an extremizer family.
//! * [`sphere`]: sphere projection in Hopf coordinates, the Cayley chart and
//!   the rescaling (transplantation) experiment.

pub mod error;
pub mod fock;
pub mod heis;
pub mod norms;
pub mod quadrature;
pub mod samples;
pub mod sphere;
pub mod szego;
pub mod tfft;

pub use error::{Error, Result};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Complex double.
pub type C64 = num_complex::Complex<f64>;

pub(crate) const I: C64 = C64::new(0.0, 1.0);
pub(crate) const ZERO: C64 = C64::new(0.0, 0.0);
