//! The Szegő projection `𝒮ₙ` of `L²(ℍⁿ, σ)` onto CR functions.
//!
//! After the partial Fourier transform in t, each slice `ξ > 0` is projected
//! onto `e^{-ξ|z|²}·(holomorphic polynomials of degree ≤ D)` and slices with
//! `ξ ≤ 0` are discarded. Three realisations are provided:
//!
//! * [`szego_apply`]: the exact orthogonal projection on the lattice,
//! * [`szego_eval_spectral`]: continuous-ξ evaluation at arbitrary points,
//! * [`szego_apply_kernel`]: quadrature against the closed-form kernel.

mod checks;
mod fourier;
mod kernel;
mod project;
mod spectral;

pub use checks::{commutator_energy_check, high_freq_check, CommutatorCheck, InequalityCheck, COMMUTATOR_TOL};
pub use fourier::{freq_project, inverse_partial_fourier, partial_fourier, FrequencyField, Side};
pub use kernel::{kernel_constant, koranyi_distance, szego_apply_kernel, szego_kernel, SUPPORT_THRESHOLD};
pub use project::{szego_apply, szego_apply_with_report, ProjectionReport};
pub use spectral::{szego_eval_spectral, szego_eval_spectral_grid, SpectralPointConfig};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Point-evaluation route.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Route {
    Spectral,
    Kernel,
}

/// Degree cutoff and Hermite order shared with the Fock module, plus the route
/// used for point evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SzegoConfig {
    pub degree: u32,
    pub order: usize,
    pub route: Route,
    /// Gram–Schmidt directions whose residual norm falls below this fraction
    /// are treated as linearly dependent on the lattice.
    pub rank_tol: f64,
}

impl Default for SzegoConfig {
    fn default() -> Self {
        SzegoConfig {
            degree: 12,
            order: 40,
            route: Route::Spectral,
            rank_tol: 1e-12,
        }
    }
}

impl SzegoConfig {
    pub fn with_degree(mut self, degree: u32) -> Self {
        self.degree = degree;
        self.order = self.order.max(degree as usize + 2);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.order < self.degree as usize + 2 {
            return Err(Error::InvalidParameter(format!(
                "Hermite order {} < degree {} + 2",
                self.order, self.degree
            )));
        }
        if !(self.rank_tol > 0.0 && self.rank_tol < 1e-3) {
            return Err(Error::InvalidParameter(format!("rank_tol = {}", self.rank_tol)));
        }
        Ok(())
    }
}
