//! L^p norms, Rayleigh quotients `‖𝒮f‖_p / ‖f‖_p` (lower bounds for the
//! operator norm `N_p`), the Gamma-ratio reference value and a deterministic
//! simplex search over a two-parameter extremizer family.

mod family;
mod liu;
mod lp;
mod optimize;

pub use family::{ExtremizerFamily, FamilyBox, FamilyPlan, Realisation};
pub use liu::liu_bound;
pub use lp::{lp_norm, rayleigh, LpNorm, RayleighResult};
pub use optimize::{duality_check, maximize_rayleigh, DualityResult, Maximization, SearchOptions, TraceEntry};

/// Conjugate exponent `p/(p−1)`.
pub fn conjugate(p: f64) -> f64 {
    if p == 1.0 {
        f64::INFINITY
    } else if p.is_infinite() {
        1.0
    } else {
        p / (p - 1.0)
    }
}
