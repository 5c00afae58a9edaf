use serde::{Deserialize, Serialize};

use super::fourier::{freq_project, Side};
use super::project::szego_apply;
use super::SzegoConfig;
use crate::error::{Error, Result};
use crate::fock::slack;
use crate::heis::{cr_operators, DerivativeScheme, SampledField};
use crate::C64;

/// `lhs ≤ rhs + slack` outcome.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InequalityCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub ok: bool,
    pub scheme: DerivativeScheme,
}

fn energy(v: &[C64], cell: f64) -> f64 {
    v.iter().map(|c| c.norm_sqr()).sum::<f64>() * cell
}

/// High-frequency estimate
/// `‖P_{>T}f − 𝒮ₙP_{>T}f‖² ≤ (2/T) Σ_j ‖L̄_j f‖²`.
pub fn high_freq_check(f: &SampledField, t_cut: f64, cfg: &SzegoConfig) -> Result<InequalityCheck> {
    if !(t_cut > 0.0) {
        return Err(Error::InvalidParameter(format!("frequency cut T = {t_cut} must be positive")));
    }
    let high = freq_project(f, t_cut, Side::High);
    let proj = szego_apply(&high, cfg)?;
    let cell = f.grid.cell();
    let diff: Vec<C64> = high.values.iter().zip(&proj.values).map(|(a, b)| a - b).collect();
    let lhs = energy(&diff, cell);
    let ops = cr_operators(f);
    let rhs = 2.0 / t_cut * ops.lbar.iter().map(|v| energy(v, cell)).sum::<f64>();
    Ok(InequalityCheck {
        lhs,
        rhs,
        ok: lhs <= rhs + slack(rhs),
        scheme: ops.scheme,
    })
}

/// Per-direction energy balance of [`commutator_energy_check`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CommutatorTerm {
    /// `‖L_j f‖²`.
    pub lhs: f64,
    /// `‖L̄_j f‖² + ⟨−2i∂_t f, f⟩`.
    pub rhs: f64,
    pub rel_discrepancy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CommutatorCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub ok: bool,
    pub terms: Vec<CommutatorTerm>,
    pub scheme: DerivativeScheme,
}

/// Relative tolerance of the energy balance.
pub const COMMUTATOR_TOL: f64 = 1e-6;

/// Checks `‖L_j f‖² = ‖L̄_j f‖² + ∫(−2i∂_t f) f̄` for every `j`, a consequence
/// of `[L_j, L̄_j] = −2i∂_t`.
pub fn commutator_energy_check(f: &SampledField) -> CommutatorCheck {
    let ops = cr_operators(f);
    let cell = f.grid.cell();
    let pairing: f64 = ops
        .dt
        .iter()
        .zip(&f.values)
        .map(|(d, v)| (C64::new(0.0, -2.0) * d * v.conj()).re)
        .sum::<f64>()
        * cell;
    let terms: Vec<CommutatorTerm> = (0..f.grid.n)
        .map(|j| {
            let lhs = energy(&ops.l[j], cell);
            let rhs = energy(&ops.lbar[j], cell) + pairing;
            let scale = lhs.abs().max(rhs.abs());
            let rel = if scale == 0.0 { 0.0 } else { (lhs - rhs).abs() / scale };
            CommutatorTerm {
                lhs,
                rhs,
                rel_discrepancy: rel,
            }
        })
        .collect();
    CommutatorCheck {
        lhs: terms.iter().map(|t| t.lhs).sum(),
        rhs: terms.iter().map(|t| t.rhs).sum(),
        ok: terms.iter().all(|t| t.rel_discrepancy <= COMMUTATOR_TOL),
        terms,
        scheme: ops.scheme,
    }
}
