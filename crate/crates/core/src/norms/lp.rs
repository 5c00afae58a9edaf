use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::heis::{SampledField, TruncationWarning};
use crate::szego::{szego_apply, SzegoConfig};

/// `(∫|f|^p dσ)^{1/p}` with a quadrature error estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LpNorm {
    pub value: f64,
    pub error: f64,
}

fn check_p(p: f64) -> Result<()> {
    if p.is_nan() || p < 1.0 {
        return Err(Error::InvalidExponent(p));
    }
    Ok(())
}

/// Lattice L^p norm; `p = ∞` gives the lattice maximum. The error estimate is
/// the change when every other lattice point per axis is dropped.
pub fn lp_norm(f: &SampledField, p: f64) -> Result<LpNorm> {
    check_p(p)?;
    if p.is_infinite() {
        return Ok(LpNorm {
            value: f.max_abs(),
            error: 0.0,
        });
    }
    let g = &f.grid;
    let nt = g.nt;
    let even_z: Vec<bool> = (0..g.nzpoints())
        .map(|iz| g.z_digits(iz).iter().all(|d| d % 2 == 0))
        .collect();
    let mut fine = 0.0;
    let mut coarse = 0.0;
    for (k, v) in f.values.iter().enumerate() {
        let a = v.norm();
        let e = if p == 2.0 { a * a } else { a.powf(p) };
        fine += e;
        if (k % nt) % 2 == 0 && even_z[k / nt] {
            coarse += e;
        }
    }
    let cell = g.cell();
    let fine = fine * cell;
    let coarse = coarse * cell * 2f64.powi(2 * g.n as i32 + 1);
    let value = fine.powf(1.0 / p);
    let error = if fine > 0.0 {
        value * (fine - coarse).abs() / (p * fine)
    } else {
        0.0
    };
    Ok(LpNorm { value, error })
}

/// Rayleigh quotient `‖𝒮f‖_p / ‖f‖_p`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RayleighResult {
    pub p: f64,
    pub value: f64,
    pub quadrature_error: f64,
    pub truncation: Vec<TruncationWarning>,
}

pub fn rayleigh(f: &SampledField, p: f64, cfg: &SzegoConfig) -> Result<RayleighResult> {
    check_p(p)?;
    let den = lp_norm(f, p)?;
    if den.value == 0.0 {
        return Err(Error::ZeroFunction);
    }
    let sf = szego_apply(f, cfg)?;
    let num = lp_norm(&sf, p)?;
    let value = num.value / den.value;
    let mut truncation = f.warnings.clone();
    truncation.extend(sf.warnings.iter().cloned());
    Ok(RayleighResult {
        p,
        value,
        quadrature_error: value * (num.error / num.value.max(f64::MIN_POSITIVE) + den.error / den.value),
        truncation,
    })
}
