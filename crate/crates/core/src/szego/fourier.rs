use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::heis::{GridSpec, SampledField};
use crate::tfft::{xi_at, TPlan};
use crate::{C64, ZERO};

/// Per-frequency slices `𝓕f(z, ξ_k)`, flat index `iz * nt + m` with `m` the
/// FFT-order storage index of `ξ_k = πk/T`.
#[derive(Debug, Clone)]
pub struct FrequencyField {
    pub grid: GridSpec,
    pub slices: Vec<C64>,
}

impl FrequencyField {
    pub fn xi(&self, m: usize) -> f64 {
        xi_at(m, &self.grid)
    }

    /// L² norm with respect to `dA(z) dξ`.
    pub fn l2_norm(&self) -> f64 {
        let s: f64 = self.slices.iter().map(|v| v.norm_sqr()).sum();
        (s * self.grid.z_cell() * self.grid.dxi()).sqrt()
    }
}

/// Unitary partial Fourier transform in t.
pub fn partial_fourier(f: &SampledField) -> FrequencyField {
    let mut slices = f.values.clone();
    TPlan::new(&f.grid).forward(&mut slices);
    FrequencyField {
        grid: f.grid.clone(),
        slices,
    }
}

/// Inverse of [`partial_fourier`]; the result is grid-only.
pub fn inverse_partial_fourier(ff: &FrequencyField) -> SampledField {
    let mut values = ff.slices.clone();
    TPlan::new(&ff.grid).inverse(&mut values);
    SampledField::from_values(&ff.grid, values, "inverse partial Fourier").expect("shape preserved")
}

/// Which frequencies [`freq_project`] keeps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    /// `ξ ≤ T`.
    Low,
    /// `ξ > T`.
    High,
}

/// Frequency projector `P_{≤T}` or `P_{>T}` on lattice frequencies.
pub fn freq_project(f: &SampledField, t_cut: f64, side: Side) -> SampledField {
    let mut ff = partial_fourier(f);
    let g = ff.grid.clone();
    let nt = g.nt;
    let keep: Vec<bool> = (0..nt)
        .map(|m| {
            let xi = xi_at(m, &g);
            match side {
                Side::Low => xi <= t_cut,
                Side::High => xi > t_cut,
            }
        })
        .collect();
    if keep.iter().all(|&k| k) {
        return f.clone();
    }
    if keep.iter().all(|&k| !k) {
        return SampledField::zeros(&g);
    }
    ff.slices.par_chunks_mut(nt).for_each(|row| {
        for (v, k) in row.iter_mut().zip(&keep) {
            if !k {
                *v = ZERO;
            }
        }
    });
    let mut out = inverse_partial_fourier(&ff);
    out.provenance = format!("P[{side:?} {t_cut}]({})", f.provenance);
    out
}
