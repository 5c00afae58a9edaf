//! Unitary discrete Fourier transform along the t axis.
//!
//! With `t_j = -T + j Δt` and `ξ_k = π k / T`, the forward map is
//! `F_k = Δt/√(2π) Σ_j f_j e^{-i ξ_k t_j} = Δt/√(2π) (-1)^k FFT(f)_k`.
//! Slices are stored in FFT order: storage index `m` holds `k = m` for
//! `m < nt/2` and `k = m - nt` otherwise.

use std::f64::consts::PI;
use std::sync::Arc;

use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};

use crate::heis::GridSpec;
use crate::C64;

/// Signed frequency index for storage index `m`.
pub fn signed_index(m: usize, nt: usize) -> i64 {
    if m < nt / 2 {
        m as i64
    } else {
        m as i64 - nt as i64
    }
}

/// Lattice frequency `ξ` at storage index `m`.
pub fn xi_at(m: usize, grid: &GridSpec) -> f64 {
    PI * signed_index(m, grid.nt) as f64 / grid.t
}

/// Forward and inverse plans for one t-length.
#[derive(Clone)]
pub struct TPlan {
    nt: usize,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
    scale_fwd: f64,
    scale_inv: f64,
}

impl TPlan {
    pub fn new(grid: &GridSpec) -> Self {
        let mut planner = FftPlanner::new();
        let nt = grid.nt;
        let dt = grid.dt();
        TPlan {
            nt,
            fwd: planner.plan_fft_forward(nt),
            inv: planner.plan_fft_inverse(nt),
            scale_fwd: dt / (2.0 * PI).sqrt(),
            // inverse of the forward map: f_j = (√(2π)/(Δt nt)) Σ_k (-1)^k F_k e^{2πi jk/nt}
            scale_inv: (2.0 * PI).sqrt() / (dt * nt as f64),
        }
    }

    /// In-place forward transform of every t-row of `values`.
    pub fn forward(&self, values: &mut [C64]) {
        let nt = self.nt;
        values.par_chunks_mut(nt).for_each(|row| {
            self.fwd.process(row);
            for (m, v) in row.iter_mut().enumerate() {
                let s = if signed_index(m, nt) % 2 == 0 { 1.0 } else { -1.0 };
                *v *= s * self.scale_fwd;
            }
        });
    }

    /// In-place inverse transform of every t-row of `values`.
    pub fn inverse(&self, values: &mut [C64]) {
        let nt = self.nt;
        values.par_chunks_mut(nt).for_each(|row| {
            for (m, v) in row.iter_mut().enumerate() {
                let s = if signed_index(m, nt) % 2 == 0 { 1.0 } else { -1.0 };
                *v *= s;
            }
            self.inv.process(row);
            for v in row.iter_mut() {
                *v *= self.scale_inv;
            }
        });
    }

    /// Spectral t-derivative of every row (Nyquist mode dropped).
    pub fn derivative(&self, values: &[C64], grid: &GridSpec) -> Vec<C64> {
        let mut out = values.to_vec();
        self.forward(&mut out);
        let nt = self.nt;
        out.par_chunks_mut(nt).for_each(|row| {
            for (m, v) in row.iter_mut().enumerate() {
                if signed_index(m, nt) == -(nt as i64) / 2 {
                    *v = C64::new(0.0, 0.0);
                } else {
                    *v *= C64::new(0.0, xi_at(m, grid));
                }
            }
        });
        self.inverse(&mut out);
        out
    }
}
