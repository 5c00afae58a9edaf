//! Tangential Cauchy–Riemann operators on sampled fields.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::field::SampledField;
use super::grid::GridSpec;
use crate::tfft::TPlan;
use crate::{C64, I, ZERO};

/// How first derivatives were obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DerivativeScheme {
    /// Exact derivatives from the field's evaluator.
    Exact,
    /// Spectral in t, fourth-order differences in z (one-sided at the z-boundary).
    SpectralFd4,
    /// Spectral in t, second-order differences in z; only used for error estimates.
    SpectralFd2,
}

/// `L_j f`, `L̄_j f` (one flat array per `j`) and `∂_t f` on the lattice.
#[derive(Debug, Clone)]
pub struct CrOperators {
    pub l: Vec<Vec<C64>>,
    pub lbar: Vec<Vec<C64>>,
    pub dt: Vec<C64>,
    pub scheme: DerivativeScheme,
}

/// Result of [`cr_defect`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CrDefect {
    pub value: f64,
    pub error_estimate: f64,
    pub scheme: DerivativeScheme,
}

fn fd_along(values: &[C64], grid: &GridSpec, axis: usize, order: usize) -> Vec<C64> {
    let nz = grid.nz;
    let nt = grid.nt;
    let stride = grid.axis_stride(axis) * nt;
    let h = grid.hz();
    let mut out = vec![ZERO; values.len()];
    let digit_of = |idx: usize| (idx / stride) % nz;
    out.par_iter_mut().enumerate().for_each(|(idx, o)| {
        let i = digit_of(idx);
        let f = |k: isize| values[(idx as isize + k * stride as isize) as usize];
        *o = if order == 4 {
            if i >= 2 && i + 2 < nz {
                (f(-2) - 8.0 * f(-1) + 8.0 * f(1) - f(2)) / (12.0 * h)
            } else if i == 0 {
                (-25.0 * f(0) + 48.0 * f(1) - 36.0 * f(2) + 16.0 * f(3) - 3.0 * f(4)) / (12.0 * h)
            } else if i == 1 {
                (-3.0 * f(-1) - 10.0 * f(0) + 18.0 * f(1) - 6.0 * f(2) + f(3)) / (12.0 * h)
            } else if i == nz - 1 {
                (25.0 * f(0) - 48.0 * f(-1) + 36.0 * f(-2) - 16.0 * f(-3) + 3.0 * f(-4)) / (12.0 * h)
            } else {
                (3.0 * f(1) + 10.0 * f(0) - 18.0 * f(-1) + 6.0 * f(-2) - f(-3)) / (12.0 * h)
            }
        } else if i >= 1 && i + 1 < nz {
            (f(1) - f(-1)) / (2.0 * h)
        } else if i == 0 {
            (-3.0 * f(0) + 4.0 * f(1) - f(2)) / (2.0 * h)
        } else {
            (3.0 * f(0) - 4.0 * f(-1) + f(-2)) / (2.0 * h)
        };
    });
    out
}

fn grid_operators(f: &SampledField, scheme: DerivativeScheme) -> CrOperators {
    let g = &f.grid;
    let order = if scheme == DerivativeScheme::SpectralFd2 { 2 } else { 4 };
    let dt = TPlan::new(g).derivative(&f.values, g);
    let zt = g.z_table();
    let nt = g.nt;
    let mut l = Vec::with_capacity(g.n);
    let mut lbar = Vec::with_capacity(g.n);
    for j in 0..g.n {
        let dx = fd_along(&f.values, g, 2 * j, order);
        let dy = fd_along(&f.values, g, 2 * j + 1, order);
        let mut lj = vec![ZERO; g.len()];
        let mut lbj = vec![ZERO; g.len()];
        lj.par_chunks_mut(nt)
            .zip(lbj.par_chunks_mut(nt))
            .enumerate()
            .for_each(|(iz, (a, b))| {
                let z = zt[iz * g.n + j];
                for it in 0..nt {
                    let k = iz * nt + it;
                    let dz = 0.5 * (dx[k] - I * dy[k]);
                    let dzb = 0.5 * (dx[k] + I * dy[k]);
                    a[it] = dz + I * z.conj() * dt[k];
                    b[it] = dzb - I * z * dt[k];
                }
            });
        l.push(lj);
        lbar.push(lbj);
    }
    CrOperators { l, lbar, dt, scheme }
}

fn exact_operators(f: &SampledField) -> Option<CrOperators> {
    let ev = f.evaluator.as_ref()?;
    let g = &f.grid;
    let jets = ev.sample_jets(g)?;
    let zt = g.z_table();
    let nt = g.nt;
    let mut l = vec![vec![ZERO; g.len()]; g.n];
    let mut lbar = vec![vec![ZERO; g.len()]; g.n];
    let mut dt = vec![ZERO; g.len()];
    for (k, jet) in jets.iter().enumerate() {
        let iz = k / nt;
        dt[k] = jet.dt;
        for j in 0..g.n {
            let z = zt[iz * g.n + j];
            l[j][k] = jet.dz[j] + I * z.conj() * jet.dt;
            lbar[j][k] = jet.dzbar[j] - I * z * jet.dt;
        }
    }
    Some(CrOperators {
        l,
        lbar,
        dt,
        scheme: DerivativeScheme::Exact,
    })
}

/// CR operators of `f`: exact when the evaluator supplies derivatives,
/// otherwise spectral-in-t plus fourth-order differences in z.
pub fn cr_operators(f: &SampledField) -> CrOperators {
    exact_operators(f).unwrap_or_else(|| grid_operators(f, DerivativeScheme::SpectralFd4))
}

/// Lattice sum of `|v|²` times the cell volume, with the coarse-lattice
/// (every other point per axis) sum used as a quadrature error estimate.
pub(crate) fn energy_with_error(arrays: &[&[C64]], grid: &GridSpec) -> (f64, f64) {
    let nt = grid.nt;
    let mut fine = 0.0;
    let mut coarse = 0.0;
    for a in arrays {
        for (k, v) in a.iter().enumerate() {
            let e = v.norm_sqr();
            fine += e;
            let iz = k / nt;
            if (k % nt) % 2 == 0 && grid.z_digits(iz).iter().all(|d| d % 2 == 0) {
                coarse += e;
            }
        }
    }
    let cell = grid.cell();
    let fine = fine * cell;
    let coarse = coarse * cell * 2f64.powi(2 * grid.n as i32 + 1);
    (fine, (fine - coarse).abs())
}

/// L² norm of the tangential CR defect `(Σ_j ‖L̄_j f‖²)^{1/2}`.
pub fn cr_defect(f: &SampledField) -> CrDefect {
    let ops = cr_operators(f);
    let refs: Vec<&[C64]> = ops.lbar.iter().map(|v| v.as_slice()).collect();
    let (e, qerr) = energy_with_error(&refs, &f.grid);
    let value = e.sqrt();
    let mut error_estimate = (e + qerr).sqrt() - value;
    if ops.scheme != DerivativeScheme::Exact {
        let low = grid_operators(f, DerivativeScheme::SpectralFd2);
        let refs2: Vec<&[C64]> = low.lbar.iter().map(|v| v.as_slice()).collect();
        let (e2, _) = energy_with_error(&refs2, &f.grid);
        error_estimate += (e2.sqrt() - value).abs();
    }
    CrDefect {
        value,
        error_estimate,
        scheme: ops.scheme,
    }
}
