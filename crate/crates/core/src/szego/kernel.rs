use std::f64::consts::PI;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::heis::SampledField;
use crate::{C64, I};

/// Lattice points with `|f| ≤ SUPPORT_THRESHOLD · max|f|` count as off-support.
pub const SUPPORT_THRESHOLD: f64 = 1e-12;

/// `c_n = 2^{n-1} n! / π^{n+1}`, from `(1/2π)(2/π)ⁿ ∫₀^∞ ξⁿ e^{-ξA} dξ = c_n A^{-(n+1)}`.
pub fn kernel_constant(n: usize) -> f64 {
    let fact: f64 = (1..=n).map(|k| k as f64).product();
    2f64.powi(n as i32 - 1) * fact / PI.powi(n as i32 + 1)
}

fn a_form(z: &[C64], t: f64, w: &[C64], s: f64) -> C64 {
    let mut a = C64::new(0.0, 0.0);
    for (zj, wj) in z.iter().zip(w) {
        a += zj.norm_sqr() + wj.norm_sqr() - 2.0 * zj * wj.conj();
    }
    a - I * (t - s)
}

/// `|A(x, y)|^{1/2}`, the Koranyi gauge of `y⁻¹x` for the group law matching the kernel.
pub fn koranyi_distance(x: (&[C64], f64), y: (&[C64], f64)) -> f64 {
    a_form(x.0, x.1, y.0, y.1).norm().sqrt()
}

/// Closed-form Szegő kernel `c_n A^{-(n+1)}`,
/// `A = |z|² + |w|² − 2⟨z, w̄⟩ − i(t − s)`.
pub fn szego_kernel(x: (&[C64], f64), y: (&[C64], f64)) -> Result<C64> {
    let n = x.0.len();
    let a = a_form(x.0, x.1, y.0, y.1);
    if a.norm() == 0.0 {
        return Err(Error::DiagonalSingularity);
    }
    Ok(kernel_constant(n) * a.powi(-(n as i32 + 1)))
}

/// `∫ K(x, y) f(y) dσ(y)` by lattice quadrature at points off the support of `f`.
pub fn szego_apply_kernel(f: &SampledField, points: &[(Vec<C64>, f64)], delta: f64) -> Result<Vec<C64>> {
    let g = &f.grid;
    let n = g.n;
    let nt = g.nt;
    let peak = f.max_abs();
    if peak == 0.0 {
        return Ok(vec![C64::new(0.0, 0.0); points.len()]);
    }
    let zt = g.z_table();
    let ta = g.t_axis();
    let support: Vec<(usize, usize)> = (0..g.len())
        .filter(|&k| f.values[k].norm() > SUPPORT_THRESHOLD * peak)
        .map(|k| (k / nt, k % nt))
        .collect();
    let c = kernel_constant(n);
    let cell = g.cell();
    points
        .par_iter()
        .enumerate()
        .map(|(idx, (z, t))| {
            let mut dmin = f64::INFINITY;
            let mut acc = C64::new(0.0, 0.0);
            for &(iz, it) in &support {
                let w = &zt[iz * n..(iz + 1) * n];
                let a = a_form(z, *t, w, ta[it]);
                dmin = dmin.min(a.norm().sqrt());
                acc += f.values[iz * nt + it] * a.powi(-(n as i32 + 1));
            }
            if dmin < delta {
                return Err(Error::PointTooCloseToSupport {
                    index: idx,
                    distance: dmin,
                    delta,
                });
            }
            Ok(acc * c * cell)
        })
        .collect()
}
