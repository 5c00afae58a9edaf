use std::f64::consts::PI;
use std::sync::Arc;

use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use super::grid::{frame_adjoint, frame_apply, Frame, SphereField, SphereGrid, SpherePoint};
use crate::error::{Error, Result};
use crate::{C64, ZERO};

/// Settings for [`sphere_szego_apply_with`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SphereProjectionConfig {
    /// Keep only `η^α` with `|α| ≤ max_degree`.
    pub max_degree: Option<usize>,
    /// Largest admissible ratio of outer-band to peak angular modes.
    pub alias_tol: f64,
}

impl Default for SphereProjectionConfig {
    fn default() -> Self {
        SphereProjectionConfig {
            max_degree: None,
            alias_tol: 1e-6,
        }
    }
}

/// Truncated expansion `Σ c_α η^α` in the frame coordinates `η = frame* ζ`.
/// Coefficients are stored at `α₁·k2 + α₂`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SphereExpansion {
    pub k1: usize,
    pub k2: usize,
    pub frame: Frame,
    pub coeffs: Vec<C64>,
}

/// Output of [`sphere_szego_apply_with`].
#[derive(Debug, Clone)]
pub struct SphereProjection {
    pub values: SphereField,
    pub expansion: SphereExpansion,
    pub alias: Alias,
}

/// Outer-band to peak ratios of the angular spectrum, per angle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Alias {
    pub phi1: f64,
    pub phi2: f64,
}

impl Alias {
    pub fn max(&self) -> f64 {
        self.phi1.max(self.phi2)
    }
}

/// `‖η^α‖² = 2π² α₁! α₂! / (|α|+1)!` in `L²(S³, σ)`.
pub fn monomial_norm_sqr(a1: usize, a2: usize) -> f64 {
    2.0 * PI * PI * (ln_factorial(a1) + ln_factorial(a2) - ln_factorial(a1 + a2 + 1)).exp()
}

/// `c` in `K(ζ,ω) = c (1 − ⟨ζ,ω⟩)^{-2}`: the reciprocal of the area.
pub fn sphere_kernel_constant() -> f64 {
    1.0 / (2.0 * PI * PI)
}

/// `1 / ∫ 1 dσ` on the given grid; agrees with [`sphere_kernel_constant`] on full grids.
pub fn kernel_constant_by_quadrature(grid: &SphereGrid) -> f64 {
    let ones = SphereField::sample_frame(grid, |_| C64::new(1.0, 0.0));
    1.0 / ones.integral().re
}

fn ln_factorial(k: usize) -> f64 {
    libm::lgamma(k as f64 + 1.0)
}

/// Szegő kernel `c (1 − ⟨ζ,ω⟩)^{-2}` for `|ζ|, |ω| ≤ 1`.
pub fn sphere_kernel(zeta: [C64; 2], omega: [C64; 2]) -> Result<C64> {
    let d = C64::new(1.0, 0.0) - (zeta[0] * omega[0].conj() + zeta[1] * omega[1].conj());
    if d.norm() < 1e-14 {
        return Err(Error::DiagonalSingularity);
    }
    Ok(sphere_kernel_constant() / (d * d))
}

/// Cauchy–Szegő integral `∫ K(ζ,ω) F(ω) dσ(ω)` at points of the open ball,
/// by direct quadrature of the kernel.
pub fn cauchy_szego_extend(f: &SphereField, points: &[[C64; 2]]) -> Result<Vec<C64>> {
    let g = &f.grid;
    points
        .par_iter()
        .map(|zeta| {
            let r = zeta[0].norm_sqr() + zeta[1].norm_sqr();
            if !(r < 1.0) {
                return Err(Error::InvalidParameter(format!("|ζ|² = {r} is not inside the ball")));
            }
            let mut acc = ZERO;
            for iu in 0..g.nu() {
                let mut row = ZERO;
                for j1 in 0..g.n1 {
                    for j2 in 0..g.n2 {
                        let w = g.point(iu, j1, j2);
                        row += sphere_kernel(*zeta, w.coords())? * f.value(iu, j1, j2);
                    }
                }
                acc += row * g.weight(iu);
            }
            Ok(acc)
        })
        .collect()
}

struct Plans {
    f1: Arc<dyn Fft<f64>>,
    f2: Arc<dyn Fft<f64>>,
    i1: Arc<dyn Fft<f64>>,
    i2: Arc<dyn Fft<f64>>,
}

impl Plans {
    fn new(n1: usize, n2: usize) -> Self {
        let mut p = FftPlanner::new();
        Plans {
            f1: p.plan_fft_forward(n1),
            f2: p.plan_fft_forward(n2),
            i1: p.plan_fft_inverse(n1),
            i2: p.plan_fft_inverse(n2),
        }
    }

    /// Unnormalised 2D transform of an `n1 × n2` row-major block.
    fn run(&self, block: &mut [C64], n1: usize, n2: usize, forward: bool) {
        let (a, b) = if forward { (&self.f1, &self.f2) } else { (&self.i1, &self.i2) };
        for row in block.chunks_mut(n2) {
            b.process(row);
        }
        let mut col = vec![ZERO; n1];
        for j2 in 0..n2 {
            for j1 in 0..n1 {
                col[j1] = block[j1 * n2 + j2];
            }
            a.process(&mut col);
            for j1 in 0..n1 {
                block[j1 * n2 + j2] = col[j1];
            }
        }
    }
}

fn signed(m: usize, n: usize) -> i64 {
    if m <= n / 2 {
        m as i64
    } else {
        m as i64 - n as i64
    }
}

/// Expands `F` in the monomials `η^α`, `α₁ < n1/2`, `α₂ < n2/2`.
pub fn sphere_expand(f: &SphereField, cfg: &SphereProjectionConfig) -> Result<(SphereExpansion, Alias)> {
    let g = &f.grid;
    let (n1, n2) = (g.n1, g.n2);
    let (k1, k2) = (n1 / 2, n2 / 2);
    let plans = Plans::new(n1, n2);
    let block = n1 * n2;
    let scale = 1.0 / block as f64;
    let band1 = (3 * n1) as i64;
    let band2 = (3 * n2) as i64;

    // per u-row: (contribution to ⟨F, η^α⟩, outer-band maxima, peak)
    let rows: Vec<(Vec<C64>, [f64; 2], f64)> = f
        .values
        .par_chunks(block)
        .enumerate()
        .map(|(iu, vals)| {
            let mut spectrum = vals.to_vec();
            plans.run(&mut spectrum, n1, n2, true);
            let (mut outer, mut peak) = ([0.0f64; 2], 0.0f64);
            for m1 in 0..n1 {
                let s1 = signed(m1, n1).abs() * 8;
                for m2 in 0..n2 {
                    let s2 = signed(m2, n2).abs() * 8;
                    let a = spectrum[m1 * n2 + m2].norm() * scale;
                    peak = peak.max(a);
                    if s1 >= band1 {
                        outer[0] = outer[0].max(a);
                    }
                    if s2 >= band2 {
                        outer[1] = outer[1].max(a);
                    }
                }
            }
            let u = g.u_nodes()[iu];
            let w = 0.5 * g.u_weights()[iu] * 4.0 * PI * PI * scale;
            let (r1, r2) = (u.sqrt(), (1.0 - u).max(0.0).sqrt());
            let mut acc = vec![ZERO; k1 * k2];
            let mut p1 = 1.0;
            for a1 in 0..k1 {
                let mut p = p1;
                for a2 in 0..k2 {
                    acc[a1 * k2 + a2] = spectrum[a1 * n2 + a2] * (w * p);
                    p *= r2;
                }
                p1 *= r1;
            }
            (acc, outer, peak)
        })
        .collect();

    let mut coeffs = vec![ZERO; k1 * k2];
    let (mut outer, mut peak) = ([0.0f64; 2], 0.0f64);
    for (acc, o, p) in &rows {
        for (c, a) in coeffs.iter_mut().zip(acc) {
            *c += a;
        }
        outer = [outer[0].max(o[0]), outer[1].max(o[1])];
        peak = peak.max(*p);
    }
    for a1 in 0..k1 {
        for a2 in 0..k2 {
            let c = &mut coeffs[a1 * k2 + a2];
            if cfg.max_degree.is_some_and(|d| a1 + a2 > d) {
                *c = ZERO;
            } else {
                *c /= monomial_norm_sqr(a1, a2);
            }
        }
    }
    let rel = |o: f64| if peak > 0.0 { o / peak } else { 0.0 };
    let alias = Alias {
        phi1: rel(outer[0]),
        phi2: rel(outer[1]),
    };
    Ok((
        SphereExpansion {
            k1,
            k2,
            frame: g.frame,
            coeffs,
        },
        alias,
    ))
}

/// Szegő projection of `F` with default settings.
pub fn sphere_szego_apply(f: &SphereField) -> Result<SphereField> {
    Ok(sphere_szego_apply_with(f, &SphereProjectionConfig::default())?.values)
}

/// Szegő projection of `F`, returned at the grid nodes together with its expansion.
///
/// The kernel `c (1 − ⟨ζ,ω⟩)^{-2}` equals `Σ_α η^α(ζ) conj(η^α(ω)) / ‖η^α‖²`, so
/// applying it by quadrature amounts to the monomial expansion computed here.
pub fn sphere_szego_apply_with(f: &SphereField, cfg: &SphereProjectionConfig) -> Result<SphereProjection> {
    let (expansion, alias) = sphere_expand(f, cfg)?;
    if alias.max() > cfg.alias_tol {
        return Err(Error::QuadratureFailure(format!(
            "angular spectrum not resolved: outer-band ratio {:.3e} > {:.1e}",
            alias.max(),
            cfg.alias_tol
        )));
    }
    let values = expansion.sample(&f.grid);
    Ok(SphereProjection {
        values,
        expansion,
        alias,
    })
}

impl SphereExpansion {
    pub fn coeff(&self, a1: usize, a2: usize) -> C64 {
        if a1 < self.k1 && a2 < self.k2 {
            self.coeffs[a1 * self.k2 + a2]
        } else {
            ZERO
        }
    }

    /// Values at the nodes of `grid`; the grid must share this expansion's frame.
    pub fn sample(&self, grid: &SphereGrid) -> SphereField {
        let (n1, n2) = (grid.n1, grid.n2);
        let block = n1 * n2;
        let plans = Plans::new(n1, n2);
        let mut values = vec![ZERO; grid.len()];
        let (k1, k2) = (self.k1.min(n1 / 2), self.k2.min(n2 / 2));
        values.par_chunks_mut(block).enumerate().for_each(|(iu, out)| {
            let u = grid.u_nodes()[iu];
            let (r1, r2) = (u.sqrt(), (1.0 - u).max(0.0).sqrt());
            let mut p1 = 1.0;
            for a1 in 0..k1 {
                let mut p = p1;
                for a2 in 0..k2 {
                    out[a1 * n2 + a2] = self.coeffs[a1 * self.k2 + a2] * p;
                    p *= r2;
                }
                p1 *= r1;
            }
            plans.run(out, n1, n2, false);
        });
        SphereField {
            grid: grid.clone(),
            values,
        }
    }

    /// `P_k(x) = Σ_j c_{k,j} x^j` and `P_k′(x)` for every `k < k1`.
    pub fn radial_polys(&self, x: C64) -> (Vec<C64>, Vec<C64>) {
        let mut p = vec![ZERO; self.k1];
        let mut dp = vec![ZERO; self.k1];
        for k in 0..self.k1 {
            let row = &self.coeffs[k * self.k2..(k + 1) * self.k2];
            let (mut v, mut d) = (ZERO, ZERO);
            for c in row.iter().rev() {
                d = d * x + v;
                v = v * x + c;
            }
            p[k] = v;
            dp[k] = d;
        }
        (p, dp)
    }

    /// [`radial_polys`](Self::radial_polys) at four points, with the Horner
    /// chains interleaved.
    pub fn radial_polys4(&self, x: [C64; 4]) -> [(Vec<C64>, Vec<C64>); 4] {
        let mut out: [(Vec<C64>, Vec<C64>); 4] = std::array::from_fn(|_| (vec![ZERO; self.k1], vec![ZERO; self.k1]));
        for k in 0..self.k1 {
            let row = &self.coeffs[k * self.k2..(k + 1) * self.k2];
            let (mut v, mut d) = ([ZERO; 4], [ZERO; 4]);
            for c in row.iter().rev() {
                for l in 0..4 {
                    d[l] = d[l] * x[l] + v[l];
                    v[l] = v[l] * x[l] + c;
                }
            }
            for l in 0..4 {
                out[l].0[k] = v[l];
                out[l].1[k] = d[l];
            }
        }
        out
    }

    /// `(G, ∂G/∂η₁, ∂G/∂η₂)` at frame coordinates `η`.
    pub fn eval_frame_gradient(&self, eta: [C64; 2]) -> (C64, C64, C64) {
        let (p, dp) = self.radial_polys(eta[1]);
        combine(&p, &dp, eta[0])
    }

    pub fn eval_frame(&self, eta: [C64; 2]) -> C64 {
        self.eval_frame_gradient(eta).0
    }

    /// Value at a point of the closed ball in ambient coordinates.
    pub fn eval(&self, zeta: [C64; 2]) -> C64 {
        self.eval_frame(frame_apply(&frame_adjoint(&self.frame), zeta))
    }

    pub fn eval_point(&self, x: &SpherePoint) -> C64 {
        self.eval(x.coords())
    }

    /// `Σ |c_α|² ‖η^α‖²`.
    pub fn norm_sqr(&self) -> f64 {
        let mut s = 0.0;
        for a1 in 0..self.k1 {
            for a2 in 0..self.k2 {
                s += self.coeff(a1, a2).norm_sqr() * monomial_norm_sqr(a1, a2);
            }
        }
        s
    }
}

/// `Σ_k x^k P_k`, its `x`-derivative and `Σ_k x^k P_k′`.
pub(crate) fn combine(p: &[C64], dp: &[C64], x: C64) -> (C64, C64, C64) {
    let (mut g, mut g1, mut g2) = (ZERO, ZERO, ZERO);
    for k in (0..p.len()).rev() {
        g1 = g1 * x + g;
        g = g * x + p[k];
        g2 = g2 * x + dp[k];
    }
    (g, g1, g2)
}
