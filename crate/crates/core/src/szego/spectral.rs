use std::collections::HashMap;
use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{monomial, multi_indices};
use crate::heis::{GridSpec, SampledField};
use crate::quadrature::{composite_gauss_legendre, uniform_breaks};
use crate::{C64, ZERO};

/// Continuous-ξ point evaluation of the Szegő projection.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralPointConfig {
    pub degree: u32,
    /// Gauss–Legendre nodes per ξ-panel.
    pub panel_order: usize,
    /// Largest phase change of `e^{iξ(t − s)}` across one panel.
    pub phase_per_panel: f64,
    /// Upper ξ limit; the Nyquist frequency of the input grid when `None`.
    pub xi_max: Option<f64>,
}

impl Default for SpectralPointConfig {
    fn default() -> Self {
        SpectralPointConfig {
            degree: 12,
            panel_order: 16,
            phase_per_panel: 12.0,
            xi_max: None,
        }
    }
}

fn factorial(k: u32) -> f64 {
    (1..=k).map(|v| v as f64).product()
}

/// ξ-rule and Fock coefficients of every ξ-node, shared by all evaluation points.
struct SpectralData {
    nodes: Vec<f64>,
    weights: Vec<f64>,
    alphas: Vec<Vec<u32>>,
    /// `coeffs[q][k]`: coefficient of `z^{α_k}` at ξ-node `q`.
    coeffs: Vec<Vec<C64>>,
}

impl SpectralData {
    fn new(f: &SampledField, tmax_points: f64, cfg: &SpectralPointConfig) -> Self {
        let g = &f.grid;
        let n = g.n;
        let xi_max = cfg.xi_max.unwrap_or_else(|| g.nyquist());
        let tmax = tmax_points + g.t;
        let panels = ((xi_max * tmax / cfg.phase_per_panel).ceil() as usize).max(4);
        let rule = composite_gauss_legendre(&uniform_breaks(0.0, xi_max, panels), cfg.panel_order);
        let nq = rule.len();
        let nt = g.nt;
        let nzp = g.nzpoints();
        let ta = g.t_axis();
        let zt = g.z_table();
        let r2 = g.z_norm_sqr();
        let alphas = multi_indices(n, cfg.degree);

        let pref = g.dt() / (2.0 * PI).sqrt();
        let etab: Vec<C64> = rule
            .nodes
            .iter()
            .flat_map(|&xi| ta.iter().map(move |&t| C64::new(0.0, -xi * t).exp()))
            .collect();
        // transform at the ξ nodes, per lattice z
        let per_z: Vec<Vec<C64>> = (0..nzp)
            .into_par_iter()
            .map(|iz| {
                let row = &f.values[iz * nt..(iz + 1) * nt];
                (0..nq)
                    .map(|q| {
                        let e = &etab[q * nt..(q + 1) * nt];
                        row.iter().zip(e).map(|(a, b)| a * b).sum::<C64>() * pref
                    })
                    .collect()
            })
            .collect();

        let conj_mono: Vec<Vec<C64>> = alphas
            .iter()
            .map(|a| (0..nzp).map(|iz| monomial(a, &zt[iz * n..(iz + 1) * n]).conj()).collect())
            .collect();
        let cell = g.z_cell();
        let coeffs: Vec<Vec<C64>> = (0..nq)
            .into_par_iter()
            .map(|q| {
                let xi = rule.nodes[q];
                let wts: Vec<C64> = (0..nzp).map(|iz| per_z[iz][q] * (-xi * r2[iz]).exp()).collect();
                alphas
                    .iter()
                    .zip(&conj_mono)
                    .map(|(a, cm)| {
                        let deg: u32 = a.iter().sum();
                        let norm = (2.0 * xi).powi((deg as usize + n) as i32)
                            / (PI.powi(n as i32) * a.iter().map(|&k| factorial(k)).product::<f64>());
                        wts.iter().zip(cm).map(|(x, y)| x * y).sum::<C64>() * cell * norm
                    })
                    .collect()
            })
            .collect();
        SpectralData {
            nodes: rule.nodes,
            weights: rule.weights,
            alphas,
            coeffs,
        }
    }

    /// Weighted ξ-profile `w_q e^{-ξ_q|z|²} Σ_α c_α(ξ_q) z^α / √(2π)` at one `z`.
    fn z_profile(&self, z: &[C64]) -> Vec<C64> {
        let s: f64 = z.iter().map(|c| c.norm_sqr()).sum();
        let mono: Vec<C64> = self.alphas.iter().map(|a| monomial(a, z)).collect();
        let inv = 1.0 / (2.0 * PI).sqrt();
        self.nodes
            .iter()
            .enumerate()
            .map(|(q, &xi)| {
                let e = (-xi * s).exp();
                if e == 0.0 {
                    return ZERO;
                }
                let p: C64 = self.coeffs[q].iter().zip(&mono).map(|(c, m)| c * m).sum();
                p * e * self.weights[q] * inv
            })
            .collect()
    }

    fn t_phases(&self, t: f64) -> Vec<C64> {
        self.nodes.iter().map(|&xi| C64::new(0.0, xi * t).exp()).collect()
    }
}

fn check_dim(f: &SampledField, n: usize) -> Result<()> {
    if f.grid.n != n {
        return Err(Error::InvalidParameter("point dimension differs from the grid".into()));
    }
    Ok(())
}

/// Evaluates `𝒮ₙf` at arbitrary points from the lattice samples of `f`.
///
/// The t-transform is taken at continuous ξ by direct sums over the
/// t-lattice, each slice is projected with the analytic Fock norms, and the
/// inverse transform is a composite Gauss–Legendre integral over `(0, ξ_max]`.
pub fn szego_eval_spectral(f: &SampledField, points: &[(Vec<C64>, f64)], cfg: &SpectralPointConfig) -> Result<Vec<C64>> {
    for (z, _) in points {
        check_dim(f, z.len())?;
    }
    if points.is_empty() {
        return Ok(Vec::new());
    }
    let tmax = points.iter().map(|p| p.1.abs()).fold(0.0, f64::max);
    let data = SpectralData::new(f, tmax, cfg);

    // group by z and t
    let mut zkeys: HashMap<Vec<u64>, usize> = HashMap::new();
    let mut zlist: Vec<&[C64]> = Vec::new();
    let mut tkeys: HashMap<u64, usize> = HashMap::new();
    let mut tlist: Vec<f64> = Vec::new();
    let mut index = Vec::with_capacity(points.len());
    for (z, t) in points {
        let key: Vec<u64> = z.iter().flat_map(|c| [c.re.to_bits(), c.im.to_bits()]).collect();
        let zi = *zkeys.entry(key).or_insert_with(|| {
            zlist.push(z);
            zlist.len() - 1
        });
        let ti = *tkeys.entry(t.to_bits()).or_insert_with(|| {
            tlist.push(*t);
            tlist.len() - 1
        });
        index.push((zi, ti));
    }
    let gz: Vec<Vec<C64>> = zlist.par_iter().map(|z| data.z_profile(z)).collect();
    let ttab: Vec<Vec<C64>> = tlist.par_iter().map(|&t| data.t_phases(t)).collect();
    Ok(index
        .par_iter()
        .map(|&(zi, ti)| gz[zi].iter().zip(&ttab[ti]).map(|(a, b)| a * b).sum())
        .collect())
}

/// [`szego_eval_spectral`] at every lattice point of `target`.
pub fn szego_eval_spectral_grid(f: &SampledField, target: &GridSpec, cfg: &SpectralPointConfig) -> Result<SampledField> {
    check_dim(f, target.n)?;
    let data = SpectralData::new(f, target.t, cfg);
    let ttab: Vec<Vec<C64>> = target.t_axis().par_iter().map(|&t| data.t_phases(t)).collect();
    let zt = target.z_table();
    let n = target.n;
    let mut values = vec![ZERO; target.len()];
    values.par_chunks_mut(target.nt).enumerate().for_each(|(iz, row)| {
        let prof = data.z_profile(&zt[iz * n..(iz + 1) * n]);
        for (v, ph) in row.iter_mut().zip(&ttab) {
            *v = prof.iter().zip(ph).map(|(a, b)| a * b).sum();
        }
    });
    SampledField::from_values(target, values, format!("spectral projection of {}", f.provenance))
}
