use std::sync::{Arc, Mutex, OnceLock};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::SzegoConfig;
use crate::error::Result;
use crate::fock::{monomial, multi_indices};
use crate::heis::{GridSpec, SampledField, TruncationWarning};
use crate::tfft::{xi_at, TPlan};
use crate::{C64, ZERO};

/// Slice boundary-to-peak ratio above which a truncation warning is raised.
pub const LIFT_THRESHOLD: f64 = 1e-6;
/// Slices carrying less than this fraction of the total energy are not inspected.
const SLICE_ENERGY_FLOOR: f64 = 1e-10;

/// Orthonormal bases (in the plain lattice inner product) of
/// `span{e^{-ξ|z|²} z^α : |α| ≤ D}` for every positive lattice frequency.
struct SzegoPlan {
    /// Per storage index `m`: basis vectors of length `nzpoints`, concatenated.
    bases: Vec<Vec<C64>>,
    ranks: Vec<usize>,
}

impl SzegoPlan {
    fn build(grid: &GridSpec, degree: u32, rank_tol: f64) -> SzegoPlan {
        let zt = grid.z_table();
        let nzp = grid.nzpoints();
        let n = grid.n;
        let r2 = grid.z_norm_sqr();
        let alphas = multi_indices(n, degree);
        let built: Vec<(Vec<C64>, usize)> = (0..grid.nt)
            .into_par_iter()
            .map(|m| {
                let xi = xi_at(m, grid);
                if xi <= 0.0 {
                    return (Vec::new(), 0);
                }
                let weight: Vec<f64> = r2.iter().map(|s| (-xi * s).exp()).collect();
                let mut q: Vec<C64> = Vec::new();
                let mut rank = 0;
                for alpha in &alphas {
                    let mut v: Vec<C64> = (0..nzp)
                        .map(|iz| weight[iz] * monomial(alpha, &zt[iz * n..(iz + 1) * n]))
                        .collect();
                    let norm0 = v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
                    if norm0 == 0.0 || !norm0.is_finite() {
                        continue;
                    }
                    for c in v.iter_mut() {
                        *c /= norm0;
                    }
                    for _ in 0..2 {
                        for k in 0..rank {
                            let qk = &q[k * nzp..(k + 1) * nzp];
                            let ip: C64 = qk.iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
                            for (c, a) in v.iter_mut().zip(qk) {
                                *c -= ip * a;
                            }
                        }
                    }
                    let norm = v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
                    if norm < rank_tol {
                        continue;
                    }
                    q.extend(v.iter().map(|c| c / norm));
                    rank += 1;
                }
                (q, rank)
            })
            .collect();
        let (bases, ranks) = built.into_iter().unzip();
        SzegoPlan { bases, ranks }
    }

    fn project_slice(&self, m: usize, slice: &mut [C64]) {
        let nzp = slice.len();
        let rank = self.ranks[m];
        let mut coef = vec![ZERO; rank];
        for (k, c) in coef.iter_mut().enumerate() {
            let qk = &self.bases[m][k * nzp..(k + 1) * nzp];
            *c = qk.iter().zip(slice.iter()).map(|(a, b)| a.conj() * b).sum();
        }
        slice.iter_mut().for_each(|v| *v = ZERO);
        for (k, c) in coef.iter().enumerate() {
            let qk = &self.bases[m][k * nzp..(k + 1) * nzp];
            for (v, a) in slice.iter_mut().zip(qk) {
                *v += c * a;
            }
        }
    }
}

type PlanKey = (GridSpec, u32, u64);

fn plan_for(grid: &GridSpec, cfg: &SzegoConfig) -> Arc<SzegoPlan> {
    static CACHE: OnceLock<Mutex<Vec<(PlanKey, Arc<SzegoPlan>)>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(Vec::new()));
    let key = (grid.clone(), cfg.degree, cfg.rank_tol.to_bits());
    if let Some((_, p)) = cache.lock().unwrap().iter().find(|(k, _)| *k == key) {
        return p.clone();
    }
    let plan = Arc::new(SzegoPlan::build(grid, cfg.degree, cfg.rank_tol));
    let mut c = cache.lock().unwrap();
    if c.len() >= 3 {
        c.remove(0);
    }
    c.push((key, plan.clone()));
    plan
}

/// Diagnostics of one projection.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProjectionReport {
    /// Smallest and largest retained basis size over positive frequencies.
    pub min_rank: usize,
    pub max_rank: usize,
    /// Largest slice boundary-to-peak ratio among energetic positive slices.
    pub worst_slice_boundary: f64,
}

/// Lattice Szegő projection: transform in t, project every `ξ > 0` slice
/// orthogonally onto `e^{-ξ|z|²}·Poly_{≤D}`, drop `ξ ≤ 0`, transform back.
pub fn szego_apply(f: &SampledField, cfg: &SzegoConfig) -> Result<SampledField> {
    Ok(szego_apply_with_report(f, cfg)?.0)
}

pub fn szego_apply_with_report(f: &SampledField, cfg: &SzegoConfig) -> Result<(SampledField, ProjectionReport)> {
    cfg.validate()?;
    let g = &f.grid;
    let nt = g.nt;
    let nzp = g.nzpoints();
    let plan = plan_for(g, cfg);
    let tp = TPlan::new(g);

    let mut rows = f.values.clone();
    tp.forward(&mut rows);
    // slice-major copy: slices[m * nzp + iz]
    let mut slices = vec![ZERO; rows.len()];
    slices.par_chunks_mut(nzp).enumerate().for_each(|(m, s)| {
        for (iz, v) in s.iter_mut().enumerate() {
            *v = rows[iz * nt + m];
        }
    });
    let total: f64 = slices.iter().map(|v| v.norm_sqr()).sum();
    let boundary: Vec<bool> = (0..nzp).map(|iz| g.on_z_boundary(iz)).collect();
    let ratios: Vec<f64> = slices
        .par_chunks_mut(nzp)
        .enumerate()
        .map(|(m, s)| {
            if xi_at(m, g) <= 0.0 {
                s.iter_mut().for_each(|v| *v = ZERO);
                return 0.0;
            }
            let energy: f64 = s.iter().map(|v| v.norm_sqr()).sum();
            let mut ratio = 0.0;
            if total > 0.0 && energy > SLICE_ENERGY_FLOOR * total {
                let peak = s.iter().map(|v| v.norm()).fold(0.0, f64::max);
                let edge = s
                    .iter()
                    .zip(&boundary)
                    .filter(|(_, b)| **b)
                    .map(|(v, _)| v.norm())
                    .fold(0.0, f64::max);
                ratio = edge / peak;
            }
            plan.project_slice(m, s);
            ratio
        })
        .collect();
    rows.par_chunks_mut(nt).enumerate().for_each(|(iz, r)| {
        for (m, v) in r.iter_mut().enumerate() {
            *v = slices[m * nzp + iz];
        }
    });
    tp.inverse(&mut rows);

    let worst = ratios.iter().cloned().fold(0.0, f64::max);
    let pos: Vec<usize> = (0..nt).filter(|&m| xi_at(m, g) > 0.0).map(|m| plan.ranks[m]).collect();
    let report = ProjectionReport {
        min_rank: pos.iter().cloned().min().unwrap_or(0),
        max_rank: pos.iter().cloned().max().unwrap_or(0),
        worst_slice_boundary: worst,
    };
    let mut out = f.with_values(rows, format!("S({})", f.provenance));
    out.warnings.extend(f.warnings.iter().filter(|w| w.source != "field boundary").cloned());
    if worst > LIFT_THRESHOLD {
        out.warnings.push(TruncationWarning {
            source: "szego lift".into(),
            boundary_ratio: worst,
            threshold: LIFT_THRESHOLD,
        });
    }
    Ok((out, report))
}
