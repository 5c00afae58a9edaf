use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::conjugate;
use crate::error::{Error, Result};
use crate::heis::{Closure, GridSpec, SampledField};
use crate::szego::{szego_apply, SzegoConfig};
use crate::{C64, I};

/// `f_{a,b}(z,t) = (1 + |z|² − it)^{-a} (1 + |z|² + it)^{-b}` on ℍⁿ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExtremizerFamily {
    pub n: usize,
}

/// How a parameter pair is turned into a trial function at exponent `p`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Realisation {
    /// The family member itself (used for `p ≤ 2`).
    Direct,
    /// `|𝒮g|^{q−2} 𝒮g` with `g = f_{a,b}` and `q` conjugate to `p` (used for
    /// `p > 2`); its p-Rayleigh quotient dominates the q-Rayleigh quotient of `g`.
    Dual,
}

impl ExtremizerFamily {
    pub fn realisation(p: f64) -> Realisation {
        if p > 2.0 {
            Realisation::Dual
        } else {
            Realisation::Direct
        }
    }

    /// Lower limit for `a + b` at exponent `p`: membership of the sampled
    /// member in L² and in the L^r it is measured in.
    pub fn threshold(&self, p: f64) -> f64 {
        let m = (self.n + 1) as f64;
        match Self::realisation(p) {
            Realisation::Direct => (m / p).max(m / 2.0),
            Realisation::Dual => (m / conjugate(p)).max(m / 2.0),
        }
    }

    pub fn feasible(&self, a: f64, b: f64, p: f64) -> bool {
        a >= 0.0 && b >= 0.0 && a + b > self.threshold(p)
    }

    /// Exact evaluator of `f_{a,b}`.
    pub fn evaluator(&self, a: f64, b: f64) -> Closure {
        Closure::new(self.n, format!("f_(a={a},b={b})"), move |z: &[C64], t: f64| {
            let s: f64 = z.iter().map(|c| c.norm_sqr()).sum();
            let l = (C64::new(1.0 + s, 0.0) - I * t).ln();
            (-a * l - b * l.conj()).exp()
        })
    }
}

/// Search box `[a_lo, a_hi] × [b_lo, b_hi]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FamilyBox {
    pub a: (f64, f64),
    pub b: (f64, f64),
}

impl FamilyBox {
    pub fn new(a: (f64, f64), b: (f64, f64)) -> Result<Self> {
        if !(a.0 <= a.1 && b.0 <= b.1 && a.0 >= 0.0 && b.0 >= 0.0) {
            return Err(Error::InvalidParameter(format!("bad search box {a:?} x {b:?}")));
        }
        Ok(FamilyBox { a, b })
    }

    pub fn square(lo: f64, hi: f64) -> Self {
        FamilyBox { a: (lo, hi), b: (lo, hi) }
    }

    pub fn clamp(&self, x: [f64; 2]) -> [f64; 2] {
        [x[0].clamp(self.a.0, self.a.1), x[1].clamp(self.b.0, self.b.1)]
    }

    pub fn widths(&self) -> [f64; 2] {
        [self.a.1 - self.a.0, self.b.1 - self.b.0]
    }
}

/// Grid tables reused across family members.
pub struct FamilyPlan {
    pub family: ExtremizerFamily,
    pub grid: GridSpec,
    pub cfg: SzegoConfig,
    log: Vec<C64>,
}

impl FamilyPlan {
    pub fn new(family: ExtremizerFamily, grid: &GridSpec, cfg: &SzegoConfig) -> Result<Self> {
        if family.n != grid.n {
            return Err(Error::InvalidParameter("family and grid dimensions differ".into()));
        }
        let r2 = grid.z_norm_sqr();
        let ta = grid.t_axis();
        let nt = grid.nt;
        let mut log = vec![C64::new(0.0, 0.0); grid.len()];
        log.par_chunks_mut(nt).enumerate().for_each(|(iz, row)| {
            for (v, &t) in row.iter_mut().zip(&ta) {
                *v = (C64::new(1.0 + r2[iz], 0.0) - I * t).ln();
            }
        });
        Ok(FamilyPlan {
            family,
            grid: grid.clone(),
            cfg: *cfg,
            log,
        })
    }

    /// `f_{a,b}` sampled on the grid, with its exact evaluator attached.
    pub fn member(&self, a: f64, b: f64) -> SampledField {
        let vals = self.log.par_iter().map(|l| (-a * l - b * l.conj()).exp()).collect();
        let mut f = SampledField::zeros(&self.grid).with_values(vals, format!("f_(a={a},b={b})"));
        f.evaluator = Some(Arc::new(self.family.evaluator(a, b)));
        f
    }

    /// The trial function used at exponent `p`.
    pub fn trial(&self, a: f64, b: f64, p: f64) -> Result<SampledField> {
        let g = self.member(a, b);
        match ExtremizerFamily::realisation(p) {
            Realisation::Direct => Ok(g),
            Realisation::Dual => {
                let q = conjugate(p);
                let sg = szego_apply(&g, &self.cfg)?;
                let vals = sg
                    .values
                    .par_iter()
                    .map(|v| {
                        let r = v.norm();
                        if r == 0.0 {
                            C64::new(0.0, 0.0)
                        } else {
                            v * r.powf(q - 2.0)
                        }
                    })
                    .collect();
                let mut f = sg.with_values(vals, format!("dual_q={q}(f_(a={a},b={b}))"));
                f.warnings.extend(g.warnings);
                Ok(f)
            }
        }
    }
}
