use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::conjugate;
use super::family::{FamilyBox, FamilyPlan};
use super::lp::{rayleigh, RayleighResult};
use crate::error::{Error, Result};

/// Budget and seed of [`maximize_rayleigh`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SearchOptions {
    /// Maximum number of Rayleigh evaluations (at least 20).
    pub budget: usize,
    pub seed: u64,
}

/// One evaluation of the search.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceEntry {
    pub evaluation: usize,
    pub a: f64,
    pub b: f64,
    /// Rayleigh value, `None` for infeasible parameters.
    pub value: Option<f64>,
    pub best_so_far: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Maximization {
    pub p: f64,
    pub params: (f64, f64),
    pub best: RayleighResult,
    pub trace: Vec<TraceEntry>,
    pub evaluations: usize,
}

struct Objective<'a> {
    plan: &'a FamilyPlan,
    p: f64,
    budget: usize,
    cache: HashMap<(u64, u64), Option<f64>>,
    results: HashMap<(u64, u64), RayleighResult>,
    trace: Vec<TraceEntry>,
    best: Option<([f64; 2], f64)>,
}

impl Objective<'_> {
    fn exhausted(&self) -> bool {
        self.trace.len() >= self.budget
    }

    /// Negated Rayleigh value (for minimisation); `+∞` when infeasible.
    fn eval(&mut self, x: [f64; 2]) -> Result<f64> {
        let key = (x[0].to_bits(), x[1].to_bits());
        if let Some(v) = self.cache.get(&key) {
            return Ok(v.map_or(f64::INFINITY, |v| -v));
        }
        if self.exhausted() {
            return Ok(f64::INFINITY);
        }
        let value = if self.plan.family.feasible(x[0], x[1], self.p) {
            let f = self.plan.trial(x[0], x[1], self.p)?;
            let r = rayleigh(&f, self.p, &self.plan.cfg)?;
            let v = r.value;
            self.results.insert(key, r);
            Some(v)
        } else {
            None
        };
        self.cache.insert(key, value);
        if let Some(v) = value {
            if self.best.is_none_or(|(_, b)| v > b) {
                self.best = Some((x, v));
            }
        }
        self.trace.push(TraceEntry {
            evaluation: self.trace.len(),
            a: x[0],
            b: x[1],
            value,
            best_so_far: self.best.map_or(f64::NEG_INFINITY, |b| b.1),
        });
        Ok(value.map_or(f64::INFINITY, |v| -v))
    }
}

fn nelder_mead(obj: &mut Objective, bx: &FamilyBox, start: [f64; 2], size: f64, angle: f64) -> Result<()> {
    let w = bx.widths();
    let (c, s) = (angle.cos(), angle.sin());
    let mut simplex: Vec<[f64; 2]> = vec![
        start,
        bx.clamp([start[0] + size * c * w[0], start[1] + size * s * w[1]]),
        bx.clamp([start[0] - size * s * w[0], start[1] + size * c * w[1]]),
    ];
    let mut vals = Vec::with_capacity(3);
    for x in &simplex {
        vals.push(obj.eval(*x)?);
    }
    let tol = 1e-3 * w[0].max(w[1]).max(1e-12);
    for _ in 0..200 {
        if obj.exhausted() {
            break;
        }
        let mut order = [0usize, 1, 2];
        order.sort_by(|&i, &j| vals[i].total_cmp(&vals[j]).then(i.cmp(&j)));
        simplex = order.iter().map(|&i| simplex[i]).collect();
        vals = order.iter().map(|&i| vals[i]).collect();
        let diam = simplex
            .iter()
            .map(|x| ((x[0] - simplex[0][0]).powi(2) + (x[1] - simplex[0][1]).powi(2)).sqrt())
            .fold(0.0, f64::max);
        if diam < tol {
            break;
        }
        let centroid = [0.5 * (simplex[0][0] + simplex[1][0]), 0.5 * (simplex[0][1] + simplex[1][1])];
        let along = |t: f64| bx.clamp([centroid[0] + t * (simplex[2][0] - centroid[0]), centroid[1] + t * (simplex[2][1] - centroid[1])]);
        let xr = along(-1.0);
        let fr = obj.eval(xr)?;
        if fr < vals[0] {
            let xe = along(-2.0);
            let fe = obj.eval(xe)?;
            if fe < fr {
                simplex[2] = xe;
                vals[2] = fe;
            } else {
                simplex[2] = xr;
                vals[2] = fr;
            }
        } else if fr < vals[1] {
            simplex[2] = xr;
            vals[2] = fr;
        } else {
            let (xc, fc) = if fr < vals[2] {
                let x = along(-0.5);
                (x, obj.eval(x)?)
            } else {
                let x = along(0.5);
                (x, obj.eval(x)?)
            };
            if fc < vals[2].min(fr) {
                simplex[2] = xc;
                vals[2] = fc;
            } else {
                for k in 1..3 {
                    simplex[k] = bx.clamp([
                        simplex[0][0] + 0.5 * (simplex[k][0] - simplex[0][0]),
                        simplex[0][1] + 0.5 * (simplex[k][1] - simplex[0][1]),
                    ]);
                    vals[k] = obj.eval(simplex[k])?;
                }
            }
        }
    }
    Ok(())
}

/// Deterministic simplex search for the largest Rayleigh quotient of the
/// family over the box.
///
/// A 3×3 lattice of the box is evaluated first; Nelder–Mead runs then start
/// from the incumbent with simplex sizes 0.25, 0.1, 0.04, … of the box width
/// until the budget is spent. The seed only fixes the simplex orientations.
pub fn maximize_rayleigh(plan: &FamilyPlan, bx: &FamilyBox, p: f64, opts: &SearchOptions) -> Result<Maximization> {
    if opts.budget < 20 {
        return Err(Error::InvalidParameter(format!("budget {} < 20", opts.budget)));
    }
    let fam = plan.family;
    let corner_ok = fam.feasible(bx.a.1, bx.b.1, p);
    if !corner_ok {
        return Err(Error::InfeasibleBox);
    }
    let mut obj = Objective {
        plan,
        p,
        budget: opts.budget,
        cache: HashMap::new(),
        results: HashMap::new(),
        trace: Vec::new(),
        best: None,
    };
    let w = bx.widths();
    if w[0] == 0.0 && w[1] == 0.0 {
        obj.eval([bx.a.0, bx.b.0])?;
    } else {
        for i in 0..3 {
            for j in 0..3 {
                let x = [bx.a.0 + 0.5 * i as f64 * w[0], bx.b.0 + 0.5 * j as f64 * w[1]];
                obj.eval(x)?;
            }
        }
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
        let mut size = 0.25;
        let mut stalls = 0;
        while !obj.exhausted() && stalls < 50 {
            let before = obj.trace.len();
            let start = obj.best.map(|b| b.0).unwrap_or([bx.a.1, bx.b.1]);
            let angle = rng.gen_range(0.0..std::f64::consts::TAU);
            nelder_mead(&mut obj, bx, start, size, angle)?;
            size = (size * 0.4).max(1e-4);
            stalls = if obj.trace.len() == before { stalls + 1 } else { 0 };
        }
    }
    let (x, _) = obj.best.ok_or(Error::InfeasibleBox)?;
    let best = obj.results[&(x[0].to_bits(), x[1].to_bits())].clone();
    Ok(Maximization {
        p,
        params: (x[0], x[1]),
        best,
        evaluations: obj.trace.len(),
        trace: obj.trace,
    })
}

/// Estimates at `p` and at the conjugate exponent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DualityResult {
    pub estimate_p: Maximization,
    pub estimate_q: Maximization,
    /// `|N_p − N_q| / max(N_p, N_q)` of the two estimates.
    pub gap: f64,
}

/// Runs [`maximize_rayleigh`] at `p` and `q = p/(p−1)`. Self-adjointness makes
/// the true norms equal, so a large gap signals under-optimisation.
pub fn duality_check(plan: &FamilyPlan, bx: &FamilyBox, p: f64, opts: &SearchOptions) -> Result<DualityResult> {
    if !(p > 1.0 && p.is_finite()) {
        return Err(Error::InvalidExponent(p));
    }
    let estimate_p = maximize_rayleigh(plan, bx, p, opts)?;
    let q = conjugate(p);
    let estimate_q = if q == p {
        estimate_p.clone()
    } else {
        maximize_rayleigh(plan, bx, q, opts)?
    };
    let (a, b) = (estimate_p.best.value, estimate_q.best.value);
    Ok(DualityResult {
        gap: (a - b).abs() / a.max(b),
        estimate_p,
        estimate_q,
    })
}
