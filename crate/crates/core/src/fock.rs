//! Fock spaces `F²(ℂⁿ, e^{-2ξ|z|²})` and their Bergman projections.
//!
//! Inner products use tensor Gauss–Hermite rules whose nodes are rescaled by
//! `(2ξ)^{-1/2}` so that the rule weight is exactly `e^{-2ξ|z|²}`.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::gauss_hermite;
use crate::{C64, ZERO};

/// Frequency, dimension, truncation degree and Hermite order.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FockParam {
    pub xi: f64,
    pub n: usize,
    /// Monomial degree cutoff `D`.
    pub degree: u32,
    /// Gauss–Hermite order `Q` per real axis.
    pub order: usize,
}

impl FockParam {
    /// `D = 12`, `Q = 40`.
    pub fn new(xi: f64, n: usize) -> Self {
        FockParam {
            xi,
            n,
            degree: 12,
            order: 40,
        }
    }

    pub fn with_degree(mut self, degree: u32) -> Self {
        self.degree = degree;
        self
    }

    pub fn with_order(mut self, order: usize) -> Self {
        self.order = order;
        self
    }

    fn check(&self) -> Result<()> {
        if !(self.xi > 0.0) {
            return Err(Error::NonpositiveFrequency(self.xi));
        }
        if self.n == 0 {
            return Err(Error::InvalidParameter("n must be positive".into()));
        }
        if self.order < self.degree as usize + 2 {
            return Err(Error::InvalidParameter(format!(
                "Hermite order {} < degree {} + 2",
                self.order, self.degree
            )));
        }
        Ok(())
    }
}

/// All multi-indices of length `n` and total degree ≤ `d`, graded order.
pub fn multi_indices(n: usize, d: u32) -> Vec<Vec<u32>> {
    fn rec(n: usize, left: u32, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if cur.len() == n {
            out.push(cur.clone());
            return;
        }
        for k in 0..=left {
            cur.push(k);
            rec(n, left - k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    for deg in 0..=d {
        let mut level = Vec::new();
        let mut cur = Vec::new();
        rec(n, deg, &mut cur, &mut level);
        level.retain(|a| a.iter().sum::<u32>() == deg);
        out.extend(level);
    }
    out
}

fn factorial(k: u32) -> f64 {
    (1..=k).map(|v| v as f64).product()
}

/// `‖z^α‖²` in `F²(e^{-2ξ|z|²})`: `Π_j π α_j! / (2ξ)^{α_j+1}`.
pub fn monomial_norm_sqr(alpha: &[u32], xi: f64) -> f64 {
    alpha
        .iter()
        .map(|&a| PI * factorial(a) / (2.0 * xi).powi(a as i32 + 1))
        .product()
}

/// `z^α`.
pub fn monomial(alpha: &[u32], z: &[C64]) -> C64 {
    alpha
        .iter()
        .zip(z)
        .fold(C64::new(1.0, 0.0), |acc, (&a, zj)| acc * zj.powu(a))
}

/// Tensor Gauss–Hermite rule for `e^{-2ξ|z|²} dA` on ℂⁿ.
#[derive(Debug, Clone)]
pub struct FockQuadrature {
    pub n: usize,
    /// Node coordinates, flat with stride `n`.
    pub points: Vec<C64>,
    pub weights: Vec<f64>,
}

impl FockQuadrature {
    pub fn new(xi: f64, n: usize, order: usize) -> Self {
        let r = gauss_hermite(order);
        let s = (2.0 * xi).sqrt();
        let x: Vec<f64> = r.nodes.iter().map(|v| v / s).collect();
        let w: Vec<f64> = r.weights.iter().map(|v| v / s).collect();
        let q = x.len();
        let total = q.pow(2 * n as u32);
        let mut points = Vec::with_capacity(total * n);
        let mut weights = Vec::with_capacity(total);
        for mut idx in 0..total {
            let mut digits = vec![0usize; 2 * n];
            for k in (0..2 * n).rev() {
                digits[k] = idx % q;
                idx /= q;
            }
            let mut wt = 1.0;
            for j in 0..n {
                points.push(C64::new(x[digits[2 * j]], x[digits[2 * j + 1]]));
                wt *= w[digits[2 * j]] * w[digits[2 * j + 1]];
            }
            weights.push(wt);
        }
        FockQuadrature { n, points, weights }
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn point(&self, k: usize) -> &[C64] {
        &self.points[k * self.n..(k + 1) * self.n]
    }

    fn values(&self, u: &dyn Fn(&[C64]) -> C64) -> Vec<C64> {
        (0..self.len()).map(|k| u(self.point(k))).collect()
    }
}

/// Truncated holomorphic expansion `Σ_{|α| ≤ D} c_α z^α`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonomialCoeffs {
    pub n: usize,
    pub degree: u32,
    pub coeffs: BTreeMap<Vec<u32>, C64>,
}

impl MonomialCoeffs {
    pub fn get(&self, alpha: &[u32]) -> C64 {
        self.coeffs.get(alpha).copied().unwrap_or(ZERO)
    }

    pub fn eval(&self, z: &[C64]) -> C64 {
        self.coeffs.iter().map(|(a, c)| c * monomial(a, z)).sum()
    }

    /// Largest coefficient difference.
    pub fn max_diff(&self, other: &MonomialCoeffs) -> f64 {
        let keys: std::collections::BTreeSet<&Vec<u32>> = self.coeffs.keys().chain(other.coeffs.keys()).collect();
        keys.into_iter()
            .map(|k| (self.get(k) - other.get(k)).norm())
            .fold(0.0, f64::max)
    }
}

/// `∫ u v̄ e^{-2ξ|z|²} dA`.
pub fn gaussian_inner(u: &dyn Fn(&[C64]) -> C64, v: &dyn Fn(&[C64]) -> C64, p: &FockParam) -> Result<C64> {
    p.check()?;
    let q = FockQuadrature::new(p.xi, p.n, p.order);
    Ok((0..q.len())
        .map(|k| {
            let z = q.point(k);
            q.weights[k] * u(z) * v(z).conj()
        })
        .sum())
}

fn project_values(vals: &[C64], q: &FockQuadrature, p: &FockParam) -> MonomialCoeffs {
    let mut coeffs = BTreeMap::new();
    for alpha in multi_indices(p.n, p.degree) {
        let ip: C64 = (0..q.len())
            .map(|k| q.weights[k] * vals[k] * monomial(&alpha, q.point(k)).conj())
            .sum();
        coeffs.insert(alpha.clone(), ip / monomial_norm_sqr(&alpha, p.xi));
    }
    MonomialCoeffs {
        n: p.n,
        degree: p.degree,
        coeffs,
    }
}

/// Degree-`D` truncation of the Bergman projection `B_ξ u`.
pub fn fock_project(u: &dyn Fn(&[C64]) -> C64, p: &FockParam) -> Result<MonomialCoeffs> {
    p.check()?;
    let q = FockQuadrature::new(p.xi, p.n, p.order);
    Ok(project_values(&q.values(u), &q, p))
}

/// `(2ξ/π)ⁿ ∫ e^{2ξ w·z̄} u(z) e^{-2ξ|z|²} dA(z)` by Hermite quadrature.
///
/// The rule order is raised to `max(2Q, 48)` and checked against a second
/// rule 16 orders higher.
pub fn fock_kernel_apply(u: &dyn Fn(&[C64]) -> C64, p: &FockParam, w: &[C64]) -> Result<C64> {
    p.check()?;
    let eval = |order: usize| -> C64 {
        let q = FockQuadrature::new(p.xi, p.n, order);
        let s: C64 = (0..q.len())
            .map(|k| {
                let z = q.point(k);
                let dot: C64 = w.iter().zip(z).map(|(a, b)| a * b.conj()).sum();
                q.weights[k] * (2.0 * p.xi * dot).exp() * u(z)
            })
            .sum();
        s * (2.0 * p.xi / PI).powi(p.n as i32)
    };
    let base = (2 * p.order).max(48);
    let a = eval(base);
    let b = eval(base + 16);
    let scale = a.norm().max(b.norm()).max(1e-300);
    if (a - b).norm() > 1e-8 * scale.max(1.0) {
        return Err(Error::QuadratureFailure(format!(
            "Fock kernel quadrature unresolved at w = {w:?}: {a} vs {b}"
        )));
    }
    Ok(b)
}

/// Outcome of [`fock_defect_check`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DefectCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub ok: bool,
}

/// Inequality-check slack `1e-9 (1 + rhs)`.
pub fn slack(rhs: f64) -> f64 {
    1e-9 * (1.0 + rhs)
}

/// Checks `‖(1 − B_ξ)u‖² ≤ (2/ξ) Σ_j ‖∂_{z̄_j} u‖²` in the weighted norm.
pub fn fock_defect_check(
    u: &dyn Fn(&[C64]) -> C64,
    dbar_u: &dyn Fn(&[C64]) -> Vec<C64>,
    p: &FockParam,
) -> Result<DefectCheck> {
    p.check()?;
    let q = FockQuadrature::new(p.xi, p.n, p.order);
    let vals = q.values(u);
    let c = project_values(&vals, &q, p);
    let mut lhs = 0.0;
    let mut rhs = 0.0;
    for k in 0..q.len() {
        let z = q.point(k);
        lhs += q.weights[k] * (vals[k] - c.eval(z)).norm_sqr();
        rhs += q.weights[k] * dbar_u(z).iter().map(|v| v.norm_sqr()).sum::<f64>();
    }
    rhs *= 2.0 / p.xi;
    Ok(DefectCheck {
        lhs,
        rhs,
        ok: lhs <= rhs + slack(rhs),
    })
}
