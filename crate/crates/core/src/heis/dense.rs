//! The dense CR class: `h(z,t) = P(z) ∫ φ(ξ) e^{-ξ|z|²} e^{iξt} dξ` with `P`
//! a holomorphic polynomial and `φ` a smooth bump on `[a, b] ⊂ (0, ∞)`.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::field::{FieldEvaluator, Jet};
use super::grid::GridSpec;
use crate::error::{Error, Result};
use crate::quadrature::integrate_adaptive;
use crate::{C64, I, ZERO};

/// `φ(ξ) = exp(4/(b−a)² − 1/((ξ−a)(b−ξ)))` on `(a, b)`, zero elsewhere; peak value 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BumpProfile {
    pub a: f64,
    pub b: f64,
}

impl BumpProfile {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        if !(a > 0.0 && b > a && b.is_finite()) {
            return Err(Error::InvalidParameter(format!("bump support [{a}, {b}] must satisfy 0 < a < b")));
        }
        Ok(BumpProfile { a, b })
    }

    pub fn value(&self, xi: f64) -> f64 {
        if xi <= self.a || xi >= self.b {
            return 0.0;
        }
        let w = self.b - self.a;
        (4.0 / (w * w) - 1.0 / ((xi - self.a) * (self.b - xi))).exp()
    }
}

/// Holomorphic polynomial `Σ c_α z^α`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HolomorphicPolynomial {
    pub n: usize,
    pub terms: Vec<(Vec<u32>, C64)>,
}

impl HolomorphicPolynomial {
    pub fn new(n: usize, terms: Vec<(Vec<u32>, C64)>) -> Result<Self> {
        if terms.iter().any(|(a, _)| a.len() != n) {
            return Err(Error::InvalidParameter("multi-index length differs from n".into()));
        }
        if terms.iter().all(|(_, c)| *c == ZERO) {
            return Err(Error::InvalidParameter("polynomial is identically zero".into()));
        }
        Ok(HolomorphicPolynomial { n, terms })
    }

    pub fn one(n: usize) -> Self {
        HolomorphicPolynomial {
            n,
            terms: vec![(vec![0; n], C64::new(1.0, 0.0))],
        }
    }

    pub fn degree(&self) -> u32 {
        self.terms.iter().map(|(a, _)| a.iter().sum::<u32>()).max().unwrap_or(0)
    }

    pub fn eval(&self, z: &[C64]) -> C64 {
        self.terms
            .iter()
            .map(|(a, c)| a.iter().zip(z).fold(*c, |acc, (&k, zj)| acc * zj.powu(k)))
            .sum()
    }

    pub fn gradient(&self, z: &[C64]) -> Vec<C64> {
        (0..self.n)
            .map(|j| {
                self.terms
                    .iter()
                    .filter(|(a, _)| a[j] > 0)
                    .map(|(a, c)| {
                        let mut v = *c * a[j] as f64;
                        for (i, zi) in z.iter().enumerate() {
                            let k = if i == j { a[i] - 1 } else { a[i] };
                            v *= zi.powu(k);
                        }
                        v
                    })
                    .sum()
            })
            .collect()
    }
}

/// Element of the dense CR class.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestFunctionD {
    pub poly: HolomorphicPolynomial,
    pub profile: BumpProfile,
    /// Relative target for the ξ-integral, measured against `∫ φ e^{-ξ|z|²}`.
    pub rel_tol: f64,
    /// Interval budget of the adaptive ξ-quadrature.
    pub max_intervals: usize,
}

/// The two ξ-moments `Ψ_k = ∫ ξ^k φ(ξ) e^{-ξ s + iξ t} dξ`, `k = 0, 1`.
#[derive(Debug, Clone, Copy)]
struct Moments {
    psi0: C64,
    psi1: C64,
}

impl TestFunctionD {
    pub fn new(poly: HolomorphicPolynomial, profile: BumpProfile) -> Self {
        TestFunctionD {
            poly,
            profile,
            rel_tol: 1e-12,
            max_intervals: 4000,
        }
    }

    fn moments(&self, s: f64, t: f64) -> Result<Moments> {
        let (a, b) = (self.profile.a, self.profile.b);
        // factor e^{-a s} out so the integrand never underflows
        let damp = (-a * s).exp();
        if damp == 0.0 {
            return Ok(Moments { psi0: ZERO, psi1: ZERO });
        }
        let prof = self.profile;
        let res = integrate_adaptive(
            |xi, out| {
                let w = prof.value(xi) * (-(xi - a) * s).exp();
                let e = C64::new(0.0, xi * t).exp() * w;
                out[0] = e;
                out[1] = e * xi;
                out[2] = C64::new(w, 0.0);
            },
            3,
            a,
            b,
            |est| self.rel_tol * est[2].re.abs() * b.min(1.0) + 1e-300,
            self.max_intervals,
        )
        .map_err(|e| match e {
            Error::QuadratureFailure(m) => Error::QuadratureFailure(format!("eval_D at s={s}, t={t}: {m}")),
            other => other,
        })?;
        Ok(Moments {
            psi0: res.value[0] * damp,
            psi1: res.value[1] * damp,
        })
    }

    fn jet_from(&self, z: &[C64], m: Moments) -> Jet {
        let p = self.poly.eval(z);
        let grad = self.poly.gradient(z);
        Jet {
            value: p * m.psi0,
            dz: (0..z.len()).map(|j| grad[j] * m.psi0 - z[j].conj() * p * m.psi1).collect(),
            dzbar: (0..z.len()).map(|j| -z[j] * p * m.psi1).collect(),
            dt: I * p * m.psi1,
        }
    }

    /// Moments at one `s = |z|²` for a whole row of `t` values by the
    /// trapezoid rule in ξ. The profile is flat to all orders at both ends, so
    /// the only error is aliasing from `t ± 2π/η`; the node count doubles until
    /// two successive rules agree.
    fn lattice_moments(&self, s: f64, ts: &[f64]) -> Result<Vec<Moments>> {
        let (a, b) = (self.profile.a, self.profile.b);
        let damp = (-a * s).exp();
        if damp == 0.0 {
            return Ok(vec![Moments { psi0: ZERO, psi1: ZERO }; ts.len()]);
        }
        let weight = |xi: f64| self.profile.value(xi) * (-(xi - a) * s).exp();
        let add = |xi: f64, acc0: &mut [C64], acc1: &mut [C64]| -> f64 {
            let w = weight(xi);
            if w > 0.0 {
                for ((p0, p1), &t) in acc0.iter_mut().zip(acc1.iter_mut()).zip(ts) {
                    let e = C64::from_polar(w, xi * t);
                    *p0 += e;
                    *p1 += e * xi;
                }
            }
            w
        };
        let mut nodes = 16usize;
        let mut eta = (b - a) / nodes as f64;
        let (mut s0, mut s1) = (vec![ZERO; ts.len()], vec![ZERO; ts.len()]);
        let mut mass = 0.0;
        for k in 1..nodes {
            mass += add(a + k as f64 * eta, &mut s0, &mut s1);
        }
        let (mut o0, mut o1) = (vec![ZERO; ts.len()], vec![ZERO; ts.len()]);
        loop {
            o0.iter_mut().chain(o1.iter_mut()).for_each(|v| *v = ZERO);
            let mut omass = 0.0;
            for k in 0..nodes {
                omass += add(a + (k as f64 + 0.5) * eta, &mut o0, &mut o1);
            }
            let mut err: f64 = 0.0;
            for j in 0..ts.len() {
                let d0 = (s0[j] - o0[j]).norm();
                let d1 = (s1[j] - o1[j]).norm() / b;
                err = err.max(d0.max(d1) * eta / 2.0);
                s0[j] += o0[j];
                s1[j] += o1[j];
            }
            mass += omass;
            nodes *= 2;
            eta /= 2.0;
            let tol = self.rel_tol * mass * eta * b.min(1.0);
            if err <= tol {
                break;
            }
            if nodes > 64 * self.max_intervals {
                return Err(Error::QuadratureFailure(format!(
                    "lattice moments at s={s}: {nodes} trapezoid nodes, aliasing estimate {err:.3e}"
                )));
            }
        }
        Ok(s0
            .iter()
            .zip(&s1)
            .map(|(p0, p1)| Moments {
                psi0: p0 * eta * damp,
                psi1: p1 * eta * damp,
            })
            .collect())
    }

    /// Moments on every `(|z|², t)` pair of the grid, computed once per distinct `|z|²`.
    fn grid_moments(&self, grid: &GridSpec) -> Result<(Vec<usize>, Vec<Vec<Moments>>)> {
        let s = grid.z_norm_sqr();
        let mut keys: BTreeMap<u64, usize> = BTreeMap::new();
        let mut distinct = Vec::new();
        let idx: Vec<usize> = s
            .iter()
            .map(|v| {
                *keys.entry(v.to_bits()).or_insert_with(|| {
                    distinct.push(*v);
                    distinct.len() - 1
                })
            })
            .collect();
        let ta = grid.t_axis();
        let table: Result<Vec<Vec<Moments>>> = distinct.par_iter().map(|&sv| self.lattice_moments(sv, &ta)).collect();
        Ok((idx, table?))
    }
}

/// Evaluates `h(z, t)` by adaptive quadrature of the ξ-integral.
pub fn eval_d(h: &TestFunctionD, z: &[C64], t: f64) -> Result<C64> {
    let s: f64 = z.iter().map(|c| c.norm_sqr()).sum();
    let m = h.moments(s, t)?;
    Ok(h.poly.eval(z) * m.psi0)
}

impl FieldEvaluator for TestFunctionD {
    fn dim(&self) -> usize {
        self.poly.n
    }

    fn eval(&self, z: &[C64], t: f64) -> C64 {
        eval_d(self, z, t).unwrap_or(C64::new(f64::NAN, f64::NAN))
    }

    fn jet(&self, z: &[C64], t: f64) -> Option<Jet> {
        let s: f64 = z.iter().map(|c| c.norm_sqr()).sum();
        let m = self.moments(s, t).ok()?;
        Some(self.jet_from(z, m))
    }

    fn label(&self) -> String {
        format!(
            "D-class(deg P={}, phi on [{}, {}])",
            self.poly.degree(),
            self.profile.a,
            self.profile.b
        )
    }

    fn sample(&self, grid: &GridSpec) -> Vec<C64> {
        let Ok((idx, table)) = self.grid_moments(grid) else {
            return vec![C64::new(f64::NAN, f64::NAN); grid.len()];
        };
        let zt = grid.z_table();
        let n = grid.n;
        let mut out = vec![ZERO; grid.len()];
        out.par_chunks_mut(grid.nt).enumerate().for_each(|(iz, row)| {
            let p = self.poly.eval(&zt[iz * n..(iz + 1) * n]);
            for (v, m) in row.iter_mut().zip(&table[idx[iz]]) {
                *v = p * m.psi0;
            }
        });
        out
    }

    fn sample_jets(&self, grid: &GridSpec) -> Option<Vec<Jet>> {
        let (idx, table) = self.grid_moments(grid).ok()?;
        let zt = grid.z_table();
        let n = grid.n;
        let mut out = Vec::with_capacity(grid.len());
        for iz in 0..grid.nzpoints() {
            let z = &zt[iz * n..(iz + 1) * n];
            for m in &table[idx[iz]] {
                out.push(self.jet_from(z, *m));
            }
        }
        Some(out)
    }
}
