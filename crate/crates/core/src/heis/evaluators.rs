//! Building blocks for exact evaluators.

use std::fmt::Debug;
use std::sync::Arc;

use super::field::{FieldEvaluator, Jet};
use super::grid::GridSpec;
use crate::{C64, ZERO};
#[cfg(test)]
use crate::I;

fn powu(z: C64, k: u32) -> C64 {
    match k {
        0 => C64::new(1.0, 0.0),
        1 => z,
        _ => z.powu(k),
    }
}

/// One term `c · z^α z̄^β t^k · exp(-a|z − z₀|² − b(t − t₀)² + iωt)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianTerm {
    pub coef: C64,
    pub z0: Vec<C64>,
    pub t0: f64,
    pub a: f64,
    pub b: f64,
    pub omega: f64,
    pub zpow: Vec<u32>,
    pub zbarpow: Vec<u32>,
    pub tpow: u32,
}

impl GaussianTerm {
    /// Centered `c · exp(-a|z|² - b t²)` in dimension `n`.
    pub fn centered(n: usize, coef: C64, a: f64, b: f64) -> Self {
        GaussianTerm {
            coef,
            z0: vec![ZERO; n],
            t0: 0.0,
            a,
            b,
            omega: 0.0,
            zpow: vec![0; n],
            zbarpow: vec![0; n],
            tpow: 0,
        }
    }

    pub fn with_powers(mut self, zpow: Vec<u32>, zbarpow: Vec<u32>, tpow: u32) -> Self {
        self.zpow = zpow;
        self.zbarpow = zbarpow;
        self.tpow = tpow;
        self
    }

    pub fn shifted(mut self, z0: Vec<C64>, t0: f64) -> Self {
        self.z0 = z0;
        self.t0 = t0;
        self
    }

    pub fn modulated(mut self, omega: f64) -> Self {
        self.omega = omega;
        self
    }

    fn envelope(&self, z: &[C64], t: f64) -> C64 {
        let r2: f64 = z.iter().zip(&self.z0).map(|(a, b)| (a - b).norm_sqr()).sum();
        let tt = t - self.t0;
        C64::new(-self.a * r2 - self.b * tt * tt, self.omega * t).exp()
    }

    fn monomial(&self, z: &[C64], t: f64) -> C64 {
        let mut m = self.coef * t.powi(self.tpow as i32);
        for (j, zj) in z.iter().enumerate() {
            m *= powu(*zj, self.zpow[j]) * powu(zj.conj(), self.zbarpow[j]);
        }
        m
    }

    fn eval(&self, z: &[C64], t: f64) -> C64 {
        self.monomial(z, t) * self.envelope(z, t)
    }

    fn jet(&self, z: &[C64], t: f64) -> Jet {
        let n = z.len();
        let e = self.envelope(z, t);
        let m = self.monomial(z, t);
        let mut jet = Jet::zero(n);
        jet.value = m * e;
        let tt = t - self.t0;
        let dm_t = if self.tpow == 0 {
            ZERO
        } else {
            let mut d = self.coef * (self.tpow as f64) * t.powi(self.tpow as i32 - 1);
            for (j, zj) in z.iter().enumerate() {
                d *= powu(*zj, self.zpow[j]) * powu(zj.conj(), self.zbarpow[j]);
            }
            d
        };
        jet.dt = dm_t * e + m * e * C64::new(-2.0 * self.b * tt, self.omega);
        for j in 0..n {
            let dz0 = z[j] - self.z0[j];
            // the monomial with the z_j (resp. z̄_j) power lowered by one
            let lowered = |dz: bool| -> C64 {
                let (p, q) = (self.zpow[j], self.zbarpow[j]);
                let k = if dz { p } else { q };
                if k == 0 {
                    return ZERO;
                }
                let mut d = self.coef * t.powi(self.tpow as i32) * k as f64;
                for (i, zi) in z.iter().enumerate() {
                    let (pi, qi) = if i == j {
                        if dz {
                            (p - 1, q)
                        } else {
                            (p, q - 1)
                        }
                    } else {
                        (self.zpow[i], self.zbarpow[i])
                    };
                    d *= powu(*zi, pi) * powu(zi.conj(), qi);
                }
                d
            };
            jet.dz[j] = lowered(true) * e - self.a * dz0.conj() * m * e;
            jet.dzbar[j] = lowered(false) * e - self.a * dz0 * m * e;
        }
        jet
    }
}

/// Finite sum of [`GaussianTerm`]s with exact derivatives.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianTerms {
    pub n: usize,
    pub terms: Vec<GaussianTerm>,
    pub name: String,
}

impl GaussianTerms {
    pub fn new(n: usize, terms: Vec<GaussianTerm>, name: impl Into<String>) -> Self {
        GaussianTerms {
            n,
            terms,
            name: name.into(),
        }
    }

    /// `exp(-a|z|² - b t²)`.
    pub fn gaussian(n: usize, a: f64, b: f64) -> Self {
        Self::new(
            n,
            vec![GaussianTerm::centered(n, C64::new(1.0, 0.0), a, b)],
            format!("exp(-{a}|z|^2-{b}t^2)"),
        )
    }
}

impl FieldEvaluator for GaussianTerms {
    fn dim(&self) -> usize {
        self.n
    }
    fn eval(&self, z: &[C64], t: f64) -> C64 {
        self.terms.iter().map(|g| g.eval(z, t)).sum()
    }
    fn jet(&self, z: &[C64], t: f64) -> Option<Jet> {
        let mut acc = Jet::zero(self.n);
        for g in &self.terms {
            let j = g.jet(z, t);
            acc.value += j.value;
            acc.dt += j.dt;
            for k in 0..self.n {
                acc.dz[k] += j.dz[k];
                acc.dzbar[k] += j.dzbar[k];
            }
        }
        Some(acc)
    }
    fn label(&self) -> String {
        self.name.clone()
    }
}

/// Smooth compactly supported bump `exp(1 − 1/(1 − s))`, `s = (|z|⁴ + t²)/r⁴`,
/// equal to 1 at the origin and vanishing for Koranyi gauge ≥ r.
#[derive(Debug, Clone, PartialEq)]
pub struct KoranyiBump {
    pub n: usize,
    pub radius: f64,
}

impl KoranyiBump {
    fn s(&self, z: &[C64], t: f64) -> (f64, f64) {
        let r2: f64 = z.iter().map(|c| c.norm_sqr()).sum();
        (((r2 * r2) + t * t) / self.radius.powi(4), r2)
    }
}

impl FieldEvaluator for KoranyiBump {
    fn dim(&self) -> usize {
        self.n
    }
    fn eval(&self, z: &[C64], t: f64) -> C64 {
        let (s, _) = self.s(z, t);
        if s >= 1.0 {
            ZERO
        } else {
            C64::new((1.0 - 1.0 / (1.0 - s)).exp(), 0.0)
        }
    }
    fn jet(&self, z: &[C64], t: f64) -> Option<Jet> {
        let (s, r2) = self.s(z, t);
        let mut jet = Jet::zero(self.n);
        if s >= 1.0 {
            return Some(jet);
        }
        let v = (1.0 - 1.0 / (1.0 - s)).exp();
        let dv = -v / ((1.0 - s) * (1.0 - s));
        let r4 = self.radius.powi(4);
        jet.value = C64::new(v, 0.0);
        jet.dt = C64::new(dv * 2.0 * t / r4, 0.0);
        for j in 0..self.n {
            jet.dz[j] = dv * 2.0 * r2 * z[j].conj() / r4;
            jet.dzbar[j] = dv * 2.0 * r2 * z[j] / r4;
        }
        Some(jet)
    }
    fn label(&self) -> String {
        format!("koranyi-bump(r={})", self.radius)
    }
}

type PointFn = dyn Fn(&[C64], f64) -> C64 + Send + Sync;
type JetFn = dyn Fn(&[C64], f64) -> Jet + Send + Sync;

/// Evaluator from closures.
#[derive(Clone)]
pub struct Closure {
    pub n: usize,
    pub f: Arc<PointFn>,
    pub df: Option<Arc<JetFn>>,
    pub name: String,
}

impl Closure {
    pub fn new(n: usize, name: impl Into<String>, f: impl Fn(&[C64], f64) -> C64 + Send + Sync + 'static) -> Self {
        Closure {
            n,
            f: Arc::new(f),
            df: None,
            name: name.into(),
        }
    }

    pub fn with_jet(mut self, df: impl Fn(&[C64], f64) -> Jet + Send + Sync + 'static) -> Self {
        self.df = Some(Arc::new(df));
        self
    }
}

impl Debug for Closure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Closure({})", self.name)
    }
}

impl FieldEvaluator for Closure {
    fn dim(&self) -> usize {
        self.n
    }
    fn eval(&self, z: &[C64], t: f64) -> C64 {
        (self.f)(z, t)
    }
    fn jet(&self, z: &[C64], t: f64) -> Option<Jet> {
        self.df.as_ref().map(|d| d(z, t))
    }
    fn label(&self) -> String {
        self.name.clone()
    }
}

/// `c · f`.
#[derive(Debug, Clone)]
pub struct Scaled {
    pub c: C64,
    pub inner: Arc<dyn FieldEvaluator>,
}

impl Scaled {
    pub fn new(c: C64, inner: Arc<dyn FieldEvaluator>) -> Self {
        Scaled { c, inner }
    }
}

impl FieldEvaluator for Scaled {
    fn dim(&self) -> usize {
        self.inner.dim()
    }
    fn eval(&self, z: &[C64], t: f64) -> C64 {
        self.c * self.inner.eval(z, t)
    }
    fn jet(&self, z: &[C64], t: f64) -> Option<Jet> {
        let mut j = self.inner.jet(z, t)?;
        j.value *= self.c;
        j.dt *= self.c;
        for k in 0..j.dz.len() {
            j.dz[k] *= self.c;
            j.dzbar[k] *= self.c;
        }
        Some(j)
    }
    fn label(&self) -> String {
        format!("({})*{}", self.c, self.inner.label())
    }
    fn sample(&self, grid: &GridSpec) -> Vec<C64> {
        let mut v = self.inner.sample(grid);
        v.iter_mut().for_each(|x| *x *= self.c);
        v
    }
    fn sample_jets(&self, grid: &GridSpec) -> Option<Vec<Jet>> {
        let mut js = self.inner.sample_jets(grid)?;
        for j in &mut js {
            j.value *= self.c;
            j.dt *= self.c;
            j.dz.iter_mut().chain(j.dzbar.iter_mut()).for_each(|x| *x *= self.c);
        }
        Some(js)
    }
}

/// Sum of evaluators.
#[derive(Debug, Clone)]
pub struct Sum {
    pub parts: Vec<Arc<dyn FieldEvaluator>>,
}

impl Sum {
    pub fn new(parts: Vec<Arc<dyn FieldEvaluator>>) -> Self {
        assert!(!parts.is_empty());
        Sum { parts }
    }
}

impl FieldEvaluator for Sum {
    fn dim(&self) -> usize {
        self.parts[0].dim()
    }
    fn eval(&self, z: &[C64], t: f64) -> C64 {
        self.parts.iter().map(|p| p.eval(z, t)).sum()
    }
    fn jet(&self, z: &[C64], t: f64) -> Option<Jet> {
        let mut acc = Jet::zero(self.dim());
        for p in &self.parts {
            let j = p.jet(z, t)?;
            acc.value += j.value;
            acc.dt += j.dt;
            for k in 0..acc.dz.len() {
                acc.dz[k] += j.dz[k];
                acc.dzbar[k] += j.dzbar[k];
            }
        }
        Some(acc)
    }
    fn label(&self) -> String {
        self.parts.iter().map(|p| p.label()).collect::<Vec<_>>().join(" + ")
    }
    // part by part, so each part can use its own grid fast path
    fn sample(&self, grid: &GridSpec) -> Vec<C64> {
        let mut acc = self.parts[0].sample(grid);
        for p in &self.parts[1..] {
            acc.iter_mut().zip(p.sample(grid)).for_each(|(a, b)| *a += b);
        }
        acc
    }
    fn sample_jets(&self, grid: &GridSpec) -> Option<Vec<Jet>> {
        let mut acc = self.parts[0].sample_jets(grid)?;
        for p in &self.parts[1..] {
            for (a, b) in acc.iter_mut().zip(p.sample_jets(grid)?) {
                a.value += b.value;
                a.dt += b.dt;
                for k in 0..a.dz.len() {
                    a.dz[k] += b.dz[k];
                    a.dzbar[k] += b.dzbar[k];
                }
            }
        }
        Some(acc)
    }
}

fn product_jet(ja: &Jet, jb: &Jet) -> Jet {
    Jet {
        value: ja.value * jb.value,
        dt: ja.dt * jb.value + ja.value * jb.dt,
        dz: (0..ja.dz.len()).map(|k| ja.dz[k] * jb.value + ja.value * jb.dz[k]).collect(),
        dzbar: (0..ja.dz.len()).map(|k| ja.dzbar[k] * jb.value + ja.value * jb.dzbar[k]).collect(),
    }
}

/// Pointwise product of two evaluators.
#[derive(Debug, Clone)]
pub struct Product {
    pub a: Arc<dyn FieldEvaluator>,
    pub b: Arc<dyn FieldEvaluator>,
}

impl Product {
    pub fn new(a: Arc<dyn FieldEvaluator>, b: Arc<dyn FieldEvaluator>) -> Self {
        Product { a, b }
    }
}

impl FieldEvaluator for Product {
    fn dim(&self) -> usize {
        self.a.dim()
    }
    fn eval(&self, z: &[C64], t: f64) -> C64 {
        self.a.eval(z, t) * self.b.eval(z, t)
    }
    fn jet(&self, z: &[C64], t: f64) -> Option<Jet> {
        Some(product_jet(&self.a.jet(z, t)?, &self.b.jet(z, t)?))
    }
    fn label(&self) -> String {
        format!("({})*({})", self.a.label(), self.b.label())
    }
    fn sample(&self, grid: &GridSpec) -> Vec<C64> {
        let mut v = self.a.sample(grid);
        v.iter_mut().zip(self.b.sample(grid)).for_each(|(a, b)| *a *= b);
        v
    }
    fn sample_jets(&self, grid: &GridSpec) -> Option<Vec<Jet>> {
        let ja = self.a.sample_jets(grid)?;
        let jb = self.b.sample_jets(grid)?;
        Some(ja.iter().zip(&jb).map(|(a, b)| product_jet(a, b)).collect())
    }
}

/// Complex conjugate of an evaluator.
#[derive(Debug, Clone)]
pub struct Conjugate {
    pub inner: Arc<dyn FieldEvaluator>,
}

impl Conjugate {
    pub fn new(inner: Arc<dyn FieldEvaluator>) -> Self {
        Conjugate { inner }
    }
}

impl FieldEvaluator for Conjugate {
    fn dim(&self) -> usize {
        self.inner.dim()
    }
    fn eval(&self, z: &[C64], t: f64) -> C64 {
        self.inner.eval(z, t).conj()
    }
    fn jet(&self, z: &[C64], t: f64) -> Option<Jet> {
        let j = self.inner.jet(z, t)?;
        Some(Jet {
            value: j.value.conj(),
            dz: j.dzbar.iter().map(|v| v.conj()).collect(),
            dzbar: j.dz.iter().map(|v| v.conj()).collect(),
            dt: j.dt.conj(),
        })
    }
    fn label(&self) -> String {
        format!("conj({})", self.inner.label())
    }
    fn sample(&self, grid: &GridSpec) -> Vec<C64> {
        self.inner.sample(grid).into_iter().map(|v| v.conj()).collect()
    }
    fn sample_jets(&self, grid: &GridSpec) -> Option<Vec<Jet>> {
        let js = self.inner.sample_jets(grid)?;
        Some(
            js.into_iter()
                .map(|j| Jet {
                    value: j.value.conj(),
                    dz: j.dzbar.iter().map(|v| v.conj()).collect(),
                    dzbar: j.dz.iter().map(|v| v.conj()).collect(),
                    dt: j.dt.conj(),
                })
                .collect(),
        )
    }
}

/// `f ∘ Φ_λ`, i.e. `(z, t) ↦ f(λz, λ²t)`.
#[derive(Debug, Clone)]
pub struct Pullback {
    pub lambda: f64,
    pub inner: Arc<dyn FieldEvaluator>,
}

impl FieldEvaluator for Pullback {
    fn dim(&self) -> usize {
        self.inner.dim()
    }
    fn eval(&self, z: &[C64], t: f64) -> C64 {
        let zs: Vec<C64> = z.iter().map(|c| c * self.lambda).collect();
        self.inner.eval(&zs, self.lambda * self.lambda * t)
    }
    fn jet(&self, z: &[C64], t: f64) -> Option<Jet> {
        let l = self.lambda;
        let zs: Vec<C64> = z.iter().map(|c| c * l).collect();
        let mut j = self.inner.jet(&zs, l * l * t)?;
        j.dt *= l * l;
        for k in 0..j.dz.len() {
            j.dz[k] *= l;
            j.dzbar[k] *= l;
        }
        Some(j)
    }
    fn label(&self) -> String {
        format!("{}∘Φ[{}]", self.inner.label(), self.lambda)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fd_check(ev: &dyn FieldEvaluator, z: C64, t: f64) {
        let h = 1e-6;
        let j = ev.jet(&[z], t).unwrap();
        let fx = (ev.eval(&[z + h], t) - ev.eval(&[z - h], t)) / (2.0 * h);
        let fy = (ev.eval(&[z + I * h], t) - ev.eval(&[z - I * h], t)) / (2.0 * h);
        let ft = (ev.eval(&[z], t + h) - ev.eval(&[z], t - h)) / (2.0 * h);
        let dz = 0.5 * (fx - I * fy);
        let dzb = 0.5 * (fx + I * fy);
        let scale = 1.0 + j.value.norm();
        assert!((dz - j.dz[0]).norm() < 1e-7 * scale, "dz {dz} vs {}", j.dz[0]);
        assert!((dzb - j.dzbar[0]).norm() < 1e-7 * scale, "dzbar {dzb} vs {}", j.dzbar[0]);
        assert!((ft - j.dt).norm() < 1e-7 * scale, "dt {ft} vs {}", j.dt);
    }

    #[test]
    fn gaussian_term_jet_matches_differences() {
        let g = GaussianTerm::centered(1, C64::new(0.7, -0.2), 0.8, 0.5)
            .with_powers(vec![2], vec![1], 1)
            .shifted(vec![C64::new(0.3, -0.1)], 0.4)
            .modulated(1.3);
        let ev = GaussianTerms::new(1, vec![g], "t");
        fd_check(&ev, C64::new(0.4, 0.6), 0.3);
        fd_check(&ev, C64::new(-0.9, 0.2), -1.1);
    }

    #[test]
    fn composite_jets_match_differences() {
        let g: Arc<dyn FieldEvaluator> = Arc::new(GaussianTerms::new(
            1,
            vec![GaussianTerm::centered(1, C64::new(1.0, 0.5), 1.0, 0.3).with_powers(vec![1], vec![0], 0)],
            "g",
        ));
        let b: Arc<dyn FieldEvaluator> = Arc::new(KoranyiBump { n: 1, radius: 1.5 });
        let p = Product::new(g.clone(), b.clone());
        fd_check(&p, C64::new(0.4, 0.3), 0.5);
        let c = Conjugate::new(g.clone());
        fd_check(&c, C64::new(0.4, -0.3), 0.2);
        let pb = Pullback { lambda: 1.7, inner: Arc::new(p) };
        fd_check(&pb, C64::new(0.2, 0.1), 0.1);
        let s = Sum::new(vec![g, Arc::new(Scaled::new(I, b))]);
        fd_check(&s, C64::new(-0.2, 0.5), -0.3);
    }
}
