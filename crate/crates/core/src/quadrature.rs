//! Quadrature rules shared by the modules.
//!
//! Fixed rules come from `gauss-quad`; the adaptive Gauss–Kronrod
//! integrator handles complex vector-valued integrands.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::num::NonZeroUsize;

use gauss_quad::hermite::GaussHermite;
use gauss_quad::legendre::GaussLegendre;

use crate::error::{Error, Result};
use crate::C64;

/// Nodes and weights of a one-dimensional rule.
#[derive(Debug, Clone, PartialEq)]
pub struct Rule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl Rule {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

fn degree(n: usize) -> NonZeroUsize {
    NonZeroUsize::new(n.max(1)).unwrap()
}

/// Gauss–Legendre rule on `[-1, 1]`, nodes in increasing order.
pub fn gauss_legendre(n: usize) -> Rule {
    let rule = GaussLegendre::new(degree(n));
    let mut pairs: Vec<(f64, f64)> = rule.iter().map(|(x, w)| (*x, *w)).collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    Rule {
        nodes: pairs.iter().map(|p| p.0).collect(),
        weights: pairs.iter().map(|p| p.1).collect(),
    }
}

/// Gauss–Hermite rule for the weight `e^{-x^2}` on the real line.
pub fn gauss_hermite(n: usize) -> Rule {
    let rule = GaussHermite::new(degree(n));
    let mut pairs: Vec<(f64, f64)> = rule.iter().map(|(x, w)| (*x, *w)).collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    // Golub–Welsch leaves the rule slightly asymmetric; symmetrise it so odd
    // moments vanish to round-off.
    let n = pairs.len();
    for i in 0..n / 2 {
        let j = n - 1 - i;
        let x = 0.5 * (pairs[j].0 - pairs[i].0);
        let w = 0.5 * (pairs[i].1 + pairs[j].1);
        pairs[i] = (-x, w);
        pairs[j] = (x, w);
    }
    if n % 2 == 1 {
        pairs[n / 2].0 = 0.0;
    }
    Rule {
        nodes: pairs.iter().map(|p| p.0).collect(),
        weights: pairs.iter().map(|p| p.1).collect(),
    }
}

/// Composite Gauss–Legendre rule over consecutive panels `[breaks[i], breaks[i+1]]`.
pub fn composite_gauss_legendre(breaks: &[f64], order: usize) -> Rule {
    let base = gauss_legendre(order);
    let mut nodes = Vec::with_capacity(base.len() * breaks.len().saturating_sub(1));
    let mut weights = Vec::with_capacity(nodes.capacity());
    for w in breaks.windows(2) {
        let (a, b) = (w[0], w[1]);
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        for (x, wt) in base.nodes.iter().zip(&base.weights) {
            nodes.push(mid + half * x);
            weights.push(half * wt);
        }
    }
    Rule { nodes, weights }
}

/// `n + 1` equally spaced break points on `[a, b]`.
pub fn uniform_breaks(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..=n)
        .map(|i| if i == n { b } else { a + (b - a) * i as f64 / n as f64 })
        .collect()
}

// Gauss–Kronrod 7/15 on [-1, 1]: Kronrod abscissae (non-negative half), Kronrod
// weights, Gauss weights for the odd-indexed abscissae.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

struct Segment {
    a: f64,
    b: f64,
    value: Vec<C64>,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error
            .total_cmp(&other.error)
            .then_with(|| other.a.total_cmp(&self.a))
    }
}

fn gk15<F>(f: &mut F, a: f64, b: f64, dim: usize, buf: &mut [C64]) -> (Vec<C64>, f64)
where
    F: FnMut(f64, &mut [C64]),
{
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut k = vec![C64::new(0.0, 0.0); dim];
    let mut g = vec![C64::new(0.0, 0.0); dim];
    f(c, buf);
    for d in 0..dim {
        k[d] += buf[d] * WGK[7];
        g[d] += buf[d] * WG[3];
    }
    for j in 0..7 {
        for s in [-1.0, 1.0] {
            f(c + s * h * XGK[j], buf);
            for d in 0..dim {
                k[d] += buf[d] * WGK[j];
                if j % 2 == 1 {
                    g[d] += buf[d] * WG[j / 2];
                }
            }
        }
    }
    let mut err = 0.0f64;
    for d in 0..dim {
        k[d] *= h;
        g[d] *= h;
        err = err.max((k[d] - g[d]).norm());
    }
    (k, err)
}

/// Result of an adaptive integration.
#[derive(Debug, Clone)]
pub struct Adaptive {
    pub value: Vec<C64>,
    pub error: f64,
    pub intervals: usize,
}

/// Globally adaptive Gauss–Kronrod 7/15 integration of a complex vector
/// integrand `f(x, out)` over `[a, b]`.
///
/// `tolerance` maps the current estimate to the absolute error target.
/// Errors are the raw Kronrod–Gauss differences, which overestimate the true
/// error for smooth integrands.
pub fn integrate_adaptive<F, T>(
    mut f: F,
    dim: usize,
    a: f64,
    b: f64,
    tolerance: T,
    max_intervals: usize,
) -> Result<Adaptive>
where
    F: FnMut(f64, &mut [C64]),
    T: Fn(&[C64]) -> f64,
{
    let mut buf = vec![C64::new(0.0, 0.0); dim];
    let mut heap = BinaryHeap::new();
    let (value, error) = gk15(&mut f, a, b, dim, &mut buf);
    let mut total = value.clone();
    let mut total_err = error;
    heap.push(Segment { a, b, value, error });
    loop {
        let tol = tolerance(&total);
        if total_err <= tol {
            break;
        }
        if heap.len() >= max_intervals {
            return Err(Error::QuadratureFailure(format!(
                "adaptive integration on [{a}, {b}] reached {max_intervals} intervals \
                 with error {total_err:.3e} > {tol:.3e}"
            )));
        }
        let worst = heap.pop().expect("heap is never empty");
        let m = 0.5 * (worst.a + worst.b);
        let (v1, e1) = gk15(&mut f, worst.a, m, dim, &mut buf);
        let (v2, e2) = gk15(&mut f, m, worst.b, dim, &mut buf);
        for d in 0..dim {
            total[d] += v1[d] + v2[d] - worst.value[d];
        }
        total_err += e1 + e2 - worst.error;
        heap.push(Segment { a: worst.a, b: m, value: v1, error: e1 });
        heap.push(Segment { a: m, b: worst.b, value: v2, error: e2 });
    }
    // Re-sum from the segments to shed the drift of the running updates.
    let mut value = vec![C64::new(0.0, 0.0); dim];
    let mut error = 0.0;
    let mut segs = heap.into_vec();
    segs.sort_by(|x, y| x.a.total_cmp(&y.a));
    for s in &segs {
        for d in 0..dim {
            value[d] += s.value[d];
        }
        error += s.error;
    }
    Ok(Adaptive {
        value,
        error,
        intervals: segs.len(),
    })
}
