use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::{composite_gauss_legendre, uniform_breaks};
use crate::{C64, ZERO};

/// Point of S³ ⊂ ℂ².
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpherePoint {
    pub z1: C64,
    pub z2: C64,
}

impl SpherePoint {
    pub fn new(z1: C64, z2: C64) -> Result<Self> {
        let r = z1.norm_sqr() + z2.norm_sqr();
        if !((r - 1.0).abs() <= 1e-12) {
            return Err(Error::InvalidParameter(format!("|z1|^2 + |z2|^2 = {r} is not 1")));
        }
        Ok(SpherePoint { z1, z2 })
    }

    /// `(0, 1)`, the image of the Heisenberg origin under the Cayley chart.
    pub fn pole() -> Self {
        SpherePoint {
            z1: ZERO,
            z2: C64::new(1.0, 0.0),
        }
    }

    /// `⟨x, y⟩ = x₁ȳ₁ + x₂ȳ₂`.
    pub fn inner(&self, other: &SpherePoint) -> C64 {
        self.z1 * other.z1.conj() + self.z2 * other.z2.conj()
    }

    pub fn coords(&self) -> [C64; 2] {
        [self.z1, self.z2]
    }
}

/// 2×2 complex matrix, row major.
pub type Frame = [[C64; 2]; 2];

pub fn identity_frame() -> Frame {
    let one = C64::new(1.0, 0.0);
    [[one, ZERO], [ZERO, one]]
}

pub fn frame_apply(m: &Frame, v: [C64; 2]) -> [C64; 2] {
    [m[0][0] * v[0] + m[0][1] * v[1], m[1][0] * v[0] + m[1][1] * v[1]]
}

pub fn frame_adjoint(m: &Frame) -> Frame {
    [[m[0][0].conj(), m[1][0].conj()], [m[0][1].conj(), m[1][1].conj()]]
}

/// Hopf-coordinate quadrature on S³. Nodes are `ζ = frame · η` with
/// `η₁ = √u e^{iφ₁}`, `η₂ = √(1−u) e^{iφ₂}`; the surface measure is
/// `dσ = ½ du dφ₁ dφ₂`. Gauss–Legendre panels in `u`, uniform `φ₁`, `φ₂`.
///
/// When the panels stop short of `u = 1`, functions are taken to vanish on
/// the rest of the sphere.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SphereGrid {
    pub u_max: f64,
    pub panels: usize,
    pub order: usize,
    pub n1: usize,
    pub n2: usize,
    pub frame: Frame,
    #[serde(skip)]
    u_nodes: Vec<f64>,
    #[serde(skip)]
    u_weights: Vec<f64>,
}

impl SphereGrid {
    /// Full sphere, `panels × order` nodes in `u`, `n1 × n2` angles.
    pub fn new(panels: usize, order: usize, n1: usize, n2: usize) -> Result<Self> {
        Self::partial(1.0, panels, order, n1, n2)
    }

    /// Grid restricted to `u ≤ u_max`.
    pub fn partial(u_max: f64, panels: usize, order: usize, n1: usize, n2: usize) -> Result<Self> {
        if !(u_max > 0.0 && u_max <= 1.0) {
            return Err(Error::InvalidGrid(format!("u_max = {u_max} outside (0, 1]")));
        }
        if panels == 0 || order == 0 {
            return Err(Error::InvalidGrid("empty u-rule".into()));
        }
        for n in [n1, n2] {
            if n < 4 || !n.is_power_of_two() {
                return Err(Error::InvalidGrid(format!("angle count {n} must be a power of two ≥ 4")));
            }
        }
        let rule = composite_gauss_legendre(&uniform_breaks(0.0, u_max, panels), order);
        Ok(SphereGrid {
            u_max,
            panels,
            order,
            n1,
            n2,
            frame: identity_frame(),
            u_nodes: rule.nodes,
            u_weights: rule.weights,
        })
    }

    pub fn with_frame(mut self, frame: Frame) -> Self {
        self.frame = frame;
        self
    }

    pub fn u_nodes(&self) -> &[f64] {
        &self.u_nodes
    }

    pub fn u_weights(&self) -> &[f64] {
        &self.u_weights
    }

    pub fn nu(&self) -> usize {
        self.u_nodes.len()
    }

    pub fn len(&self) -> usize {
        self.nu() * self.n1 * self.n2
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Frame coordinates `η` of node `(iu, j1, j2)`.
    pub fn hopf(&self, iu: usize, j1: usize, j2: usize) -> [C64; 2] {
        let u = self.u_nodes[iu];
        let p1 = 2.0 * PI * j1 as f64 / self.n1 as f64;
        let p2 = 2.0 * PI * j2 as f64 / self.n2 as f64;
        [C64::from_polar(u.sqrt(), p1), C64::from_polar((1.0 - u).sqrt(), p2)]
    }

    pub fn point(&self, iu: usize, j1: usize, j2: usize) -> SpherePoint {
        let z = frame_apply(&self.frame, self.hopf(iu, j1, j2));
        SpherePoint { z1: z[0], z2: z[1] }
    }

    /// Quadrature weight of every node in `u`-row `iu`.
    pub fn weight(&self, iu: usize) -> f64 {
        0.5 * self.u_weights[iu] * (2.0 * PI / self.n1 as f64) * (2.0 * PI / self.n2 as f64)
    }

    fn index(&self, iu: usize, j1: usize, j2: usize) -> usize {
        (iu * self.n1 + j1) * self.n2 + j2
    }
}

/// Function sampled at the nodes of a [`SphereGrid`], index `(iu·n1 + j1)·n2 + j2`.
#[derive(Debug, Clone, PartialEq)]
pub struct SphereField {
    pub grid: SphereGrid,
    pub values: Vec<C64>,
}

impl SphereField {
    /// Samples `f` at every node, given the ambient point.
    pub fn sample(grid: &SphereGrid, f: impl Fn(&SpherePoint) -> C64 + Sync) -> Self {
        Self::sample_frame(grid, |eta| {
            let z = frame_apply(&grid.frame, eta);
            f(&SpherePoint { z1: z[0], z2: z[1] })
        })
    }

    /// Samples `f` given the frame coordinates `η` of each node.
    pub fn sample_frame(grid: &SphereGrid, f: impl Fn([C64; 2]) -> C64 + Sync) -> Self {
        let block = grid.n1 * grid.n2;
        let mut values = vec![ZERO; grid.len()];
        values.par_chunks_mut(block).enumerate().for_each(|(iu, row)| {
            for j1 in 0..grid.n1 {
                for j2 in 0..grid.n2 {
                    row[j1 * grid.n2 + j2] = f(grid.hopf(iu, j1, j2));
                }
            }
        });
        SphereField {
            grid: grid.clone(),
            values,
        }
    }

    pub fn value(&self, iu: usize, j1: usize, j2: usize) -> C64 {
        self.values[self.grid.index(iu, j1, j2)]
    }

    fn weighted_sum(&self, g: impl Fn(C64) -> C64 + Sync) -> C64 {
        let block = self.grid.n1 * self.grid.n2;
        self.values
            .par_chunks(block)
            .enumerate()
            .map(|(iu, row)| row.iter().map(|v| g(*v)).sum::<C64>() * self.grid.weight(iu))
            .collect::<Vec<_>>()
            .into_iter()
            .sum()
    }

    /// `∫ F dσ`.
    pub fn integral(&self) -> C64 {
        self.weighted_sum(|v| v)
    }

    /// `∫ F Ḡ dσ`.
    pub fn inner(&self, other: &SphereField) -> C64 {
        let block = self.grid.n1 * self.grid.n2;
        self.values
            .par_chunks(block)
            .zip(other.values.par_chunks(block))
            .enumerate()
            .map(|(iu, (a, b))| a.iter().zip(b).map(|(x, y)| x * y.conj()).sum::<C64>() * self.grid.weight(iu))
            .collect::<Vec<_>>()
            .into_iter()
            .sum()
    }

    /// `(∫|F|^p dσ)^{1/p}`; `p = ∞` is the node maximum.
    pub fn lp_norm(&self, p: f64) -> Result<f64> {
        if p.is_nan() || p < 1.0 {
            return Err(Error::InvalidExponent(p));
        }
        if p.is_infinite() {
            return Ok(self.max_abs());
        }
        Ok(self.weighted_sum(|v| C64::new(v.norm().powf(p), 0.0)).re.powf(1.0 / p))
    }

    pub fn l2_norm(&self) -> f64 {
        self.weighted_sum(|v| C64::new(v.norm_sqr(), 0.0)).re.sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn sub(&self, other: &SphereField) -> SphereField {
        SphereField {
            grid: self.grid.clone(),
            values: self.values.iter().zip(&other.values).map(|(a, b)| a - b).collect(),
        }
    }
}
