use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::C64;

/// Tensor lattice on ℂⁿ×ℝ.
///
/// Each real z-axis carries `x_i = -R + i h` with `h = 2R/nz`, and the t axis
/// carries `t_j = -T + j Δt` with `Δt = 2T/nt`; both are periodic-style
/// lattices that contain the origin. Flat sample index is
/// `iz * nt + it`, where the z index runs over `(x_1, y_1, ..., x_n, y_n)`
/// in row-major order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub n: usize,
    pub nz: usize,
    #[serde(rename = "R")]
    pub r: f64,
    pub nt: usize,
    #[serde(rename = "T")]
    pub t: f64,
}

impl GridSpec {
    /// Default cap on the number of lattice points.
    pub const DEFAULT_MAX_POINTS: usize = 1 << 26;

    pub fn new(n: usize, nz: usize, r: f64, nt: usize, t: f64) -> Result<Self> {
        let g = GridSpec { n, nz, r, nt, t };
        g.validate(Self::DEFAULT_MAX_POINTS)?;
        Ok(g)
    }

    pub fn validate(&self, max_points: usize) -> Result<()> {
        if self.n == 0 {
            return Err(Error::InvalidGrid("n must be positive".into()));
        }
        if self.nz < 8 {
            return Err(Error::InvalidGrid(format!("nz = {} < 8", self.nz)));
        }
        if !self.nt.is_power_of_two() || self.nt < 2 {
            return Err(Error::InvalidGrid(format!("nt = {} is not a power of two", self.nt)));
        }
        if !(self.r > 0.0 && self.r.is_finite() && self.t > 0.0 && self.t.is_finite()) {
            return Err(Error::InvalidGrid("R and T must be positive".into()));
        }
        let pts = (self.nz as f64).powi(2 * self.n as i32) * self.nt as f64;
        if pts > max_points as f64 {
            return Err(Error::InvalidGrid(format!(
                "{pts:.0} lattice points exceed the budget of {max_points}"
            )));
        }
        Ok(())
    }

    pub fn hz(&self) -> f64 {
        2.0 * self.r / self.nz as f64
    }

    pub fn dt(&self) -> f64 {
        2.0 * self.t / self.nt as f64
    }

    /// Frequency spacing `π/T` of the t-transform.
    pub fn dxi(&self) -> f64 {
        PI / self.t
    }

    pub fn nyquist(&self) -> f64 {
        PI / self.dt()
    }

    pub fn z_axis(&self) -> Vec<f64> {
        let h = self.hz();
        (0..self.nz).map(|i| -self.r + i as f64 * h).collect()
    }

    pub fn t_axis(&self) -> Vec<f64> {
        let dt = self.dt();
        (0..self.nt).map(|j| -self.t + j as f64 * dt).collect()
    }

    /// Number of z-lattice points, `nz^(2n)`.
    pub fn nzpoints(&self) -> usize {
        self.nz.pow(2 * self.n as u32)
    }

    pub fn len(&self) -> usize {
        self.nzpoints() * self.nt
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Area element of one z-cell, `h^(2n)`.
    pub fn z_cell(&self) -> f64 {
        self.hz().powi(2 * self.n as i32)
    }

    /// Volume of one lattice cell, `h^(2n) Δt`.
    pub fn cell(&self) -> f64 {
        self.z_cell() * self.dt()
    }

    /// Real-axis digits of z index `iz`: `(x_1, y_1, ..., x_n, y_n)`.
    pub fn z_digits(&self, mut iz: usize) -> Vec<usize> {
        let mut d = vec![0; 2 * self.n];
        for k in (0..2 * self.n).rev() {
            d[k] = iz % self.nz;
            iz /= self.nz;
        }
        d
    }

    /// All z-lattice points, flat with stride `n`.
    pub fn z_table(&self) -> Vec<C64> {
        let axis = self.z_axis();
        let mut out = Vec::with_capacity(self.nzpoints() * self.n);
        for iz in 0..self.nzpoints() {
            let d = self.z_digits(iz);
            for j in 0..self.n {
                out.push(C64::new(axis[d[2 * j]], axis[d[2 * j + 1]]));
            }
        }
        out
    }

    /// `|z|²` at every z-lattice point.
    pub fn z_norm_sqr(&self) -> Vec<f64> {
        let zt = self.z_table();
        zt.chunks(self.n).map(|z| z.iter().map(|c| c.norm_sqr()).sum()).collect()
    }

    /// Stride of real axis `k` (0-based over `2n` axes) in the z index.
    pub fn axis_stride(&self, k: usize) -> usize {
        self.nz.pow((2 * self.n - 1 - k) as u32)
    }

    /// True when `iz` lies on the outer face of the z-box.
    pub fn on_z_boundary(&self, iz: usize) -> bool {
        self.z_digits(iz).iter().any(|&d| d == 0 || d == self.nz - 1)
    }

    /// Same box, every axis refined by `factor`.
    pub fn refined(&self, factor: usize) -> GridSpec {
        GridSpec {
            nz: self.nz * factor,
            nt: self.nt * factor,
            ..self.clone()
        }
    }
}
