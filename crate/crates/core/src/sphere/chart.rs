use serde::{Deserialize, Serialize};

use super::grid::{frame_adjoint, frame_apply, Frame, SpherePoint};
use crate::error::{Error, Result};
use crate::heis::Closure;
use crate::{C64, I, ZERO};

/// Cayley map `ℍ¹ → S³ ∖ {(0,−1)}` onto pole coordinates:
/// `w = t + i|z|²`, `η = (2iz, i − w) / (i + w)`. The origin goes to `(0, 1)`.
pub fn cayley(z: C64, t: f64) -> [C64; 2] {
    let w = C64::new(t, z.norm_sqr());
    let d = I + w;
    [2.0 * I * z / d, (I - w) / d]
}

/// Inverse of [`cayley`]; `None` at the puncture `η₂ = −1`.
pub fn cayley_inverse(eta: [C64; 2]) -> Option<(C64, f64)> {
    let d = C64::new(1.0, 0.0) + eta[1];
    if d.norm() < 1e-300 {
        return None;
    }
    let z = eta[0] / d;
    let w = I * (C64::new(1.0, 0.0) - eta[1]) / d;
    Some((z, w.re))
}

/// Density of `ν = σ_{S³}/8` against Lebesgue measure in chart coordinates,
/// `((1+|z|²)² + t²)^{-2}`; equal to 1 at the origin.
pub fn chart_density(z: C64, t: f64) -> f64 {
    let a = 1.0 + z.norm_sqr();
    1.0 / (a * a + t * t).powi(2)
}

/// Coefficients of the error field `E = a ∂_z + b ∂_{z̄} + c ∂_t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorCoefficients {
    pub dz: C64,
    pub dzbar: C64,
    pub dt: C64,
}

/// Pulled-back sphere generator, normalised to `∂_z + i z̄ ∂_t + E`.
/// It is `μ(∂_z + i z̄ ∂_t)` with `2μ = i(i+w)²/(w̄ − i)`, so
/// `E = (2μ − 1)(∂_z + i z̄ ∂_t)`.
pub fn error_coefficients(z: C64, t: f64) -> ErrorCoefficients {
    let w = C64::new(t, z.norm_sqr());
    let m = I * (I + w) * (I + w) / (w.conj() - I) - 1.0;
    ErrorCoefficients {
        dz: m,
        dzbar: ZERO,
        dt: m * I * z.conj(),
    }
}

/// Measured scaling exponents of the error-field coefficients.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlopeCheck {
    pub lambdas: Vec<f64>,
    /// log₂ decay of the `∂_z` coefficient between consecutive λ.
    pub dz: Vec<f64>,
    /// log₂ decay of the `∂_t` coefficient between consecutive λ.
    pub dt: Vec<f64>,
    /// Largest `∂_{z̄}` coefficient seen.
    pub dzbar_max: f64,
    pub required_dz: f64,
    pub required_dt: f64,
}

/// Cayley chart at a base point `x₀`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FsChart {
    pub base: SpherePoint,
    /// Unitary taking pole coordinates to ambient ones; its inverse maps `x₀` to `(0,1)`.
    pub frame: Frame,
    pub slopes: SlopeCheck,
}

/// Builds the chart at `x₀` and checks the parabolic weight of its error field.
pub fn build_fs_chart(x0: &SpherePoint) -> Result<FsChart> {
    let r = x0.z1.norm_sqr() + x0.z2.norm_sqr();
    if !((r - 1.0).abs() <= 1e-12) {
        return Err(Error::InvalidParameter(format!("base point not on the sphere (|x|² = {r})")));
    }
    // U = [[x₂, −x₁], [x̄₁, x̄₂]] sends x₀ to (0, 1).
    let u: Frame = [[x0.z2, -x0.z1], [x0.z1.conj(), x0.z2.conj()]];
    let slopes = measure_slopes();
    let chart = FsChart {
        base: *x0,
        frame: frame_adjoint(&u),
        slopes,
    };
    chart.verify()?;
    Ok(chart)
}

fn measure_slopes() -> SlopeCheck {
    let lambdas = vec![2.0, 4.0, 8.0];
    // probe points at gauge ≈ 1 in several directions
    let probes: Vec<(C64, f64)> = (0..12)
        .map(|k| {
            let a = std::f64::consts::PI * (k as f64 + 0.5) / 12.0;
            let r = a.cos().abs().sqrt();
            (C64::from_polar(r, 1.7 * k as f64), a.sin())
        })
        .collect();
    let mean = |lam: f64, pick: &dyn Fn(&ErrorCoefficients) -> f64| {
        probes
            .iter()
            .map(|&(z, t)| pick(&error_coefficients(z / lam, t / (lam * lam))))
            .sum::<f64>()
            / probes.len() as f64
    };
    let slope = |pick: &dyn Fn(&ErrorCoefficients) -> f64| {
        lambdas
            .windows(2)
            .map(|w| (mean(w[0], pick) / mean(w[1], pick)).log2() / (w[1] / w[0]).log2())
            .collect::<Vec<_>>()
    };
    let dzbar_max = lambdas
        .iter()
        .map(|&l| mean(l, &|e| e.dzbar.norm()))
        .fold(0.0, f64::max);
    SlopeCheck {
        dz: slope(&|e| e.dz.norm()),
        dt: slope(&|e| e.dt.norm()),
        lambdas,
        dzbar_max,
        required_dz: 1.0,
        required_dt: 2.0,
    }
}

impl FsChart {
    fn verify(&self) -> Result<()> {
        let s = &self.slopes;
        for (name, vals, need) in [("∂_z", &s.dz, s.required_dz), ("∂_t", &s.dt, s.required_dt)] {
            if let Some(v) = vals.iter().find(|v| !(**v >= need - 0.1)) {
                return Err(Error::ChartVerificationFailure(format!(
                    "{name} coefficient decays with slope {v:.3} < {need} - 0.1"
                )));
            }
        }
        if s.dzbar_max != 0.0 {
            return Err(Error::ChartVerificationFailure(format!(
                "∂_z̄ coefficient does not vanish ({:.3e})",
                s.dzbar_max
            )));
        }
        let (z, t) = self.from_sphere(&self.base)?;
        if z.norm() > 1e-12 || t.abs() > 1e-12 {
            return Err(Error::ChartVerificationFailure(format!("base point maps to ({z}, {t})")));
        }
        Ok(())
    }

    /// Short identifier of the base point.
    pub fn id(&self) -> String {
        let b = &self.base;
        format!(
            "cayley@({:.6}{:+.6}i,{:.6}{:+.6}i)",
            b.z1.re, b.z1.im, b.z2.re, b.z2.im
        )
    }

    pub fn to_sphere(&self, z: C64, t: f64) -> SpherePoint {
        let v = frame_apply(&self.frame, cayley(z, t));
        SpherePoint { z1: v[0], z2: v[1] }
    }

    pub fn from_sphere(&self, x: &SpherePoint) -> Result<(C64, f64)> {
        cayley_inverse(frame_apply(&frame_adjoint(&self.frame), x.coords()))
            .ok_or_else(|| Error::SupportEscape("point is the puncture of the chart".into()))
    }

    /// Density `dν/dσ` in chart coordinates as an evaluator on ℍ¹.
    pub fn density_evaluator(&self) -> Closure {
        Closure::new(1, "chart-density", |z, t| C64::new(chart_density(z[0], t), 0.0))
    }

    /// Coefficient evaluators `(∂_z, ∂_{z̄}, ∂_t)` of the error field.
    pub fn error_evaluators(&self) -> [Closure; 3] {
        [
            Closure::new(1, "error-dz", |z, t| error_coefficients(z[0], t).dz),
            Closure::new(1, "error-dzbar", |z, t| error_coefficients(z[0], t).dzbar),
            Closure::new(1, "error-dt", |z, t| error_coefficients(z[0], t).dt),
        ]
    }
}
