use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::evaluators::Pullback;
use super::field::SampledField;
use crate::error::{Error, Result};
use crate::C64;

/// Dilation factor λ and localisation exponent θ (cutoff scale λ^θ).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScaleParam {
    pub lambda: f64,
    pub theta: f64,
}

impl ScaleParam {
    pub fn new(lambda: f64) -> Result<Self> {
        Self::with_theta(lambda, 0.5)
    }

    pub fn with_theta(lambda: f64, theta: f64) -> Result<Self> {
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(Error::InvalidParameter(format!("lambda = {lambda} must be positive")));
        }
        if !(theta > 0.0 && theta < 1.0) {
            return Err(Error::InvalidParameter(format!("theta = {theta} must lie in (0,1)")));
        }
        Ok(ScaleParam { lambda, theta })
    }

    /// Cutoff scale λ^θ.
    pub fn cutoff_scale(&self) -> f64 {
        self.lambda.powf(self.theta)
    }
}

/// Parabolic dilation `Φ_λ(z, t) = (λz, λ²t)`.
pub fn parabolic_scale(s: &ScaleParam, z: &[C64], t: f64) -> (Vec<C64>, f64) {
    let l = s.lambda;
    (z.iter().map(|c| c * l).collect(), l * l * t)
}

/// Koranyi gauge `(|z|⁴ + t²)^{1/4}`.
pub fn koranyi_gauge(z: &[C64], t: f64) -> f64 {
    let r2: f64 = z.iter().map(|c| c.norm_sqr()).sum();
    (r2 * r2 + t * t).sqrt().sqrt()
}

/// `f ∘ Φ_λ` sampled on the grid of `f`, built by evaluator composition.
pub fn pullback(f: &SampledField, s: &ScaleParam) -> Result<SampledField> {
    let ev = f.evaluator.clone().ok_or(Error::MissingEvaluator("pullback"))?;
    if s.lambda == 1.0 {
        return Ok(f.clone());
    }
    SampledField::from_evaluator(
        &f.grid,
        Arc::new(Pullback {
            lambda: s.lambda,
            inner: ev,
        }),
    )
}
