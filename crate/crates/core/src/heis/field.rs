use std::fmt::Debug;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::grid::GridSpec;
use crate::error::{Error, Result};
use crate::{C64, ZERO};

/// Value and first derivatives of a field at one point.
#[derive(Debug, Clone, PartialEq)]
pub struct Jet {
    pub value: C64,
    pub dz: Vec<C64>,
    pub dzbar: Vec<C64>,
    pub dt: C64,
}

impl Jet {
    pub fn zero(n: usize) -> Self {
        Jet {
            value: ZERO,
            dz: vec![ZERO; n],
            dzbar: vec![ZERO; n],
            dt: ZERO,
        }
    }
}

/// Exact point-evaluation rule for a function on ℍⁿ.
pub trait FieldEvaluator: Send + Sync + Debug {
    /// CR dimension `n` of the domain.
    fn dim(&self) -> usize;

    fn eval(&self, z: &[C64], t: f64) -> C64;

    /// Exact first derivatives, when available.
    fn jet(&self, _z: &[C64], _t: f64) -> Option<Jet> {
        None
    }

    fn label(&self) -> String;

    /// Values at every lattice point, in flat grid order.
    fn sample(&self, grid: &GridSpec) -> Vec<C64> {
        let zt = grid.z_table();
        let ta = grid.t_axis();
        let n = grid.n;
        let mut out = vec![ZERO; grid.len()];
        out.par_chunks_mut(grid.nt).enumerate().for_each(|(iz, row)| {
            let z = &zt[iz * n..(iz + 1) * n];
            for (v, &t) in row.iter_mut().zip(&ta) {
                *v = self.eval(z, t);
            }
        });
        out
    }

    /// Exact jets at every lattice point, or `None` without exact derivatives.
    fn sample_jets(&self, grid: &GridSpec) -> Option<Vec<Jet>> {
        let zt = grid.z_table();
        let ta = grid.t_axis();
        let n = grid.n;
        let rows: Vec<Option<Vec<Jet>>> = (0..grid.nzpoints())
            .into_par_iter()
            .map(|iz| {
                let z = &zt[iz * n..(iz + 1) * n];
                ta.iter().map(|&t| self.jet(z, t)).collect()
            })
            .collect();
        let mut out = Vec::with_capacity(grid.len());
        for r in rows {
            out.extend(r?);
        }
        Some(out)
    }
}

/// Raised when a sampled quantity does not decay at the grid boundary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TruncationWarning {
    pub source: String,
    /// Largest boundary magnitude relative to the peak.
    pub boundary_ratio: f64,
    pub threshold: f64,
}

/// Boundary-decay threshold for sampled fields.
pub const FIELD_DECAY_THRESHOLD: f64 = 1e-8;

/// Complex field on a [`GridSpec`], optionally backed by an exact evaluator.
#[derive(Clone)]
pub struct SampledField {
    pub grid: GridSpec,
    pub values: Vec<C64>,
    pub evaluator: Option<Arc<dyn FieldEvaluator>>,
    pub warnings: Vec<TruncationWarning>,
    pub provenance: String,
}

impl Debug for SampledField {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SampledField")
            .field("grid", &self.grid)
            .field("evaluator", &self.evaluator.as_ref().map(|e| e.label()))
            .field("warnings", &self.warnings)
            .field("provenance", &self.provenance)
            .finish()
    }
}

impl SampledField {
    /// Samples an evaluator on the grid.
    pub fn from_evaluator(grid: &GridSpec, ev: Arc<dyn FieldEvaluator>) -> Result<Self> {
        if ev.dim() != grid.n {
            return Err(Error::InvalidParameter(format!(
                "evaluator dimension {} does not match grid dimension {}",
                ev.dim(),
                grid.n
            )));
        }
        let values = ev.sample(grid);
        let provenance = ev.label();
        let mut f = SampledField {
            grid: grid.clone(),
            values,
            evaluator: Some(ev),
            warnings: Vec::new(),
            provenance,
        };
        f.refresh_warnings();
        Ok(f)
    }

    /// Wraps raw lattice values.
    pub fn from_values(grid: &GridSpec, values: Vec<C64>, provenance: impl Into<String>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidGrid(format!(
                "{} values for a grid of {} points",
                values.len(),
                grid.len()
            )));
        }
        let mut f = SampledField {
            grid: grid.clone(),
            values,
            evaluator: None,
            warnings: Vec::new(),
            provenance: provenance.into(),
        };
        f.refresh_warnings();
        Ok(f)
    }

    pub fn zeros(grid: &GridSpec) -> Self {
        SampledField {
            grid: grid.clone(),
            values: vec![ZERO; grid.len()],
            evaluator: None,
            warnings: Vec::new(),
            provenance: "zero".into(),
        }
    }

    pub fn has_evaluator(&self) -> bool {
        self.evaluator.is_some()
    }

    /// Recomputes the boundary-decay warning.
    pub fn refresh_warnings(&mut self) {
        self.warnings.retain(|w| w.source != "field boundary");
        let peak = self.values.iter().map(|v| v.norm()).fold(0.0, f64::max);
        if peak == 0.0 {
            return;
        }
        let g = &self.grid;
        let nt = g.nt;
        let mut edge = 0.0f64;
        for iz in 0..g.nzpoints() {
            let row = &self.values[iz * nt..(iz + 1) * nt];
            if g.on_z_boundary(iz) {
                edge = row.iter().map(|v| v.norm()).fold(edge, f64::max);
            } else {
                edge = edge.max(row[0].norm()).max(row[nt - 1].norm());
            }
        }
        let ratio = edge / peak;
        if ratio > FIELD_DECAY_THRESHOLD {
            self.warnings.push(TruncationWarning {
                source: "field boundary".into(),
                boundary_ratio: ratio,
                threshold: FIELD_DECAY_THRESHOLD,
            });
        }
    }

    /// Lattice inner product `Σ f ḡ · cell`.
    pub fn inner(&self, other: &SampledField) -> C64 {
        assert_eq!(self.grid, other.grid, "grids differ");
        let s: C64 = self
            .values
            .par_chunks(self.grid.nt)
            .zip(other.values.par_chunks(self.grid.nt))
            .map(|(a, b)| a.iter().zip(b).map(|(x, y)| x * y.conj()).sum::<C64>())
            .collect::<Vec<_>>()
            .into_iter()
            .sum();
        s * self.grid.cell()
    }

    pub fn l2_norm(&self) -> f64 {
        let s: f64 = self.values.iter().map(|v| v.norm_sqr()).sum();
        (s * self.grid.cell()).sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Grid-only copy with new values.
    pub fn with_values(&self, values: Vec<C64>, provenance: impl Into<String>) -> SampledField {
        let mut f = SampledField {
            grid: self.grid.clone(),
            values,
            evaluator: None,
            warnings: Vec::new(),
            provenance: provenance.into(),
        };
        f.refresh_warnings();
        f
    }

    pub fn scaled(&self, c: C64) -> SampledField {
        let mut f = self.with_values(self.values.iter().map(|v| v * c).collect(), self.provenance.clone());
        if let Some(ev) = &self.evaluator {
            f.evaluator = Some(Arc::new(super::evaluators::Scaled::new(c, ev.clone())));
        }
        f
    }

    /// Pointwise `self + c·other`; keeps an evaluator when both operands have one.
    pub fn axpy(&self, c: C64, other: &SampledField) -> SampledField {
        assert_eq!(self.grid, other.grid, "grids differ");
        let vals = self.values.iter().zip(&other.values).map(|(a, b)| a + c * b).collect();
        let mut f = self.with_values(vals, format!("{} + c*{}", self.provenance, other.provenance));
        if let (Some(a), Some(b)) = (&self.evaluator, &other.evaluator) {
            let sb: Arc<dyn FieldEvaluator> = Arc::new(super::evaluators::Scaled::new(c, b.clone()));
            f.evaluator = Some(Arc::new(super::evaluators::Sum::new(vec![a.clone(), sb])));
        }
        f
    }

    pub fn sub(&self, other: &SampledField) -> SampledField {
        self.axpy(C64::new(-1.0, 0.0), other)
    }

    /// Relative L² distance `‖self − other‖ / ‖other‖`.
    pub fn rel_l2_error(&self, reference: &SampledField) -> f64 {
        let d: f64 = self
            .values
            .iter()
            .zip(&reference.values)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum();
        let r: f64 = reference.values.iter().map(|v| v.norm_sqr()).sum();
        (d / r).sqrt()
    }
}
