//! The CR sphere S³ ⊂ ℂ²: its Szegő projection in Hopf coordinates, the
//! Cayley chart onto ℍ¹ and the rescaling experiment that recovers the
//! Heisenberg projection from sphere projections.

mod chart;
mod grid;
mod project;
mod transplant;

pub use chart::{
    build_fs_chart, cayley, cayley_inverse, chart_density, error_coefficients, ErrorCoefficients, FsChart, SlopeCheck,
};
pub use grid::{frame_adjoint, frame_apply, identity_frame, Frame, SphereField, SphereGrid, SpherePoint};
pub use project::{
    cauchy_szego_extend, kernel_constant_by_quadrature, monomial_norm_sqr, sphere_expand, sphere_kernel,
    sphere_kernel_constant, sphere_szego_apply, sphere_szego_apply_with, Alias, SphereExpansion, SphereProjection,
    SphereProjectionConfig,
};
pub use transplant::{
    norm_transfer_check, transplant_experiment, CutoffSpec, ErrorNorm, NormTransfer, SphereResolution,
    TransplantConfig, TransplantReport, TransplantRow, TransplantedField,
};
