//! Grids, fields and the dense CR test class on ℍⁿ = ℂⁿ×ℝ.
//!
//! The CR structure is spanned by `L_j = ∂_{z_j} + i z̄_j ∂_t`; a function is
//! CR when `L̄_j f = (∂_{z̄_j} - i z_j ∂_t) f = 0` for every `j`.

mod cr;
mod dense;
mod evaluators;
mod field;
mod grid;
mod io;
mod scale;

pub use cr::{cr_defect, cr_operators, CrDefect, CrOperators, DerivativeScheme};
pub use dense::{eval_d, BumpProfile, HolomorphicPolynomial, TestFunctionD};
pub use evaluators::{
    Closure, Conjugate, GaussianTerm, GaussianTerms, KoranyiBump, Product, Pullback, Scaled, Sum,
};
pub use field::{FieldEvaluator, Jet, SampledField, TruncationWarning};
pub use grid::GridSpec;
pub use io::{read_field, write_field, FieldHeader};
pub use scale::{koranyi_gauge, parabolic_scale, pullback, ScaleParam};
