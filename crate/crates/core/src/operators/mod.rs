//! The scalar-curvature adjoint, the constraint map and its adjoint, the KID systems and
//! the closed-conformal-Killing identities, as residual evaluators.

mod lemmas;
mod ops;
mod report;
mod systems;

pub use lemmas::{
    lemma1_pointwise, lemma1_residuals, lemma2_pointwise, lemma2_residuals, structure_checks,
    ScalStats, StructureReport, LEMMA1_NAMES,
};
pub use ops::{
    codifferential, constraint_jet, kernel_display_jet, lie_sym2, lstar_jet, ustar0_jet, ustar_jet,
    wedge11,
};
pub use report::{EquationResidual, ResidualReport, Sampling};
pub use systems::{
    kernel_display_residual, lstar_residual, sigma_pointwise, sigma_residual, KidData, SystemId,
};

use crate::error::Result;
use crate::geometry::{LocalGeometry, MetricField, OneFormField, ScalarField, SymTensorField, Tensor};
use crate::jets::DEFAULT_ORDER;

pub fn ustar(g: &MetricField, f: &ScalarField, p: &[f64]) -> Result<Tensor> {
    let geo = LocalGeometry::new(g, p, DEFAULT_ORDER)?;
    Ok(ustar_jet(&geo, &geo.scalar(f)?).value())
}

pub fn ustar0(g: &MetricField, f: &ScalarField, p: &[f64]) -> Result<Tensor> {
    let geo = LocalGeometry::new(g, p, DEFAULT_ORDER)?;
    Ok(ustar0_jet(&geo, &geo.scalar(f)?).value())
}

/// `(Φ₁, Φ₂)` at `p`.
pub fn constraint_map(g: &MetricField, k: &SymTensorField, p: &[f64]) -> Result<(f64, Tensor)> {
    let geo = LocalGeometry::new(g, p, DEFAULT_ORDER)?;
    let (a, b) = constraint_jet(&geo, &geo.sym2(k)?);
    Ok((a.value(), b.value()))
}

/// `(L*₁, L*₂)` at `p`.
pub fn lstar(
    g: &MetricField,
    k: &SymTensorField,
    f: &ScalarField,
    alpha: &OneFormField,
    p: &[f64],
) -> Result<(Tensor, Tensor)> {
    let geo = LocalGeometry::new(g, p, DEFAULT_ORDER)?;
    let (a, b) = lstar_jet(&geo, &geo.sym2(k)?, &geo.scalar(f)?, &geo.oneform(alpha)?);
    Ok((a.value(), b.value()))
}
