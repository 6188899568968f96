use crate::error::Result;
use crate::strain::ElasticKit;
use crate::tensor::SymTensor2;

/// Partial derivatives of an energy with respect to the principal invariants.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InvariantDerivatives {
    pub d1: f64,
    pub d2: f64,
    pub d3: f64,
}

/// 2(Υ₁ + I₁Υ₂) I − 2Υ₂ C + 2I₃Υ₃ C⁻¹.
pub fn se_invariant_based(d: &InvariantDerivatives, ce: &SymTensor2) -> Result<SymTensor2> {
    let ci = ce.inverse()?;
    let i1 = ce.trace();
    let i3 = ce.det();
    Ok(SymTensor2::identity() * (2.0 * (d.d1 + i1 * d.d2)) - *ce * (2.0 * d.d2) + ci * (2.0 * i3 * d.d3))
}

/// Σ ϖ′(λ_a)/λ_a N_a ⊗ N_a for a Valanis–Landel energy Σ ϖ(λ_a).
pub fn se_valanis_landel(dw: impl Fn(f64) -> f64, kit: &ElasticKit) -> SymTensor2 {
    let l = kit.stretches;
    kit.spectral.map_values(&[dw(l[0]) / l[0], dw(l[1]) / l[1], dw(l[2]) / l[2]])
}
