use crate::error::Result;
use crate::tensor::{SymTensor2, Tensor4};

/// Isochoric stress J^{-2/3} ℙ:S̃ and tangent
/// ℙ:ℂ̃:ℙᵀ + ⅔Tr(J^{-2/3}S̃)ℙ̃ − ⅔(C⁻¹⊗S + S⊗C⁻¹) with ℂ̃ = J^{-4/3}·core.
pub fn isochoric_stress_tangent(
    c: &SymTensor2,
    s_tilde: &SymTensor2,
    core: &Tensor4,
) -> Result<(SymTensor2, Tensor4)> {
    let ci = c.inverse()?;
    let j = c.det().sqrt();
    let j23 = j.powf(-2.0 / 3.0);
    let mut proj = Tensor4::identity();
    proj.add_outer(-1.0 / 3.0, &ci, c);
    let s_ich = proj.contract_right(s_tilde) * j23;
    let c_tilde = *core * (j23 * j23);
    let mut p_tilde = ci.odot(&ci);
    p_tilde.add_outer(-1.0 / 3.0, &ci, &ci);
    let tr = j23 * s_tilde.dot(c);
    let mut tangent = proj.compose(&c_tilde).compose(&proj.transpose()) + p_tilde * (2.0 / 3.0 * tr);
    tangent.add_outer(-2.0 / 3.0, &ci, &s_ich);
    tangent.add_outer(-2.0 / 3.0, &s_ich, &ci);
    Ok((s_ich, tangent))
}

/// Pressure stress −J P C⁻¹ and its tangent at fixed P.
pub fn pressure_stress_tangent(c: &SymTensor2, p: f64) -> Result<(SymTensor2, Tensor4)> {
    let ci = c.inverse()?;
    let j = c.det().sqrt();
    let stress = ci * (-j * p);
    let mut tangent = ci.odot(&ci) * (2.0 * j * p);
    tangent.add_outer(-j * p, &ci, &ci);
    Ok((stress, tangent))
}

/// J^{-2/3}(S̃ − ⅓(C:S̃)C⁻¹).
pub fn isochoric_stress(c: &SymTensor2, s_tilde: &SymTensor2) -> Result<SymTensor2> {
    let ci = c.inverse()?;
    let j23 = c.det().powf(-1.0 / 3.0);
    Ok((*s_tilde - ci * (s_tilde.dot(c) / 3.0)) * j23)
}
