use serde::{Deserialize, Serialize};

use super::elastic_stress::InvariantDerivatives;
use super::langevin::{inv_langevin, inv_langevin_ratio};
use crate::error::{Error, Result};
use crate::tensor::{SymTensor2, Tensor4};

/// Eight-chain network with shear modulus μ and N chain segments.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EightChainSpec {
    pub mu: f64,
    pub n_chain: f64,
}

/// Stress 2∂Ψ/∂C and tangent 4∂²Ψ/∂C∂C.
#[derive(Clone, Debug)]
pub struct EightChainResponse {
    pub stress: SymTensor2,
    pub tangent: Tensor4,
    pub network_stretch: f64,
}

impl EightChainSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.mu > 0.0) || !self.mu.is_finite() {
            return Err(Error::InvalidParameter(format!("eight-chain modulus must be positive, got {}", self.mu)));
        }
        if !(self.n_chain > 1.0) || !self.n_chain.is_finite() {
            return Err(Error::InvalidParameter(format!("chain segment count must exceed 1, got {}", self.n_chain)));
        }
        Ok(())
    }

    /// √(I₁/3N).
    pub fn network_stretch(&self, c: &SymTensor2) -> f64 {
        (c.trace() / (3.0 * self.n_chain)).sqrt()
    }

    /// Coefficient (μ√N/3) 𝔏⁻¹(1/√N) of the C⁻¹ term.
    fn reference_coefficient(&self) -> Result<f64> {
        let rn = self.n_chain.sqrt();
        Ok(self.mu * rn / 3.0 * inv_langevin(1.0 / rn)?)
    }

    fn checked_stretch(&self, c: &SymTensor2) -> Result<f64> {
        let l = self.network_stretch(c);
        if !(l < 1.0) {
            return Err(Error::ChainLimit { stretch: l });
        }
        Ok(l)
    }

    /// ∂Ψ/∂I₁, ∂Ψ/∂I₂, ∂Ψ/∂I₃.
    pub fn invariant_derivatives(&self, c: &SymTensor2) -> Result<InvariantDerivatives> {
        let l = self.checked_stretch(c)?;
        let (g, _) = inv_langevin_ratio(l)?;
        let k = self.reference_coefficient()?;
        Ok(InvariantDerivatives { d1: self.mu * g / 6.0, d2: 0.0, d3: -k / (2.0 * c.det()) })
    }

    pub fn stress(&self, c: &SymTensor2) -> Result<SymTensor2> {
        let l = self.checked_stretch(c)?;
        let (g, _) = inv_langevin_ratio(l)?;
        let k = self.reference_coefficient()?;
        Ok(SymTensor2::identity() * (self.mu * g / 3.0) - c.inverse()? * k)
    }

    pub fn stress_tangent(&self, c: &SymTensor2) -> Result<EightChainResponse> {
        let l = self.checked_stretch(c)?;
        let (g, dg) = inv_langevin_ratio(l)?;
        let k = self.reference_coefficient()?;
        let ci = c.inverse()?;
        let i = SymTensor2::identity();
        let stress = i * (self.mu * g / 3.0) - ci * k;
        let mut tangent = ci.odot(&ci) * (2.0 * k);
        tangent.add_outer(self.mu * dg / (9.0 * self.n_chain * l), &i, &i);
        Ok(EightChainResponse { stress, tangent, network_stretch: l })
    }
}

/// Eight-chain equilibrium stress and tangent.
pub fn eightchain_equilibrium(spec: &EightChainSpec, c: &SymTensor2) -> Result<EightChainResponse> {
    spec.stress_tangent(c)
}
