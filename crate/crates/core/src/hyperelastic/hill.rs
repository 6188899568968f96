use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::strain::{check_unimodular, ScaleFunction, StrainKit};
use crate::tensor::{SymTensor2, Tensor4};

/// One quadratic term μ/2 |Ẽ|² of a Hill-class energy.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HillTerm {
    pub mu: f64,
    pub strain: ScaleFunction,
}

/// Σ_β μ_β/2 |Ẽ_β|².
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct HillClassSpec {
    pub terms: Vec<HillTerm>,
}

/// Fictitious stress S̃ = 2∂Ψ/∂C̃ and the tangent core 2∂S̃/∂C̃.
#[derive(Clone, Debug)]
pub struct HillResponse {
    pub stress: SymTensor2,
    pub tangent: Tensor4,
}

impl HillClassSpec {
    pub fn single(mu: f64, strain: ScaleFunction) -> Self {
        HillClassSpec { terms: vec![HillTerm { mu, strain }] }
    }

    pub fn validate(&self) -> Result<()> {
        if self.terms.is_empty() {
            return Err(Error::InvalidParameter("Hill-class energy needs at least one term".into()));
        }
        for t in &self.terms {
            if !(t.mu > 0.0) || !t.mu.is_finite() {
                return Err(Error::InvalidParameter(format!("Hill term modulus must be positive, got {}", t.mu)));
            }
            t.strain.validate()?;
        }
        Ok(())
    }

    pub fn energy(&self, ct: &SymTensor2) -> Result<f64> {
        let mut w = 0.0;
        for t in &self.terms {
            let e = StrainKit::new(ct, t.strain)?.strain;
            w += 0.5 * t.mu * e.dot(&e);
        }
        Ok(w)
    }

    /// Stress and tangent core on a unimodular C̃.
    pub fn stress_tangent(&self, ct: &SymTensor2) -> Result<HillResponse> {
        check_unimodular(ct)?;
        self.stress_tangent_unchecked(ct)
    }

    /// As [`Self::stress_tangent`] without the det C̃ = 1 check.
    pub fn stress_tangent_unchecked(&self, ct: &SymTensor2) -> Result<HillResponse> {
        let mut stress = SymTensor2::zero();
        let mut tangent = Tensor4::zero();
        for t in &self.terms {
            let kit = StrainKit::new(ct, t.strain)?;
            accumulate_quadratic(&kit, t.mu, &(kit.strain * t.mu), &mut stress, &mut tangent);
        }
        Ok(HillResponse { stress, tangent })
    }
}

/// Adds T:ℚ to the stress and (μ_t ℚᵀ:ℚ + T:𝓛) to the tangent.
pub(crate) fn accumulate_quadratic(
    kit: &StrainKit,
    mu_t: f64,
    t: &SymTensor2,
    stress: &mut SymTensor2,
    tangent: &mut Tensor4,
) {
    *stress += kit.q.contract_left(t);
    *tangent += kit.q.transpose().compose(&kit.q) * mu_t;
    *tangent += kit.contract_curvature(t);
}

/// Hill-class stress and tangent core, checking det C̃ = 1.
pub fn hill_stress_tangent(spec: &HillClassSpec, ct: &SymTensor2) -> Result<HillResponse> {
    spec.stress_tangent(ct)
}
