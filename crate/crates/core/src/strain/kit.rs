use super::scale::ScaleFunction;
use super::spectral_fn::{Samples, SpectralDerivative};
use crate::error::{Error, Result};
use crate::tensor::{spectral_decompose, Spectral3, SymTensor2, Tensor4, Tensor6};

/// Tolerance on det C̃ − 1 for isochoric arguments.
pub const UNIMODULAR_TOL: f64 = 1e-10;

/// Generalized strain of a deformation tensor with its derivatives
/// ℚ = 2 ∂E/∂C and 𝓛 = 4 ∂²E/∂C∂C.
#[derive(Clone, Debug)]
pub struct StrainKit {
    pub sf: ScaleFunction,
    pub spectral: Spectral3,
    pub stretches: [f64; 3],
    pub strain: SymTensor2,
    pub q: Tensor4,
    deriv: Option<SpectralDerivative>,
}

fn is_green_lagrange(sf: &ScaleFunction) -> bool {
    matches!(sf, ScaleFunction::SethHill { m } if *m == 2.0)
}

impl StrainKit {
    pub fn new(c: &SymTensor2, sf: ScaleFunction) -> Result<Self> {
        let spectral = spectral_decompose(c, true)?;
        let x = spectral.eigenvalues;
        let stretches = x.map(f64::sqrt);
        if is_green_lagrange(&sf) {
            return Ok(StrainKit {
                sf,
                spectral,
                stretches,
                strain: (*c - SymTensor2::identity()) * 0.5,
                q: Tensor4::identity(),
                deriv: None,
            });
        }
        let mut samples = Samples { x, f: [0.0; 3], d1: [0.0; 3], d2: [0.0; 3] };
        for a in 0..3 {
            let l = stretches[a];
            let ev = sf.eval(l)?;
            samples.f[a] = ev.e;
            samples.d1[a] = ev.d1 / (2.0 * l);
            samples.d2[a] = (l * ev.d2 - ev.d1) / (4.0 * l * l * l);
        }
        let deriv = SpectralDerivative::new(&spectral, &samples, x[0]);
        let strain = spectral.map_values(&samples.f);
        let q = deriv.first_tensor(2.0);
        Ok(StrainKit { sf, spectral, stretches, strain, q, deriv: Some(deriv) })
    }

    /// 𝓛 = 4 ∂²E/∂C∂C.
    pub fn curvature(&self) -> Tensor6 {
        match &self.deriv {
            Some(d) => d.second_tensor(4.0),
            None => Tensor6::zero(),
        }
    }

    /// T : 𝓛.
    pub fn contract_curvature(&self, t: &SymTensor2) -> Tensor4 {
        match &self.deriv {
            Some(d) => d.second_contract_left(4.0, t),
            None => Tensor4::zero(),
        }
    }
}

/// Strain kit of the isochoric part C̃ = J^{-2/3} C; returns (J, C̃, kit).
pub fn isochoric_kit(c: &SymTensor2, sf: ScaleFunction) -> Result<(f64, SymTensor2, StrainKit)> {
    let det = c.det();
    if !(det > 0.0) {
        return Err(Error::NotSpd { min_eigenvalue: det });
    }
    let j = det.sqrt();
    let ct = *c * j.powf(-2.0 / 3.0);
    let kit = StrainKit::new(&ct, sf)?;
    Ok((j, ct, kit))
}

/// Checks det C̃ = 1.
pub fn check_unimodular(ct: &SymTensor2) -> Result<()> {
    let det = ct.det();
    if (det - 1.0).abs() > UNIMODULAR_TOL {
        return Err(Error::UnimodularViolation { det });
    }
    Ok(())
}

/// Elastic deformation tensor reconstructed from an elastic strain, with
/// ℚ^{e,-1} = ½ ∂C^e/∂E^e, its inverse ℚ^e and 𝓚 = ¼ ∂²C^e/∂E^e∂E^e.
#[derive(Clone, Debug)]
pub struct ElasticKit {
    pub sf: ScaleFunction,
    pub spectral: Spectral3,
    pub strains: [f64; 3],
    pub stretches: [f64; 3],
    pub ee: SymTensor2,
    pub ce: SymTensor2,
    pub je: f64,
    pub q_inv: Tensor4,
    pub q: Tensor4,
    deriv: SpectralDerivative,
}

impl ElasticKit {
    /// From E^e via the inverse scale function.
    pub fn from_strain(ee: &SymTensor2, sf: ScaleFunction) -> Result<Self> {
        let spectral = spectral_decompose(ee, false)?;
        let strains = spectral.eigenvalues;
        let mut stretches = [0.0; 3];
        for a in 0..3 {
            stretches[a] = sf.inverse(strains[a])?;
        }
        Self::assemble(sf, spectral, strains, stretches, *ee, None)
    }

    /// From an SPD C^e via the forward scale function.
    pub fn from_deformation(ce: &SymTensor2, sf: ScaleFunction) -> Result<Self> {
        let spectral = spectral_decompose(ce, true)?;
        let stretches = spectral.eigenvalues.map(f64::sqrt);
        let mut strains = [0.0; 3];
        for a in 0..3 {
            strains[a] = sf.eval(stretches[a])?.e;
        }
        let ee = spectral.map_values(&strains);
        Self::assemble(sf, spectral, strains, stretches, ee, Some(*ce))
    }

    fn assemble(
        sf: ScaleFunction,
        spectral: Spectral3,
        strains: [f64; 3],
        stretches: [f64; 3],
        ee: SymTensor2,
        ce: Option<SymTensor2>,
    ) -> Result<Self> {
        let mut samples = Samples { x: strains, f: [0.0; 3], d1: [0.0; 3], d2: [0.0; 3] };
        for a in 0..3 {
            let l = stretches[a];
            let ev = sf.eval(l)?;
            samples.f[a] = l * l;
            samples.d1[a] = 2.0 * l / ev.d1;
            samples.d2[a] = 2.0 / (ev.d1 * ev.d1) - 2.0 * l * ev.d2 / (ev.d1 * ev.d1 * ev.d1);
        }
        let scale = strains.iter().fold(1.0_f64, |m, w| m.max(w.abs()));
        let mut frame = spectral;
        frame.eigenvalues = strains;
        let deriv = SpectralDerivative::new(&frame, &samples, scale);
        let ce = ce.unwrap_or_else(|| frame.map_values(&samples.f));
        Ok(ElasticKit {
            sf,
            spectral: frame,
            strains,
            stretches,
            ee,
            ce,
            je: stretches[0] * stretches[1] * stretches[2],
            q_inv: deriv.first_tensor(0.5),
            q: deriv.first_tensor_inverse(2.0),
            deriv,
        })
    }

    /// 𝓚 = ¼ ∂²C^e/∂E^e∂E^e.
    pub fn curvature(&self) -> Tensor6 {
        self.deriv.second_tensor(0.25)
    }

    /// S : 𝓚.
    pub fn contract_curvature(&self, s: &SymTensor2) -> Tensor4 {
        self.deriv.second_contract_left(0.25, s)
    }

    /// Divided-difference coefficients of h(w) = (E⁻¹(w))² on the eigenvalues.
    pub fn derivative(&self) -> &SpectralDerivative {
        &self.deriv
    }
}
