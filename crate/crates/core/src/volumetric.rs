//! Volumetric Helmholtz energies Ψ_vol(J) and their Legendre duals
//! G_vol(P) = inf_J {Ψ_vol(J) + P J}.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum VolumetricFamily {
    Incompressible,
    /// κ(J − 1)²/2.
    Quadratic,
    /// κ/4 (J² − 2 ln J − 1).
    St91,
    /// κ(J − ln J − 1).
    M94,
    /// κ(J ln J − J + 1).
    L94,
    /// κ/32 (J² − J⁻²)²; no closed-form Gibbs energy.
    Ansys2000,
    /// κ/50 (J⁵ + J⁻⁵ − 2); no closed-form Gibbs energy.
    Hn03,
    /// κ γ⁻² (γ ln J + J^−γ − 1); no closed-form Gibbs energy.
    O72 { gamma: f64 },
}

impl VolumetricFamily {
    pub fn name(&self) -> &'static str {
        match self {
            VolumetricFamily::Incompressible => "incompressible",
            VolumetricFamily::Quadratic => "quadratic",
            VolumetricFamily::St91 => "st91",
            VolumetricFamily::M94 => "m94",
            VolumetricFamily::L94 => "l94",
            VolumetricFamily::Ansys2000 => "ansys2000",
            VolumetricFamily::Hn03 => "hn03",
            VolumetricFamily::O72 { .. } => "o72",
        }
    }
}

/// Volumetric response: family, bulk modulus κ and reference density ρ0.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "VolumetricRepr", into = "VolumetricRepr")]
pub struct VolumetricModel {
    pub family: VolumetricFamily,
    pub kappa: f64,
    pub rho0: f64,
}

// Flat config form: {"family": "o72", "gamma": 2.0, "kappa": 100.0}.
#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct VolumetricRepr {
    family: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    gamma: Option<f64>,
    #[serde(default)]
    kappa: f64,
    #[serde(default = "default_rho0")]
    rho0: f64,
}

fn default_rho0() -> f64 {
    1.0
}

impl TryFrom<VolumetricRepr> for VolumetricModel {
    type Error = String;

    fn try_from(r: VolumetricRepr) -> std::result::Result<Self, String> {
        use VolumetricFamily as F;
        let family = match (r.family.as_str(), r.gamma) {
            ("o72", Some(gamma)) => F::O72 { gamma },
            ("o72", None) => return Err("family `o72` needs `gamma`".into()),
            (_, Some(_)) => return Err(format!("`gamma` is not a parameter of family `{}`", r.family)),
            ("incompressible", _) => F::Incompressible,
            ("quadratic", _) => F::Quadratic,
            ("st91", _) => F::St91,
            ("m94", _) => F::M94,
            ("l94", _) => F::L94,
            ("ansys2000", _) => F::Ansys2000,
            ("hn03", _) => F::Hn03,
            (other, _) => return Err(format!("unknown volumetric family `{other}`")),
        };
        Ok(VolumetricModel { family, kappa: r.kappa, rho0: r.rho0 })
    }
}

impl From<VolumetricModel> for VolumetricRepr {
    fn from(m: VolumetricModel) -> Self {
        let gamma = match m.family {
            VolumetricFamily::O72 { gamma } => Some(gamma),
            _ => None,
        };
        VolumetricRepr { family: m.family.name().to_string(), gamma, kappa: m.kappa, rho0: m.rho0 }
    }
}

/// G_vol(P) with its first two derivatives and the derived density relations.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GibbsEval {
    pub g: f64,
    /// dG/dP, which equals the volume ratio J.
    pub dg: f64,
    pub d2g: f64,
    pub rho: f64,
    /// Isothermal compressibility (dρ/dP)/ρ.
    pub beta: f64,
}

impl VolumetricModel {
    pub fn incompressible() -> Self {
        VolumetricModel { family: VolumetricFamily::Incompressible, kappa: 0.0, rho0: 1.0 }
    }

    pub fn new(family: VolumetricFamily, kappa: f64) -> Self {
        VolumetricModel { family, kappa, rho0: 1.0 }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rho0 > 0.0) {
            return Err(Error::InvalidParameter(format!("rho0 must be positive, got {}", self.rho0)));
        }
        if self.is_incompressible() {
            return Ok(());
        }
        if !(self.kappa > 0.0) || !self.kappa.is_finite() {
            return Err(Error::InvalidParameter(format!("kappa must be positive, got {}", self.kappa)));
        }
        if let VolumetricFamily::O72 { gamma } = self.family {
            if gamma == 0.0 || !gamma.is_finite() {
                return Err(Error::InvalidParameter("O72 needs a nonzero gamma".into()));
            }
        }
        Ok(())
    }

    pub fn is_incompressible(&self) -> bool {
        self.family == VolumetricFamily::Incompressible
    }

    /// Whether G_vol has a closed form.
    pub fn has_closed_gibbs(&self) -> bool {
        !matches!(
            self.family,
            VolumetricFamily::Ansys2000 | VolumetricFamily::Hn03 | VolumetricFamily::O72 { .. }
        )
    }

    /// (Ψ, dΨ/dJ, d²Ψ/dJ²).
    pub fn psi_derivs(&self, j: f64) -> Result<(f64, f64, f64)> {
        if !(j > 0.0) || !j.is_finite() {
            return Err(Error::domain("volumetric energy needs J > 0", j));
        }
        let k = self.kappa;
        let r = match self.family {
            VolumetricFamily::Incompressible => {
                return Err(Error::Unsupported("incompressible model has no Helmholtz energy".into()))
            }
            VolumetricFamily::Quadratic => (0.5 * k * (j - 1.0).powi(2), k * (j - 1.0), k),
            VolumetricFamily::St91 => (
                0.25 * k * (j * j - 2.0 * j.ln() - 1.0),
                0.5 * k * (j - 1.0 / j),
                0.5 * k * (1.0 + 1.0 / (j * j)),
            ),
            VolumetricFamily::M94 => (k * (j - j.ln() - 1.0), k * (1.0 - 1.0 / j), k / (j * j)),
            VolumetricFamily::L94 => (k * (j * j.ln() - j + 1.0), k * j.ln(), k / j),
            VolumetricFamily::Ansys2000 => {
                let a = j * j - 1.0 / (j * j);
                let da = 2.0 * j + 2.0 / j.powi(3);
                let d2a = 2.0 - 6.0 / j.powi(4);
                (k * a * a / 32.0, k * a * da / 16.0, k * (da * da + a * d2a) / 16.0)
            }
            VolumetricFamily::Hn03 => (
                k * (j.powi(5) + j.powi(-5) - 2.0) / 50.0,
                k * (j.powi(4) - j.powi(-6)) / 10.0,
                k * (4.0 * j.powi(3) + 6.0 * j.powi(-7)) / 10.0,
            ),
            VolumetricFamily::O72 { gamma: g } => (
                k * (g * j.ln() + j.powf(-g) - 1.0) / (g * g),
                k * (1.0 / j - j.powf(-g - 1.0)) / g,
                k * (-1.0 / (j * j) + (g + 1.0) * j.powf(-g - 2.0)) / g,
            ),
        };
        Ok(r)
    }

    pub fn psi(&self, j: f64) -> Result<f64> {
        Ok(self.psi_derivs(j)?.0)
    }

    /// Closed-form Gibbs energy and density relations.
    pub fn gibbs(&self, p: f64) -> Result<GibbsEval> {
        if !p.is_finite() {
            return Err(Error::domain("pressure must be finite", p));
        }
        let k = self.kappa;
        let (g, dg, d2g) = match self.family {
            VolumetricFamily::Incompressible => (p, 1.0, 0.0),
            VolumetricFamily::Quadratic => {
                if p >= k {
                    return Err(Error::domain("quadratic Gibbs energy requires P < kappa", p));
                }
                (p - p * p / (2.0 * k), 1.0 - p / k, -1.0 / k)
            }
            VolumetricFamily::St91 => {
                let r = p.hypot(k);
                let j = if p > 0.0 { k / (r + p) } else { (r - p) / k };
                (0.5 * p * j + 0.5 * k * (p / k).asinh(), j, -j / r)
            }
            VolumetricFamily::M94 => {
                if p <= -k {
                    return Err(Error::domain("M94 Gibbs energy requires P > -kappa", p));
                }
                (k * (p / k).ln_1p(), k / (p + k), -k / ((p + k) * (p + k)))
            }
            VolumetricFamily::L94 => {
                let e = (-p / k).exp();
                (-k * (-p / k).exp_m1(), e, -e / k)
            }
            _ => {
                return Err(Error::Unsupported(format!(
                    "{} has no closed-form Gibbs energy",
                    self.family.name()
                )))
            }
        };
        if !(dg > 0.0) || !g.is_finite() {
            return Err(Error::domain("pressure outside the admissible range", p));
        }
        Ok(GibbsEval { g, dg, d2g, rho: self.rho0 / dg, beta: -d2g / dg })
    }

    /// Coefficients c₁..c₄ of G/κ = Σ c_k (P/κ)^k as tabulated for each family.
    pub fn series_coefficients(&self) -> [f64; 4] {
        match self.family {
            VolumetricFamily::Incompressible => [1.0, 0.0, 0.0, 0.0],
            VolumetricFamily::Quadratic => [1.0, -0.5, 0.0, 0.0],
            VolumetricFamily::St91 => [1.0, -0.5, 1.0 / 6.0, 0.0],
            VolumetricFamily::M94 => [1.0, -0.5, 1.0 / 3.0, -0.25],
            VolumetricFamily::L94 => [1.0, -0.5, 1.0 / 6.0, -1.0 / 24.0],
            VolumetricFamily::Ansys2000 => [1.0, -0.5, 0.5, 0.0],
            VolumetricFamily::Hn03 => [1.0, -0.5, 0.5, 0.375],
            VolumetricFamily::O72 { gamma: g } => {
                [1.0, -0.5, (g + 3.0) / 6.0, -(g + 2.0) * (g + 4.0) / 12.0]
            }
        }
    }

    /// G_vol(P) and J* by direct minimization of Ψ(J) + P J.
    pub fn gibbs_numeric(&self, p: f64) -> Result<(f64, f64)> {
        let phi = |s: f64| -> f64 {
            let j = s.exp();
            self.psi(j).map(|v| v + p * j).unwrap_or(f64::INFINITY)
        };
        let (mut a, mut b) = (-8.0_f64, 8.0_f64);
        let gr = 0.5 * (5f64.sqrt() - 1.0);
        let mut c = b - gr * (b - a);
        let mut d = a + gr * (b - a);
        let (mut fc, mut fd) = (phi(c), phi(d));
        while b - a > 1e-7 {
            if fc < fd {
                b = d;
                d = c;
                fd = fc;
                c = b - gr * (b - a);
                fc = phi(c);
            } else {
                a = c;
                c = d;
                fc = fd;
                d = a + gr * (b - a);
                fd = phi(d);
            }
        }
        let mut j = (0.5 * (a + b)).exp();
        for _ in 0..30 {
            let (_, d1, d2) = self.psi_derivs(j)?;
            let step = (d1 + p) / d2;
            let next = j - step;
            j = if next > 0.0 { next } else { 0.5 * j };
            if step.abs() <= 1e-16 * j {
                break;
            }
        }
        let (psi, d1, _) = self.psi_derivs(j)?;
        if !((d1 + p).abs() <= 1e-9 * self.kappa.max(1.0)) {
            return Err(Error::domain("no stationary point of the Legendre transform", p));
        }
        Ok((psi + p * j, j))
    }

    /// Largest |G_closed(P) − inf_J {Ψ + P J}| over the samples.
    pub fn legendre_check(&self, ps: &[f64]) -> Result<f64> {
        if self.is_incompressible() {
            return Err(Error::Unsupported("incompressible model has no Helmholtz energy".into()));
        }
        let mut worst: f64 = 0.0;
        for &p in ps {
            let closed = self.gibbs(p)?.g;
            let (num, _) = self.gibbs_numeric(p)?;
            worst = worst.max((closed - num).abs());
        }
        Ok(worst)
    }
}
