//! Material definition and the per-step constitutive update shared by the
//! drivers and the calibration layer.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flv::{FlvBranch, FlvBranchState};
use crate::hyperelastic::{
    accumulate_quadratic, isochoric_stress, isochoric_stress_tangent, pressure_stress_tangent, EightChainSpec,
    HillClassSpec, HillTerm,
};
use crate::micro::{MicroBranch, MicroState, NewtonReport, NewtonTolerances};
use crate::strain::{ScaleFunction, StrainKit};
use crate::tensor::{SymTensor2, Tensor4};
use crate::volumetric::VolumetricModel;

/// Equilibrium energy. Hill-class energies act on C̃, the eight-chain energy
/// on the full C.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Equilibrium {
    Hill { terms: Vec<HillTerm> },
    EightChain { mu: f64, n_chain: f64 },
}

/// A non-equilibrium branch.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Branch {
    Flv(FlvBranch),
    Micro(MicroBranch),
}

impl Branch {
    pub fn eta(&self) -> f64 {
        match self {
            Branch::Flv(b) => b.eta(),
            Branch::Micro(b) => b.eta,
        }
    }

    pub fn mu(&self) -> f64 {
        match self {
            Branch::Flv(b) => b.mu,
            Branch::Micro(b) => b.mu,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ViscoModel {
    pub equilibrium: Equilibrium,
    #[serde(default)]
    pub branches: Vec<Branch>,
    #[serde(default = "VolumetricModel::incompressible")]
    pub volumetric: VolumetricModel,
    #[serde(default)]
    pub newton: NewtonTolerances,
}

/// History of one branch.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BranchState {
    Flv(FlvBranchState),
    Micro(MicroState),
}

impl BranchState {
    /// E^v of the branch (reconstructed as Ẽ − T/μ for finite-linear branches).
    pub fn viscous_strain(&self, branch: &Branch) -> SymTensor2 {
        match (self, branch) {
            (BranchState::Flv(s), Branch::Flv(b)) => b.viscous_strain(s),
            (BranchState::Micro(s), _) => s.ev,
            _ => SymTensor2::zero(),
        }
    }
}

/// Per-point history at time `t`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MaterialState {
    pub t: f64,
    pub c: SymTensor2,
    pub branches: Vec<BranchState>,
}

/// Result of one constitutive update.
#[derive(Clone, Debug)]
pub struct StepOutput {
    /// Total second Piola–Kirchhoff stress including −J P C⁻¹.
    pub stress: SymTensor2,
    /// 2 ∂S/∂C at fixed P, when requested.
    pub tangent: Option<Tensor4>,
    /// Sum of the non-equilibrium contributions to S.
    pub neq_stress: SymTensor2,
    /// |T^neq| per branch.
    pub t_norms: Vec<f64>,
    /// Dissipation power density Σ η |ΔE^v/Δt|².
    pub phi: f64,
    pub newton: Vec<NewtonReport>,
    pub state: MaterialState,
}

impl ViscoModel {
    pub fn elastic(equilibrium: Equilibrium) -> Self {
        ViscoModel {
            equilibrium,
            branches: Vec::new(),
            volumetric: VolumetricModel::incompressible(),
            newton: NewtonTolerances::default(),
        }
    }

    pub fn with_branch(mut self, b: Branch) -> Self {
        self.branches.push(b);
        self
    }

    pub fn with_volumetric(mut self, v: VolumetricModel) -> Self {
        self.volumetric = v;
        self
    }

    pub fn validate(&self) -> Result<()> {
        match &self.equilibrium {
            Equilibrium::Hill { terms } => HillClassSpec { terms: terms.clone() }.validate()?,
            Equilibrium::EightChain { mu, n_chain } => EightChainSpec { mu: *mu, n_chain: *n_chain }.validate()?,
        }
        for b in &self.branches {
            match b {
                Branch::Flv(f) => f.validate()?,
                Branch::Micro(m) => m.validate()?,
            }
        }
        self.volumetric.validate()?;
        let t = &self.newton;
        if !(t.rel > 0.0 && t.abs > 0.0) || t.max_iterations == 0 {
            return Err(Error::InvalidParameter("Newton tolerances must be positive".into()));
        }
        Ok(())
    }

    /// Small-strain shear modulus of the equilibrium energy.
    pub fn equilibrium_modulus(&self) -> f64 {
        match &self.equilibrium {
            Equilibrium::Hill { terms } => terms.iter().map(|t| t.mu).sum(),
            Equilibrium::EightChain { mu, .. } => *mu,
        }
    }

    /// Virgin state at C₀ with zero non-equilibrium stress.
    pub fn initial_state(&self, c0: &SymTensor2) -> Result<MaterialState> {
        let ct = unimodular_part(c0)?;
        let mut branches = Vec::with_capacity(self.branches.len());
        for b in &self.branches {
            branches.push(match b {
                Branch::Flv(f) => BranchState::Flv(FlvBranchState::virgin(StrainKit::new(&ct, f.strain)?.strain)),
                Branch::Micro(_) => BranchState::Micro(MicroState::virgin(c0)),
            });
        }
        Ok(MaterialState { t: 0.0, c: *c0, branches })
    }

    /// Advances the history to C_{n+1} = `c` over `dt` and returns the stress
    /// at pressure `p`.
    pub fn step(&self, state: &MaterialState, c: &SymTensor2, p: f64, dt: f64, want_tangent: bool) -> Result<StepOutput> {
        if state.branches.len() != self.branches.len() {
            return Err(Error::LengthMismatch { expected: self.branches.len(), found: state.branches.len() });
        }
        if !(dt >= 0.0) {
            return Err(Error::domain("time step", dt));
        }
        let ct = unimodular_part(c)?;
        let mut s_tilde = SymTensor2::zero();
        let mut s_tilde_neq = SymTensor2::zero();
        let mut core = Tensor4::zero();
        let mut isochoric = false;
        let mut s_a = SymTensor2::zero();
        let mut c_a = Tensor4::zero();
        let mut s_a_neq = SymTensor2::zero();

        match &self.equilibrium {
            Equilibrium::Hill { terms } => {
                isochoric = true;
                for t in terms {
                    let kit = StrainKit::new(&ct, t.strain)?;
                    let tt = kit.strain * t.mu;
                    if want_tangent {
                        accumulate_quadratic(&kit, t.mu, &tt, &mut s_tilde, &mut core);
                    } else {
                        s_tilde += kit.q.contract_left(&tt);
                    }
                }
            }
            Equilibrium::EightChain { mu, n_chain } => {
                let spec = EightChainSpec { mu: *mu, n_chain: *n_chain };
                if want_tangent {
                    let r = spec.stress_tangent(c)?;
                    s_a += r.stress;
                    c_a += r.tangent;
                } else {
                    s_a += spec.stress(c)?;
                }
            }
        }

        let mut next = Vec::with_capacity(self.branches.len());
        let mut t_norms = Vec::with_capacity(self.branches.len());
        let mut newton = Vec::new();
        let mut phi = 0.0;
        for (b, s) in self.branches.iter().zip(&state.branches) {
            match (b, s) {
                (Branch::Flv(f), BranchState::Flv(sn)) => {
                    isochoric = true;
                    let kit = StrainKit::new(&ct, f.strain)?;
                    let sn1 = f.advance(sn, &kit.strain, dt);
                    let contrib = kit.q.contract_left(&sn1.t_neq);
                    s_tilde_neq += contrib;
                    if want_tangent {
                        accumulate_quadratic(&kit, f.mu * f.half_decay(dt), &sn1.t_neq, &mut s_tilde, &mut core);
                    } else {
                        s_tilde += contrib;
                    }
                    if dt > 0.0 {
                        let rate = (f.viscous_strain(&sn1) - f.viscous_strain(sn)) / dt;
                        phi += f.eta() * rate.dot(&rate);
                    }
                    t_norms.push(sn1.t_neq.norm());
                    next.push(BranchState::Flv(sn1));
                }
                (Branch::Micro(m), BranchState::Micro(sn)) => {
                    let kit = StrainKit::new(c, m.strain)?;
                    let step = m.local_solve(sn, &kit.strain, dt, &self.newton)?;
                    let r = m.response(&step, &kit, want_tangent)?;
                    s_a += r.stress;
                    s_a_neq += r.stress;
                    if let Some(t) = r.tangent {
                        c_a += t;
                    }
                    phi += m.dissipation(&sn.ev, &step.state.ev, dt);
                    t_norms.push(r.t_neq.norm());
                    newton.push(step.report);
                    next.push(BranchState::Micro(step.state));
                }
                _ => return Err(Error::InvalidParameter("branch state does not match branch kind".into())),
            }
        }

        let mut stress = s_a;
        let mut tangent = c_a;
        let mut neq_stress = s_a_neq;
        if isochoric {
            if want_tangent {
                let (s, t) = isochoric_stress_tangent(c, &s_tilde, &core)?;
                stress += s;
                tangent += t;
            } else {
                stress += isochoric_stress(c, &s_tilde)?;
            }
            neq_stress += isochoric_stress(c, &s_tilde_neq)?;
        }
        if want_tangent {
            let (s, t) = pressure_stress_tangent(c, p)?;
            stress += s;
            tangent += t;
        } else {
            stress += c.inverse()? * (-c.det().sqrt() * p);
        }
        if !stress.is_finite() {
            return Err(Error::domain("stress is not finite", f64::NAN));
        }
        Ok(StepOutput {
            stress,
            tangent: want_tangent.then_some(tangent),
            neq_stress,
            t_norms,
            phi,
            newton,
            state: MaterialState { t: state.t + dt, c: *c, branches: next },
        })
    }

    /// Volumetric constraint r(J, P) = 0 with its partial derivatives
    /// (r, ∂r/∂J, ∂r/∂P). Closed-form Gibbs families use J − dG/dP; the
    /// others use P + dΨ/dJ.
    pub fn volumetric_residual(&self, j: f64, p: f64) -> Result<(f64, f64, f64)> {
        let v = &self.volumetric;
        if v.is_incompressible() {
            return Err(Error::Unsupported("incompressible model has no volumetric constraint in P".into()));
        }
        if v.has_closed_gibbs() {
            let g = v.gibbs(p)?;
            Ok((j - g.dg, 1.0, -g.d2g))
        } else {
            let (_, d1, d2) = v.psi_derivs(j)?;
            Ok((p + d1, d2, 1.0))
        }
    }
}

fn unimodular_part(c: &SymTensor2) -> Result<SymTensor2> {
    let det = c.det();
    if !(det > 0.0) || !det.is_finite() {
        return Err(Error::NotSpd { min_eigenvalue: det });
    }
    Ok(*c * det.powf(-1.0 / 3.0))
}

/// Single-term Hill equilibrium helper.
pub fn hill(mu: f64, strain: ScaleFunction) -> Equilibrium {
    Equilibrium::Hill { terms: vec![HillTerm { mu, strain }] }
}
