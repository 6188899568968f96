//! Finite linear viscoelasticity: a quadratic configurational energy per
//! branch and the exponential recurrence for its stress-like variable.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hyperelastic::{accumulate_quadratic, isochoric_stress, isochoric_stress_tangent, HillClassSpec};
use crate::strain::{isochoric_kit, ScaleFunction, StrainKit};
use crate::tensor::{SymTensor2, Tensor4};

/// One Maxwell branch with energy μ/2 |Ẽ − E^v|². The viscosity is
/// accepted as either `tau` or `eta` (= μτ) and stored as τ.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "FlvBranchRepr")]
pub struct FlvBranch {
    pub mu: f64,
    pub tau: f64,
    pub strain: ScaleFunction,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct FlvBranchRepr {
    mu: f64,
    tau: Option<f64>,
    eta: Option<f64>,
    strain: ScaleFunction,
}

impl TryFrom<FlvBranchRepr> for FlvBranch {
    type Error = String;

    fn try_from(r: FlvBranchRepr) -> std::result::Result<Self, String> {
        let tau = match (r.tau, r.eta) {
            (Some(t), None) => t,
            (None, Some(eta)) => eta / r.mu,
            _ => return Err("give exactly one of `tau` or `eta` for a finite-linear branch".into()),
        };
        Ok(FlvBranch { mu: r.mu, tau, strain: r.strain })
    }
}

impl FlvBranch {
    pub fn new(mu: f64, tau: f64, strain: ScaleFunction) -> Self {
        FlvBranch { mu, tau, strain }
    }

    pub fn eta(&self) -> f64 {
        self.mu * self.tau
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.mu > 0.0) || !self.mu.is_finite() {
            return Err(Error::InvalidParameter(format!("branch modulus must be positive, got {}", self.mu)));
        }
        if !(self.tau > 0.0) || !self.tau.is_finite() {
            return Err(Error::InvalidParameter(format!("relaxation time must be positive, got {}", self.tau)));
        }
        self.strain.validate()
    }

    /// e^{−Δt/2τ}; its square is the full-step decay.
    pub fn half_decay(&self, dt: f64) -> f64 {
        (-dt / (2.0 * self.tau)).exp()
    }

    /// T_{n+1} = e^{−Δt/τ} T_n + e^{−Δt/2τ} μ (Ẽ_{n+1} − Ẽ_n).
    pub fn advance(&self, state: &FlvBranchState, e_next: &SymTensor2, dt: f64) -> FlvBranchState {
        let a = self.half_decay(dt);
        FlvBranchState { t_neq: state.t_neq * (a * a) + (*e_next - state.e_tilde) * (a * self.mu), e_tilde: *e_next }
    }

    /// E^v reconstructed from the canonical state as Ẽ − T/μ.
    pub fn viscous_strain(&self, state: &FlvBranchState) -> SymTensor2 {
        state.e_tilde - state.t_neq / self.mu
    }
}

/// History of one branch: T^neq and the isochoric strain at the same instant.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FlvBranchState {
    pub t_neq: SymTensor2,
    pub e_tilde: SymTensor2,
}

impl FlvBranchState {
    /// Stress-free virgin state at the isochoric strain `e_tilde`.
    pub fn virgin(e_tilde: SymTensor2) -> Self {
        FlvBranchState { t_neq: SymTensor2::zero(), e_tilde }
    }
}

/// Branch histories at time `t`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FlvState {
    pub t: f64,
    pub branches: Vec<FlvBranchState>,
}

impl FlvState {
    pub fn virgin(branches: &[FlvBranch], c: &SymTensor2) -> Result<Self> {
        let mut out = Vec::with_capacity(branches.len());
        for b in branches {
            let (_, _, kit) = isochoric_kit(c, b.strain)?;
            out.push(FlvBranchState::virgin(kit.strain));
        }
        Ok(FlvState { t: 0.0, branches: out })
    }
}

/// Advances every branch to C̃_{n+1}.
pub fn flv_step(branches: &[FlvBranch], state: &FlvState, ct: &SymTensor2, dt: f64) -> Result<FlvState> {
    if state.branches.len() != branches.len() {
        return Err(Error::LengthMismatch { expected: branches.len(), found: state.branches.len() });
    }
    if !(dt >= 0.0) {
        return Err(Error::domain("time step", dt));
    }
    let mut out = Vec::with_capacity(branches.len());
    for (b, s) in branches.iter().zip(&state.branches) {
        let kit = StrainKit::new(ct, b.strain)?;
        out.push(b.advance(s, &kit.strain, dt));
    }
    Ok(FlvState { t: state.t + dt, branches: out })
}

/// E^v_{n+1} = e^{−Δt/τ} E^v_n + ½(1 − e^{−Δt/τ})(Ẽ_n + Ẽ_{n+1}).
pub fn flv_step_ev(branch: &FlvBranch, ev: &SymTensor2, e_n: &SymTensor2, e_next: &SymTensor2, dt: f64) -> SymTensor2 {
    let d = (-dt / branch.tau).exp();
    *ev * d + (*e_n + *e_next) * (0.5 * (1.0 - d))
}

/// Stress split of a finite-linear model.
#[derive(Clone, Debug)]
pub struct FlvStress {
    pub total: SymTensor2,
    pub equilibrium: SymTensor2,
    pub non_equilibrium: SymTensor2,
    pub volumetric: SymTensor2,
}

/// S = S^∞_ich + S^neq_ich − J P C⁻¹.
pub fn flv_stress(
    equilibrium: &HillClassSpec,
    branches: &[FlvBranch],
    state: &FlvState,
    c: &SymTensor2,
    p: f64,
) -> Result<FlvStress> {
    let (j, ct, _) = isochoric_kit(c, ScaleFunction::GREEN_LAGRANGE)?;
    let s_inf = equilibrium.stress_tangent_unchecked(&ct)?.stress;
    let mut s_neq = SymTensor2::zero();
    for (b, s) in branches.iter().zip(&state.branches) {
        s_neq += StrainKit::new(&ct, b.strain)?.q.contract_left(&s.t_neq);
    }
    let eq = isochoric_stress(c, &s_inf)?;
    let neq = isochoric_stress(c, &s_neq)?;
    let vol = c.inverse()? * (-j * p);
    Ok(FlvStress { total: eq + neq + vol, equilibrium: eq, non_equilibrium: neq, volumetric: vol })
}

/// Algorithmic isochoric tangent at the stepped state (P held fixed).
pub fn flv_tangent(
    equilibrium: &HillClassSpec,
    branches: &[FlvBranch],
    state: &FlvState,
    c: &SymTensor2,
    dt: f64,
) -> Result<Tensor4> {
    let (_, ct, _) = isochoric_kit(c, ScaleFunction::GREEN_LAGRANGE)?;
    let eq = equilibrium.stress_tangent_unchecked(&ct)?;
    let mut s_tilde = eq.stress;
    let mut core = eq.tangent;
    for (b, s) in branches.iter().zip(&state.branches) {
        let kit = StrainKit::new(&ct, b.strain)?;
        accumulate_quadratic(&kit, b.mu * b.half_decay(dt), &s.t_neq, &mut s_tilde, &mut core);
    }
    Ok(isochoric_stress_tangent(c, &s_tilde, &core)?.1)
}
