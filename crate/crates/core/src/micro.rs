//! Micromechanical branch: eight-chain energy on the elastic deformation
//! C^e, a linear dashpot on the viscous strain E^v and a local Newton solve.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hyperelastic::{EightChainResponse, EightChainSpec};
use crate::strain::{ElasticKit, ScaleFunction, StrainKit};
use crate::tensor::{SymTensor2, Tensor4};

/// Time discretization of the evolution equation.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MicroScheme {
    #[default]
    Midpoint,
    BackwardEuler,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MicroBranch {
    pub mu: f64,
    pub n_chain: f64,
    pub eta: f64,
    pub strain: ScaleFunction,
    #[serde(default)]
    pub scheme: MicroScheme,
}

/// Stopping rules of the local Newton iteration.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NewtonTolerances {
    pub rel: f64,
    pub abs: f64,
    pub max_iterations: usize,
    pub max_halvings: usize,
}

impl Default for NewtonTolerances {
    fn default() -> Self {
        NewtonTolerances { rel: 1e-12, abs: 1e-12, max_iterations: 50, max_halvings: 8 }
    }
}

/// Outcome of a local solve. `iterations` counts accepted iterates,
/// including the predictor.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct NewtonReport {
    pub iterations: usize,
    pub residual: f64,
    pub converged: bool,
    pub history: Vec<f64>,
}

/// Internal variable E^v and the elastic deformation C^e it implies.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MicroState {
    pub ev: SymTensor2,
    pub ce: SymTensor2,
}

impl MicroState {
    /// E^v = 0, so C^e = C.
    pub fn virgin(c: &SymTensor2) -> Self {
        MicroState { ev: SymTensor2::zero(), ce: *c }
    }
}

/// Residual with the kinematic quantities needed by its linearization.
#[derive(Clone, Debug)]
pub struct MicroResidual {
    pub r: SymTensor2,
    /// Elastic kit at t_{n+1}.
    pub next: ElasticKit,
    /// Elastic kit where the dashpot stress is evaluated (midpoint or t_{n+1}).
    pub eval: ElasticKit,
    /// Eight-chain stress and tangent on the evaluation kit.
    pub eval_response: EightChainResponse,
    pub dt: f64,
}

/// A converged local step.
#[derive(Clone, Debug)]
pub struct MicroStep {
    pub state: MicroState,
    pub k: Tensor4,
    pub residual: MicroResidual,
    pub report: NewtonReport,
}

/// Branch stress and tangent contributions at t_{n+1}.
#[derive(Clone, Debug)]
pub struct MicroResponse {
    pub t_neq: SymTensor2,
    pub stress: SymTensor2,
    pub tangent: Option<Tensor4>,
}

impl MicroBranch {
    pub fn new(mu: f64, n_chain: f64, eta: f64, strain: ScaleFunction) -> Self {
        MicroBranch { mu, n_chain, eta, strain, scheme: MicroScheme::Midpoint }
    }

    pub fn energy(&self) -> EightChainSpec {
        EightChainSpec { mu: self.mu, n_chain: self.n_chain }
    }

    pub fn validate(&self) -> Result<()> {
        self.energy().validate()?;
        if !(self.eta > 0.0) || !self.eta.is_finite() {
            return Err(Error::InvalidParameter(format!("viscosity must be positive, got {}", self.eta)));
        }
        self.strain.validate()?;
        if !self.strain.is_coercive() {
            return Err(Error::InvalidParameter(format!(
                "micromechanical branch needs a coercive scale function, got {:?}",
                self.strain
            )));
        }
        Ok(())
    }

    /// R = E^v − E^v_n − (Δt/η) S^e : ℚ^{e,−1} with S^e and ℚ^{e,−1} on the
    /// averaged C^e (midpoint) or on C^e_{n+1} (backward Euler).
    pub fn residual_cached(
        &self,
        ev: &SymTensor2,
        ev_n: &SymTensor2,
        ce_n: &SymTensor2,
        e_next: &SymTensor2,
        dt: f64,
    ) -> Result<MicroResidual> {
        let next = ElasticKit::from_strain(&(*e_next - *ev), self.strain)?;
        let eval = match self.scheme {
            MicroScheme::Midpoint => ElasticKit::from_deformation(&((*ce_n + next.ce) * 0.5), self.strain)?,
            MicroScheme::BackwardEuler => next.clone(),
        };
        let eval_response = self.energy().stress_tangent(&eval.ce)?;
        let flow = eval.q_inv.contract_left(&eval_response.stress);
        let r = *ev - *ev_n - flow * (dt / self.eta);
        Ok(MicroResidual { r, next, eval, eval_response, dt })
    }

    /// Residual with C^e_n rebuilt from E_n − E^v_n.
    pub fn residual(
        &self,
        ev: &SymTensor2,
        ev_n: &SymTensor2,
        e_n: &SymTensor2,
        e_next: &SymTensor2,
        dt: f64,
    ) -> Result<MicroResidual> {
        let ce_n = ElasticKit::from_strain(&(*e_n - *ev_n), self.strain)?.ce;
        self.residual_cached(ev, ev_n, &ce_n, e_next, dt)
    }

    /// 𝕂 = ∂R/∂E^v at the residual's state.
    pub fn k_tensor(&self, res: &MicroResidual) -> Tensor4 {
        let s = &res.eval_response.stress;
        let c_e = &res.eval_response.tangent;
        let ev = &res.eval;
        let inner = match self.scheme {
            MicroScheme::Midpoint => {
                let a = ev.q_inv.transpose().compose(&(*c_e * 0.5)).compose(&res.next.q_inv);
                let b = ev.contract_curvature(s).compose(&ev.q).compose(&res.next.q_inv);
                a + b
            }
            MicroScheme::BackwardEuler => {
                ev.q_inv.transpose().compose(c_e).compose(&ev.q_inv) + ev.contract_curvature(s) * 2.0
            }
        };
        Tensor4::identity() + inner * (res.dt / self.eta)
    }

    /// Newton solve for E^v_{n+1} from the predictor E^v_n.
    pub fn local_solve(
        &self,
        state: &MicroState,
        e_next: &SymTensor2,
        dt: f64,
        tol: &NewtonTolerances,
    ) -> Result<MicroStep> {
        if !(dt >= 0.0) {
            return Err(Error::domain("time step", dt));
        }
        let mut ev = state.ev;
        let mut res = self.residual_cached(&ev, &state.ev, &state.ce, e_next, dt)?;
        let r0 = res.r.norm();
        let mut rn = r0;
        let mut report = NewtonReport { iterations: 1, residual: r0, converged: false, history: vec![r0] };
        loop {
            if rn <= tol.abs || rn <= tol.rel * r0 {
                report.converged = true;
                break;
            }
            if report.iterations >= tol.max_iterations {
                return Err(Error::NoConvergence { iterations: report.iterations, residual: rn });
            }
            let k = self.k_tensor(&res);
            let delta = k.solve(&(-res.r))?;
            let mut step = 1.0;
            let mut accepted = None;
            for _ in 0..=tol.max_halvings {
                let trial = ev + delta * step;
                match self.residual_cached(&trial, &state.ev, &state.ce, e_next, dt) {
                    Ok(rt) if rt.r.norm() < rn || rt.r.norm() <= tol.abs => {
                        accepted = Some((trial, rt));
                        break;
                    }
                    Ok(_) => {}
                    Err(e) if recoverable(&e) => {}
                    Err(e) => return Err(e),
                }
                step *= 0.5;
            }
            let Some((trial, rt)) = accepted else {
                return Err(Error::NoConvergence { iterations: report.iterations, residual: rn });
            };
            ev = trial;
            res = rt;
            rn = res.r.norm();
            report.iterations += 1;
            report.residual = rn;
            report.history.push(rn);
        }
        let k = self.k_tensor(&res);
        Ok(MicroStep { state: MicroState { ev, ce: res.next.ce }, k, residual: res, report })
    }

    /// ℍ from 𝕂 : ℍ = (𝕂 − 𝕀) : ℚ_{n+1}, i.e. 2 ∂E^v_{n+1}/∂C_{n+1}.
    pub fn h_tensor(&self, k: &Tensor4, q: &Tensor4) -> Result<Tensor4> {
        k.solve4(&(*k - Tensor4::identity()).compose(q))
    }

    /// T^neq = S^e : ℚ^{e,−1}, its pull-back T^neq : ℚ and optionally
    /// ℚᵀ:[ℚ^{e,−T}:ℂ^e:ℚ^{e,−1} + 2S^e:𝓚^e]:(ℚ − ℍ) + T^neq:𝓛.
    pub fn response(&self, step: &MicroStep, kit: &StrainKit, want_tangent: bool) -> Result<MicroResponse> {
        let next = &step.residual.next;
        let (se, ce_tangent) = match self.scheme {
            MicroScheme::BackwardEuler => (step.residual.eval_response.stress, step.residual.eval_response.tangent),
            MicroScheme::Midpoint => {
                let r = self.energy().stress_tangent(&next.ce)?;
                (r.stress, r.tangent)
            }
        };
        let t_neq = next.q_inv.contract_left(&se);
        let stress = kit.q.contract_left(&t_neq);
        let tangent = if want_tangent {
            let inner = next.q_inv.transpose().compose(&ce_tangent).compose(&next.q_inv)
                + next.contract_curvature(&se) * 2.0;
            let h = self.h_tensor(&step.k, &kit.q)?;
            Some(kit.q.transpose().compose(&inner).compose(&(kit.q - h)) + kit.contract_curvature(&t_neq))
        } else {
            None
        };
        Ok(MicroResponse { t_neq, stress, tangent })
    }

    /// η |(E^v_{n+1} − E^v_n)/Δt|².
    pub fn dissipation(&self, ev_n: &SymTensor2, ev_next: &SymTensor2, dt: f64) -> f64 {
        if dt > 0.0 {
            let r = (*ev_next - *ev_n) / dt;
            self.eta * r.dot(&r)
        } else {
            0.0
        }
    }
}

/// Failures a shorter Newton step can avoid.
fn recoverable(e: &Error) -> bool {
    matches!(e, Error::ChainLimit { .. } | Error::NotSpd { .. } | Error::Range { .. } | Error::Domain { .. })
}
