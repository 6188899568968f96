//! Homogeneous material-point programs: uniaxial stretch, simple shear,
//! equibiaxial stretch, relaxation holds and tabulated deformation gradients.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{MaterialState, StepOutput, ViscoModel};
use crate::tensor::{mat3, Mat3, SymTensor2};

/// Residual tolerance of the boundary-condition solves (normalized units).
pub const CONSTRAINT_TOL: f64 = 1e-10;
const CONSTRAINT_MAX_ITER: usize = 50;
/// Local Δt halvings tried before a step is abandoned.
pub const MAX_STEP_HALVINGS: u32 = 6;
/// Default step size (s).
pub const DEFAULT_DT: f64 = 0.01;
/// Default reference volume: a cube of edge 0.1.
pub const DEFAULT_REFERENCE_VOLUME: f64 = 1e-3;

/// Piecewise-linear control value against time, held constant beyond the ends.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Schedule(pub Vec<[f64; 2]>);

impl Schedule {
    pub fn validate(&self) -> Result<()> {
        if self.0.is_empty() {
            return Err(Error::InvalidParameter("schedule needs at least one point".into()));
        }
        for w in self.0.windows(2) {
            if !(w[1][0] > w[0][0]) {
                return Err(Error::InvalidParameter(format!("schedule times must increase ({} then {})", w[0][0], w[1][0])));
            }
        }
        if self.0.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("schedule contains non-finite values".into()));
        }
        Ok(())
    }

    pub fn value(&self, t: f64) -> f64 {
        interpolate(&self.0, t, |p| p[0], |p| p[1], |a, b, w| a + (b - a) * w)
    }

    pub fn end_time(&self) -> f64 {
        self.0.last().map_or(0.0, |p| p[0])
    }

    /// Triangle wave between ±`peak` with the given period.
    pub fn triangle(peak: f64, period: f64, cycles: usize) -> Self {
        let mut pts = vec![[0.0, 0.0]];
        for c in 0..cycles {
            let t0 = c as f64 * period;
            pts.push([t0 + 0.25 * period, peak]);
            pts.push([t0 + 0.75 * period, -peak]);
            pts.push([t0 + period, 0.0]);
        }
        Schedule(pts)
    }
}

fn interpolate<P, V>(pts: &[P], t: f64, time: impl Fn(&P) -> f64, val: impl Fn(&P) -> V, lerp: impl Fn(V, V, f64) -> V) -> V {
    let first = &pts[0];
    if t <= time(first) {
        return val(first);
    }
    for w in pts.windows(2) {
        let (t0, t1) = (time(&w[0]), time(&w[1]));
        if t <= t1 {
            return lerp(val(&w[0]), val(&w[1]), (t - t0) / (t1 - t0));
        }
    }
    val(pts.last().unwrap())
}

/// One row of a tabulated deformation gradient.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FRow {
    pub t: f64,
    pub f: Mat3,
}

#[derive(Clone, Debug, PartialEq)]
pub enum ProgramKind {
    /// Axial stretch λ(t) under uniaxial stress.
    Uniaxial(Schedule),
    /// Shear amount γ(t) with F = I + γ e₁⊗e₂.
    SimpleShear(Schedule),
    /// In-plane stretch λ(t) with a traction-free thickness.
    Equibiaxial(Schedule),
    /// Uniaxial ramp to `stretch` over `ramp_time`, then held for `hold_time`.
    RelaxationHold { stretch: f64, ramp_time: f64, hold_time: f64 },
    /// Prescribed F(t). Incompressible models take P from σ₃₃ = 0.
    Custom(Vec<FRow>),
}

/// A time-stepped loading protocol.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ProgramRepr", into = "ProgramRepr")]
pub struct LoadingProgram {
    pub kind: ProgramKind,
    pub dt: f64,
    pub total_time: f64,
    pub reference_volume: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ProgramRepr {
    kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    schedule: Option<Schedule>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    stretch: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    ramp_time: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    hold_time: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    table: Option<Vec<FRow>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    dt: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    total_time: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    reference_volume: Option<f64>,
}

impl TryFrom<ProgramRepr> for LoadingProgram {
    type Error = String;

    fn try_from(r: ProgramRepr) -> std::result::Result<Self, String> {
        let need = |name: &str, v: Option<f64>| v.ok_or_else(|| format!("program `{}` needs `{name}`", r.kind));
        let sched = || r.schedule.clone().ok_or_else(|| format!("program `{}` needs `schedule`", r.kind));
        let uses_schedule = matches!(r.kind.as_str(), "uniaxial" | "simple_shear" | "equibiaxial");
        if !uses_schedule && r.schedule.is_some() {
            return Err(format!("program `{}` does not take `schedule`", r.kind));
        }
        if r.kind != "relaxation_hold" && (r.stretch.is_some() || r.ramp_time.is_some() || r.hold_time.is_some()) {
            return Err(format!("program `{}` does not take stretch/ramp_time/hold_time", r.kind));
        }
        if r.kind != "custom" && r.table.is_some() {
            return Err(format!("program `{}` does not take `table`", r.kind));
        }
        let kind = match r.kind.as_str() {
            "uniaxial" => ProgramKind::Uniaxial(sched()?),
            "simple_shear" => ProgramKind::SimpleShear(sched()?),
            "equibiaxial" => ProgramKind::Equibiaxial(sched()?),
            "relaxation_hold" => ProgramKind::RelaxationHold {
                stretch: need("stretch", r.stretch)?,
                ramp_time: need("ramp_time", r.ramp_time)?,
                hold_time: need("hold_time", r.hold_time)?,
            },
            "custom" => ProgramKind::Custom(r.table.clone().ok_or("program `custom` needs `table`")?),
            other => return Err(format!("unknown program kind `{other}`")),
        };
        let mut p = LoadingProgram::new(kind, r.dt.unwrap_or(DEFAULT_DT));
        if let Some(t) = r.total_time {
            p.total_time = t;
        }
        if let Some(v) = r.reference_volume {
            p.reference_volume = v;
        }
        p.validate().map_err(|e| e.to_string())?;
        Ok(p)
    }
}

impl From<LoadingProgram> for ProgramRepr {
    fn from(p: LoadingProgram) -> Self {
        let mut r = ProgramRepr {
            kind: String::new(),
            schedule: None,
            stretch: None,
            ramp_time: None,
            hold_time: None,
            table: None,
            dt: Some(p.dt),
            total_time: Some(p.total_time),
            reference_volume: Some(p.reference_volume),
        };
        match p.kind {
            ProgramKind::Uniaxial(s) => (r.kind, r.schedule) = ("uniaxial".into(), Some(s)),
            ProgramKind::SimpleShear(s) => (r.kind, r.schedule) = ("simple_shear".into(), Some(s)),
            ProgramKind::Equibiaxial(s) => (r.kind, r.schedule) = ("equibiaxial".into(), Some(s)),
            ProgramKind::RelaxationHold { stretch, ramp_time, hold_time } => {
                r.kind = "relaxation_hold".into();
                (r.stretch, r.ramp_time, r.hold_time) = (Some(stretch), Some(ramp_time), Some(hold_time));
            }
            ProgramKind::Custom(t) => (r.kind, r.table) = ("custom".into(), Some(t)),
        }
        r
    }
}

impl LoadingProgram {
    /// Program with the default reference volume, running to the end of its schedule.
    pub fn new(kind: ProgramKind, dt: f64) -> Self {
        let total_time = match &kind {
            ProgramKind::Uniaxial(s) | ProgramKind::SimpleShear(s) | ProgramKind::Equibiaxial(s) => s.end_time(),
            ProgramKind::RelaxationHold { ramp_time, hold_time, .. } => ramp_time + hold_time,
            ProgramKind::Custom(t) => t.last().map_or(0.0, |r| r.t),
        };
        LoadingProgram { kind, dt, total_time, reference_volume: DEFAULT_REFERENCE_VOLUME }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(Error::InvalidParameter(format!("time step must be positive, got {}", self.dt)));
        }
        if !(self.total_time >= 0.0) || !self.total_time.is_finite() {
            return Err(Error::InvalidParameter(format!("total time must be non-negative, got {}", self.total_time)));
        }
        if !(self.reference_volume > 0.0) {
            return Err(Error::InvalidParameter("reference volume must be positive".into()));
        }
        match &self.kind {
            ProgramKind::Uniaxial(s) | ProgramKind::Equibiaxial(s) => {
                s.validate()?;
                if s.0.iter().any(|p| !(p[1] > 0.0)) {
                    return Err(Error::InvalidParameter("stretches must be positive".into()));
                }
            }
            ProgramKind::SimpleShear(s) => s.validate()?,
            ProgramKind::RelaxationHold { stretch, ramp_time, hold_time } => {
                if !(*stretch > 0.0) || !(*ramp_time > 0.0) || !(*hold_time >= 0.0) {
                    return Err(Error::InvalidParameter("relaxation hold needs stretch > 0, ramp_time > 0, hold_time ≥ 0".into()));
                }
            }
            ProgramKind::Custom(rows) => {
                if rows.is_empty() {
                    return Err(Error::InvalidParameter("custom table is empty".into()));
                }
                for w in rows.windows(2) {
                    if !(w[1].t > w[0].t) {
                        return Err(Error::InvalidParameter("custom table times must increase".into()));
                    }
                }
                if rows.iter().any(|r| !(mat3::det(&r.f) > 0.0)) {
                    return Err(Error::InvalidParameter("custom deformation gradients need det F > 0".into()));
                }
            }
        }
        Ok(())
    }

    fn control(&self, t: f64) -> Control {
        match &self.kind {
            ProgramKind::Uniaxial(s) => Control::Uniaxial(s.value(t)),
            ProgramKind::SimpleShear(s) => Control::Shear(s.value(t)),
            ProgramKind::Equibiaxial(s) => Control::Equibiaxial(s.value(t)),
            ProgramKind::RelaxationHold { stretch, ramp_time, .. } => {
                Control::Uniaxial(1.0 + (stretch - 1.0) * (t / ramp_time).min(1.0))
            }
            ProgramKind::Custom(rows) => Control::Gradient(interpolate(
                rows,
                t,
                |r| r.t,
                |r| r.f,
                |a, b, w| {
                    let mut f = a;
                    for i in 0..3 {
                        for j in 0..3 {
                            f[i][j] += (b[i][j] - a[i][j]) * w;
                        }
                    }
                    f
                },
            )),
        }
    }
}

#[derive(Clone, Copy, Debug)]
enum Control {
    Uniaxial(f64),
    Shear(f64),
    Equibiaxial(f64),
    Gradient(Mat3),
}

/// Constitutive update together with the boundary-condition solve.
#[derive(Clone, Debug)]
pub struct PointSolution {
    pub f: Mat3,
    /// Free stretch (lateral or thickness), 1 when there is none.
    pub free_stretch: f64,
    pub p: f64,
    pub output: StepOutput,
}

impl PointSolution {
    /// First Piola–Kirchhoff stress F S.
    pub fn nominal(&self) -> Mat3 {
        mat3::mul(&self.f, &self.output.stress.to_matrix())
    }

    /// Cauchy stress F S Fᵀ / J.
    pub fn cauchy(&self) -> SymTensor2 {
        self.output.stress.push_forward(&self.f) / mat3::det(&self.f)
    }
}

/// F as a function of the free stretch x, with dF/dx, and the slot whose
/// stress component must vanish.
struct Constraint {
    f: Box<dyn Fn(f64) -> (Mat3, Mat3)>,
    slot: usize,
    /// Free stretch for which J = 1.
    isochoric: Option<f64>,
}

fn diag(a: f64, b: f64, c: f64) -> Mat3 {
    [[a, 0.0, 0.0], [0.0, b, 0.0], [0.0, 0.0, c]]
}

fn constraint(control: Control) -> Constraint {
    match control {
        Control::Uniaxial(l) => Constraint {
            f: Box::new(move |x| (diag(l, x, x), diag(0.0, 1.0, 1.0))),
            slot: 1,
            isochoric: Some(l.powf(-0.5)),
        },
        Control::Equibiaxial(l) => Constraint {
            f: Box::new(move |x| (diag(l, l, x), diag(0.0, 0.0, 1.0))),
            slot: 2,
            isochoric: Some(l.powi(-2)),
        },
        Control::Shear(g) => Constraint {
            f: Box::new(move |x| ([[1.0, g, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, x]], diag(0.0, 0.0, 1.0))),
            slot: 2,
            isochoric: Some(1.0),
        },
        Control::Gradient(f) => Constraint { f: Box::new(move |_| (f, [[0.0; 3]; 3])), slot: 2, isochoric: None },
    }
}

fn right_cauchy_green(f: &Mat3) -> SymTensor2 {
    SymTensor2::identity().pull_back(f)
}

/// Stress normalization used by the constraint residuals.
fn stress_scale(model: &ViscoModel) -> f64 {
    (model.equilibrium_modulus() + model.branches.iter().map(|b| b.mu()).sum::<f64>()).max(f64::MIN_POSITIVE)
}

fn solve_point(
    model: &ViscoModel,
    state: &MaterialState,
    control: Control,
    guess: (f64, f64),
    dt: f64,
) -> Result<PointSolution> {
    let cons = constraint(control);
    if model.volumetric.is_incompressible() {
        let x = match (cons.isochoric, control) {
            (Some(x), _) => x,
            (None, Control::Gradient(f)) => {
                let det = mat3::det(&f);
                if (det - 1.0).abs() > 1e-8 {
                    return Err(Error::domain("incompressible model needs det F = 1", det));
                }
                1.0
            }
            _ => unreachable!(),
        };
        let (f, _) = (cons.f)(x);
        let c = right_cauchy_green(&f);
        let mut out = model.step(state, &c, 0.0, dt, false)?;
        // S_k(P) = S_k(0) − P J C⁻¹_k with J = 1
        let ci = c.inverse()?;
        let p = out.stress.0[cons.slot] / ci.0[cons.slot];
        out.stress -= ci * p;
        return Ok(PointSolution { f, free_stretch: x, p, output: out });
    }

    let scale = stress_scale(model);
    let vol_scale = if model.volumetric.has_closed_gibbs() { 1.0 } else { model.volumetric.kappa.max(f64::MIN_POSITIVE) };
    let has_free = cons.isochoric.is_some();
    let (mut x, mut p) = guess;
    let mut last = f64::INFINITY;
    for _ in 0..CONSTRAINT_MAX_ITER {
        let (f, df) = (cons.f)(x);
        let c = right_cauchy_green(&f);
        let out = model.step(state, &c, p, dt, true)?;
        let j = mat3::det(&f);
        let (rv, drv_dj, drv_dp) = model.volumetric_residual(j, p)?;
        let ci = c.inverse()?;
        if !has_free {
            let r = rv / vol_scale;
            last = r.abs();
            if last < CONSTRAINT_TOL {
                return Ok(PointSolution { f, free_stretch: 1.0, p, output: out });
            }
            p -= rv / drv_dp;
            continue;
        }
        let r1 = out.stress.0[cons.slot] / scale;
        let r2 = rv / vol_scale;
        last = r1.abs().max(r2.abs());
        if last < CONSTRAINT_TOL {
            return Ok(PointSolution { f, free_stretch: x, p, output: out });
        }
        let a = mat3::mul(&mat3::transpose(&df), &f);
        let mut m = a;
        for i in 0..3 {
            for k in 0..3 {
                m[i][k] += a[k][i];
            }
        }
        let dc = SymTensor2::from_matrix(&m);
        let tangent = out.tangent.as_ref().expect("tangent requested");
        let a11 = 0.5 * tangent.contract_right(&dc).0[cons.slot];
        let a12 = -j * ci.0[cons.slot];
        let dj = 0.5 * j * ci.dot(&dc);
        let a21 = drv_dj * dj;
        let a22 = drv_dp;
        let det = a11 * a22 - a12 * a21;
        if !(det.abs() > 0.0) || !det.is_finite() {
            return Err(Error::SingularK);
        }
        let s = out.stress.0[cons.slot];
        let mut dx = -(a22 * s - a12 * rv) / det;
        let dp = -(-a21 * s + a11 * rv) / det;
        // keep the stretch positive
        while x + dx <= 0.0 {
            dx *= 0.5;
        }
        x += dx;
        p += dp;
    }
    Err(Error::NoConvergence { iterations: CONSTRAINT_MAX_ITER, residual: last })
}

/// Uniaxial-stress update at axial stretch `lambda`. `guess` seeds the
/// compressible (lateral stretch, P) Newton iteration.
pub fn solve_uniaxial_step(
    model: &ViscoModel,
    lambda: f64,
    state: &MaterialState,
    dt: f64,
    guess: Option<(f64, f64)>,
) -> Result<PointSolution> {
    if !(lambda > 0.0) {
        return Err(Error::domain("axial stretch", lambda));
    }
    let g = guess.unwrap_or((state.c.get(1, 1).sqrt(), 0.0));
    solve_point(model, state, Control::Uniaxial(lambda), g, dt)
}

/// Simple-shear update at shear amount `gamma`; compressible models get a
/// traction-free thickness stretch.
pub fn solve_shear_step(
    model: &ViscoModel,
    gamma: f64,
    state: &MaterialState,
    dt: f64,
    guess: Option<(f64, f64)>,
) -> Result<PointSolution> {
    let g = guess.unwrap_or((state.c.get(2, 2).sqrt(), 0.0));
    solve_point(model, state, Control::Shear(gamma), g, dt)
}

/// Equibiaxial update at in-plane stretch `lambda`.
pub fn solve_equibiaxial_step(
    model: &ViscoModel,
    lambda: f64,
    state: &MaterialState,
    dt: f64,
    guess: Option<(f64, f64)>,
) -> Result<PointSolution> {
    if !(lambda > 0.0) {
        return Err(Error::domain("in-plane stretch", lambda));
    }
    let g = guess.unwrap_or((state.c.get(2, 2).sqrt(), 0.0));
    solve_point(model, state, Control::Equibiaxial(lambda), g, dt)
}

/// One recorded instant of a program.
#[derive(Clone, Debug, Serialize)]
pub struct StepResult {
    pub t: f64,
    pub f: Mat3,
    pub c: SymTensor2,
    /// Axial or in-plane stretch (F₁₁).
    pub lambda: f64,
    /// Shear amount (F₁₂).
    pub gamma: f64,
    /// Lateral or thickness stretch.
    pub free_stretch: f64,
    pub p: f64,
    pub stress: SymTensor2,
    pub cauchy: SymTensor2,
    pub nominal: Mat3,
    pub neq_norm: f64,
    pub t_norms: Vec<f64>,
    /// E^v per branch.
    pub viscous_strains: Vec<SymTensor2>,
    /// Dissipation power density averaged over the step.
    pub phi: f64,
    /// Cumulative dissipated energy Σ Φ Δt V_ref.
    pub d: f64,
}

fn record(model: &ViscoModel, t: f64, sol: &PointSolution, phi: f64, d: f64) -> StepResult {
    StepResult {
        t,
        f: sol.f,
        c: sol.output.state.c,
        lambda: sol.f[0][0],
        gamma: sol.f[0][1],
        free_stretch: sol.free_stretch,
        p: sol.p,
        stress: sol.output.stress,
        cauchy: sol.cauchy(),
        nominal: sol.nominal(),
        neq_norm: sol.output.neq_stress.norm(),
        t_norms: sol.output.t_norms.clone(),
        viscous_strains: model.branches.iter().zip(&sol.output.state.branches).map(|(b, s)| s.viscous_strain(b)).collect(),
        phi,
        d,
    }
}

/// Advances from `state` at time `t0` to `t0 + dt`, splitting the interval
/// into up to 2⁶ substeps when a step fails to converge. Returns the
/// solution and the energy density dissipated over the interval.
fn advance(
    model: &ViscoModel,
    state: &MaterialState,
    control: impl Fn(f64) -> Control,
    t0: f64,
    dt: f64,
    guess: (f64, f64),
) -> Result<(PointSolution, f64)> {
    let mut last_err = None;
    for level in 0..=MAX_STEP_HALVINGS {
        let n = 1usize << level;
        let h = dt / n as f64;
        let mut s = state.clone();
        let mut g = guess;
        let mut energy = 0.0;
        let mut result = None;
        for k in 1..=n {
            match solve_point(model, &s, control(t0 + h * k as f64), g, h) {
                Ok(sol) => {
                    energy += sol.output.phi * h;
                    g = (sol.free_stretch, sol.p);
                    s = sol.output.state.clone();
                    result = Some(sol);
                }
                Err(e) => {
                    result = None;
                    last_err = Some(e);
                    break;
                }
            }
        }
        match result {
            Some(sol) => return Ok((sol, energy)),
            None => {
                let e = last_err.take().unwrap();
                if !e.is_step_failure() {
                    return Err(e.at(t0 + dt));
                }
                last_err = Some(e);
            }
        }
    }
    Err(last_err.unwrap().at(t0 + dt))
}

/// One uniaxial step from `t0` to `t0 + dt` with axial stretch λ(t), using the
/// same local Δt halving as [`run_program`]. Returns the solution and the
/// energy density dissipated over the step.
pub fn advance_uniaxial(
    model: &ViscoModel,
    state: &MaterialState,
    lambda: impl Fn(f64) -> f64,
    t0: f64,
    dt: f64,
    guess: (f64, f64),
) -> Result<(PointSolution, f64)> {
    advance(model, state, |t| Control::Uniaxial(lambda(t)), t0, dt, guess)
}

/// Runs a program from the virgin state.
pub fn run_program(model: &ViscoModel, program: &LoadingProgram) -> Result<Vec<StepResult>> {
    model.validate()?;
    program.validate()?;
    let control = |t: f64| program.control(t);
    let c0 = match control(0.0) {
        Control::Gradient(f) => right_cauchy_green(&f),
        ctl => {
            let cons = constraint(ctl);
            right_cauchy_green(&(cons.f)(cons.isochoric.unwrap_or(1.0)).0)
        }
    };
    let state = model.initial_state(&c0)?;
    let (first, _) = advance(model, &state, control, 0.0, 0.0, (c0.get(2, 2).sqrt(), 0.0))?;
    let mut out = vec![record(model, 0.0, &first, 0.0, 0.0)];
    let n = (program.total_time / program.dt - 1e-9).ceil().max(0.0) as usize;
    let mut state = first.output.state.clone();
    let mut guess = (first.free_stretch, first.p);
    let mut d = 0.0;
    let mut t = 0.0;
    for k in 1..=n {
        let t1 = (k as f64 * program.dt).min(program.total_time);
        let h = t1 - t;
        let (sol, energy) = advance(model, &state, control, t, h, guess)?;
        d += energy * program.reference_volume;
        let phi = if h > 0.0 { energy / h } else { 0.0 };
        out.push(record(model, t1, &sol, phi, d));
        guess = (sol.free_stretch, sol.p);
        state = sol.output.state;
        t = t1;
    }
    Ok(out)
}

/// Cumulative dissipated energy from recorded power densities:
/// D_{n+1} = D_n + Φ_{n+1} (t_{n+1} − t_n) V_ref.
pub fn dissipation_accumulate(results: &[StepResult], reference_volume: f64) -> Vec<f64> {
    let mut d = 0.0;
    let mut out = Vec::with_capacity(results.len());
    for (k, r) in results.iter().enumerate() {
        if k > 0 {
            d += r.phi * (r.t - results[k - 1].t) * reference_volume;
        }
        out.push(d);
    }
    out
}
