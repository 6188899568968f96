//! NMAD metric, uniaxial loading–unloading protocols and simultaneous
//! parameter fitting by multi-start Nelder–Mead.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::driver::advance_uniaxial;
use crate::error::{Error, Result};
use crate::model::{Branch, Equilibrium, ViscoModel};
use crate::strain::ScaleFunction;
use crate::tensor::SymTensor2;

/// (1/𝓜) Σ_j ⟨e − p⟩_j / max(⟨e⟩_j, ⟨p⟩_j) · 100 with ⟨·⟩ the mean absolute value.
pub fn nmad(experimental: &[Vec<f64>], predicted: &[Vec<f64>]) -> Result<f64> {
    if experimental.is_empty() {
        return Err(Error::EmptySet);
    }
    if experimental.len() != predicted.len() {
        return Err(Error::LengthMismatch { expected: experimental.len(), found: predicted.len() });
    }
    let mut sum = 0.0;
    for (e, p) in experimental.iter().zip(predicted) {
        sum += nmad_single(e, p)?;
    }
    Ok(sum / experimental.len() as f64)
}

/// Contribution of one data set, in percent.
pub fn nmad_single(e: &[f64], p: &[f64]) -> Result<f64> {
    if e.is_empty() {
        return Err(Error::EmptySet);
    }
    if e.len() != p.len() {
        return Err(Error::LengthMismatch { expected: e.len(), found: p.len() });
    }
    let n = e.len() as f64;
    let mean = |it: &mut dyn Iterator<Item = f64>| it.map(f64::abs).sum::<f64>() / n;
    let diff = mean(&mut e.iter().zip(p).map(|(a, b)| a - b));
    let denom = mean(&mut e.iter().copied()).max(mean(&mut p.iter().copied()));
    if diff == 0.0 {
        return Ok(0.0);
    }
    Ok(diff / denom * 100.0)
}

/// One experimental record.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DataPoint {
    pub time: f64,
    pub stretch: f64,
    /// Nominal stress (kPa).
    pub stress: f64,
}

/// A loading–unloading test at constant stretch rate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub label: String,
    pub points: Vec<DataPoint>,
    /// Stretch rate (1/s).
    pub rate: f64,
    pub peak: f64,
    /// Hold duration at the peak (s).
    pub hold: f64,
}

impl Dataset {
    /// Infers rate, peak and hold from the records.
    pub fn from_points(label: impl Into<String>, points: Vec<DataPoint>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::EmptySet);
        }
        for (i, p) in points.iter().enumerate() {
            if !(p.stretch > 0.0) || !p.time.is_finite() || !p.stress.is_finite() {
                return Err(Error::InvalidParameter(format!("record {i}: stretch must be positive and values finite")));
            }
        }
        for (i, w) in points.windows(2).enumerate() {
            if !(w[1].time > w[0].time) {
                return Err(Error::InvalidParameter(format!("record {}: times must increase", i + 1)));
            }
        }
        let peak = points.iter().map(|p| p.stretch).fold(f64::MIN, f64::max);
        if !(peak > 1.0) {
            return Err(Error::InvalidParameter("data set never stretches beyond 1".into()));
        }
        let at_peak: Vec<&DataPoint> = points.iter().filter(|p| (p.stretch - peak).abs() <= 1e-9 * peak).collect();
        let t_peak = at_peak[0].time - points[0].time.min(0.0);
        if !(t_peak > 0.0) {
            return Err(Error::InvalidParameter("peak stretch must be reached after t = 0".into()));
        }
        let hold = at_peak.last().unwrap().time - at_peak[0].time;
        Ok(Dataset { label: label.into(), rate: (peak - 1.0) / t_peak, peak, hold, points })
    }

    pub fn times(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.time).collect()
    }

    pub fn stresses(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.stress).collect()
    }

    pub fn descriptor(&self, steps_per_segment: usize) -> Protocol {
        Protocol { rate: self.rate, peak: self.peak, hold: self.hold, steps_per_segment }
    }
}

/// Load at `rate` to `peak`, optionally hold, unload at −`rate` until the
/// nominal stress reaches zero.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Protocol {
    pub rate: f64,
    pub peak: f64,
    pub hold: f64,
    pub steps_per_segment: usize,
}

/// Simulated protocol history.
#[derive(Clone, Debug, Default)]
pub struct ProtocolRun {
    pub times: Vec<f64>,
    pub stretches: Vec<f64>,
    pub stresses: Vec<f64>,
    /// Time at which the unloading stress reached zero.
    pub end_time: f64,
}

impl ProtocolRun {
    /// Nominal stress at time `t` by linear interpolation; zero after termination.
    pub fn sample(&self, t: f64) -> f64 {
        if t >= self.end_time || self.times.is_empty() {
            return 0.0;
        }
        let k = self.times.partition_point(|&x| x <= t);
        if k == 0 {
            return self.stresses[0];
        }
        let (t0, t1) = (self.times[k - 1], self.times[k]);
        let w = (t - t0) / (t1 - t0);
        self.stresses[k - 1] + (self.stresses[k] - self.stresses[k - 1]) * w
    }
}

/// Default number of steps per loading segment.
pub const DEFAULT_STEPS_PER_SEGMENT: usize = 100;

pub fn simulate_protocol(model: &ViscoModel, protocol: &Protocol) -> Result<ProtocolRun> {
    let Protocol { rate, peak, hold, steps_per_segment } = *protocol;
    if !(rate > 0.0) || !(peak > 1.0) || !(hold >= 0.0) || steps_per_segment == 0 {
        return Err(Error::InvalidParameter("protocol needs rate > 0, peak > 1, hold ≥ 0 and steps > 0".into()));
    }
    let t_peak = (peak - 1.0) / rate;
    let t_unload = t_peak + hold;
    let dt = t_peak / steps_per_segment as f64;
    let lambda = move |t: f64| {
        if t <= t_peak {
            1.0 + rate * t
        } else if t <= t_unload {
            peak
        } else {
            peak - rate * (t - t_unload)
        }
    };
    let mut state = model.initial_state(&SymTensor2::identity())?;
    let mut guess = (1.0, 0.0);
    let mut run = ProtocolRun { times: vec![0.0], stretches: vec![1.0], stresses: vec![0.0], end_time: f64::INFINITY };
    // break points so that the peak and hold end are hit exactly
    let mut t = 0.0;
    let max_steps = 4 * steps_per_segment + (hold / dt).ceil() as usize + 10;
    for _ in 0..max_steps {
        let mut t1 = t + dt;
        for tb in [t_peak, t_unload] {
            if t < tb - 1e-12 * tb && t1 > tb {
                t1 = tb;
            }
        }
        if lambda(t1) <= 0.0 {
            break;
        }
        let (sol, _) = advance_uniaxial(model, &state, lambda, t, t1 - t, guess)?;
        let s = sol.nominal()[0][0];
        if t1 > t_unload && s <= 0.0 {
            let (t0, s0) = (t, *run.stresses.last().unwrap());
            let tc = if s0 > s { t0 + (t1 - t0) * s0 / (s0 - s) } else { t1 };
            run.times.push(tc);
            run.stretches.push(lambda(tc));
            run.stresses.push(0.0);
            run.end_time = tc;
            return Ok(run);
        }
        run.times.push(t1);
        run.stretches.push(sol.f[0][0]);
        run.stresses.push(s);
        guess = (sol.free_stretch, sol.p);
        state = sol.output.state;
        t = t1;
    }
    Err(Error::NoConvergence { iterations: max_steps, residual: *run.stresses.last().unwrap() })
}

/// Predicted nominal stresses at the data set's time stamps.
pub fn predict_dataset(model: &ViscoModel, data: &Dataset, steps_per_segment: usize) -> Result<Vec<f64>> {
    let run = simulate_protocol(model, &data.descriptor(steps_per_segment))?;
    Ok(data.points.iter().map(|p| run.sample(p.time)).collect())
}

/// NMAD of a fixed model on (possibly held-out) data.
#[derive(Clone, Debug, Serialize)]
pub struct Prediction {
    pub nmad: f64,
    pub per_dataset: Vec<f64>,
}

pub fn predict(model: &ViscoModel, data: &[Dataset], steps_per_segment: usize) -> Result<Prediction> {
    if data.is_empty() {
        return Err(Error::EmptySet);
    }
    let mut per_dataset = Vec::with_capacity(data.len());
    for d in data {
        per_dataset.push(nmad_single(&d.stresses(), &predict_dataset(model, d, steps_per_segment)?)?);
    }
    Ok(Prediction { nmad: per_dataset.iter().sum::<f64>() / data.len() as f64, per_dataset })
}

/// Noise-free data sampled at `n_points` equally spaced times over the
/// whole loading–unloading history.
pub fn synthetic_dataset(
    model: &ViscoModel,
    label: &str,
    protocol: &Protocol,
    n_points: usize,
) -> Result<Dataset> {
    let run = simulate_protocol(model, protocol)?;
    let t_peak = (protocol.peak - 1.0) / protocol.rate;
    let mut times: Vec<f64> = (0..n_points).map(|k| run.end_time * k as f64 / (n_points - 1) as f64).collect();
    // make sure the peak instant is part of the record
    let k = times.iter().enumerate().min_by(|a, b| (a.1 - t_peak).abs().total_cmp(&(b.1 - t_peak).abs())).unwrap().0;
    times[k] = t_peak;
    let load = |t: f64| {
        if t <= t_peak {
            1.0 + protocol.rate * t
        } else if t <= t_peak + protocol.hold {
            protocol.peak
        } else {
            protocol.peak - protocol.rate * (t - t_peak - protocol.hold)
        }
    };
    let points = times.iter().map(|&t| DataPoint { time: t, stretch: load(t), stress: run.sample(t) }).collect();
    let mut d = Dataset::from_points(label, points)?;
    d.rate = protocol.rate;
    d.hold = protocol.hold;
    Ok(d)
}

/// Coordinate used by the optimizer between the bounds.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Transform {
    Log,
    Affine,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FreeParameter {
    /// `eq.mu`, `eq.n_chain`, `eq[i].mu|m|n`, `neq[i].mu|tau|eta|n_chain|m|n` or `vol.kappa`.
    pub key: String,
    pub lower: f64,
    pub upper: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub transform: Option<Transform>,
}

impl FreeParameter {
    pub fn new(key: &str, lower: f64, upper: f64) -> Self {
        FreeParameter { key: key.into(), lower, upper, transform: None }
    }

    pub fn transform(&self) -> Transform {
        self.transform.unwrap_or_else(|| {
            let field = self.key.rsplit('.').next().unwrap_or("");
            if matches!(field, "m" | "n") {
                Transform::Affine
            } else {
                Transform::Log
            }
        })
    }

    fn to_unit(&self, x: f64) -> f64 {
        match self.transform() {
            Transform::Log => (x.ln() - self.lower.ln()) / (self.upper.ln() - self.lower.ln()),
            Transform::Affine => (x - self.lower) / (self.upper - self.lower),
        }
    }

    fn from_unit(&self, u: f64) -> f64 {
        let u = u.clamp(0.0, 1.0);
        let x = match self.transform() {
            Transform::Log => (self.lower.ln() + u * (self.upper.ln() - self.lower.ln())).exp(),
            Transform::Affine => self.lower + u * (self.upper - self.lower),
        };
        x.clamp(self.lower, self.upper)
    }

    fn validate(&self) -> Result<()> {
        if !(self.lower.is_finite() && self.upper.is_finite() && self.lower < self.upper) {
            return Err(Error::InvalidParameter(format!("{}: bounds must be finite with lower < upper", self.key)));
        }
        if self.transform() == Transform::Log && !(self.lower > 0.0) {
            return Err(Error::InvalidParameter(format!("{}: log-transformed bounds must be positive", self.key)));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OptimizerSettings {
    pub restarts: usize,
    /// Evaluation budget per start.
    pub max_evaluations: usize,
    /// Extra budget spent refining the best start with fresh simplices.
    pub polish_evaluations: usize,
    /// Initial simplex edge in the unit box.
    pub simplex_scale: f64,
    pub f_tol: f64,
    pub x_tol: f64,
    pub steps_per_segment: usize,
}

impl Default for OptimizerSettings {
    fn default() -> Self {
        OptimizerSettings {
            restarts: 8,
            max_evaluations: 500,
            polish_evaluations: 4000,
            simplex_scale: 0.15,
            f_tol: 1e-10,
            x_tol: 1e-10,
            steps_per_segment: DEFAULT_STEPS_PER_SEGMENT,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitSpec {
    pub template: ViscoModel,
    #[serde(default)]
    pub parameters: Vec<FreeParameter>,
    #[serde(default)]
    pub optimizer: OptimizerSettings,
}

/// One objective evaluation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TraceEntry {
    pub start: usize,
    pub evaluation: usize,
    pub nmad: f64,
    /// Best NMAD over all evaluations up to and including this one.
    pub best: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct FitResult {
    pub parameters: Vec<(String, f64)>,
    pub model: ViscoModel,
    pub nmad: f64,
    pub per_dataset: Vec<f64>,
    pub evaluations: usize,
    pub seed: u64,
    pub trace: Vec<TraceEntry>,
}

fn parse_key(key: &str) -> Option<(&str, Option<usize>, &str)> {
    let (head, field) = key.split_once('.')?;
    match head.split_once('[') {
        Some((group, rest)) => {
            let idx = rest.strip_suffix(']')?.parse().ok()?;
            Some((group, Some(idx), field))
        }
        None => Some((head, None, field)),
    }
}

fn strain_param(sf: &mut ScaleFunction, field: &str) -> Option<*mut f64> {
    match (sf, field) {
        (ScaleFunction::SethHill { m }, "m") => Some(m),
        (ScaleFunction::CurnierRakotomanana { m, .. }, "m") => Some(m),
        (ScaleFunction::CurnierRakotomanana { n, .. }, "n") => Some(n),
        (ScaleFunction::CurnierZysset { m }, "m") => Some(m),
        (ScaleFunction::DarijaniNaghdabadi { m, .. }, "m") => Some(m),
        (ScaleFunction::DarijaniNaghdabadi { n, .. }, "n") => Some(n),
        _ => None,
    }
}

fn slot<'a>(model: &'a mut ViscoModel, key: &str) -> Result<&'a mut f64> {
    let bad = || Error::InvalidParameter(format!("unknown parameter key `{key}`"));
    let (group, idx, field) = parse_key(key).ok_or_else(bad)?;
    let ptr: *mut f64 = match (group, idx) {
        ("vol", None) if field == "kappa" => &mut model.volumetric.kappa,
        ("eq", None) => match (&mut model.equilibrium, field) {
            (Equilibrium::EightChain { mu, .. }, "mu") => mu,
            (Equilibrium::EightChain { n_chain, .. }, "n_chain") => n_chain,
            _ => return Err(bad()),
        },
        ("eq", Some(i)) => match &mut model.equilibrium {
            Equilibrium::Hill { terms } => {
                let t = terms.get_mut(i).ok_or_else(bad)?;
                if field == "mu" {
                    &mut t.mu
                } else {
                    strain_param(&mut t.strain, field).ok_or_else(bad)?
                }
            }
            _ => return Err(bad()),
        },
        ("neq", Some(i)) => match (model.branches.get_mut(i).ok_or_else(bad)?, field) {
            (Branch::Flv(b), "mu") => &mut b.mu,
            (Branch::Flv(b), "tau") => &mut b.tau,
            (Branch::Flv(b), f) => strain_param(&mut b.strain, f).ok_or_else(bad)?,
            (Branch::Micro(b), "mu") => &mut b.mu,
            (Branch::Micro(b), "eta") => &mut b.eta,
            (Branch::Micro(b), "n_chain") => &mut b.n_chain,
            (Branch::Micro(b), f) => strain_param(&mut b.strain, f).ok_or_else(bad)?,
        },
        _ => return Err(bad()),
    };
    // SAFETY: `ptr` points into `model`, which is mutably borrowed for 'a.
    Ok(unsafe { &mut *ptr })
}

fn is_flv_eta(model: &ViscoModel, key: &str) -> Option<usize> {
    match parse_key(key)? {
        ("neq", Some(i), "eta") if matches!(model.branches.get(i), Some(Branch::Flv(_))) => Some(i),
        _ => None,
    }
}

/// Sets one named parameter. For finite-linear branches `eta` is stored as
/// τ = η/μ using the branch modulus at the time of the call.
pub fn set_parameter(model: &mut ViscoModel, key: &str, value: f64) -> Result<()> {
    if let Some(i) = is_flv_eta(model, key) {
        if let Branch::Flv(b) = &mut model.branches[i] {
            b.tau = value / b.mu;
        }
        return Ok(());
    }
    *slot(model, key)? = value;
    Ok(())
}

pub fn get_parameter(model: &ViscoModel, key: &str) -> Result<f64> {
    if let Some(i) = is_flv_eta(model, key) {
        return Ok(model.branches[i].eta());
    }
    let mut m = model.clone();
    Ok(*slot(&mut m, key)?)
}

/// Applies a parameter vector; `eta` keys are applied last so that they see
/// the final moduli.
pub fn apply_parameters(template: &ViscoModel, params: &[FreeParameter], values: &[f64]) -> Result<ViscoModel> {
    let mut m = template.clone();
    let mut order: Vec<usize> = (0..params.len()).collect();
    order.sort_by_key(|&i| params[i].key.ends_with(".eta"));
    for i in order {
        set_parameter(&mut m, &params[i].key, values[i])?;
    }
    Ok(m)
}

struct Objective<'a> {
    spec: &'a FitSpec,
    data: &'a [Dataset],
}

impl Objective<'_> {
    fn values(&self, u: &[f64]) -> Vec<f64> {
        self.spec.parameters.iter().zip(u).map(|(p, &x)| p.from_unit(x)).collect()
    }

    fn eval(&self, u: &[f64]) -> f64 {
        let run = || -> Result<f64> {
            let m = apply_parameters(&self.spec.template, &self.spec.parameters, &self.values(u))?;
            m.validate()?;
            Ok(predict(&m, self.data, self.spec.optimizer.steps_per_segment)?.nmad)
        };
        match run() {
            Ok(v) if v.is_finite() => v,
            _ => f64::INFINITY,
        }
    }
}

struct StartOutcome {
    best_u: Vec<f64>,
    best_f: f64,
    trace: Vec<f64>,
}

fn project(u: &mut [f64]) {
    for x in u.iter_mut() {
        *x = x.clamp(0.0, 1.0);
    }
}

/// Bound-projected Nelder–Mead on the unit box.
fn nelder_mead(obj: &Objective, x0: &[f64], scale: f64, budget: usize, s: &OptimizerSettings, trace: &mut Vec<f64>) -> (Vec<f64>, f64) {
    let d = x0.len();
    let eval = |u: &[f64], trace: &mut Vec<f64>| {
        let f = obj.eval(u);
        trace.push(f);
        f
    };
    let mut pts: Vec<Vec<f64>> = vec![x0.to_vec()];
    for i in 0..d {
        let mut p = x0.to_vec();
        p[i] += if p[i] + scale <= 1.0 { scale } else { -scale };
        project(&mut p);
        pts.push(p);
    }
    let mut fs: Vec<f64> = pts.iter().map(|p| eval(p, trace)).collect();
    let mut used = d + 1;
    while used < budget {
        let mut idx: Vec<usize> = (0..=d).collect();
        idx.sort_by(|&a, &b| fs[a].total_cmp(&fs[b]));
        pts = idx.iter().map(|&i| pts[i].clone()).collect();
        fs = idx.iter().map(|&i| fs[i]).collect();
        let spread_f = fs[d] - fs[0];
        let spread_x = pts[1..].iter().flat_map(|p| p.iter().zip(&pts[0]).map(|(a, b)| (a - b).abs())).fold(0.0, f64::max);
        if fs[0].is_finite() && spread_f <= s.f_tol && spread_x <= s.x_tol {
            break;
        }
        if fs[0].is_finite() && spread_x <= 1e-14 {
            break;
        }
        let mut c = vec![0.0; d];
        for p in &pts[..d] {
            for (ci, pi) in c.iter_mut().zip(p) {
                *ci += pi / d as f64;
            }
        }
        let along = |t: f64| {
            let mut p: Vec<f64> = c.iter().zip(&pts[d]).map(|(ci, wi)| ci + t * (ci - wi)).collect();
            project(&mut p);
            p
        };
        let xr = along(1.0);
        let fr = eval(&xr, trace);
        used += 1;
        if fr < fs[0] {
            let xe = along(2.0);
            let fe = eval(&xe, trace);
            used += 1;
            if fe < fr {
                (pts[d], fs[d]) = (xe, fe);
            } else {
                (pts[d], fs[d]) = (xr, fr);
            }
        } else if fr < fs[d - 1] {
            (pts[d], fs[d]) = (xr, fr);
        } else {
            let xc = if fr < fs[d] { along(0.5) } else { along(-0.5) };
            let fc = eval(&xc, trace);
            used += 1;
            if fc < fr.min(fs[d]) {
                (pts[d], fs[d]) = (xc, fc);
            } else {
                for i in 1..=d {
                    let mut p: Vec<f64> = pts[0].iter().zip(&pts[i]).map(|(b, x)| b + 0.5 * (x - b)).collect();
                    project(&mut p);
                    fs[i] = eval(&p, trace);
                    pts[i] = p;
                }
                used += d;
            }
        }
    }
    let best = (0..=d).min_by(|&a, &b| fs[a].total_cmp(&fs[b])).unwrap();
    (pts[best].clone(), fs[best])
}

fn run_start(obj: &Objective, x0: Vec<f64>, s: &OptimizerSettings) -> StartOutcome {
    let mut trace = Vec::new();
    let (u, f) = nelder_mead(obj, &x0, s.simplex_scale, s.max_evaluations, s, &mut trace);
    StartOutcome { best_u: u, best_f: f, trace }
}

/// Restarts the simplex around the incumbent with shrinking edges until the
/// budget is spent or a restart brings no improvement.
fn polish(obj: &Objective, start: &StartOutcome, s: &OptimizerSettings) -> StartOutcome {
    let mut trace = Vec::new();
    let (mut u, mut f) = (start.best_u.clone(), start.best_f);
    let mut scale = s.simplex_scale;
    loop {
        let budget = s.polish_evaluations.saturating_sub(trace.len());
        if budget <= 2 * (u.len() + 1) || !f.is_finite() {
            break;
        }
        let (u2, f2) = nelder_mead(obj, &u, scale, budget, s, &mut trace);
        if !(f2 < f) {
            break;
        }
        (u, f) = (u2, f2);
        scale = (0.5 * scale).max(1e-3);
    }
    StartOutcome { best_u: u, best_f: f, trace }
}

/// Latin-hypercube start points in the unit box.
fn latin_hypercube(n: usize, d: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    let mut pts = vec![vec![0.0; d]; n];
    for j in 0..d {
        let mut strata: Vec<usize> = (0..n).collect();
        for i in (1..n).rev() {
            strata.swap(i, rng.gen_range(0..=i));
        }
        for (i, p) in pts.iter_mut().enumerate() {
            p[j] = (strata[i] as f64 + rng.gen::<f64>()) / n as f64;
        }
    }
    pts
}

/// Simultaneous fit of the free parameters to all data sets.
pub fn fit(spec: &FitSpec, data: &[Dataset], seed: u64) -> Result<FitResult> {
    if data.is_empty() {
        return Err(Error::EmptySet);
    }
    spec.template.validate()?;
    for p in &spec.parameters {
        p.validate()?;
        get_parameter(&spec.template, &p.key)?;
    }
    let obj = Objective { spec, data };
    let steps = spec.optimizer.steps_per_segment;
    if spec.parameters.is_empty() {
        let pred = predict(&spec.template, data, steps)?;
        return Ok(FitResult {
            parameters: Vec::new(),
            model: spec.template.clone(),
            nmad: pred.nmad,
            per_dataset: pred.per_dataset,
            evaluations: 1,
            seed,
            trace: vec![TraceEntry { start: 0, evaluation: 0, nmad: pred.nmad, best: pred.nmad }],
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let starts = latin_hypercube(spec.optimizer.restarts.max(1), spec.parameters.len(), &mut rng);
    let mut outcomes: Vec<StartOutcome> =
        starts.into_par_iter().map(|x0| run_start(&obj, x0, &spec.optimizer)).collect();
    let lead = (0..outcomes.len())
        .min_by(|&a, &b| {
            let (x, y) = (&outcomes[a], &outcomes[b]);
            x.best_f.total_cmp(&y.best_f).then_with(|| lexicographic(&x.best_u, &y.best_u))
        })
        .unwrap();
    let refined = polish(&obj, &outcomes[lead], &spec.optimizer);

    let mut trace = Vec::new();
    let mut best = f64::INFINITY;
    let runs = outcomes.iter().enumerate().map(|(k, o)| (k, &o.trace)).chain([(lead, &refined.trace)]);
    for (k, fs) in runs {
        for &f in fs {
            best = best.min(f);
            trace.push(TraceEntry { start: k, evaluation: trace.len(), nmad: f, best });
        }
    }
    if refined.best_f < outcomes[lead].best_f {
        outcomes[lead].best_u = refined.best_u;
        outcomes[lead].best_f = refined.best_f;
    }
    let winner = &outcomes[lead];
    if !winner.best_f.is_finite() {
        return Err(Error::AllEvaluationsFailed);
    }
    let values = obj.values(&winner.best_u);
    let model = apply_parameters(&spec.template, &spec.parameters, &values)?;
    let pred = predict(&model, data, steps)?;
    Ok(FitResult {
        parameters: spec.parameters.iter().map(|p| p.key.clone()).zip(values).collect(),
        model,
        nmad: pred.nmad,
        per_dataset: pred.per_dataset,
        evaluations: trace.len(),
        seed,
        trace,
    })
}

fn lexicographic(a: &[f64], b: &[f64]) -> std::cmp::Ordering {
    a.iter().zip(b).map(|(x, y)| x.total_cmp(y)).find(|o| o.is_ne()).unwrap_or(std::cmp::Ordering::Equal)
}

/// Position of a point in the unit box (for diagnostics and tests).
pub fn unit_coordinates(spec: &FitSpec, values: &[f64]) -> Vec<f64> {
    spec.parameters.iter().zip(values).map(|(p, &x)| p.to_unit(x)).collect()
}
