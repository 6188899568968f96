//! Self-checks: analytic derivatives against central finite differences and
//! volumetric identities. Backs the `verify` command.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::flv::FlvBranch;
use crate::micro::{MicroBranch, MicroScheme, MicroState, NewtonTolerances};
use crate::model::{hill, Branch, BranchState, Equilibrium, MaterialState, ViscoModel};
use crate::strain::{ElasticKit, ScaleFunction, StrainKit};
use crate::tensor::{SymTensor2, Tensor4, Tensor6, PAIRS};
use crate::volumetric::{VolumetricFamily, VolumetricModel};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Scope {
    Strain,
    Hyperelastic,
    Flv,
    Micro,
    Volumetric,
}

impl Scope {
    pub const ALL: [Scope; 5] = [Scope::Strain, Scope::Hyperelastic, Scope::Flv, Scope::Micro, Scope::Volumetric];

    pub fn name(self) -> &'static str {
        match self {
            Scope::Strain => "strain",
            Scope::Hyperelastic => "hyperelastic",
            Scope::Flv => "flv",
            Scope::Micro => "micro",
            Scope::Volumetric => "volumetric",
        }
    }
}

impl FromStr for Scope {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Scope::ALL
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown verify scope `{s}`")))
    }
}

impl fmt::Display for Scope {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Worst error of one check over its samples.
#[derive(Clone, Debug)]
pub struct Check {
    pub scope: Scope,
    pub name: String,
    pub max_error: f64,
    pub tolerance: f64,
}

impl Check {
    pub fn passed(&self) -> bool {
        self.max_error <= self.tolerance
    }
}

#[derive(Clone, Debug)]
pub struct VerifyOptions {
    /// Empty means every scope.
    pub scopes: Vec<Scope>,
    pub samples: usize,
    pub seed: u64,
    /// Scales every analytic derivative by 1 + 1e-3 (negative control).
    pub inject_fault: bool,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions { scopes: Vec::new(), samples: 20, seed: 0, inject_fault: false }
    }
}

const RANK4_TOL: f64 = 1e-6;
const RANK6_TOL: f64 = 1e-5;
const FD_STEP: f64 = 1e-5;

fn unit(slot: usize) -> SymTensor2 {
    let mut e = SymTensor2::zero();
    e.0[slot] = 1.0;
    e
}

/// ∂Y/∂X by central differences with one Richardson extrapolation.
fn fd2<F: Fn(&SymTensor2) -> Result<SymTensor2>>(f: F, x: &SymTensor2, h: f64) -> Result<Tensor4> {
    let central = |j: usize, h: f64| -> Result<SymTensor2> {
        let e = unit(j) * h;
        let d = (f(&(*x + e))? - f(&(*x - e))?) / (2.0 * h);
        Ok(if j < 3 { d } else { d * 0.5 })
    };
    let mut t = Tensor4::zero();
    for j in 0..6 {
        let d = (central(j, 0.5 * h)? * 4.0 - central(j, h)?) / 3.0;
        for i in 0..6 {
            t.0[i][j] = d.0[i];
        }
    }
    Ok(t)
}

fn fd4<F: Fn(&SymTensor2) -> Result<Tensor4>>(f: F, x: &SymTensor2, h: f64) -> Result<Tensor6> {
    let central = |k: usize, h: f64| -> Result<Tensor4> {
        let e = unit(k) * h;
        let d = (f(&(*x + e))? - f(&(*x - e))?) * (1.0 / (2.0 * h));
        Ok(if k < 3 { d } else { d * 0.5 })
    };
    let mut t = Tensor6::zero();
    for k in 0..6 {
        let d = (central(k, 0.5 * h)? * 4.0 - central(k, h)?) * (1.0 / 3.0);
        for i in 0..6 {
            for j in 0..6 {
                t.0[i][j][k] = d.0[i][j];
            }
        }
    }
    Ok(t)
}

fn random_spd(r: &mut ChaCha8Rng, amp: f64) -> SymTensor2 {
    let f: [[f64; 3]; 3] =
        std::array::from_fn(|i| std::array::from_fn(|j| if i == j { 1.0 } else { 0.0 } + amp * r.gen_range(-1.0..1.0)));
    SymTensor2(std::array::from_fn(|s| {
        let (i, j) = PAIRS[s];
        (0..3).map(|k| f[k][i] * f[k][j]).sum()
    }))
}

fn random_sym(r: &mut ChaCha8Rng, amp: f64) -> SymTensor2 {
    SymTensor2(std::array::from_fn(|_| amp * r.gen_range(-1.0..1.0)))
}

fn families() -> Vec<(&'static str, ScaleFunction)> {
    vec![
        ("GL", ScaleFunction::GREEN_LAGRANGE),
        ("EA", ScaleFunction::SethHill { m: -2.0 }),
        ("Seth-Hill(0.5)", ScaleFunction::SethHill { m: 0.5 }),
        ("Hencky", ScaleFunction::Hencky),
        ("CR(1,1)", ScaleFunction::CurnierRakotomanana { m: 1.0, n: 1.0 }),
        ("CR(0.08,1.34)", ScaleFunction::CurnierRakotomanana { m: 0.08, n: 1.34 }),
        ("CZ(0.5)", ScaleFunction::CurnierZysset { m: 0.5 }),
        ("DN(0.6,2)", ScaleFunction::DarijaniNaghdabadi { m: 0.6, n: 2.0 }),
    ]
}

struct Runner {
    rng: ChaCha8Rng,
    samples: usize,
    fault: f64,
    out: Vec<Check>,
}

impl Runner {
    /// Worst relative error of `sample` over the configured sample count;
    /// an evaluation error counts as an infinite error.
    fn record(&mut self, scope: Scope, name: String, tolerance: f64, mut sample: impl FnMut(&mut ChaCha8Rng, f64) -> Result<f64>) {
        let mut worst: f64 = 0.0;
        for _ in 0..self.samples {
            match sample(&mut self.rng, self.fault) {
                Ok(e) if e.is_finite() => worst = worst.max(e),
                _ => worst = f64::INFINITY,
            }
        }
        self.out.push(Check { scope, name, max_error: worst, tolerance });
    }

    fn single(&mut self, scope: Scope, name: String, tolerance: f64, value: Result<f64>) {
        let max_error = value.ok().filter(|v| v.is_finite()).unwrap_or(f64::INFINITY);
        self.out.push(Check { scope, name, max_error, tolerance });
    }
}

fn rel4(a: &Tensor4, b: &Tensor4) -> f64 {
    (*a - *b).norm() / b.norm().max(1e-300)
}

fn rel6(a: &Tensor6, b: &Tensor6) -> f64 {
    (a - b).norm() / b.norm().max(1e-300)
}

fn strain_checks(run: &mut Runner) {
    for (label, sf) in families() {
        // |E(1)| against 1e-14 and |E'(1) − 1| against 1e-12, as a ratio
        let fault = run.fault;
        let normality = sf.eval(1.0).map(|v| (v.e.abs() * 1e14).max((v.d1 * fault - 1.0).abs() * 1e12));
        run.single(Scope::Strain, format!("normality {label}"), 1.0, normality);
        run.record(Scope::Strain, format!("Q {label}"), RANK4_TOL, |r, k| {
            let c = random_spd(r, 0.3);
            let kit = StrainKit::new(&c, sf)?;
            let fd = fd2(|x| Ok(StrainKit::new(x, sf)?.strain), &c, 1e-4)? * 2.0;
            Ok(rel4(&(kit.q * k), &fd))
        });
        run.record(Scope::Strain, format!("L {label}"), RANK6_TOL, |r, k| {
            let c = random_spd(r, 0.3);
            let kit = StrainKit::new(&c, sf)?;
            let fd = fd4(|x| Ok(StrainKit::new(x, sf)?.q), &c, 1e-4)? * 2.0;
            Ok(rel6(&(kit.curvature() * k), &fd))
        });
        if sf.is_coercive() {
            run.record(Scope::Strain, format!("K {label}"), RANK6_TOL, |r, k| {
                let ee = random_sym(r, 0.3);
                let kit = ElasticKit::from_strain(&ee, sf)?;
                let fd = fd4(|x| Ok(ElasticKit::from_strain(x, sf)?.q_inv), &ee, 1e-4)? * 0.5;
                Ok(rel6(&(kit.curvature() * k), &fd))
            });
        }
    }
}

fn tangent_check(run: &mut Runner, scope: Scope, name: String, model: ViscoModel, history: bool) {
    run.record(scope, name, RANK4_TOL, |r, k| {
        let mut state = model.initial_state(&SymTensor2::identity())?;
        if history {
            // two preparatory steps so that the branches carry history
            for _ in 0..2 {
                state = model.step(&state, &random_spd(r, 0.2), 0.0, 0.3, false)?.state;
            }
        }
        let c = random_spd(r, 0.3);
        let (p, dt) = (1.7, 0.2);
        let out = model.step(&state, &c, p, dt, true)?;
        let tangent = out.tangent.ok_or(Error::Unsupported("tangent".into()))?;
        let fd = fd2(|x| Ok(model.step(&state, x, p, dt, false)?.stress), &c, FD_STEP)? * 2.0;
        Ok(rel4(&(tangent * k), &fd))
    });
}

fn hyperelastic_checks(run: &mut Runner) {
    for (label, sf) in families() {
        tangent_check(run, Scope::Hyperelastic, format!("C Hill {label}"), ViscoModel::elastic(hill(17.48, sf)), false);
    }
    let ec = ViscoModel::elastic(Equilibrium::EightChain { mu: 17.48, n_chain: 8.0 });
    tangent_check(run, Scope::Hyperelastic, "C eight-chain".into(), ec, false);
}

fn flv_checks(run: &mut Runner) {
    for (label, sf) in families() {
        let m = ViscoModel::elastic(hill(17.48, ScaleFunction::Hencky)).with_branch(Branch::Flv(FlvBranch::new(27.73, 0.8, sf)));
        tangent_check(run, Scope::Flv, format!("C FLV {label}"), m, true);
    }
}

fn micro_checks(run: &mut Runner) {
    let tol = NewtonTolerances::default();
    for scheme in [MicroScheme::Midpoint, MicroScheme::BackwardEuler] {
        for (label, sf) in families().into_iter().filter(|(_, s)| s.is_coercive()) {
            let b = MicroBranch { mu: 27.73, n_chain: 6.0, eta: 40.0, strain: sf, scheme };
            let tag = format!("{scheme:?} {label}");
            let state = |r: &mut ChaCha8Rng| -> Result<(MicroState, SymTensor2)> {
                let cn = random_spd(r, 0.25);
                let ev = random_sym(r, 0.05);
                let en = StrainKit::new(&cn, sf)?.strain;
                Ok((MicroState { ev, ce: ElasticKit::from_strain(&(en - ev), sf)?.ce }, cn))
            };
            run.record(Scope::Micro, format!("K {tag}"), RANK4_TOL, |r, k| {
                let (s, _) = state(r)?;
                let e = StrainKit::new(&random_spd(r, 0.3), sf)?.strain;
                let ev = s.ev + random_sym(r, 0.03);
                let res = b.residual_cached(&ev, &s.ev, &s.ce, &e, 0.4)?;
                let fd = fd2(|x| Ok(b.residual_cached(x, &s.ev, &s.ce, &e, 0.4)?.r), &ev, FD_STEP)?;
                Ok(rel4(&(b.k_tensor(&res) * k), &fd))
            });
            run.record(Scope::Micro, format!("H {tag}"), RANK4_TOL, |r, k| {
                let (s, _) = state(r)?;
                let c = random_spd(r, 0.3);
                let kit = StrainKit::new(&c, sf)?;
                let step = b.local_solve(&s, &kit.strain, 0.4, &tol)?;
                let h = b.h_tensor(&step.k, &kit.q)?;
                let fd = fd2(|x| Ok(b.local_solve(&s, &StrainKit::new(x, sf)?.strain, 0.4, &tol)?.state.ev), &c, FD_STEP)? * 2.0;
                Ok(rel4(&(h * k), &fd))
            });
            let m = ViscoModel::elastic(Equilibrium::EightChain { mu: 17.48, n_chain: 8.0 }).with_branch(Branch::Micro(b.clone()));
            run.record(Scope::Micro, format!("C {tag}"), RANK4_TOL, |r, k| {
                let (s, cn) = state(r)?;
                let st = MaterialState { t: 0.0, c: cn, branches: vec![BranchState::Micro(s)] };
                let c = random_spd(r, 0.3);
                let out = m.step(&st, &c, 2.1, 0.3, true)?;
                let fd = fd2(|x| Ok(m.step(&st, x, 2.1, 0.3, false)?.stress), &c, FD_STEP)? * 2.0;
                Ok(rel4(&(out.tangent.unwrap_or_else(Tensor4::zero) * k), &fd))
            });
        }
    }
}

fn volumetric_checks(run: &mut Runner) {
    let closed = [VolumetricFamily::Quadratic, VolumetricFamily::St91, VolumetricFamily::M94, VolumetricFamily::L94];
    let kappa = 100.0;
    let ps = [-0.6, -0.25, 0.0, 0.3, 0.8].map(|x| x * kappa);
    for fam in closed {
        let v = VolumetricModel::new(fam, kappa);
        let defect = v.legendre_check(&ps).map(|d| (d + (run.fault - 1.0) * kappa) / kappa);
        run.single(Scope::Volumetric, format!("Legendre {}", fam.name()), 1e-8, defect);
    }
    let all = [
        VolumetricFamily::Quadratic,
        VolumetricFamily::St91,
        VolumetricFamily::M94,
        VolumetricFamily::L94,
        VolumetricFamily::Ansys2000,
        VolumetricFamily::Hn03,
        VolumetricFamily::O72 { gamma: 2.0 },
    ];
    for fam in all {
        let v = VolumetricModel::new(fam, 1.0);
        let coeffs = || -> Result<f64> {
            let h = 1e-3;
            let g = |p: f64| v.gibbs_numeric(p).map(|x| x.0);
            let (gp, g0, gm) = (g(h)?, g(0.0)?, g(-h)?);
            let c1 = (gp - gm) / (2.0 * h) * run.fault;
            let c2 = (gp - 2.0 * g0 + gm) / (2.0 * h * h);
            Ok((c1 - 1.0).abs().max((c2 + 0.5).abs()))
        };
        run.single(Scope::Volumetric, format!("series {}", fam.name()), 1e-4, coeffs());
    }
}

/// Runs the selected checks in a fixed order.
pub fn run(opts: &VerifyOptions) -> Vec<Check> {
    let mut run = Runner {
        rng: ChaCha8Rng::seed_from_u64(opts.seed),
        samples: opts.samples.max(1),
        fault: if opts.inject_fault { 1.0 + 1e-3 } else { 1.0 },
        out: Vec::new(),
    };
    for scope in Scope::ALL {
        if !opts.scopes.is_empty() && !opts.scopes.contains(&scope) {
            continue;
        }
        match scope {
            Scope::Strain => strain_checks(&mut run),
            Scope::Hyperelastic => hyperelastic_checks(&mut run),
            Scope::Flv => flv_checks(&mut run),
            Scope::Micro => micro_checks(&mut run),
            Scope::Volumetric => volumetric_checks(&mut run),
        }
    }
    run.out
}
