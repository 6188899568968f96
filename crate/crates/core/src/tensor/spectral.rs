use super::mat3::{cross, dot, normalize};
use super::SymTensor2;
use crate::error::{Error, Result};

/// Relative gap below which two eigenvalues are treated as repeated.
pub const MULTIPLICITY_TOL: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Multiplicity {
    Distinct,
    /// The two largest eigenvalues coincide.
    DoubleUpper,
    /// The two smallest eigenvalues coincide.
    DoubleLower,
    Triple,
}

/// Spectral form Σ x_a N_a ⊗ N_a of a symmetric tensor, eigenvalues descending.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Spectral3 {
    pub eigenvalues: [f64; 3],
    pub vectors: [[f64; 3]; 3],
    pub pattern: Multiplicity,
}

impl Spectral3 {
    pub fn projector(&self, a: usize) -> SymTensor2 {
        SymTensor2::dyad(&self.vectors[a])
    }

    pub fn projectors(&self) -> [SymTensor2; 3] {
        [self.projector(0), self.projector(1), self.projector(2)]
    }

    /// Eigenprojections grouped by multiplicity; a repeated eigenvalue gets the
    /// complement of the distinct projectors.
    pub fn eigenprojections(&self) -> Vec<(f64, SymTensor2)> {
        let x = self.eigenvalues;
        let i = SymTensor2::identity();
        match self.pattern {
            Multiplicity::Distinct => (0..3).map(|a| (x[a], self.projector(a))).collect(),
            Multiplicity::DoubleUpper => {
                let m2 = self.projector(2);
                vec![(0.5 * (x[0] + x[1]), i - m2), (x[2], m2)]
            }
            Multiplicity::DoubleLower => {
                let m0 = self.projector(0);
                vec![(x[0], m0), (0.5 * (x[1] + x[2]), i - m0)]
            }
            Multiplicity::Triple => vec![((x[0] + x[1] + x[2]) / 3.0, i)],
        }
    }

    /// Σ f(x_a) M_a.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> SymTensor2 {
        let mut r = SymTensor2::zero();
        for a in 0..3 {
            r += self.projector(a) * f(self.eigenvalues[a]);
        }
        r
    }

    /// Σ v_a M_a for per-eigenvalue values v.
    pub fn map_values(&self, v: &[f64; 3]) -> SymTensor2 {
        let mut r = SymTensor2::zero();
        for a in 0..3 {
            r += self.projector(a) * v[a];
        }
        r
    }

    pub fn reconstruct(&self) -> SymTensor2 {
        self.map(|x| x)
    }
}

fn classify(x: &[f64; 3]) -> Multiplicity {
    let scale = x.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let tol = MULTIPLICITY_TOL * scale;
    let upper = x[0] - x[1] <= tol;
    let lower = x[1] - x[2] <= tol;
    match (upper, lower) {
        (true, true) => Multiplicity::Triple,
        (true, false) => Multiplicity::DoubleUpper,
        (false, true) => Multiplicity::DoubleLower,
        (false, false) => Multiplicity::Distinct,
    }
}

/// Roots of x³ − 3x − 2r, descending, for |r| ≤ 1.
fn normalized_roots(r: f64) -> [f64; 3] {
    let phi = r.clamp(-1.0, 1.0).acos() / 3.0;
    let mut x = [
        2.0 * phi.cos(),
        0.0,
        2.0 * (phi + 2.0 * std::f64::consts::FRAC_PI_3).cos(),
    ];
    x[1] = -x[0] - x[2];
    for xi in x.iter_mut() {
        let p = *xi * *xi * *xi - 3.0 * *xi - 2.0 * r;
        let dp = 3.0 * *xi * *xi - 3.0;
        if dp.abs() > 1e-8 {
            let cand = *xi - p / dp;
            let pc = cand * cand * cand - 3.0 * cand - 2.0 * r;
            if pc.abs() < p.abs() {
                *xi = cand;
            }
        }
    }
    x
}

/// Unit null vector of the rank-two matrix `m` (rows crossed pairwise).
fn null_vector(m: &[[f64; 3]; 3]) -> [f64; 3] {
    let cands = [cross(&m[0], &m[1]), cross(&m[0], &m[2]), cross(&m[1], &m[2])];
    let best = cands
        .iter()
        .max_by(|a, b| dot(a, a).total_cmp(&dot(b, b)))
        .copied()
        .unwrap_or([1.0, 0.0, 0.0]);
    normalize(&best)
}

/// Eigen-decomposition of a symmetric tensor by the trigonometric form of
/// Cardano's formula followed by vector recovery in a deflated 2×2 block.
pub fn spectral_decompose(a: &SymTensor2, spd_required: bool) -> Result<Spectral3> {
    if !a.is_finite() {
        return Err(Error::domain("spectral decomposition of a non-finite tensor", f64::NAN));
    }
    let s = a.max_abs();
    let spec = if s == 0.0 {
        Spectral3 {
            eigenvalues: [0.0; 3],
            vectors: [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]],
            pattern: Multiplicity::Triple,
        }
    } else {
        let b = *a / s;
        let q = b.trace() / 3.0;
        let dev = b - SymTensor2::identity() * q;
        let p = (dev.dot(&dev) / 6.0).sqrt();
        if p == 0.0 {
            let x = [a[0], a[1], a[2]];
            Spectral3 {
                eigenvalues: x,
                vectors: [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]],
                pattern: Multiplicity::Triple,
            }
        } else {
            let c = dev / p;
            let roots = normalized_roots(0.5 * c.det());
            let iso = if roots[0] - roots[1] >= roots[1] - roots[2] { 0 } else { 2 };
            let mut shifted = c.to_matrix();
            for (k, row) in shifted.iter_mut().enumerate() {
                row[k] -= roots[iso];
            }
            let n = null_vector(&shifted);

            let axis = (0..3).min_by(|&i, &j| n[i].abs().total_cmp(&n[j].abs())).unwrap_or(0);
            let mut e = [0.0; 3];
            e[axis] = 1.0;
            let u = normalize(&cross(&n, &e));
            let v = cross(&n, &u);
            let cm = c.to_matrix();
            let cu = super::mat3::apply(&cm, &u);
            let cv = super::mat3::apply(&cm, &v);
            let (a11, a12, a22) = (dot(&u, &cu), dot(&u, &cv), dot(&v, &cv));
            let theta = 0.5 * (2.0 * a12).atan2(a11 - a22);
            let (st, ct) = theta.sin_cos();
            let w1 = [ct * u[0] + st * v[0], ct * u[1] + st * v[1], ct * u[2] + st * v[2]];
            let w2 = [-st * u[0] + ct * v[0], -st * u[1] + ct * v[1], -st * u[2] + ct * v[2]];

            let rayleigh = |w: &[f64; 3]| s * (q + p * dot(w, &super::mat3::apply(&cm, w)));
            let mut pairs = [(rayleigh(&n), n), (rayleigh(&w1), w1), (rayleigh(&w2), w2)];
            pairs.sort_by(|x, y| y.0.total_cmp(&x.0));
            let eigenvalues = [pairs[0].0, pairs[1].0, pairs[2].0];
            Spectral3 {
                eigenvalues,
                vectors: [pairs[0].1, pairs[1].1, pairs[2].1],
                pattern: classify(&eigenvalues),
            }
        }
    };
    if spd_required && spec.eigenvalues[2] <= 0.0 {
        return Err(Error::NotSpd { min_eigenvalue: spec.eigenvalues[2] });
    }
    Ok(spec)
}
