//! First and second derivatives of isotropic tensor functions
//! Y(X) = Σ f(x_a) N_a ⊗ N_a through divided differences of f.
//!
//! With P_ab = sym(N_a ⊗ N_b):
//!   ∂Y/∂X   = Σ_ab f[x_a, x_b] P_ab ⊗ P_ab
//!   ∂²Y/∂X² = Σ_abc f[x_a, x_c, x_b] (P_ab ⊗ P_ac ⊗ P_cb + P_ab ⊗ P_cb ⊗ P_ac)
//! Coincident arguments in the divided differences fall back to Taylor limits.

use crate::tensor::{Spectral3, SymTensor2, Tensor4, Tensor6};

/// Gap (relative to the argument scale) below which a first divided difference
/// is replaced by its derivative limit.
pub const FIRST_DIFFERENCE_TOL: f64 = 1e-6;
/// Gap below which second divided differences use limit forms.
pub const SECOND_DIFFERENCE_TOL: f64 = 1e-4;

/// f, f′, f″ at the three eigenvalues.
#[derive(Clone, Copy, Debug)]
pub struct Samples {
    pub x: [f64; 3],
    pub f: [f64; 3],
    pub d1: [f64; 3],
    pub d2: [f64; 3],
}

/// Divided differences of f on the eigenvalues together with the frame.
#[derive(Clone, Debug)]
pub struct SpectralDerivative {
    pub first: [[f64; 3]; 3],
    pub second: [[[f64; 3]; 3]; 3],
    pab: [[SymTensor2; 3]; 3],
}

fn first_difference(s: &Samples, a: usize, b: usize, scale: f64) -> f64 {
    let (xa, xb) = (s.x[a], s.x[b]);
    if a == b || (xa - xb).abs() <= FIRST_DIFFERENCE_TOL * scale {
        0.5 * (s.d1[a] + s.d1[b])
    } else {
        (s.f[a] - s.f[b]) / (xa - xb)
    }
}

/// d/dx of g(x) = f[x, c] at sample `a`, with c far from x_a.
fn slope_against(s: &Samples, a: usize, c: usize) -> f64 {
    let dx = s.x[a] - s.x[c];
    (s.d1[a] * dx - (s.f[a] - s.f[c])) / (dx * dx)
}

fn second_difference(s: &Samples, i: usize, j: usize, k: usize, scale: f64) -> f64 {
    let mut idx = [i, j, k];
    idx.sort_by(|&p, &q| s.x[q].total_cmp(&s.x[p]));
    let [a, b, c] = idx;
    let tol = SECOND_DIFFERENCE_TOL * scale;
    let (gab, gbc) = (s.x[a] - s.x[b], s.x[b] - s.x[c]);
    if gab + gbc <= tol {
        (s.d2[a] + s.d2[b] + s.d2[c]) / 6.0
    } else if gab <= tol {
        0.5 * (slope_against(s, a, c) + slope_against(s, b, c))
    } else if gbc <= tol {
        0.5 * (slope_against(s, b, a) + slope_against(s, c, a))
    } else {
        (first_difference(s, a, b, scale) - first_difference(s, b, c, scale)) / (s.x[a] - s.x[c])
    }
}

impl SpectralDerivative {
    /// `scale` sets the magnitude against which eigenvalue gaps are judged.
    pub fn new(spec: &Spectral3, samples: &Samples, scale: f64) -> Self {
        let mut first = [[0.0; 3]; 3];
        let mut second = [[[0.0; 3]; 3]; 3];
        for a in 0..3 {
            for b in 0..3 {
                first[a][b] = first_difference(samples, a, b, scale);
                for c in 0..3 {
                    second[a][b][c] = second_difference(samples, a, b, c, scale);
                }
            }
        }
        let v = &spec.vectors;
        let mut pab = [[SymTensor2::zero(); 3]; 3];
        for a in 0..3 {
            for b in 0..3 {
                pab[a][b] = SymTensor2::sym_dyad(&v[a], &v[b]);
            }
        }
        SpectralDerivative { first, second, pab }
    }

    #[inline]
    pub fn p(&self, a: usize, b: usize) -> &SymTensor2 {
        &self.pab[a][b]
    }

    /// s · ∂Y/∂X.
    pub fn first_tensor(&self, s: f64) -> Tensor4 {
        let mut t = Tensor4::zero();
        for a in 0..3 {
            for b in 0..3 {
                let p = &self.pab[a][b];
                t.add_outer(s * self.first[a][b], p, p);
            }
        }
        t
    }

    /// s · ∂Y/∂X with f[a,b] replaced by 1/f[a,b] (the inverse map on Sym).
    pub fn first_tensor_inverse(&self, s: f64) -> Tensor4 {
        let mut t = Tensor4::zero();
        for a in 0..3 {
            for b in 0..3 {
                let p = &self.pab[a][b];
                t.add_outer(s / self.first[a][b], p, p);
            }
        }
        t
    }

    /// s · ∂²Y/∂X².
    pub fn second_tensor(&self, s: f64) -> Tensor6 {
        let mut t = Tensor6::zero();
        for a in 0..3 {
            for b in 0..3 {
                for c in 0..3 {
                    let d = s * self.second[a][c][b];
                    t.add_triple(d, &self.pab[a][b], &self.pab[a][c], &self.pab[c][b]);
                    t.add_triple(d, &self.pab[a][b], &self.pab[c][b], &self.pab[a][c]);
                }
            }
        }
        t
    }

    /// A : (s · ∂²Y/∂X²), contracting the output index pair.
    pub fn second_contract_left(&self, s: f64, a_t: &SymTensor2) -> Tensor4 {
        let mut t = Tensor4::zero();
        for a in 0..3 {
            for b in 0..3 {
                let w = s * a_t.dot(&self.pab[a][b]);
                if w == 0.0 {
                    continue;
                }
                for c in 0..3 {
                    let d = w * self.second[a][c][b];
                    t.add_outer(d, &self.pab[a][c], &self.pab[c][b]);
                    t.add_outer(d, &self.pab[c][b], &self.pab[a][c]);
                }
            }
        }
        t
    }
}
