use std::ops::{Add, AddAssign, Div, Index, IndexMut, Mul, Neg, Sub, SubAssign};

use serde::{Deserialize, Serialize};

use super::mat3::Mat3;
use super::Tensor4;
use crate::error::{Error, Result};

/// Storage order of the six independent components.
pub const PAIRS: [(usize, usize); 6] = [(0, 0), (1, 1), (2, 2), (0, 1), (1, 2), (0, 2)];

/// Multiplicity of each stored component in a full double contraction.
pub const WEIGHTS: [f64; 6] = [1.0, 1.0, 1.0, 2.0, 2.0, 2.0];

/// Storage slot of the (i, j) component.
pub const fn slot(i: usize, j: usize) -> usize {
    match (i, j) {
        (0, 0) => 0,
        (1, 1) => 1,
        (2, 2) => 2,
        (0, 1) | (1, 0) => 3,
        (1, 2) | (2, 1) => 4,
        _ => 5,
    }
}

/// Symmetric second-order tensor in 3D, stored as (11, 22, 33, 12, 23, 13).
#[derive(Clone, Copy, Debug, PartialEq, Default, Serialize, Deserialize)]
pub struct SymTensor2(pub [f64; 6]);

impl SymTensor2 {
    pub const fn new(c: [f64; 6]) -> Self {
        SymTensor2(c)
    }

    pub const fn zero() -> Self {
        SymTensor2([0.0; 6])
    }

    pub const fn identity() -> Self {
        SymTensor2([1.0, 1.0, 1.0, 0.0, 0.0, 0.0])
    }

    pub const fn diag(a: f64, b: f64, c: f64) -> Self {
        SymTensor2([a, b, c, 0.0, 0.0, 0.0])
    }

    /// Symmetric part of a full matrix.
    pub fn from_matrix(m: &Mat3) -> Self {
        let mut c = [0.0; 6];
        for (s, &(i, j)) in PAIRS.iter().enumerate() {
            c[s] = 0.5 * (m[i][j] + m[j][i]);
        }
        SymTensor2(c)
    }

    pub fn to_matrix(&self) -> Mat3 {
        let mut m = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                m[i][j] = self.0[slot(i, j)];
            }
        }
        m
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.0[slot(i, j)]
    }

    /// n ⊗ n.
    pub fn dyad(n: &[f64; 3]) -> Self {
        let mut c = [0.0; 6];
        for (s, &(i, j)) in PAIRS.iter().enumerate() {
            c[s] = n[i] * n[j];
        }
        SymTensor2(c)
    }

    /// ½(a ⊗ b + b ⊗ a).
    pub fn sym_dyad(a: &[f64; 3], b: &[f64; 3]) -> Self {
        let mut c = [0.0; 6];
        for (s, &(i, j)) in PAIRS.iter().enumerate() {
            c[s] = 0.5 * (a[i] * b[j] + a[j] * b[i]);
        }
        SymTensor2(c)
    }

    pub fn trace(&self) -> f64 {
        self.0[0] + self.0[1] + self.0[2]
    }

    /// Double contraction A : B.
    pub fn dot(&self, other: &SymTensor2) -> f64 {
        (0..6).map(|s| WEIGHTS[s] * self.0[s] * other.0[s]).sum()
    }

    /// Frobenius norm.
    pub fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|x| x.is_finite())
    }

    pub fn det(&self) -> f64 {
        let [a, b, c, d, e, f] = self.0;
        a * (b * c - e * e) - d * (d * c - e * f) + f * (d * e - b * f)
    }

    pub fn inverse(&self) -> Result<SymTensor2> {
        let [a, b, c, d, e, f] = self.0;
        let det = self.det();
        let scale = self.max_abs().powi(3);
        if det == 0.0 || !det.is_finite() || det.abs() <= 1e-300 * scale.max(1e-300) {
            return Err(Error::domain("inverse of a singular tensor", det));
        }
        let inv = [
            b * c - e * e,
            a * c - f * f,
            a * b - d * d,
            f * e - d * c,
            d * f - a * e,
            d * e - b * f,
        ];
        Ok(SymTensor2(inv) / det)
    }

    /// A · B as a full matrix.
    pub fn mat_mul(&self, other: &SymTensor2) -> Mat3 {
        let a = self.to_matrix();
        let b = other.to_matrix();
        super::mat3::mul(&a, &b)
    }

    /// A · A.
    pub fn square(&self) -> SymTensor2 {
        SymTensor2::from_matrix(&self.mat_mul(self))
    }

    /// F · A · Fᵀ.
    pub fn push_forward(&self, f: &Mat3) -> SymTensor2 {
        let a = self.to_matrix();
        let fa = super::mat3::mul(f, &a);
        SymTensor2::from_matrix(&super::mat3::mul(&fa, &super::mat3::transpose(f)))
    }

    /// Fᵀ · A · F.
    pub fn pull_back(&self, f: &Mat3) -> SymTensor2 {
        self.push_forward(&super::mat3::transpose(f))
    }

    /// Deviatoric part.
    pub fn deviator(&self) -> SymTensor2 {
        *self - SymTensor2::identity() * (self.trace() / 3.0)
    }

    /// A ⊗ B.
    pub fn outer(&self, other: &SymTensor2) -> Tensor4 {
        let mut t = Tensor4::zero();
        for i in 0..6 {
            for j in 0..6 {
                t.0[i][j] = self.0[i] * other.0[j];
            }
        }
        t
    }

    /// A ⊙ B with components ½(A_ik B_jl + A_il B_jk), symmetrized over (ij) so
    /// that minor symmetry holds for A ≠ B; for A = B no symmetrization is needed.
    pub fn odot(&self, other: &SymTensor2) -> Tensor4 {
        let a = self.to_matrix();
        let b = other.to_matrix();
        let mut t = Tensor4::zero();
        for (p, &(i, j)) in PAIRS.iter().enumerate() {
            for (q, &(k, l)) in PAIRS.iter().enumerate() {
                t.0[p][q] = 0.25
                    * (a[i][k] * b[j][l] + a[i][l] * b[j][k] + b[i][k] * a[j][l] + b[i][l] * a[j][k]);
            }
        }
        t
    }
}

impl Index<usize> for SymTensor2 {
    type Output = f64;
    fn index(&self, s: usize) -> &f64 {
        &self.0[s]
    }
}

impl IndexMut<usize> for SymTensor2 {
    fn index_mut(&mut self, s: usize) -> &mut f64 {
        &mut self.0[s]
    }
}

impl Add for SymTensor2 {
    type Output = SymTensor2;
    fn add(mut self, rhs: SymTensor2) -> SymTensor2 {
        self += rhs;
        self
    }
}

impl AddAssign for SymTensor2 {
    fn add_assign(&mut self, rhs: SymTensor2) {
        for s in 0..6 {
            self.0[s] += rhs.0[s];
        }
    }
}

impl Sub for SymTensor2 {
    type Output = SymTensor2;
    fn sub(mut self, rhs: SymTensor2) -> SymTensor2 {
        self -= rhs;
        self
    }
}

impl SubAssign for SymTensor2 {
    fn sub_assign(&mut self, rhs: SymTensor2) {
        for s in 0..6 {
            self.0[s] -= rhs.0[s];
        }
    }
}

impl Neg for SymTensor2 {
    type Output = SymTensor2;
    fn neg(self) -> SymTensor2 {
        self * -1.0
    }
}

impl Mul<f64> for SymTensor2 {
    type Output = SymTensor2;
    fn mul(mut self, s: f64) -> SymTensor2 {
        self.0.iter_mut().for_each(|x| *x *= s);
        self
    }
}

impl Mul<SymTensor2> for f64 {
    type Output = SymTensor2;
    fn mul(self, t: SymTensor2) -> SymTensor2 {
        t * self
    }
}

impl Div<f64> for SymTensor2 {
    type Output = SymTensor2;
    fn div(self, s: f64) -> SymTensor2 {
        self * (1.0 / s)
    }
}
