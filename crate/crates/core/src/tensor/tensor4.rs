use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

use nalgebra::SMatrix;

use super::sym2::{slot, SymTensor2, WEIGHTS};
use crate::error::{Error, Result};

type Mat6 = SMatrix<f64, 6, 6>;

/// Fourth-order tensor with both minor symmetries; `0[I][J]` holds A_ijkl with
/// I ↔ (ij), J ↔ (kl) in the storage order of [`SymTensor2`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tensor4(pub [[f64; 6]; 6]);

impl Default for Tensor4 {
    fn default() -> Self {
        Tensor4::zero()
    }
}

impl Tensor4 {
    pub const fn zero() -> Self {
        Tensor4([[0.0; 6]; 6])
    }

    /// Identity on symmetric tensors, ½(δ_ik δ_jl + δ_il δ_jk).
    pub fn identity() -> Self {
        let mut t = Tensor4::zero();
        for s in 0..6 {
            t.0[s][s] = 1.0 / WEIGHTS[s];
        }
        t
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize, k: usize, l: usize) -> f64 {
        self.0[slot(i, j)][slot(k, l)]
    }

    /// A : B (contraction over the trailing index pair).
    pub fn contract_right(&self, b: &SymTensor2) -> SymTensor2 {
        let mut r = [0.0; 6];
        for (i, ri) in r.iter_mut().enumerate() {
            *ri = (0..6).map(|j| self.0[i][j] * WEIGHTS[j] * b.0[j]).sum();
        }
        SymTensor2(r)
    }

    /// B : A (contraction over the leading index pair).
    pub fn contract_left(&self, b: &SymTensor2) -> SymTensor2 {
        let mut r = [0.0; 6];
        for (j, rj) in r.iter_mut().enumerate() {
            *rj = (0..6).map(|i| WEIGHTS[i] * b.0[i] * self.0[i][j]).sum();
        }
        SymTensor2(r)
    }

    /// A : B.
    pub fn compose(&self, b: &Tensor4) -> Tensor4 {
        let mut r = Tensor4::zero();
        for i in 0..6 {
            for k in 0..6 {
                let a = self.0[i][k] * WEIGHTS[k];
                if a != 0.0 {
                    for j in 0..6 {
                        r.0[i][j] += a * b.0[k][j];
                    }
                }
            }
        }
        r
    }

    /// Major transpose, Aᵀ_ijkl = A_klij.
    pub fn transpose(&self) -> Tensor4 {
        let mut r = Tensor4::zero();
        for i in 0..6 {
            for j in 0..6 {
                r.0[i][j] = self.0[j][i];
            }
        }
        r
    }

    /// Full Frobenius norm over all 81 components.
    pub fn norm(&self) -> f64 {
        let mut s = 0.0;
        for i in 0..6 {
            for j in 0..6 {
                s += WEIGHTS[i] * WEIGHTS[j] * self.0[i][j] * self.0[i][j];
            }
        }
        s.sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().flatten().fold(0.0, |m, x| m.max(x.abs()))
    }

    /// Largest deviation from major symmetry.
    pub fn major_asymmetry(&self) -> f64 {
        let mut d: f64 = 0.0;
        for i in 0..6 {
            for j in 0..i {
                d = d.max((self.0[i][j] - self.0[j][i]).abs());
            }
        }
        d
    }

    pub fn is_major_symmetric(&self, tol: f64) -> bool {
        self.major_asymmetry() <= tol * self.max_abs().max(f64::MIN_POSITIVE)
    }

    /// self += s · (a ⊗ b).
    pub fn add_outer(&mut self, s: f64, a: &SymTensor2, b: &SymTensor2) {
        for i in 0..6 {
            let sa = s * a.0[i];
            if sa != 0.0 {
                for j in 0..6 {
                    self.0[i][j] += sa * b.0[j];
                }
            }
        }
    }

    /// Matrix M with M x = A : X for X stored in component form.
    pub(crate) fn weighted_matrix(&self) -> Mat6 {
        Mat6::from_fn(|i, j| self.0[i][j] * WEIGHTS[j])
    }

    fn from_matrix(m: &Mat6) -> Tensor4 {
        let mut t = Tensor4::zero();
        for i in 0..6 {
            for j in 0..6 {
                t.0[i][j] = m[(i, j)];
            }
        }
        t
    }

    /// Solves A : X = B for a second-order X.
    pub fn solve(&self, b: &SymTensor2) -> Result<SymTensor2> {
        let lu = self.weighted_matrix().lu();
        let rhs = nalgebra::Vector6::from_column_slice(&b.0);
        let x = lu.solve(&rhs).ok_or(Error::SingularK)?;
        let out = SymTensor2([x[0], x[1], x[2], x[3], x[4], x[5]]);
        if out.is_finite() {
            Ok(out)
        } else {
            Err(Error::SingularK)
        }
    }

    /// Solves A : X = B for a fourth-order X, factorizing A once.
    pub fn solve4(&self, b: &Tensor4) -> Result<Tensor4> {
        let lu = self.weighted_matrix().lu();
        let mut rhs = Mat6::zeros();
        for i in 0..6 {
            for j in 0..6 {
                rhs[(i, j)] = b.0[i][j];
            }
        }
        let x = lu.solve(&rhs).ok_or(Error::SingularK)?;
        let out = Tensor4::from_matrix(&x);
        if out.0.iter().flatten().all(|v| v.is_finite()) {
            Ok(out)
        } else {
            Err(Error::SingularK)
        }
    }

    /// Inverse on the space of symmetric tensors.
    pub fn inverse(&self) -> Result<Tensor4> {
        self.solve4(&Tensor4::identity())
    }
}

impl Add for Tensor4 {
    type Output = Tensor4;
    fn add(mut self, rhs: Tensor4) -> Tensor4 {
        self += rhs;
        self
    }
}

impl AddAssign for Tensor4 {
    fn add_assign(&mut self, rhs: Tensor4) {
        for i in 0..6 {
            for j in 0..6 {
                self.0[i][j] += rhs.0[i][j];
            }
        }
    }
}

impl Sub for Tensor4 {
    type Output = Tensor4;
    fn sub(mut self, rhs: Tensor4) -> Tensor4 {
        self -= rhs;
        self
    }
}

impl SubAssign for Tensor4 {
    fn sub_assign(&mut self, rhs: Tensor4) {
        for i in 0..6 {
            for j in 0..6 {
                self.0[i][j] -= rhs.0[i][j];
            }
        }
    }
}

impl Neg for Tensor4 {
    type Output = Tensor4;
    fn neg(self) -> Tensor4 {
        self * -1.0
    }
}

impl Mul<f64> for Tensor4 {
    type Output = Tensor4;
    fn mul(mut self, s: f64) -> Tensor4 {
        self.0.iter_mut().flatten().for_each(|x| *x *= s);
        self
    }
}

impl Mul<Tensor4> for f64 {
    type Output = Tensor4;
    fn mul(self, t: Tensor4) -> Tensor4 {
        t * self
    }
}
