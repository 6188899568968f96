use std::ops::{AddAssign, Mul, Sub};

use super::sym2::{slot, SymTensor2, WEIGHTS};
use super::Tensor4;

/// Sixth-order tensor with minor symmetry in each index pair; `0[I][J][K]`.
#[derive(Clone, Debug, PartialEq)]
pub struct Tensor6(pub Box<[[[f64; 6]; 6]; 6]>);

impl Default for Tensor6 {
    fn default() -> Self {
        Tensor6::zero()
    }
}

impl Tensor6 {
    pub fn zero() -> Self {
        Tensor6(Box::new([[[0.0; 6]; 6]; 6]))
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize, k: usize, l: usize, m: usize, n: usize) -> f64 {
        self.0[slot(i, j)][slot(k, l)][slot(m, n)]
    }

    /// B : 𝓐, contracting the first index pair.
    pub fn contract_left(&self, b: &SymTensor2) -> Tensor4 {
        let mut r = Tensor4::zero();
        for i in 0..6 {
            let bi = WEIGHTS[i] * b.0[i];
            if bi == 0.0 {
                continue;
            }
            for j in 0..6 {
                for k in 0..6 {
                    r.0[j][k] += bi * self.0[i][j][k];
                }
            }
        }
        r
    }

    /// 𝓐 : B, contracting the last index pair.
    pub fn contract_right(&self, b: &SymTensor2) -> Tensor4 {
        let mut r = Tensor4::zero();
        for i in 0..6 {
            for j in 0..6 {
                r.0[i][j] = (0..6).map(|k| self.0[i][j][k] * WEIGHTS[k] * b.0[k]).sum();
            }
        }
        r
    }

    /// self += s · (a ⊗ b ⊗ c).
    pub fn add_triple(&mut self, s: f64, a: &SymTensor2, b: &SymTensor2, c: &SymTensor2) {
        for i in 0..6 {
            let sa = s * a.0[i];
            if sa == 0.0 {
                continue;
            }
            for j in 0..6 {
                let sab = sa * b.0[j];
                if sab == 0.0 {
                    continue;
                }
                for k in 0..6 {
                    self.0[i][j][k] += sab * c.0[k];
                }
            }
        }
    }

    pub fn norm(&self) -> f64 {
        let mut s = 0.0;
        for i in 0..6 {
            for j in 0..6 {
                for k in 0..6 {
                    let v = self.0[i][j][k];
                    s += WEIGHTS[i] * WEIGHTS[j] * WEIGHTS[k] * v * v;
                }
            }
        }
        s.sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().flatten().flatten().fold(0.0, |m, x| m.max(x.abs()))
    }

    /// Largest deviation from symmetry under exchange of any two index pairs.
    pub fn pair_asymmetry(&self) -> f64 {
        let mut d: f64 = 0.0;
        for i in 0..6 {
            for j in 0..6 {
                for k in 0..6 {
                    let v = self.0[i][j][k];
                    d = d.max((v - self.0[j][i][k]).abs());
                    d = d.max((v - self.0[i][k][j]).abs());
                    d = d.max((v - self.0[k][j][i]).abs());
                }
            }
        }
        d
    }
}

impl AddAssign<&Tensor6> for Tensor6 {
    fn add_assign(&mut self, rhs: &Tensor6) {
        for i in 0..6 {
            for j in 0..6 {
                for k in 0..6 {
                    self.0[i][j][k] += rhs.0[i][j][k];
                }
            }
        }
    }
}

impl Sub<&Tensor6> for &Tensor6 {
    type Output = Tensor6;
    fn sub(self, rhs: &Tensor6) -> Tensor6 {
        let mut r = self.clone();
        for i in 0..6 {
            for j in 0..6 {
                for k in 0..6 {
                    r.0[i][j][k] -= rhs.0[i][j][k];
                }
            }
        }
        r
    }
}

impl Mul<f64> for Tensor6 {
    type Output = Tensor6;
    fn mul(mut self, s: f64) -> Tensor6 {
        self.0.iter_mut().flatten().flatten().for_each(|x| *x *= s);
        self
    }
}
