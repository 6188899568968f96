#![allow(dead_code)]
//! Finite-difference oracles and random fixtures shared by the integration tests.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use viscokit::tensor::{SymTensor2, Tensor4, Tensor6, PAIRS};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// C = FᵀF with F = I + amp·U(−1, 1).
pub fn random_spd(rng: &mut impl Rng, amp: f64) -> SymTensor2 {
    let mut f = [[0.0; 3]; 3];
    for (i, row) in f.iter_mut().enumerate() {
        for (j, v) in row.iter_mut().enumerate() {
            *v = if i == j { 1.0 } else { 0.0 } + amp * rng.gen_range(-1.0..1.0);
        }
    }
    let mut c = [0.0; 6];
    for (s, &(i, j)) in PAIRS.iter().enumerate() {
        c[s] = (0..3).map(|k| f[k][i] * f[k][j]).sum();
    }
    SymTensor2(c)
}

pub fn random_sym(rng: &mut impl Rng, amp: f64) -> SymTensor2 {
    let mut c = [0.0; 6];
    for v in c.iter_mut() {
        *v = amp * rng.gen_range(-1.0..1.0);
    }
    SymTensor2(c)
}

/// Q diag(x) Qᵀ with a random rotation Q.
pub fn rotated_diag(rng: &mut impl Rng, x: [f64; 3]) -> SymTensor2 {
    let axis = [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
    let r = viscokit::tensor::mat3::rotation(&axis, rng.gen_range(0.0..3.0));
    SymTensor2::diag(x[0], x[1], x[2]).push_forward(&r)
}

fn unit(slot: usize) -> SymTensor2 {
    let mut e = SymTensor2::zero();
    e.0[slot] = 1.0;
    e
}

/// Derivative of a tensor-valued map with respect to a symmetric argument:
/// `out[I][J] = ∂Y_I/∂X_J` (for off-diagonal J the tensor derivative, i.e.
/// half the derivative with respect to the stored component). Central
/// differences with one Richardson extrapolation.
pub fn fd_jacobian<F>(f: F, x: &SymTensor2, h: f64) -> Tensor4
where
    F: Fn(&SymTensor2) -> SymTensor2,
{
    let central = |j: usize, h: f64| {
        let e = unit(j) * h;
        let d = (f(&(*x + e)) - f(&(*x - e))) / (2.0 * h);
        if j < 3 {
            d
        } else {
            d * 0.5
        }
    };
    let mut t = Tensor4::zero();
    for j in 0..6 {
        let d = (central(j, 0.5 * h) * 4.0 - central(j, h)) / 3.0;
        for i in 0..6 {
            t.0[i][j] = d.0[i];
        }
    }
    t
}

/// Derivative of a fourth-order-valued map: `out[I][J][K] = ∂A_IJ/∂X_K`.
pub fn fd_jacobian4<F>(f: F, x: &SymTensor2, h: f64) -> Tensor6
where
    F: Fn(&SymTensor2) -> Tensor4,
{
    let central = |k: usize, h: f64| {
        let e = unit(k) * h;
        let d = (f(&(*x + e)) - f(&(*x - e))) * (1.0 / (2.0 * h));
        if k < 3 {
            d
        } else {
            d * 0.5
        }
    };
    let mut t = Tensor6::zero();
    for k in 0..6 {
        let d = (central(k, 0.5 * h) * 4.0 - central(k, h)) * (1.0 / 3.0);
        for i in 0..6 {
            for j in 0..6 {
                t.0[i][j][k] = d.0[i][j];
            }
        }
    }
    t
}

pub fn rel_err2(a: &SymTensor2, b: &SymTensor2) -> f64 {
    (*a - *b).norm() / b.norm().max(1e-300)
}

pub fn rel_err4(a: &Tensor4, b: &Tensor4) -> f64 {
    (*a - *b).norm() / b.norm().max(1e-300)
}

pub fn rel_err6(a: &Tensor6, b: &Tensor6) -> f64 {
    (a - b).norm() / b.norm().max(1e-300)
}
