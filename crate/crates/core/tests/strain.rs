mod common;

use common::*;
use viscokit::strain::{ElasticKit, ScaleFunction, StrainKit};
use viscokit::tensor::{SymTensor2, Tensor4};

fn families() -> Vec<ScaleFunction> {
    vec![
        ScaleFunction::SethHill { m: 2.0 },
        ScaleFunction::SethHill { m: -2.0 },
        ScaleFunction::SethHill { m: 0.5 },
        ScaleFunction::SethHill { m: -1.3 },
        ScaleFunction::Hencky,
        ScaleFunction::CurnierRakotomanana { m: 1.0, n: 1.0 },
        ScaleFunction::CurnierRakotomanana { m: 0.08, n: 1.34 },
        ScaleFunction::CurnierZysset { m: 0.5 },
        ScaleFunction::CurnierZysset { m: -1.2 },
        ScaleFunction::DarijaniNaghdabadi { m: 1.0, n: 1.0 },
        ScaleFunction::DarijaniNaghdabadi { m: 0.6, n: 2.0 },
    ]
}

fn coercive_families() -> Vec<ScaleFunction> {
    families().into_iter().filter(|f| f.is_coercive()).collect()
}

/// Random points plus exactly and nearly repeated spectra.
fn sample_points(seed: u64) -> Vec<SymTensor2> {
    let mut r = rng(seed);
    let mut pts: Vec<_> = (0..20).map(|_| random_spd(&mut r, 0.35)).collect();
    pts.push(rotated_diag(&mut r, [2.0, 0.7, 0.7]));
    pts.push(rotated_diag(&mut r, [1.3, 1.3, 0.6]));
    pts.push(rotated_diag(&mut r, [1.2, 1.2 * (1.0 + 3e-7), 0.6]));
    pts.push(rotated_diag(&mut r, [1.5, 1.5 * (1.0 + 2e-5), 1.5 * (1.0 - 1e-5)]));
    pts.push(rotated_diag(&mut r, [0.9, 0.9, 0.9]));
    pts
}

#[test]
fn normality_and_regularity() {
    for sf in families() {
        let v = sf.eval(1.0).unwrap();
        assert!(v.e.abs() < 1e-14, "{sf:?}");
        assert!((v.d1 - 1.0).abs() < 1e-12, "{sf:?}");
        for k in 0..=120 {
            let l = 10f64.powf(-3.0 + 6.0 * k as f64 / 120.0);
            assert!(sf.eval(l).unwrap().d1 > 0.0, "{sf:?} at {l}");
        }
    }
}

#[test]
fn round_trip_of_inverse_scale() {
    for sf in families() {
        for k in 0..=50 {
            let l = 0.1 * 100f64.powf(k as f64 / 50.0);
            let w = sf.eval(l).unwrap().e;
            let back = sf.inverse(w).unwrap();
            assert!((back - l).abs() <= 1e-10 * l, "{sf:?} at {l}: {back}");
            assert!((sf.eval(back).unwrap().e - w).abs() <= 1e-12 * w.abs().max(1.0));
        }
    }
}

#[test]
fn tension_compression_symmetry() {
    let symmetric = [
        ScaleFunction::Hencky,
        ScaleFunction::DarijaniNaghdabadi { m: 1.3, n: 1.3 },
        ScaleFunction::CurnierRakotomanana { m: 0.7, n: 0.7 },
    ];
    for sf in symmetric {
        for k in 1..40 {
            let l = 0.2 + 0.1 * k as f64;
            let (a, b) = (sf.eval(l).unwrap().e, sf.eval(1.0 / l).unwrap().e);
            assert!((a + b).abs() < 1e-12 * a.abs().max(1.0), "{sf:?}");
        }
    }
    let gl = ScaleFunction::GREEN_LAGRANGE;
    assert!((gl.eval(2.0).unwrap().e + gl.eval(0.5).unwrap().e).abs() > 0.1);
}

#[test]
fn q_matches_finite_differences() {
    for sf in families() {
        for c in sample_points(10) {
            let kit = StrainKit::new(&c, sf).unwrap();
            let fd = fd_jacobian(|x| StrainKit::new(x, sf).unwrap().strain, &c, 1e-4) * 2.0;
            let err = rel_err4(&kit.q, &fd);
            assert!(err < 1e-6, "{sf:?}: {err:e}");
        }
    }
}

#[test]
fn curvature_matches_finite_differences() {
    for sf in families() {
        for c in sample_points(11) {
            let kit = StrainKit::new(&c, sf).unwrap();
            let fd = fd_jacobian4(|x| StrainKit::new(x, sf).unwrap().q, &c, 1e-4) * 2.0;
            let l = kit.curvature();
            if fd.norm() < 1e-10 {
                assert!(l.norm() < 1e-10);
                continue;
            }
            let err = rel_err6(&l, &fd);
            assert!(err < 1e-5, "{sf:?}: {err:e}");
            assert!(l.pair_asymmetry() < 1e-12 * l.max_abs().max(1.0));
            let t = SymTensor2::new([0.3, -0.2, 0.5, 0.1, 0.25, -0.15]);
            let direct = l.contract_left(&t);
            assert!(rel_err4(&kit.contract_curvature(&t), &direct) < 1e-13);
        }
    }
}

#[test]
fn elastic_kit_matches_finite_differences() {
    let mut r = rng(12);
    for sf in coercive_families() {
        let mut pts: Vec<_> = (0..20).map(|_| random_sym(&mut r, 0.3)).collect();
        pts.push(rotated_diag(&mut r, [0.2, -0.1, -0.1]));
        pts.push(rotated_diag(&mut r, [0.15, 0.15 + 1e-9, -0.3]));
        pts.push(SymTensor2::zero());
        for ee in pts {
            let kit = ElasticKit::from_strain(&ee, sf).unwrap();
            let fd = fd_jacobian(|x| ElasticKit::from_strain(x, sf).unwrap().ce, &ee, 1e-4) * 0.5;
            let e1 = rel_err4(&kit.q_inv, &fd);
            assert!(e1 < 1e-6, "{sf:?}: {e1:e}");
            let fd2 = fd_jacobian4(|x| ElasticKit::from_strain(x, sf).unwrap().q_inv, &ee, 1e-4) * 0.5;
            let e2 = rel_err6(&kit.curvature(), &fd2);
            assert!(e2 < 1e-5, "{sf:?}: {e2:e}");
            assert!((kit.q.compose(&kit.q_inv) - Tensor4::identity()).max_abs() < 1e-10);
            for a in 0..3 {
                assert!((sf.eval(kit.stretches[a]).unwrap().e - kit.strains[a]).abs() < 1e-12);
            }
        }
    }
}

#[test]
fn hencky_curvature_diagonal_coefficient() {
    // For a diagonal elastic strain the (aa, aa, aa) component of 𝓚 is
    // g_a = ½(1/E′² − λE″/E′³), which for Hencky equals λ².
    let ee = SymTensor2::diag(0.1, -0.05, 0.0);
    let kit = ElasticKit::from_strain(&ee, ScaleFunction::Hencky).unwrap();
    let k = kit.curvature();
    for (a, w) in [0.1_f64, -0.05, 0.0].iter().enumerate() {
        let l = w.exp();
        let v = ScaleFunction::Hencky.eval(l).unwrap();
        let g = 0.5 * (1.0 / (v.d1 * v.d1) - l * v.d2 / v.d1.powi(3));
        assert!((g - l * l).abs() < 1e-14);
        assert!((k.get(a, a, a, a, a, a) - g).abs() < 1e-13);
    }
    let fd = fd_jacobian4(
        |x| ElasticKit::from_strain(x, ScaleFunction::Hencky).unwrap().q_inv,
        &ee,
        1e-4,
    ) * 0.5;
    assert!(rel_err6(&k, &fd) < 1e-6);
}
