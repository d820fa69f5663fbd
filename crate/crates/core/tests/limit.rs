mod common;

use common::{c, rel};
use proptest::prelude::*;
use std::f64::consts::PI;
use whitkern_core::limit::*;
use whitkern_core::params::make_parameters;
use whitkern_core::specfun::{bessel, BesselKind};
use whitkern_core::{AccuracyPolicy, BlockTag, Complex64};

fn pol() -> AccuracyPolicy {
    AccuracyPolicy::default()
}

fn references() -> [(Complex64, Complex64); 2] {
    [(c(0.55, 0.0), c(0.35, 0.0)), (c(0.5, 0.3), c(0.5, -0.3))]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(60))]

    #[test]
    fn block_symmetries(p in common::any_params(), xi in 0.05f64..8.0, eta in 0.05f64..8.0) {
        prop_assume!(p.mu().norm() > 0.02);
        let k = LimitKernel::unchecked(p.z(), p.z_prime(), pol()).unwrap();
        for tag in [BlockTag::PP, BlockTag::MM] {
            let (a, b) = (k.block(tag, xi, eta).unwrap(), k.block(tag, eta, xi).unwrap());
            prop_assert!((a - b).abs() <= 1e-9 * a.abs().max(b.abs()));
        }
        prop_assert_eq!(k.block(BlockTag::MP, xi, eta).unwrap(), -k.block(BlockTag::PM, eta, xi).unwrap());
        let k1 = LimitKernel::unchecked(p.z() + 1.0, p.z_prime() + 1.0, pol()).unwrap();
        for tag in BlockTag::ALL {
            let sign = if tag.row == tag.col { 1.0 } else { -1.0 };
            let (a, b) = (k.block(tag, xi, eta).unwrap(), k1.block(tag, xi, eta).unwrap());
            prop_assert!((a - sign * b).abs() <= 1e-10 * a.abs().max(1e-300), "{} {a} {b}", tag.name());
        }
        let (d0, d1) = (macdonald_const(p.a(), p.mu()), macdonald_const(p.a() + 1.0, p.mu()));
        prop_assert!(d0 > 0.0 && (d0 - d1).abs() <= 1e-14);
        prop_assert!((k.macdonald_const() - d0).abs() <= 1e-12);
    }
}

#[test]
fn limit_functions() {
    let k = LimitKernel::unchecked(c(0.6, 0.0), c(0.4, 0.0), pol()).unwrap();
    let b = k.function(LimitFunction::B, 1.0).unwrap();
    assert!(rel(b, bessel(BesselKind::K, c(0.2, 0.0), 2.0, &pol()).unwrap()) < 1e-14);
    for kk in [k, LimitKernel::unchecked(c(0.5, 0.3), c(0.5, -0.3), pol()).unwrap()] {
        for (f, ft) in [(LimitFunction::A, LimitFunction::ATilde), (LimitFunction::B, LimitFunction::BTilde)] {
            let h = 1e-5;
            let fd = 2.0 * (kk.function(f, 2.0 + h).unwrap() - kk.function(f, 2.0 - h).unwrap()) / (2.0 * h);
            assert!(rel(kk.function(ft, 2.0).unwrap(), fd) < 1e-6);
        }
        let k1 = LimitKernel::unchecked(kk.z0() + 1.0, kk.z0_prime() + 1.0, pol()).unwrap();
        for (f, s) in [
            (LimitFunction::A, -1.0),
            (LimitFunction::ATilde, -1.0),
            (LimitFunction::B, 1.0),
            (LimitFunction::BTilde, 1.0),
        ] {
            assert!(rel(k1.function(f, 1.5).unwrap(), s * kk.function(f, 1.5).unwrap()) < 1e-12);
        }
    }
    assert!(LimitKernel::unchecked(c(0.4, 0.0), c(0.4, 0.0), pol()).is_err());
    assert!(b > 0.0);
}

#[test]
fn classical_degenerations() {
    // z0′ = 0 exactly gives the Bessel kernel with ν = 2μ = z0
    let nu = 0.3;
    let k = LimitKernel::unchecked(c(nu, 0.0), c(0.0, 0.0), pol()).unwrap();
    for (x, y) in [(1.0, 2.0), (0.3, 0.3), (4.0, 0.5)] {
        assert!(rel(k.k_pp(x, y).unwrap(), bessel_kernel(nu, x, y, &pol()).unwrap()) < 1e-12);
    }
    // and approaches it as z0′ → 0 from inside the admissible range
    let gaps: Vec<f64> = [1e-2, 1e-4, 1e-6]
        .iter()
        .map(|&e| {
            let k = LimitKernel::unchecked(c(nu + e, 0.0), c(e, 0.0), pol()).unwrap();
            (k.k_pp(1.0, 2.0).unwrap() - bessel_kernel(nu, 1.0, 2.0, &pol()).unwrap()).abs()
        })
        .collect();
    assert!(gaps.windows(2).all(|w| w[1] < 0.1 * w[0]), "{gaps:?}");
    // Macdonald kernel form and the extreme value of its constant
    let (z, zp) = references()[0];
    let k = LimitKernel::unchecked(z, zp, pol()).unwrap();
    let mu = 0.5 * (z - zp);
    let bf = |t: f64| k.b(t).unwrap();
    let (u, v) = (bf(1.0), bf(2.0));
    let want = macdonald_const(0.45, mu) * (u.value * v.tilde - u.tilde * v.value) / (1.0 - 2.0);
    assert!(rel(k.k_mm(1.0, 2.0).unwrap(), want) < 1e-14);
    let peak = macdonald_const(0.5, mu);
    assert!(rel(peak, 4.0 * (PI * mu.re).cos().powi(2) / (PI * PI)) < 1e-14);
    for a0 in [0.3, 0.45, 0.55, 0.8] {
        assert!(macdonald_const(a0, mu) < peak);
    }
}

#[test]
fn scaled_convergence_of_all_blocks() {
    for (z, zp) in references() {
        let base = make_parameters(z, zp).unwrap();
        for (xi, eta) in [(1.0, 2.0), (0.5, 0.5 + 1e-3)] {
            for tag in BlockTag::ALL {
                let rows = scaled_convergence(&base, &[8, 16, 32, 64], tag, xi, eta, pol()).unwrap();
                assert!(worst_ratio(&rows) <= 0.7, "{z} {} {rows:?}", tag.name());
            }
        }
        let gaps: Vec<f64> = [8, 16, 32, 64]
            .iter()
            .map(|&n| coefficient_gap(&LimitParameters::from_base(base, n).unwrap()).unwrap())
            .collect();
        assert!(gaps.windows(2).all(|w| w[1] < w[0]), "{gaps:?}");
        let lp = LimitParameters::from_base(base, 64).unwrap();
        for xi in [0.5, 1.0, 2.0] {
            let r = intermediate(&lp, xi, pol()).unwrap();
            assert!(rel(r.phi_scaled, r.a) < 0.03 && rel(r.psi_scaled, r.b) < 0.03, "{r:?}");
        }
    }
    assert!(LimitParameters::new(c(0.55, 0.0), c(0.35, 0.0), 7).is_err());
    assert!(LimitParameters::new(c(0.55, 0.0), c(0.35, 0.0), 0).is_err());
}

#[test]
fn confluent_degeneration() {
    for xi in [2.0, -3.0] {
        let rows = limit_1f1_to_0f1(&[1e2, 1e3, 1e4], 1.4, xi, &pol()).unwrap();
        assert!(rows.windows(2).all(|w| w[1].abs_error < w[0].abs_error));
    }
    let rows = limit_1f1_to_0f1(&[1e2, 1e3], 1.4, 0.0, &pol()).unwrap();
    assert!(rows.iter().all(|r| r.abs_error == 0.0 && r.kummer == 1.0));
}
