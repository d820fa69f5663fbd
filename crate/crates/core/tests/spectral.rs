mod common;

use common::{c, log_x, rel};
use proptest::prelude::*;
use std::f64::consts::PI;
use whitkern_core::lab::QuadratureGrid;
use whitkern_core::params::make_parameters;
use whitkern_core::spectral::*;
use whitkern_core::{AccuracyPolicy, KernelMachine, ParameterSet};

fn pol() -> AccuracyPolicy {
    AccuracyPolicy::default()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(150))]

    #[test]
    fn sturm_liouville_eigenfunctions(a in -0.45f64..0.45, m in 0.05f64..4.0, x in log_x(0.05, 20.0)) {
        let r = sl_residual(a, m, x, &pol()).unwrap();
        prop_assert!(r <= 1e-6, "residual {r:e}");
    }

    #[test]
    fn eigenvalue_forms_agree(p in common::bounded_params(), m in 0.0f64..6.0) {
        let lab = ab_eigenvalue(&p, m);
        let lk = kpp_eigenvalue(&p, m);
        prop_assert!((lk - lab / (1.0 + lab)).abs() <= 1e-14 * lk.max(1e-300));
        prop_assert!(lk > 0.0 && lk < 1.0);
        prop_assert!(ab_eigenvalue(&p, m + 0.5) < lab && kpp_eigenvalue(&p, m + 0.5) < lk);
    }
}

#[test]
fn eigenfunction_basics() {
    for x in [0.5, 2.0, 8.0] {
        let f = f_am(0.0, 0.8, x, &pol()).unwrap();
        assert!(rel(f, f_0m_bessel(0.8, x, &pol()).unwrap().value) < 1e-8);
        assert_eq!(f, f_am(0.0, -0.8, x, &pol()).unwrap());
    }
    for (a, m) in [(0.2, 0.7), (-0.3, 1.2)] {
        let x: f64 = 200.0;
        let lead = x.powf(a - 1.0) * (-0.5 * x).exp();
        assert!(rel(f_am(a, m, x, &pol()).unwrap(), lead) < 0.05);
    }
    assert!(sl_residual_bessel(1.0, 3.0, &pol()).unwrap() <= 1e-6);
    assert!(sl_residual(0.2, 0.7, 1.0, &pol()).unwrap() <= 1e-6);
    let machine = KernelMachine::new(ParameterSet::from_a_mu(0.2, c(0.0, 0.3)).unwrap(), pol()).unwrap();
    assert!(kernel_commutation(&machine, 1.2, 0.8, 1e-3).unwrap() < 1e-5);
}

#[test]
fn transform_identities() {
    let p = ParameterSet::from_a_mu(0.2, c(0.0, 0.1)).unwrap();
    let mut errs = Vec::new();
    for per in [2, 4, 8] {
        let g = QuadratureGrid::log_panels(1e-8, 40.0, per).unwrap();
        let r = transform_identity(Transform::A, &p, 0.6, &[0.5, 1.0, 4.0], &g, &pol()).unwrap();
        errs.push(r.max_rel());
    }
    assert!(errs.windows(2).all(|w| w[1] < w[0] || w[1] < 1e-12), "{errs:?}");
    let g = QuadratureGrid::lab_level(2).unwrap();
    for which in [Transform::A, Transform::B] {
        let r = transform_identity(which, &p, 0.6, &[0.5, 1.0, 4.0], &g, &pol()).unwrap();
        assert!(r.max_rel() <= 1e-3, "{which:?} {}", r.max_rel());
    }
    let p0 = ParameterSet::from_a_mu(0.0, c(0.0, 0.25)).unwrap();
    for m in [0.3, 0.6, 1.2] {
        let want = p0.sigma() / (PI * m).cosh();
        assert!(rel(transform_eigenvalue(Transform::A, &p0, m).unwrap(), want) < 1e-12);
        assert!(gamma_pair(0.3, m).unwrap() > 0.0);
    }
    let t = 0.3;
    let p = ParameterSet::from_a_mu(0.0, c(0.0, t)).unwrap();
    assert!(rel(ab_eigenvalue(&p, 0.0), (PI * t).sinh().powi(2)) < 1e-14);
    assert!(rel(ab_eigenvalue(&p, 0.0).sqrt(), whitkern_core::lab::norm_bound(&p)) < 1e-14);
}

#[test]
fn three_routes_to_kpp_spectrum() {
    let p = make_parameters(c(0.3, 0.4), c(0.3, -0.4)).unwrap();
    let g = QuadratureGrid::lab_level(2).unwrap();
    let rows = kpp_eigen_three_ways(&p, &[0.3, 0.6, 1.2], &g, Bump::new(0.5, 5.0), &pol()).unwrap();
    for r in rows {
        assert!((r.closed - r.resolvent).abs() <= 1e-14);
        assert!(rel(r.rayleigh, r.closed) <= 1e-3, "{r:?}");
    }
}

#[test]
fn plancherel() {
    let f = Bump::new(1.0, 2.0);
    for a in [0.0, 0.2] {
        let r = plancherel_reconstruct(a, &f, &f, &pol()).unwrap();
        assert!(r.rel_error <= 1e-3 && !r.cutoff_warning, "{r:?}");
    }
    let far = Bump::new(12.0, 14.0);
    let r = plancherel_reconstruct(0.0, &f, &far, &pol()).unwrap();
    assert_eq!(r.direct, 0.0);
    assert!(r.rel_error <= 1e-3, "{r:?}");
    assert!(plancherel_density(0.3, 0.5).unwrap() > 0.0);
}
