mod common;

use common::{c, rel};
use proptest::prelude::*;
use std::f64::consts::PI;
use whitkern_core::params::make_parameters;
use whitkern_core::tail::*;
use whitkern_core::{AccuracyPolicy, BlockTag, KernelMachine};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(20))]

    #[test]
    fn diagonal_normalization(p in common::any_params()) {
        prop_assume!((p.z() - p.z_prime()).norm() > 1e-6);
        let tk = TailKernel::new(p).unwrap();
        prop_assert!((tk.block(BlockTag::PP, 0.0) - 1.0).abs() <= 1e-12);
        prop_assert!((tk.block(BlockTag::MM, 0.0) - 1.0).abs() <= 1e-12);
        let t = tk.constants();
        prop_assert_eq!(t.rate_b, 0.5 / t.c_density);
        prop_assert!(t.rate_b > 0.0);
        if p.mu().im != 0.0 {
            for k in -40..=40 {
                prop_assert!(tk.f(0.1 * k as f64) > 0.0);
            }
        }
    }
}

#[test]
fn symbol_shape() {
    for (z, zp) in [(c(0.6, 0.0), c(0.4, 0.0)), (c(0.5, 0.3), c(0.5, -0.3))] {
        let p = make_parameters(z, zp).unwrap();
        let tk = TailKernel::new(p).unwrap();
        let f0 = 2.0 * p.sigma_squared_product() / (((z - zp) * PI).cos().re + 1.0);
        assert!(rel(tk.f(0.0), f0) < 1e-14);
        assert!(tk.f(60.0) < 1e-10 * f0);
        assert_eq!(tk.f(1.3), tk.f(-1.3));
        let s = tk.symbol(0.7);
        assert_eq!(s[0][0], s[1][1]);
        assert_eq!(s[1][0], -s[0][1].conj());
        // the trapezoid transform under e^{iuζ}
        let w = 60.0 / tk.constants().rate_b;
        for u in [-3.0, -1.0, 0.0, 0.5, 2.0, 4.0] {
            let tf = tk.transform(BlockTag::PP, u, w, 1 << 14);
            let tg = tk.transform(BlockTag::PM, u, w, 1 << 14);
            assert!((tf.re - tk.f(u)).abs() < 1e-5 && tf.im.abs() < 1e-5, "{z} u={u}");
            assert!((tg - tk.g(u)).norm() < 1e-5, "{z} u={u}");
        }
    }
}

#[test]
fn kernel_approaches_tail_near_origin() {
    for (z, zp) in [(c(0.6, 0.0), c(0.4, 0.0)), (c(0.5, 2.0), c(0.5, -2.0)), (c(0.2, 0.0), c(0.7, 0.0))] {
        let p = make_parameters(z, zp).unwrap();
        let m = KernelMachine::new(p, AccuracyPolicy::default()).unwrap();
        let diag: Vec<(f64, f64)> = [10.0, 20.0, 40.0].iter().map(|&x| (x, x)).collect();
        for tag in BlockTag::ALL {
            let e: Vec<f64> = tail_convergence(&m, tag, &diag).unwrap().iter().map(|r| r.abs_error).collect();
            assert!(monotone_to_floor(&e, 1e-12), "{z} {}: {e:?}", tag.name());
            let off = tail_convergence(&m, tag, &[(11.0, 10.0), (41.0, 40.0)]).unwrap();
            assert!(off[1].abs_error <= off[0].abs_error.max(1e-12), "{z} {}: {off:?}", tag.name());
        }
    }
}

#[test]
fn guards() {
    let p = make_parameters(c(0.6, 0.0), c(0.4, 0.0)).unwrap();
    let m = KernelMachine::new(p, AccuracyPolicy::default()).unwrap();
    assert!(tail_convergence(&m, BlockTag::PP, &[(1e5, 1e5)]).is_err());
    assert!(TailKernel::new(make_parameters(c(0.4, 0.0), c(0.4, 0.0)).unwrap()).is_err());
    assert!(monotone_to_floor(&[1e-3, 1e-14, 2e-14], 1e-12));
    assert!(!monotone_to_floor(&[1e-3, 1e-4, 2e-4], 1e-12));
}
