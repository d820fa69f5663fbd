#![allow(dead_code)]

use proptest::prelude::*;
use whitkern_core::params::make_parameters;
use whitkern_core::{Complex64, ParameterSet};

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

/// Admissible pairs with |a| < 1/2: conjugate pairs a ± iτ, and real pairs
/// inside (0, 1) or (−1, 0).
pub fn bounded_params() -> impl Strategy<Value = ParameterSet> {
    prop_oneof![
        (-0.45f64..0.45, 0.05f64..1.5).prop_map(|(a, t)| make_parameters(c(a, t), c(a, -t)).unwrap()),
        (0.05f64..0.95, 0.05f64..0.95)
            .prop_filter("distinct and |a| < 1/2", |(u, v)| (u - v).abs() > 0.02 && (u + v) < 0.98)
            .prop_map(|(u, v)| make_parameters(c(u, 0.0), c(v, 0.0)).unwrap()),
        (0.05f64..0.95, 0.05f64..0.95)
            .prop_filter("distinct and |a| < 1/2", |(u, v)| (u - v).abs() > 0.02 && (u + v) > 1.02)
            .prop_map(|(u, v)| make_parameters(c(u - 1.0, 0.0), c(v - 1.0, 0.0)).unwrap()),
    ]
}

/// Any admissible pair, including shifted ones.
pub fn any_params() -> impl Strategy<Value = ParameterSet> {
    prop_oneof![
        (-2.4f64..2.4, 0.05f64..1.5)
            .prop_map(|(a, t)| make_parameters(c(a, t), c(a, -t)).unwrap()),
        (-2i32..3, 0.05f64..0.95, 0.05f64..0.95)
            .prop_filter("distinct", |(_, u, v)| (u - v).abs() > 0.02)
            .prop_map(|(m, u, v)| make_parameters(c(m as f64 + u, 0.0), c(m as f64 + v, 0.0)).unwrap()),
    ]
}

/// Log-uniform x in [lo, hi].
pub fn log_x(lo: f64, hi: f64) -> impl Strategy<Value = f64> {
    (lo.ln()..hi.ln()).prop_map(f64::exp)
}
