//! Bessel J_ν, I_ν and the Macdonald function K_ν for complex order.
//!
//! J and I come from the (X/2)^ν ₀F₁ series. K is formed from
//! π(I_{−ν} − I_ν)/(2 sin πν) for small X, and from the integral
//! ∫₀^∞ e^{−X ch t} ch(νt) dt (trapezoid rule) beyond
//! `bessel_k_series_max`. The integral path never touches Whittaker code,
//! so K stays an independent oracle for W_{0,μ}.

#[allow(unused_imports)]
use num_traits::Float;
use core::f64::consts::PI;
use num_complex::Complex64;

use super::gamma::log_gamma;
use super::{check_real, offset_interpolate, AccuracyPolicy, SpecFunError};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BesselKind {
    J,
    I,
    K,
}

/// Value and first two X-derivatives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BesselEval {
    pub value: Complex64,
    pub d1: Complex64,
    pub d2: Complex64,
}

impl BesselEval {
    fn scale(self, s: Complex64) -> Self {
        BesselEval { value: self.value * s, d1: self.d1 * s, d2: self.d2 * s }
    }
}

fn negative_integer(nu: Complex64) -> Option<i64> {
    if nu.im == 0.0 && nu.re < 0.0 && nu.re == nu.re.round() {
        Some(nu.re as i64)
    } else {
        None
    }
}

fn series_ji(kind: BesselKind, nu: Complex64, x: f64, policy: &AccuracyPolicy) -> Result<BesselEval, SpecFunError> {
    if let Some(n) = negative_integer(nu) {
        let e = series_ji(kind, -nu, x, policy)?;
        let sign = if kind == BesselKind::J && n % 2 != 0 { -1.0 } else { 1.0 };
        return Ok(e.scale(Complex64::new(sign, 0.0)));
    }
    let h = 0.5 * x;
    let q = if kind == BesselKind::J { -h * h } else { h * h };
    let l0 = nu * h.ln() - log_gamma(nu + 1.0)?;
    if l0.re > 700.0 {
        return Err(SpecFunError::Overflow { what: "bessel series" });
    }
    let mut t = l0.exp();
    let mut v = Complex64::new(0.0, 0.0);
    let mut d1 = v;
    let mut d2 = v;
    let mut abs_sum = 0.0;
    for k in 0..policy.max_terms {
        let kf = k as f64;
        let e = nu + 2.0 * kf;
        v += t;
        d1 += t * e / x;
        d2 += t * e * (e - 1.0) / (x * x);
        abs_sum += t.norm();
        let ratio = q / ((kf + 1.0) * (nu + kf + 1.0));
        let next = t * ratio;
        if next.norm() == 0.0 || (next.norm() <= 0.25 * f64::EPSILON * v.norm() && ratio.norm() < 0.5) {
            let est = f64::EPSILON * abs_sum / v.norm();
            if kind == BesselKind::J && est > policy.target_rel_error {
                return Err(SpecFunError::Cancellation { what: "bessel J series", estimate: est });
            }
            return Ok(BesselEval { value: v, d1, d2 });
        }
        t = next;
    }
    Err(SpecFunError::NonConvergence { what: "bessel series", terms: policy.max_terms })
}

fn k_from_i(nu: Complex64, x: f64, policy: &AccuracyPolicy) -> Result<BesselEval, SpecFunError> {
    let ip = series_ji(BesselKind::I, nu, x, policy)?;
    let im = series_ji(BesselKind::I, -nu, x, policy)?;
    let f = Complex64::new(PI / 2.0, 0.0) / (nu * PI).sin();
    Ok(BesselEval { value: (im.value - ip.value) * f, d1: (im.d1 - ip.d1) * f, d2: (im.d2 - ip.d2) * f })
}

fn factorial(n: u32) -> f64 {
    (1..=n).map(|j| j as f64).product()
}

/// K_n for integer n from the logarithmic series.
fn k_integer(n: u32, x: f64, policy: &AccuracyPolicy) -> Result<BesselEval, SpecFunError> {
    const EULER: f64 = 0.577_215_664_901_532_9;
    let nf = n as f64;
    let h = 0.5 * x;
    let sign = if n.is_multiple_of(2) { 1.0 } else { -1.0 };
    let mut acc = [0.0f64; 3];
    let add = |acc: &mut [f64; 3], t: f64, e: f64| {
        acc[0] += t;
        acc[1] += t * e / x;
        acc[2] += t * e * (e - 1.0) / (x * x);
    };
    // finite part ½ Σ_{k<n} (n−k−1)!/k! (−1)^k h^{2k−n}
    for k in 0..n {
        let e = 2.0 * k as f64 - nf;
        let s = if k % 2 == 0 { 0.5 } else { -0.5 };
        add(&mut acc, s * factorial(n - k - 1) / factorial(k) * h.powf(e), e);
    }
    // (−1)^{n+1} ln(x/2) I_n
    let i = series_ji(BesselKind::I, Complex64::new(nf, 0.0), x, policy)?;
    let (i0, i1, i2) = (i.value.re, i.d1.re, i.d2.re);
    let l = h.ln();
    acc[0] -= sign * l * i0;
    acc[1] -= sign * (i0 / x + l * i1);
    acc[2] -= sign * (-i0 / (x * x) + 2.0 * i1 / x + l * i2);
    // (−1)^n ½ Σ (ψ(k+1)+ψ(n+k+1)) h^{n+2k} / (k!(n+k)!)
    let mut hk = 0.0;
    let mut hnk: f64 = (1..=n).map(|j| 1.0 / j as f64).sum();
    let mut t = sign * 0.5 * h.powi(n as i32) / factorial(n);
    for k in 0..policy.max_terms {
        let kf = k as f64;
        let term = t * (hk + hnk - 2.0 * EULER);
        add(&mut acc, term, nf + 2.0 * kf);
        if term.abs() <= 0.25 * f64::EPSILON * acc[0].abs() && k > 2 {
            return Ok(BesselEval {
                value: Complex64::new(acc[0], 0.0),
                d1: Complex64::new(acc[1], 0.0),
                d2: Complex64::new(acc[2], 0.0),
            });
        }
        t *= h * h / ((kf + 1.0) * (nf + kf + 1.0));
        hk += 1.0 / (kf + 1.0);
        hnk += 1.0 / (nf + kf + 1.0);
    }
    Err(SpecFunError::NonConvergence { what: "bessel K integer series", terms: policy.max_terms })
}

fn k_series(nu: Complex64, x: f64, policy: &AccuracyPolicy) -> Result<BesselEval, SpecFunError> {
    let n = nu.re.round();
    let eps = policy.log_eps;
    if nu.im == 0.0 && nu.re == n {
        return k_integer(n.abs() as u32, x, policy);
    }
    if (nu - n).norm() >= 2.0 * eps {
        return k_from_i(nu, x, policy);
    }
    let mut vals = [[Complex64::new(0.0, 0.0); 4]; 3];
    for (j, o) in [-2.0, -1.0, 1.0, 2.0].iter().enumerate() {
        let e = k_from_i(Complex64::new(n + o * eps, 0.0), x, policy)?;
        vals[0][j] = e.value;
        vals[1][j] = e.d1;
        vals[2][j] = e.d2;
    }
    let c = Complex64::new(n, 0.0);
    let out = BesselEval {
        value: offset_interpolate(c, eps, nu, vals[0]),
        d1: offset_interpolate(c, eps, nu, vals[1]),
        d2: offset_interpolate(c, eps, nu, vals[2]),
    };
    if !(out.value.re.is_finite() && out.value.im.is_finite()) {
        return Err(SpecFunError::DegenerateOrder { what: "bessel K" });
    }
    Ok(out)
}

fn k_integral(nu: Complex64, x: f64, policy: &AccuracyPolicy) -> Result<BesselEval, SpecFunError> {
    let h = 0.125;
    let mut v = Complex64::new(0.0, 0.0);
    let mut d1 = v;
    let mut d2 = v;
    let mut abs_sum = 0.0;
    let mut j = 0usize;
    loop {
        let t = j as f64 * h;
        let ch = t.cosh();
        let expo = -x * (ch - 1.0) + nu.re.abs() * t;
        if j > 0 && expo < -745.0 {
            break;
        }
        let w = if j == 0 { 0.5 * h } else { h };
        let g = (-x * ch).exp() * w;
        let c = (nu * t).cosh() * g;
        v += c;
        d1 -= c * ch;
        d2 += c * (ch * ch);
        abs_sum += c.norm();
        j += 1;
        if j > 100_000 {
            return Err(SpecFunError::NonConvergence { what: "bessel K integral", terms: j });
        }
    }
    let est = f64::EPSILON * abs_sum / v.norm() * 10.0;
    if est > policy.target_rel_error {
        return Err(SpecFunError::Cancellation { what: "bessel K integral", estimate: est });
    }
    Ok(BesselEval { value: v, d1, d2 })
}

/// J_ν, I_ν or K_ν at X > 0 with its first two derivatives, complex order.
pub fn bessel_complex(
    kind: BesselKind,
    nu: Complex64,
    x: f64,
    policy: &AccuracyPolicy,
) -> Result<BesselEval, SpecFunError> {
    if !(x > 0.0 && x.is_finite()) {
        return Err(SpecFunError::Domain { what: "bessel: need X > 0" });
    }
    match kind {
        BesselKind::J | BesselKind::I => series_ji(kind, nu, x, policy),
        BesselKind::K if x <= policy.bessel_k_series_max => k_series(nu, x, policy),
        BesselKind::K => k_integral(nu, x, policy),
    }
}

/// Real-valued Bessel function; errors when the result is not real.
pub fn bessel(kind: BesselKind, nu: Complex64, x: f64, policy: &AccuracyPolicy) -> Result<f64, SpecFunError> {
    let e = bessel_complex(kind, nu, x, policy)?;
    check_real("bessel", e.value, 0.0, 1e-9)
}

/// X-derivative of [`bessel`].
pub fn bessel_dx(kind: BesselKind, nu: Complex64, x: f64, policy: &AccuracyPolicy) -> Result<f64, SpecFunError> {
    let e = bessel_complex(kind, nu, x, policy)?;
    check_real("bessel_dx", e.d1, e.value.norm(), 1e-9)
}
