#[allow(unused_imports)]
use num_traits::Float;
use core::f64::consts::PI;
use num_complex::Complex64;

use super::SpecFunError;

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;
const STIRLING_R: f64 = 15.0;
const MAX_SHIFT: f64 = 4000.0;

// B_{2k} / (2k (2k-1)), k = 1..10
const STIRLING: [f64; 10] = [
    1.0 / 12.0,
    -1.0 / 360.0,
    1.0 / 1260.0,
    -1.0 / 1680.0,
    1.0 / 1188.0,
    -691.0 / 360360.0,
    1.0 / 156.0,
    -3617.0 / 122400.0,
    43867.0 / 244188.0,
    -174611.0 / 125400.0,
];

// B_{2k} / (2k), k = 1..10
const DIGAMMA: [f64; 10] = [
    1.0 / 12.0,
    -1.0 / 120.0,
    1.0 / 252.0,
    -1.0 / 240.0,
    1.0 / 132.0,
    -691.0 / 32760.0,
    1.0 / 12.0,
    -3617.0 / 8160.0,
    43867.0 / 14364.0,
    -174611.0 / 6600.0,
];

fn pole_of(w: Complex64) -> Option<i64> {
    if w.im == 0.0 && w.re <= 0.0 && w.re == w.re.round() {
        Some(w.re as i64)
    } else {
        None
    }
}

fn shift_count(w: Complex64) -> f64 {
    if w.im.abs() < STIRLING_R {
        (STIRLING_R - w.re).ceil().max(0.0)
    } else {
        (-w.re).ceil().max(0.0)
    }
}

/// Principal-branch log Γ(w).
///
/// Stirling's series after an upward shift by the recurrence. On the negative
/// real axis the value is the limit from the upper half-plane.
pub fn log_gamma(w: Complex64) -> Result<Complex64, SpecFunError> {
    if let Some(n) = pole_of(w) {
        return Err(SpecFunError::Pole(n));
    }
    if !(w.re.is_finite() && w.im.is_finite()) {
        return Err(SpecFunError::Domain { what: "log_gamma" });
    }
    let n = shift_count(w);
    if n > MAX_SHIFT {
        // reflection: lnΓ(w) = ln π − ln sin(πw) − lnΓ(1−w)
        let s = (w * PI).sin();
        return Ok(Complex64::new(PI.ln(), 0.0) - s.ln() - log_gamma(Complex64::new(1.0, 0.0) - w)?);
    }
    let mut acc = Complex64::new(0.0, 0.0);
    let mut v = w;
    for _ in 0..n as usize {
        acc += v.ln();
        v += 1.0;
    }
    Ok(stirling(v) - acc)
}

fn stirling(v: Complex64) -> Complex64 {
    let inv = v.inv();
    let inv2 = inv * inv;
    let mut series = Complex64::new(0.0, 0.0);
    let mut p = inv;
    for c in STIRLING {
        series += p * c;
        p *= inv2;
    }
    (v - 0.5) * v.ln() - v + LN_SQRT_2PI + series
}

pub fn gamma(w: Complex64) -> Result<Complex64, SpecFunError> {
    let l = log_gamma(w)?;
    if l.re > 709.0 {
        return Err(SpecFunError::Overflow { what: "gamma" });
    }
    Ok(l.exp())
}

/// 1/Γ(w); exactly zero at the poles of Γ.
pub fn rgamma(w: Complex64) -> Result<Complex64, SpecFunError> {
    if pole_of(w).is_some() {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let l = log_gamma(w)?;
    if -l.re > 709.0 {
        return Err(SpecFunError::Overflow { what: "rgamma" });
    }
    Ok((-l).exp())
}

/// ψ(w) = Γ′(w)/Γ(w).
pub fn digamma(w: Complex64) -> Result<Complex64, SpecFunError> {
    if let Some(n) = pole_of(w) {
        return Err(SpecFunError::Pole(n));
    }
    if w.re < -MAX_SHIFT {
        // ψ(w) = ψ(1−w) − π cot(πw)
        let t = w * PI;
        return Ok(digamma(Complex64::new(1.0, 0.0) - w)? - t.cos() / t.sin() * PI);
    }
    let n = shift_count(w);
    let mut acc = Complex64::new(0.0, 0.0);
    let mut v = w;
    for _ in 0..n as usize {
        acc += v.inv();
        v += 1.0;
    }
    let inv = v.inv();
    let inv2 = inv * inv;
    let mut series = Complex64::new(0.0, 0.0);
    let mut p = inv2;
    for c in DIGAMMA {
        series += p * c;
        p *= inv2;
    }
    Ok(v.ln() - inv * 0.5 - series - acc)
}

/// (a)_n computed by direct product.
pub fn pochhammer(a: Complex64, n: usize) -> Complex64 {
    let mut p = Complex64::new(1.0, 0.0);
    for k in 0..n {
        p *= a + k as f64;
    }
    p
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn classical_values() {
        assert!(log_gamma(c(1.0, 0.0)).unwrap().norm() < 1e-15);
        let half = log_gamma(c(0.5, 0.0)).unwrap();
        assert!((half.re - PI.sqrt().ln()).abs() < 1e-14);
        assert!(half.im.abs() < 1e-15);
        let g5 = gamma(c(5.0, 0.0)).unwrap();
        assert!((g5.re - 24.0).abs() < 1e-12);
    }

    #[test]
    fn poles_are_reported() {
        assert_eq!(log_gamma(c(-3.0, 0.0)), Err(SpecFunError::Pole(-3)));
        assert_eq!(digamma(c(0.0, 0.0)), Err(SpecFunError::Pole(0)));
        assert_eq!(rgamma(c(-2.0, 0.0)).unwrap(), c(0.0, 0.0));
    }

    #[test]
    fn critical_line_modulus() {
        let t = 0.7;
        let g = gamma(c(0.5, t)).unwrap() * gamma(c(0.5, -t)).unwrap();
        let want = PI / (PI * t).cosh();
        assert!((g.re - want).abs() < 1e-13 * want);
        assert!(g.im.abs() < 1e-14);
    }

    #[test]
    fn digamma_recurrence() {
        let euler = 0.577_215_664_901_532_9;
        assert!((digamma(c(1.0, 0.0)).unwrap().re + euler).abs() < 1e-15);
        assert!((digamma(c(2.0, 0.0)).unwrap().re - (1.0 - euler)).abs() < 1e-15);
        let a = 0.3;
        let d = digamma(c(1.0 + a, 0.0)).unwrap() - digamma(c(a, 0.0)).unwrap();
        assert!((d.re - 1.0 / a).abs() < 1e-13);
    }

    #[test]
    fn complex_reference_values() {
        // mpmath.loggamma, 30 digits
        let cases = [
            (c(0.3, 0.4), c(0.496_655_903_381_725_8, -0.982_743_447_607_146_7)),
            (c(-2.7, 1.1), c(-2.862_089_026_879_696_8, -8.747_795_491_832_546)),
            (c(0.1, 60.0), c(-94.966_577_232_652_49, 185.031_716_303_983_3)),
            (c(64.55, 0.3), c(203.294_066_465_095_94, 1.247_903_352_212_038)),
        ];
        for (w, want) in cases {
            let got = log_gamma(w).unwrap();
            assert!((got - want).norm() < 2e-13 * want.norm().max(1.0), "{w} {got} {want}");
        }
    }

    #[test]
    fn digamma_reference() {
        // mpmath.digamma(0.3+0.4j)
        let want = c(-1.280_091_788_851_282, 2.030_105_778_096_179_6);
        let got = digamma(c(0.3, 0.4)).unwrap();
        assert!((got - want).norm() < 1e-13);
    }
}
