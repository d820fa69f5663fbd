//! Whittaker W_{κ,μ}(x) for real κ, real or pure-imaginary μ and x > 0.
//!
//! Three evaluation paths:
//! - the two-term ₁F₁ representation, used while its cancellation error
//!   estimate stays under the target;
//! - the Laplace integral
//!   W = x^κ e^{−x/2}/Γ(β) ∫₀^∞ t^{β−1} e^{−t} (1+t/x)^{γ} dt,
//!   β = ½−κ+μ, γ = κ−½+μ, raised in κ by the three-term recurrence when
//!   Re β would drop below ½;
//! - the asymptotic expansion x^κ e^{−x/2} Σ b_n x^{−n}, truncated at its
//!   smallest term.
//!
//! None of them uses the differential equation, which stays available as an
//! independent check. When 2μ sits within 2ε of an integer the ₁F₁ form is
//! ill-conditioned; it is then evaluated at μ₀ ± ε, μ₀ ± 2ε and interpolated.

#[allow(unused_imports)]
use num_traits::Float;
use num_complex::Complex64;

use super::gamma::log_gamma;
use super::hyper::SERIES_X_MAX;
use super::{check_real, offset_interpolate, AccuracyPolicy, SpecFunError};
use crate::quad::gauss_legendre;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WhittakerPath {
    Series,
    Integral,
    Asymptotic,
}

/// W and its first two x-derivatives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WhittakerEval {
    pub value: f64,
    pub d1: f64,
    pub d2: f64,
    pub path: WhittakerPath,
    /// Set when μ is close enough to a degenerate order that the offset
    /// interpolation was used (includes the logarithmic case μ = 0).
    pub near_log: bool,
    pub error_estimate: f64,
}

/// One of the two terms of the ₁F₁ representation:
/// exp(`log_prefactor`)·x^{sμ}·₁F₁(`alpha`; `gamma`; x), times x^{1/2} e^{−x/2}.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesPart {
    pub sign: f64,
    /// `None` when 1/Γ(½−κ−sμ) vanishes and the term drops out.
    pub log_prefactor: Option<Complex64>,
    pub alpha: Complex64,
    pub gamma: Complex64,
}

fn validate_mu(mu: Complex64) -> Result<Complex64, SpecFunError> {
    let scale = mu.norm();
    let mut m = mu;
    if m.re.abs() <= 1e-14 * scale {
        m.re = 0.0;
    }
    if m.im.abs() <= 1e-14 * scale {
        m.im = 0.0;
    }
    if m.re != 0.0 && m.im != 0.0 {
        return Err(SpecFunError::Domain { what: "whittaker_w: mu must be real or pure imaginary" });
    }
    Ok(m)
}

/// The two terms of the ₁F₁ representation at (κ, μ).
pub fn series_parts(kappa: f64, mu: Complex64) -> Result<[SeriesPart; 2], SpecFunError> {
    let mut out = [SeriesPart {
        sign: 1.0,
        log_prefactor: None,
        alpha: Complex64::new(0.0, 0.0),
        gamma: Complex64::new(0.0, 0.0),
    }; 2];
    for (slot, s) in out.iter_mut().zip([1.0, -1.0]) {
        let smu = mu * s;
        let lg = log_gamma(-smu * 2.0).map_err(|_| SpecFunError::DegenerateOrder { what: "whittaker_w" })?;
        let den = Complex64::new(0.5 - kappa, 0.0) - smu;
        let log_prefactor = match log_gamma(den) {
            Ok(l) => Some(lg - l),
            Err(SpecFunError::Pole(_)) => None,
            Err(e) => return Err(e),
        };
        *slot = SeriesPart {
            sign: s,
            log_prefactor,
            alpha: Complex64::new(0.5 - kappa, 0.0) + smu,
            gamma: smu * 2.0 + 1.0,
        };
    }
    Ok(out)
}

type Triple = [Complex64; 3];

/// W, W′, W″ from the ₁F₁ representation, without degeneracy handling.
fn series_raw(
    kappa: f64,
    mu: Complex64,
    x: f64,
    policy: &AccuracyPolicy,
) -> Result<(Triple, f64), SpecFunError> {
    if x > SERIES_X_MAX {
        return Err(SpecFunError::Domain { what: "whittaker series" });
    }
    let parts = series_parts(kappa, mu)?;
    let lx = x.ln();
    let mut g = [Complex64::new(0.0, 0.0); 3];
    let mut absg = [0.0f64; 3];
    for part in &parts {
        let Some(lp) = part.log_prefactor else { continue };
        let smu = mu * part.sign;
        let le = lp + smu * lx;
        if le.re > 700.0 {
            return Err(SpecFunError::Overflow { what: "whittaker series prefactor" });
        }
        let e = le.exp();
        let mut term = Complex64::new(1.0, 0.0);
        let mut f = [term, Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0)];
        let mut af = [1.0, 0.0, 0.0];
        let mut done = false;
        for k in 0..policy.max_terms {
            let kf = k as f64;
            let ratio = (part.alpha + kf) / ((part.gamma + kf) * (kf + 1.0)) * x;
            term *= ratio;
            let n = kf + 1.0;
            // scaled derivatives x^j d^j/dx^j of the ₁F₁ series
            let t1 = term * n;
            let t2 = term * (n * (n - 1.0));
            f[0] += term;
            f[1] += t1;
            f[2] += t2;
            af[0] += term.norm();
            af[1] += t1.norm();
            af[2] += t2.norm();
            let t = term.norm();
            if t == 0.0 || (t <= 0.25 * f64::EPSILON * f[0].norm() && ratio.norm() < 0.5 && n > 2.0) {
                done = true;
                break;
            }
        }
        if !done {
            return Err(SpecFunError::NonConvergence { what: "whittaker series", terms: policy.max_terms });
        }
        let c1 = smu;
        let c2 = smu * (smu - 1.0);
        g[0] += e * f[0];
        g[1] += e * (c1 * f[0] + f[1]);
        g[2] += e * (c2 * f[0] + c1 * f[1] * 2.0 + f[2]);
        let en = e.norm();
        absg[0] += en * af[0];
        absg[1] += en * (c1.norm() * af[0] + af[1]);
        absg[2] += en * (c2.norm() * af[0] + 2.0 * c1.norm() * af[1] + af[2]);
    }
    // g[j] holds x^j g^{(j)}; errors are relative to the natural scale of each
    let s0 = g[0].norm();
    let s1 = g[1].norm() + s0;
    let s2 = g[2].norm() + g[1].norm() + s0;
    let est = f64::EPSILON * (absg[0] / s0).max(absg[1] / s1).max(absg[2] / s2);
    let est = if est.is_finite() { est } else { f64::INFINITY };
    // W = h g with h = x^{1/2} e^{−x/2} and x h′/h = R
    let h = (0.5 * lx - 0.5 * x).exp();
    let r = 0.5 - 0.5 * x;
    let w = [
        g[0] * h,
        (g[1] + g[0] * r) * h / x,
        (g[2] + g[1] * (2.0 * r) + g[0] * (r * r - 0.5)) * h / x / x,
    ];
    Ok((w, est))
}

fn near_degenerate(mu: Complex64, eps: f64) -> Option<f64> {
    let t = mu * 2.0;
    let n = t.re.round();
    if (t - n).norm() < 2.0 * eps {
        Some(0.5 * n)
    } else {
        None
    }
}

fn series_eval(
    kappa: f64,
    mu: Complex64,
    x: f64,
    policy: &AccuracyPolicy,
) -> Result<(Triple, f64, bool), SpecFunError> {
    match near_degenerate(mu, policy.log_eps) {
        None => series_raw(kappa, mu, x, policy).map(|(w, e)| (w, e, false)),
        Some(mu0) => {
            let eps = policy.log_eps;
            let mut vals = [[Complex64::new(0.0, 0.0); 4]; 3];
            let mut est: f64 = 0.0;
            for (j, o) in [-2.0, -1.0, 1.0, 2.0].iter().enumerate() {
                let (w, e) = series_raw(kappa, Complex64::new(mu0 + o * eps, 0.0), x, policy)?;
                for d in 0..3 {
                    vals[d][j] = w[d];
                }
                est = est.max(e);
            }
            let c = Complex64::new(mu0, 0.0);
            let out = [
                offset_interpolate(c, eps, mu, vals[0]),
                offset_interpolate(c, eps, mu, vals[1]),
                offset_interpolate(c, eps, mu, vals[2]),
            ];
            // roundoff at the nodes is amplified by the Lagrange weights
            Ok((out, (4.0 * est).max(eps.powi(4)), true))
        }
    }
}

/// Laplace moments ∫₀^∞ t^{β−1+p} e^{−t} (1+t/x)^{γ−p} dt for p = 0, 1, 2.
fn laplace_moments(beta: Complex64, gam: Complex64, x: f64) -> Triple {
    let t0 = (0.25 * x).min(1.0);
    let mut out = [Complex64::new(0.0, 0.0); 3];
    // [0, t0]: expand e^{−t}(1+t/x)^{γ−p} in powers of t and integrate termwise
    for (p, slot) in out.iter_mut().enumerate() {
        let pf = p as f64;
        let q = gam - pf;
        let nterms = 80;
        let mut bin = [Complex64::new(0.0, 0.0); 80];
        let mut ex = [0.0f64; 80];
        bin[0] = Complex64::new(1.0, 0.0);
        ex[0] = 1.0;
        for j in 1..nterms {
            let jf = j as f64;
            bin[j] = bin[j - 1] * (q - (jf - 1.0)) / (jf * x);
            ex[j] = -ex[j - 1] / jf;
        }
        let mut sum = Complex64::new(0.0, 0.0);
        let mut tk = 1.0;
        for k in 0..nterms {
            let mut d = Complex64::new(0.0, 0.0);
            for i in 0..=k {
                d += bin[k - i] * ex[i];
            }
            let term = d * tk / (beta + pf + k as f64);
            sum += term;
            if k > 4 && term.norm() < 1e-18 * sum.norm() {
                break;
            }
            tk *= t0;
        }
        *slot = sum * ((beta + pf) * t0.ln()).exp();
    }
    // [t0, ∞): Gauss–Legendre on doubling panels
    let n = 24 + (0.8 * (beta.im.abs() + gam.im.abs())).ceil() as usize;
    let (gx, gw) = gauss_legendre(n);
    let mut lo = t0;
    while lo < 90.0 {
        let hi = 2.0 * lo;
        let half = 0.5 * (hi - lo);
        let mid = 0.5 * (hi + lo);
        for (s, ws) in gx.iter().zip(&gw) {
            let t = mid + half * s;
            let l1 = (t / x).ln_1p();
            let base = ((beta - 1.0) * t.ln() + gam * l1 - t).exp() * (half * ws);
            let r = t / (1.0 + t / x);
            out[0] += base;
            out[1] += base * r;
            out[2] += base * (r * r);
        }
        lo = hi;
    }
    out
}

/// W, W′, W″ from the Laplace integral; needs Re(½−κ+μ) ≥ ½ for the given μ.
fn integral_base(kappa: f64, mu: Complex64, x: f64) -> Result<Triple, SpecFunError> {
    let beta = Complex64::new(0.5 - kappa, 0.0) + mu;
    let gam = Complex64::new(kappa - 0.5, 0.0) + mu;
    let m = laplace_moments(beta, gam, x);
    let j0 = m[0];
    let j1 = -gam / (x * x) * m[1];
    let j2 = gam * (gam - 1.0) / (x * x * x * x) * m[2] + gam * 2.0 / (x * x * x) * m[1];
    let lpre = Complex64::new(kappa * x.ln() - 0.5 * x, 0.0) - log_gamma(beta)?;
    if lpre.re > 700.0 {
        return Err(SpecFunError::Overflow { what: "whittaker integral" });
    }
    let pre = lpre.exp();
    let r = kappa / x - 0.5;
    Ok([
        pre * j0,
        pre * (j1 + j0 * r),
        pre * (j2 + j1 * (2.0 * r) + j0 * (r * r - kappa / (x * x))),
    ])
}

fn integral_eval(kappa: f64, mu: Complex64, x: f64) -> Result<(Triple, f64), SpecFunError> {
    let mu = if mu.re < 0.0 { -mu } else { mu };
    let shift = (kappa - mu.re).ceil().max(0.0) as usize;
    if shift == 0 {
        return Ok((integral_base(kappa, mu, x)?, 1e-13));
    }
    // W_{k+1} = (x − 2k) W_k − ((k − ½)² − μ²) W_{k−1}
    let k0 = kappa - shift as f64;
    let mut prev = integral_base(k0 - 1.0, mu, x)?;
    let mut cur = integral_base(k0, mu, x)?;
    let mu2 = mu * mu;
    for i in 0..shift {
        let k = k0 + i as f64;
        let c = (Complex64::new(k - 0.5, 0.0)).powi(2) - mu2;
        let a = x - 2.0 * k;
        let next = [
            cur[0] * a - c * prev[0],
            cur[0] + cur[1] * a - c * prev[1],
            cur[1] * 2.0 + cur[2] * a - c * prev[2],
        ];
        prev = cur;
        cur = next;
    }
    Ok((cur, 1e-13 * (shift as f64 + 1.0)))
}

fn asymptotic_eval(
    kappa: f64,
    mu: Complex64,
    x: f64,
    policy: &AccuracyPolicy,
) -> Result<([f64; 3], f64), SpecFunError> {
    let mu2 = (mu * mu).re;
    let mut b = 1.0f64;
    let mut s = [0.0f64; 3];
    let mut last = f64::INFINITY;
    let mut omitted = f64::INFINITY;
    for n in 0..policy.max_terms {
        let nf = n as f64;
        let e = kappa - nf;
        s[0] += b;
        s[1] += b * (e / x - 0.5);
        s[2] += b * (e * (e - 1.0) / (x * x) - e / x + 0.25);
        let c = (nf + 0.5 - kappa).powi(2) - mu2;
        let next = -b * c / ((nf + 1.0) * x);
        if next == 0.0 {
            omitted = 0.0;
            break;
        }
        if next.abs() >= b.abs() || next.abs() > last {
            omitted = next.abs();
            break;
        }
        last = b.abs();
        b = next;
        if b.abs() <= 0.25 * f64::EPSILON * s[0].abs() {
            omitted = b.abs();
            break;
        }
    }
    let est = omitted / s[0].abs();
    let h = (kappa * x.ln() - 0.5 * x).exp();
    Ok(([h * s[0], h * s[1], h * s[2]], est))
}

/// Local size of W, so that zeros of an oscillating W are judged by the
/// size of the oscillation.
fn envelope(x: f64, w: &Triple) -> f64 {
    w[0].norm().max(x * w[1].norm()).max(x * x * w[2].norm())
}

fn finish(
    what: &'static str,
    x: f64,
    w: Triple,
    est: f64,
    path: WhittakerPath,
    near_log: bool,
) -> Result<WhittakerEval, SpecFunError> {
    let tol = 1e-8;
    let s = envelope(x, &w);
    let value = check_real(what, w[0], s, tol)?;
    let d1 = check_real(what, w[1], s / x, tol)?;
    let d2 = check_real(what, w[2], s / (x * x), tol)?;
    // derivatives may saturate to ±∞ for x below about 1e-200
    if !value.is_finite() || d1.is_nan() || d2.is_nan() {
        return Err(SpecFunError::Overflow { what });
    }
    Ok(WhittakerEval { value, d1, d2, path, near_log, error_estimate: est })
}

/// W_{κ,μ}(x) with derivatives, choosing the path automatically.
pub fn whittaker(
    kappa: f64,
    mu: Complex64,
    x: f64,
    policy: &AccuracyPolicy,
) -> Result<WhittakerEval, SpecFunError> {
    if !(x > 0.0 && x.is_finite() && kappa.is_finite()) {
        return Err(SpecFunError::Domain { what: "whittaker_w: need x > 0" });
    }
    let mu = validate_mu(mu)?;
    let target = policy.target_rel_error;
    if x > policy.large_x_switch {
        let (w, est) = asymptotic_eval(kappa, mu, x, policy)?;
        if est <= target {
            return Ok(WhittakerEval {
                value: w[0],
                d1: w[1],
                d2: w[2],
                path: WhittakerPath::Asymptotic,
                near_log: false,
                error_estimate: est,
            });
        }
    } else {
        match series_eval(kappa, mu, x, policy) {
            Ok((w, est, near_log)) if est * w[0].norm() <= 0.1 * target * envelope(x, &w) => {
                return finish("whittaker_w", x, w, est, WhittakerPath::Series, near_log);
            }
            Ok(_) | Err(SpecFunError::NonConvergence { .. }) | Err(SpecFunError::Overflow { .. }) => {}
            Err(e) => return Err(e),
        }
    }
    let (w, est) = integral_eval(kappa, mu, x)?;
    finish("whittaker_w", x, w, est, WhittakerPath::Integral, false)
}

/// Forces one evaluation path; used for cross-validation.
pub fn whittaker_with_path(
    kappa: f64,
    mu: Complex64,
    x: f64,
    path: WhittakerPath,
    policy: &AccuracyPolicy,
) -> Result<WhittakerEval, SpecFunError> {
    if !(x > 0.0 && x.is_finite()) {
        return Err(SpecFunError::Domain { what: "whittaker_w: need x > 0" });
    }
    let mu = validate_mu(mu)?;
    match path {
        WhittakerPath::Series => {
            let (w, est, near_log) = series_eval(kappa, mu, x, policy)?;
            finish("whittaker_w", x, w, est, path, near_log)
        }
        WhittakerPath::Integral => {
            let (w, est) = integral_eval(kappa, mu, x)?;
            finish("whittaker_w", x, w, est, path, false)
        }
        WhittakerPath::Asymptotic => {
            let (w, est) = asymptotic_eval(kappa, mu, x, policy)?;
            Ok(WhittakerEval { value: w[0], d1: w[1], d2: w[2], path, near_log: false, error_estimate: est })
        }
    }
}

pub fn whittaker_w(kappa: f64, mu: Complex64, x: f64, policy: &AccuracyPolicy) -> Result<f64, SpecFunError> {
    whittaker(kappa, mu, x, policy).map(|w| w.value)
}

pub fn whittaker_w_dx(kappa: f64, mu: Complex64, x: f64, policy: &AccuracyPolicy) -> Result<f64, SpecFunError> {
    whittaker(kappa, mu, x, policy).map(|w| w.d1)
}
