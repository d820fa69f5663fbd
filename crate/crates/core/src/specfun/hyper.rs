#[allow(unused_imports)]
use num_traits::Float;
use num_complex::Complex64;

use super::gamma::pochhammer;
use super::{AccuracyPolicy, SpecFunError};

/// Largest |x| accepted by the series routines.
pub const SERIES_X_MAX: f64 = 700.0;

/// A summed series together with the sum of term moduli.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesSum {
    pub value: Complex64,
    pub abs_sum: f64,
    pub terms: usize,
}

impl SeriesSum {
    /// Rounding error estimate relative to |value|.
    pub fn cancellation(&self) -> f64 {
        let v = self.value.norm();
        if v == 0.0 {
            if self.abs_sum == 0.0 { 0.0 } else { f64::INFINITY }
        } else {
            f64::EPSILON * self.abs_sum / v
        }
    }
}

fn is_nonpositive_integer(g: Complex64) -> bool {
    g.im == 0.0 && g.re <= 0.0 && g.re == g.re.round()
}

/// ₁F₁(α; γ; x) by its defining series, with the term-modulus sum.
pub fn kummer_1f1_series(
    alpha: Complex64,
    gamma: Complex64,
    x: f64,
    policy: &AccuracyPolicy,
) -> Result<SeriesSum, SpecFunError> {
    if is_nonpositive_integer(gamma) {
        return Err(SpecFunError::Pole(gamma.re as i64));
    }
    if !(x.abs() <= SERIES_X_MAX) {
        return Err(SpecFunError::Domain { what: "kummer_1f1" });
    }
    let mut term = Complex64::new(1.0, 0.0);
    let mut sum = term;
    let mut abs_sum = 1.0;
    for k in 0..policy.max_terms {
        let kf = k as f64;
        let ratio = (alpha + kf) / ((gamma + kf) * (kf + 1.0)) * x;
        term *= ratio;
        sum += term;
        let t = term.norm();
        abs_sum += t;
        if t == 0.0 || (t <= 0.25 * f64::EPSILON * sum.norm() && ratio.norm() < 0.5) {
            return Ok(SeriesSum { value: sum, abs_sum, terms: k + 2 });
        }
    }
    Err(SpecFunError::NonConvergence { what: "kummer_1f1", terms: policy.max_terms })
}

/// ₁F₁(α; γ; x).
pub fn kummer_1f1(
    alpha: Complex64,
    gamma: Complex64,
    x: f64,
    policy: &AccuracyPolicy,
) -> Result<Complex64, SpecFunError> {
    let s = kummer_1f1_series(alpha, gamma, x, policy)?;
    let est = s.cancellation();
    if est > policy.target_rel_error {
        return Err(SpecFunError::Cancellation { what: "kummer_1f1", estimate: est });
    }
    Ok(s.value)
}

/// k-th x-derivative of ₁F₁ through the shifted-parameter series
/// (α)_k/(γ)_k · ₁F₁(α+k; γ+k; x).
pub fn kummer_1f1_dx(
    alpha: Complex64,
    gamma: Complex64,
    x: f64,
    order: usize,
    policy: &AccuracyPolicy,
) -> Result<Complex64, SpecFunError> {
    let k = order as f64;
    let f = kummer_1f1(alpha + k, gamma + k, x, policy)?;
    Ok(pochhammer(alpha, order) / pochhammer(gamma, order) * f)
}

/// ₀F₁(; γ; x).
pub fn hyper_0f1(gamma: Complex64, x: f64, policy: &AccuracyPolicy) -> Result<Complex64, SpecFunError> {
    if is_nonpositive_integer(gamma) {
        return Err(SpecFunError::Pole(gamma.re as i64));
    }
    if !(x.abs() <= SERIES_X_MAX) {
        return Err(SpecFunError::Domain { what: "hyper_0f1" });
    }
    let mut term = Complex64::new(1.0, 0.0);
    let mut sum = term;
    let mut abs_sum = 1.0;
    for k in 0..policy.max_terms {
        let kf = k as f64;
        let ratio = x / ((gamma + kf) * (kf + 1.0));
        term *= ratio;
        sum += term;
        let t = term.norm();
        abs_sum += t;
        if t == 0.0 || (t <= 0.25 * f64::EPSILON * sum.norm() && ratio.norm() < 0.5) {
            let s = SeriesSum { value: sum, abs_sum, terms: k + 2 };
            let est = s.cancellation();
            if est > policy.target_rel_error {
                return Err(SpecFunError::Cancellation { what: "hyper_0f1", estimate: est });
            }
            return Ok(sum);
        }
    }
    Err(SpecFunError::NonConvergence { what: "hyper_0f1", terms: policy.max_terms })
}
