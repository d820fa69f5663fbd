//! Special functions at the accuracy the kernel checks need.
//!
//! All routines are pure functions of their arguments and an immutable
//! [`AccuracyPolicy`].

mod bessel;
mod gamma;
mod hyper;
mod whittaker;

pub use bessel::{bessel, bessel_complex, bessel_dx, BesselEval, BesselKind};
pub use gamma::{digamma, gamma, log_gamma, pochhammer, rgamma};
pub use hyper::{hyper_0f1, kummer_1f1, kummer_1f1_dx, kummer_1f1_series, SeriesSum};
pub use whittaker::{
    series_parts, whittaker, whittaker_w, whittaker_w_dx, whittaker_with_path, SeriesPart,
    WhittakerEval, WhittakerPath,
};

/// Accuracy knobs shared by every evaluator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AccuracyPolicy {
    /// Relative error the evaluators aim for.
    pub target_rel_error: f64,
    /// Hard cap on series terms.
    pub max_terms: usize,
    /// Above this argument W is tried through its asymptotic expansion.
    pub large_x_switch: f64,
    /// Offset used when 2μ (or a Bessel order) sits on an integer.
    pub log_eps: f64,
    /// Largest argument for which K_ν is formed from the I_{±ν} difference.
    pub bessel_k_series_max: f64,
}

impl Default for AccuracyPolicy {
    fn default() -> Self {
        AccuracyPolicy {
            target_rel_error: 1e-10,
            max_terms: 500,
            large_x_switch: 30.0,
            log_eps: 1e-4,
            bessel_k_series_max: 2.0,
        }
    }
}

impl AccuracyPolicy {
    pub fn validate(&self) -> Result<(), SpecFunError> {
        if !(self.target_rel_error > 0.0 && self.target_rel_error <= 1e-4) {
            return Err(SpecFunError::Policy("target_rel_error must lie in (0, 1e-4]"));
        }
        if self.max_terms < 50 {
            return Err(SpecFunError::Policy("max_terms must be at least 50"));
        }
        if !(self.large_x_switch > 0.0) {
            return Err(SpecFunError::Policy("large_x_switch must be positive"));
        }
        if !(self.log_eps > 0.0 && self.log_eps < 0.05) {
            return Err(SpecFunError::Policy("log_eps must lie in (0, 0.05)"));
        }
        if !(self.bessel_k_series_max > 0.0) {
            return Err(SpecFunError::Policy("bessel_k_series_max must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SpecFunError {
    #[error("gamma function pole at {0}")]
    Pole(i64),
    #[error("{what}: no convergence within {terms} terms")]
    NonConvergence { what: &'static str, terms: usize },
    #[error("{what}: cancellation leaves relative error {estimate:e}")]
    Cancellation { what: &'static str, estimate: f64 },
    #[error("{what}: argument outside the supported range")]
    Domain { what: &'static str },
    #[error("{what}: order is degenerate and the offset limit failed")]
    DegenerateOrder { what: &'static str },
    #[error("{what}: imaginary residue {residue:e} exceeds tolerance")]
    NotReal { what: &'static str, residue: f64 },
    #[error("{what}: overflow")]
    Overflow { what: &'static str },
    #[error("invalid accuracy policy: {0}")]
    Policy(&'static str),
}

pub(crate) fn check_real(
    what: &'static str,
    z: num_complex::Complex64,
    scale: f64,
    tol: f64,
) -> Result<f64, SpecFunError> {
    let s = scale.max(z.re.abs());
    if z.im.abs() > tol * s && z.im.abs() > 1e-300 {
        return Err(SpecFunError::NotReal { what, residue: z.im.abs() / s.max(1e-300) });
    }
    Ok(z.re)
}

/// Lagrange interpolation through nodes `c + {-2,-1,1,2}·h`, evaluated at `t`.
pub(crate) fn offset_interpolate(
    c: num_complex::Complex64,
    h: f64,
    t: num_complex::Complex64,
    vals: [num_complex::Complex64; 4],
) -> num_complex::Complex64 {
    let offs = [-2.0, -1.0, 1.0, 2.0];
    let s = (t - c) / h;
    let mut acc = num_complex::Complex64::new(0.0, 0.0);
    for i in 0..4 {
        let mut l = num_complex::Complex64::new(1.0, 0.0);
        for j in 0..4 {
            if i != j {
                l *= (s - offs[j]) / (offs[i] - offs[j]);
            }
        }
        acc += l * vals[i];
    }
    acc
}
