//! The translation-invariant tail kernel near the origin.
//!
//! With x = e^{−ξ/C} and the symmetric Jacobian √(x′(ξ)y′(η)) = √(xy)/C the
//! kernel blocks tend to functions of ζ = ξ − η:
//!
//! k₊₊(ζ) = sh(Aζ)/((z−z′) sh(Bζ)),
//! k₊₋(ζ) = [sin πz·e^{−Aζ} − sin πz′·e^{Aζ}] / (σ(z−z′)(e^{Bζ} + e^{−Bζ})).

#[allow(unused_imports)]
use num_traits::Float;
use alloc::vec::Vec;
use core::f64::consts::PI;
use num_complex::Complex64;

use crate::kernels::{BlockTag, KernelMachine, Sign};
use crate::params::ParameterSet;
use crate::{Error, Result};

/// Smallest x = e^{−ξ/C} the convergence check will evaluate at.
pub const UNDERFLOW_GUARD: f64 = 1e-280;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailConstants {
    /// C(z, z′): K₊₊(x, x) ≈ C/x near 0.
    pub c_density: f64,
    /// B = 1/(2C).
    pub rate_b: f64,
    /// A = (z − z′)B; real for real μ, imaginary for imaginary μ.
    pub rate_a: Complex64,
}

fn zero_gap(params: &ParameterSet) -> Result<Complex64> {
    let d = params.z() - params.z_prime();
    if d.norm() == 0.0 {
        return Err(Error::Unsupported("the tail kernel requires z != z'"));
    }
    Ok(d)
}

pub fn tail_constants(params: &ParameterSet) -> Result<TailConstants> {
    let d = zero_gap(params)?;
    let ss = (params.z() * PI).sin() * (params.z_prime() * PI).sin();
    let c = d * ss / ((d * PI).sin() * PI);
    let c_density = c.re;
    let rate_b = 0.5 / c_density;
    Ok(TailConstants { c_density, rate_b, rate_a: d * rate_b })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailKernel {
    params: ParameterSet,
    constants: TailConstants,
    gap: Complex64,
    sin_z: Complex64,
    sin_zp: Complex64,
}

impl TailKernel {
    pub fn new(params: ParameterSet) -> Result<Self> {
        let constants = tail_constants(&params)?;
        Ok(TailKernel {
            params,
            constants,
            gap: zero_gap(&params)?,
            sin_z: (params.z() * PI).sin(),
            sin_zp: (params.z_prime() * PI).sin(),
        })
    }

    pub fn params(&self) -> &ParameterSet {
        &self.params
    }

    pub fn constants(&self) -> &TailConstants {
        &self.constants
    }

    /// k₊₊(ζ), equal to 1 at ζ = 0.
    pub fn k_pp(&self, zeta: f64) -> f64 {
        let (a, b) = (self.constants.rate_a, self.constants.rate_b);
        let bz = b * zeta;
        if bz.abs() < 1e-4 {
            let r = a / (self.gap * b);
            let z2 = zeta * zeta;
            return (r * (Complex64::new(1.0, 0.0) + (a * a - b * b) * z2 / 6.0)).re;
        }
        ((a * zeta).sinh() / (self.gap * bz.sinh())).re
    }

    /// k₊₋(ζ).
    pub fn k_pm(&self, zeta: f64) -> f64 {
        let (a, b) = (self.constants.rate_a, self.constants.rate_b);
        let bz = (b * zeta).abs();
        // divide through by e^{B|ζ|} to keep both exponentials bounded
        let num = self.sin_z * (-a * zeta - bz).exp() - self.sin_zp * (a * zeta - bz).exp();
        let den = 1.0 + (-2.0 * bz).exp();
        (num / (self.gap * self.params.sigma() * den)).re
    }

    /// 𝒦 blocks as functions of Δ = ξ − η.
    pub fn block(&self, tag: BlockTag, delta: f64) -> f64 {
        match (tag.row, tag.col) {
            (Sign::Plus, Sign::Plus) | (Sign::Minus, Sign::Minus) => self.k_pp(delta),
            (Sign::Plus, Sign::Minus) => self.k_pm(delta),
            (Sign::Minus, Sign::Plus) => -self.k_pm(-delta),
        }
    }

    /// f(u) = 2 sin πz sin πz′/(cos π(z−z′) + ch(πu/B)).
    pub fn f(&self, u: f64) -> f64 {
        let ss = (self.sin_z * self.sin_zp).re;
        2.0 * ss / (self.cos_gap() + (PI * u / self.constants.rate_b).cosh())
    }

    /// g(u) = 2σ cos(π(z+z′)/2 + iπu/(2B))/(cos π(z−z′) + ch(πu/B)).
    pub fn g(&self, u: f64) -> Complex64 {
        let b = self.constants.rate_b;
        let arg = Complex64::new(PI * self.params.a(), PI * u / (2.0 * b));
        2.0 * self.params.sigma() * arg.cos() / (self.cos_gap() + (PI * u / b).cosh())
    }

    fn cos_gap(&self) -> f64 {
        (self.gap * PI).cos().re
    }

    /// [[f, g], [−ḡ, f]] at u.
    pub fn symbol(&self, u: f64) -> [[Complex64; 2]; 2] {
        let f = Complex64::new(self.f(u), 0.0);
        let g = self.g(u);
        [[f, g], [-g.conj(), f]]
    }

    /// Decay rate B − |Re A| of both profiles.
    pub fn decay_rate(&self) -> f64 {
        self.constants.rate_b - self.constants.rate_a.re.abs()
    }

    /// ∫e^{iuζ}k(ζ)dζ by the trapezoid rule on [−L, L], which is spectrally
    /// accurate for these analytic, exponentially decaying profiles.
    pub fn transform(&self, tag: BlockTag, u: f64, half_width: f64, samples: usize) -> Complex64 {
        let h = 2.0 * half_width / samples as f64;
        let mut acc = Complex64::new(0.0, 0.0);
        for k in 0..samples {
            let zeta = -half_width + h * k as f64;
            acc += Complex64::from_polar(self.block(tag, zeta), u * zeta);
        }
        acc * h
    }

    /// √(x′y′)·K(x, y) at x = e^{−ξ/C}, y = e^{−η/C}.
    pub fn rescaled(&self, machine: &KernelMachine, tag: BlockTag, xi: f64, eta: f64) -> Result<f64> {
        let c = self.constants.c_density;
        let x = (-xi / c).exp();
        let y = (-eta / c).exp();
        let smallest = x.min(y);
        if !(smallest >= UNDERFLOW_GUARD) {
            return Err(Error::Underflow(smallest));
        }
        Ok(x.sqrt() * y.sqrt() / c * machine.k_block(tag, x, y)?)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailError {
    pub xi: f64,
    pub eta: f64,
    pub rescaled: f64,
    pub tail: f64,
    pub abs_error: f64,
}

/// |√(x′y′)K(x(ξ), y(η)) − 𝒦(ξ − η)| for each (ξ, η).
pub fn tail_convergence(
    machine: &KernelMachine,
    tag: BlockTag,
    points: &[(f64, f64)],
) -> Result<Vec<TailError>> {
    let tk = TailKernel::new(*machine.params())?;
    points
        .iter()
        .map(|&(xi, eta)| {
            let rescaled = tk.rescaled(machine, tag, xi, eta)?;
            let tail = tk.block(tag, xi - eta);
            Ok(TailError { xi, eta, rescaled, tail, abs_error: (rescaled - tail).abs() })
        })
        .collect()
}

/// Errors non-increasing along the list, ignoring steps where both values
/// are at or below `floor`.
pub fn monotone_to_floor(errors: &[f64], floor: f64) -> bool {
    errors.windows(2).all(|w| w[1] <= w[0] || (w[0] <= floor && w[1] <= floor))
}
