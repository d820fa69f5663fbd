//! The Bessel/Macdonald scaling limit of the matrix Whittaker kernel.
//!
//! With z = z₀ + N, z′ = z₀′ + N (N even) and x = ξ/N, the blocks of
//! (1/N)K(ξ/N, η/N) tend to kernels built from
//!
//! A(ξ) = [sin πz₀ J_{2μ}(2√ξ) − sin πz₀′ J_{−2μ}(2√ξ)]/sin 2πμ,
//! B(ξ) = K_{2μ}(2√ξ),
//!
//! and their ξ d/dξ derivatives Ã, B̃.

use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;
use core::f64::consts::PI;
use num_complex::Complex64;

use crate::kernels::{Aux, BlockTag, KernelMachine, Sign};
use crate::params::{make_parameters, shift_parameters, ParameterSet};
use crate::specfun::{
    bessel_complex, hyper_0f1, kummer_1f1, log_gamma, AccuracyPolicy, BesselEval, BesselKind,
    SpecFunError,
};
use crate::{Error, Result};

/// Relative gap |ξ − η| below which the diagonal blocks use the confluent form.
pub const DIAGONAL_GAP: f64 = 1e-6;

/// Base parameters and an even shift N.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LimitParameters {
    base: ParameterSet,
    shift: i64,
}

impl LimitParameters {
    pub fn new(z0: Complex64, z0_prime: Complex64, shift: i64) -> Result<Self> {
        let base = make_parameters(z0, z0_prime)?;
        Self::from_base(base, shift)
    }

    pub fn from_base(base: ParameterSet, shift: i64) -> Result<Self> {
        if shift <= 0 || shift % 2 != 0 {
            return Err(Error::Unsupported("the shift N must be a positive even integer"));
        }
        Ok(LimitParameters { base, shift })
    }

    pub fn base(&self) -> &ParameterSet {
        &self.base
    }

    pub fn shift(&self) -> i64 {
        self.shift
    }

    pub fn a0(&self) -> f64 {
        self.base.a()
    }

    pub fn mu(&self) -> Complex64 {
        self.base.mu()
    }

    /// (z₀ + N, z₀′ + N).
    pub fn shifted(&self) -> ParameterSet {
        shift_parameters(&self.base, self.shift)
    }
}

/// Value, ξ d/dξ and (ξ d/dξ)² of a limit function.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LimitValue {
    pub value: f64,
    pub tilde: f64,
    pub tilde2: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LimitFunction {
    A,
    B,
    ATilde,
    BTilde,
}

impl LimitFunction {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "A" => Some(LimitFunction::A),
            "B" => Some(LimitFunction::B),
            "A_tilde" | "At" => Some(LimitFunction::ATilde),
            "B_tilde" | "Bt" => Some(LimitFunction::BTilde),
            _ => None,
        }
    }
}

/// The four limit functions and the limit blocks for fixed (z₀, z₀′).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LimitKernel {
    z0: Complex64,
    z0_prime: Complex64,
    nu: Complex64,
    sin_z0: Complex64,
    sin_z0p: Complex64,
    sin_2mu: Complex64,
    /// sin πz₀ sin πz₀′, real for admissible parameters.
    ss: f64,
    policy: AccuracyPolicy,
}

fn check(what: &'static str, v: Complex64, scale: f64) -> Result<f64> {
    if v.im.abs() > 1e-9 * scale.max(v.re.abs()) && v.im.abs() > 1e-300 {
        return Err(SpecFunError::NotReal { what, residue: v.im.abs() / scale.max(1e-300) }.into());
    }
    Ok(v.re)
}

/// Converts X-derivatives at X = 2√ξ to ξ d/dξ derivatives.
fn tilde_pair(x: f64, v1: Complex64, v2: Complex64) -> (Complex64, Complex64) {
    (v1 * (0.5 * x), v1 * (0.25 * x) + v2 * (0.25 * x * x))
}

impl LimitKernel {
    pub fn new(lp: &LimitParameters, policy: AccuracyPolicy) -> Result<Self> {
        Self::unchecked(lp.base.z(), lp.base.z_prime(), policy)
    }

    /// No admissibility check on (z₀, z₀′); used for the integer-parameter
    /// degenerations. Only sin 2πμ ≠ 0 and a real sin πz₀ sin πz₀′ are needed.
    pub fn unchecked(z0: Complex64, z0_prime: Complex64, policy: AccuracyPolicy) -> Result<Self> {
        policy.validate()?;
        let mu = 0.5 * (z0 - z0_prime);
        let sin_2mu = (mu * (2.0 * PI)).sin();
        if sin_2mu.norm() < 1e-12 {
            return Err(Error::Unsupported("the limit functions need sin(2 pi mu) != 0"));
        }
        let sin_z0 = (z0 * PI).sin();
        let sin_z0p = (z0_prime * PI).sin();
        let prod = sin_z0 * sin_z0p;
        let ss = check("sin(pi z0) sin(pi z0')", prod, prod.norm())?;
        Ok(LimitKernel { z0, z0_prime, nu: 2.0 * mu, sin_z0, sin_z0p, sin_2mu, ss, policy })
    }

    pub fn z0(&self) -> Complex64 {
        self.z0
    }

    pub fn z0_prime(&self) -> Complex64 {
        self.z0_prime
    }

    fn argument(xi: f64) -> Result<f64> {
        if !(xi > 0.0 && xi.is_finite()) {
            return Err(SpecFunError::Domain { what: "limit functions need xi > 0" }.into());
        }
        Ok(2.0 * xi.sqrt())
    }

    pub fn a(&self, xi: f64) -> Result<LimitValue> {
        let x = Self::argument(xi)?;
        let jp = bessel_complex(BesselKind::J, self.nu, x, &self.policy)?;
        let jm = bessel_complex(BesselKind::J, -self.nu, x, &self.policy)?;
        let comb = |p: Complex64, m: Complex64| (self.sin_z0 * p - self.sin_z0p * m) / self.sin_2mu;
        let size = |p: Complex64, m: Complex64| {
            ((self.sin_z0 * p).norm() + (self.sin_z0p * m).norm()) / self.sin_2mu.norm()
        };
        let (tp1, tp2) = tilde_pair(x, jp.d1, jp.d2);
        let (tm1, tm2) = tilde_pair(x, jm.d1, jm.d2);
        Ok(LimitValue {
            value: check("A", comb(jp.value, jm.value), size(jp.value, jm.value))?,
            tilde: check("A tilde", comb(tp1, tm1), size(tp1, tm1))?,
            tilde2: check("A tilde2", comb(tp2, tm2), size(tp2, tm2))?,
        })
    }

    pub fn b(&self, xi: f64) -> Result<LimitValue> {
        let x = Self::argument(xi)?;
        let k: BesselEval = bessel_complex(BesselKind::K, self.nu, x, &self.policy)?;
        let (t1, t2) = tilde_pair(x, k.d1, k.d2);
        let s = k.value.norm();
        Ok(LimitValue {
            value: check("B", k.value, s)?,
            tilde: check("B tilde", t1, t1.norm())?,
            tilde2: check("B tilde2", t2, t2.norm())?,
        })
    }

    pub fn function(&self, f: LimitFunction, xi: f64) -> Result<f64> {
        Ok(match f {
            LimitFunction::A => self.a(xi)?.value,
            LimitFunction::ATilde => self.a(xi)?.tilde,
            LimitFunction::B => self.b(xi)?.value,
            LimitFunction::BTilde => self.b(xi)?.tilde,
        })
    }

    /// 4 sin πz₀ sin πz₀′/π², the factor in front of the Macdonald kernel.
    pub fn macdonald_const(&self) -> f64 {
        4.0 * self.ss / (PI * PI)
    }

    fn coupling(&self) -> f64 {
        2.0 * self.ss.sqrt() / PI
    }

    /// [F(ξ)F̃(η) − F̃(ξ)F(η)]/(ξ − η), confluent near the diagonal.
    fn christoffel(f: &dyn Fn(f64) -> Result<LimitValue>, xi: f64, eta: f64) -> Result<f64> {
        if (xi - eta).abs() <= DIAGONAL_GAP * xi.max(eta) {
            // symmetric in (ξ, η), so the midpoint value is second order accurate
            let m = 0.5 * (xi + eta);
            let v = f(m)?;
            return Ok(-(v.value * v.tilde2 - v.tilde * v.tilde) / m);
        }
        let (u, v) = (f(xi)?, f(eta)?);
        Ok((u.value * v.tilde - u.tilde * v.value) / (xi - eta))
    }

    pub fn k_pp(&self, xi: f64, eta: f64) -> Result<f64> {
        Self::christoffel(&|t| self.a(t), xi, eta)
    }

    pub fn k_mm(&self, xi: f64, eta: f64) -> Result<f64> {
        Ok(self.macdonald_const() * Self::christoffel(&|t| self.b(t), xi, eta)?)
    }

    pub fn k_pm(&self, xi: f64, eta: f64) -> Result<f64> {
        let (u, v) = (self.a(xi)?, self.b(eta)?);
        Ok(-self.coupling() * (u.value * v.tilde - u.tilde * v.value) / (xi + eta))
    }

    pub fn block(&self, tag: BlockTag, xi: f64, eta: f64) -> Result<f64> {
        match (tag.row, tag.col) {
            (Sign::Plus, Sign::Plus) => self.k_pp(xi, eta),
            (Sign::Plus, Sign::Minus) => self.k_pm(xi, eta),
            (Sign::Minus, Sign::Plus) => Ok(-self.k_pm(eta, xi)?),
            (Sign::Minus, Sign::Minus) => self.k_mm(xi, eta),
        }
    }
}

/// The classical Bessel kernel with index ν.
pub fn bessel_kernel(nu: f64, xi: f64, eta: f64, policy: &AccuracyPolicy) -> Result<f64> {
    let f = |t: f64| -> Result<LimitValue> {
        let x = LimitKernel::argument(t)?;
        let j = bessel_complex(BesselKind::J, Complex64::new(nu, 0.0), x, policy)?;
        let (t1, t2) = tilde_pair(x, j.d1, j.d2);
        Ok(LimitValue { value: j.value.re, tilde: t1.re, tilde2: t2.re })
    };
    LimitKernel::christoffel(&f, xi, eta)
}

/// (2/π²)(cos 2πμ − cos 2πa₀).
pub fn macdonald_const(a0: f64, mu: Complex64) -> f64 {
    2.0 / (PI * PI) * ((mu * (2.0 * PI)).cos().re - (2.0 * PI * a0).cos())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaledRow {
    pub n: i64,
    pub scaled: f64,
    pub limit: f64,
    pub abs_error: f64,
}

/// (1/N)K(ξ/N, η/N) at (z₀ + N, z₀′ + N) against the limit block, for each N.
pub fn scaled_convergence(
    base: &ParameterSet,
    ns: &[i64],
    tag: BlockTag,
    xi: f64,
    eta: f64,
    policy: AccuracyPolicy,
) -> Result<Vec<ScaledRow>> {
    let lim = LimitKernel::unchecked(base.z(), base.z_prime(), policy)?;
    let limit = lim.block(tag, xi, eta)?;
    ns.iter()
        .map(|&n| {
            let lp = LimitParameters::from_base(*base, n)?;
            let machine = KernelMachine::new(lp.shifted(), policy)?;
            let nf = n as f64;
            let scaled = machine.k_block(tag, xi / nf, eta / nf)? / nf;
            Ok(ScaledRow { n, scaled, limit, abs_error: (scaled - limit).abs() })
        })
        .collect()
}

/// Largest error ratio over consecutive rows.
pub fn worst_ratio(rows: &[ScaledRow]) -> f64 {
    rows.windows(2).map(|w| w[1].abs_error / w[0].abs_error).fold(0.0, f64::max)
}

/// |1 − Γ(a+1)²/(Γ(z)Γ(z′)zz′)| at the shifted parameters.
pub fn coefficient_gap(lp: &LimitParameters) -> Result<f64> {
    let p = lp.shifted();
    let l = 2.0 * log_gamma(Complex64::new(p.a() + 1.0, 0.0))?
        - log_gamma(p.z())?
        - log_gamma(p.z_prime())?
        - (p.z() * p.z_prime()).ln();
    Ok((1.0 - l.exp()).norm())
}

/// φ(ξ/N)/Γ(a+1) against A(ξ), and ψ(ξ/N)Γ(a)/2 against B(ξ).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Intermediate {
    pub phi_scaled: f64,
    pub a: f64,
    pub psi_scaled: f64,
    pub b: f64,
}

pub fn intermediate(lp: &LimitParameters, xi: f64, policy: AccuracyPolicy) -> Result<Intermediate> {
    let p = lp.shifted();
    let machine = KernelMachine::new(p, policy)?;
    let lim = LimitKernel::new(lp, policy)?;
    let x = xi / lp.shift as f64;
    let lg1 = log_gamma(Complex64::new(p.a() + 1.0, 0.0))?.re;
    let lg = log_gamma(Complex64::new(p.a(), 0.0))?.re;
    Ok(Intermediate {
        phi_scaled: machine.aux(Aux::Phi, x)? * (-lg1).exp(),
        a: lim.a(xi)?.value,
        psi_scaled: machine.aux(Aux::Psi, x)? * lg.exp() / 2.0,
        b: lim.b(xi)?.value,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DegenerationRow {
    pub alpha: f64,
    pub kummer: f64,
    pub bessel_series: f64,
    pub abs_error: f64,
}

/// |₁F₁(α; γ; ξ/α) − ₀F₁(γ; ξ)| along a sweep of α.
pub fn limit_1f1_to_0f1(
    alphas: &[f64],
    gamma: f64,
    xi: f64,
    policy: &AccuracyPolicy,
) -> Result<Vec<DegenerationRow>> {
    let g = Complex64::new(gamma, 0.0);
    let target = hyper_0f1(g, xi, policy)?.re;
    alphas
        .iter()
        .map(|&alpha| {
            let k = kummer_1f1(Complex64::new(alpha, 0.0), g, xi / alpha, policy)?.re;
            Ok(DegenerationRow { alpha, kummer: k, bessel_series: target, abs_error: (k - target).abs() })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn reference_values() {
        let pol = AccuracyPolicy::default();
        let cases = [
            ((c(0.5, 0.3), c(0.5, -0.3)), [0.2410928478, 0.01194444834, 0.001601970973]),
            ((c(0.55, 0.0), c(0.35, 0.0)), [0.2597512339, 0.007660023455, 0.0007311101809]),
        ];
        for ((z, zp), want) in cases {
            let k = LimitKernel::unchecked(z, zp, pol).unwrap();
            let got = [k.k_pp(1.0, 2.0).unwrap(), k.k_pm(1.0, 2.0).unwrap(), k.k_mm(1.0, 2.0).unwrap()];
            for (g, w) in got.iter().zip(want) {
                assert!((g - w).abs() < 1e-9 * w.abs(), "{g} vs {w}");
            }
        }
    }

    #[test]
    fn constants_agree() {
        let k = LimitKernel::unchecked(c(0.55, 0.0), c(0.35, 0.0), AccuracyPolicy::default()).unwrap();
        assert!((k.macdonald_const() - macdonald_const(0.45, c(0.1, 0.0))).abs() < 1e-15);
    }

    #[test]
    fn mu_zero_rejected() {
        assert!(LimitKernel::unchecked(c(0.4, 0.0), c(0.4, 0.0), AccuracyPolicy::default()).is_err());
    }
}
