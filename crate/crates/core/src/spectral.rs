//! The continual eigenbasis f_{a,m}(x) = W_{a,im}(x)/x of A, B and K₊₊.

#[allow(unused_imports)]
use num_traits::Float;
use alloc::vec::Vec;
use core::f64::consts::PI;
use num_complex::Complex64;

use crate::kernels::{BlockTag, KernelMachine};
use crate::lab::{discretize_block, QuadratureGrid};
use crate::params::ParameterSet;
use crate::quad::composite;
use crate::specfun::{log_gamma, series_parts, whittaker, AccuracyPolicy, BesselKind};
use crate::Result;

/// f_{a,m} with its first two derivatives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenValue3 {
    pub value: f64,
    pub d1: f64,
    pub d2: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenFunction {
    pub a: f64,
    pub m: f64,
}

impl EigenFunction {
    pub fn new(a: f64, m: f64) -> Self {
        EigenFunction { a, m }
    }

    pub fn eval(&self, x: f64, policy: &AccuracyPolicy) -> Result<f64> {
        f_am(self.a, self.m, x, policy)
    }

    pub fn eval3(&self, x: f64, policy: &AccuracyPolicy) -> Result<EigenValue3> {
        f_am_derivs(self.a, self.m, x, policy)
    }
}

fn imag(m: f64) -> Complex64 {
    Complex64::new(0.0, m)
}

pub fn f_am(a: f64, m: f64, x: f64, policy: &AccuracyPolicy) -> Result<f64> {
    Ok(whittaker(a, imag(m), x, policy)?.value / x)
}

/// f = W/x, f′ = (W′ − f)/x, f″ = (W″ − 2f′)/x.
pub fn f_am_derivs(a: f64, m: f64, x: f64, policy: &AccuracyPolicy) -> Result<EigenValue3> {
    let w = whittaker(a, imag(m), x, policy)?;
    let value = w.value / x;
    let d1 = (w.d1 - value) / x;
    let d2 = (w.d2 - 2.0 * d1) / x;
    Ok(EigenValue3 { value, d1, d2 })
}

/// f_{0,m}(x) = K_{im}(x/2)/√(πx), with derivatives, from the Bessel code.
pub fn f_0m_bessel(m: f64, x: f64, policy: &AccuracyPolicy) -> Result<EigenValue3> {
    let e = crate::specfun::bessel_complex(BesselKind::K, imag(m), 0.5 * x, policy)?;
    let (k, k1, k2) = (e.value.re, 0.5 * e.d1.re, 0.25 * e.d2.re);
    let s = 1.0 / (PI * x).sqrt();
    let s1 = -0.5 * s / x;
    let s2 = 0.75 * s / (x * x);
    Ok(EigenValue3 { value: s * k, d1: s1 * k + s * k1, d2: s2 * k + 2.0 * s1 * k1 + s * k2 })
}

/// 𝔇(a) = −(d/dx) x² (d/dx) + (a − x/2)².
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SturmLiouville {
    pub a: f64,
}

impl SturmLiouville {
    /// (𝔇f, scale of the individual terms).
    pub fn apply(&self, x: f64, f: &EigenValue3) -> (f64, f64) {
        let t = [-2.0 * x * f.d1, -x * x * f.d2, (self.a - 0.5 * x).powi(2) * f.value];
        (t.iter().sum(), t.iter().map(|v| v.abs()).fold(0.0, f64::max))
    }

    pub fn eigenvalue(&self, m: f64) -> f64 {
        self.a * self.a + 0.25 + m * m
    }

    /// |𝔇f − λf| / scale.
    pub fn residual(&self, m: f64, x: f64, f: &EigenValue3) -> f64 {
        let (df, scale) = self.apply(x, f);
        let lf = self.eigenvalue(m) * f.value;
        (df - lf).abs() / scale.max(lf.abs()).max(1e-300)
    }
}

pub fn sl_residual(a: f64, m: f64, x: f64, policy: &AccuracyPolicy) -> Result<f64> {
    Ok(SturmLiouville { a }.residual(m, x, &f_am_derivs(a, m, x, policy)?))
}

/// The same residual at a = 0 through K_{im}.
pub fn sl_residual_bessel(m: f64, x: f64, policy: &AccuracyPolicy) -> Result<f64> {
    Ok(SturmLiouville { a: 0.0 }.residual(m, x, &f_0m_bessel(m, x, policy)?))
}

/// 𝔇_x K₊₊(x,y) − 𝔇_y K₊₊(x,y) by central differences with step h, scaled
/// by the largest term.
pub fn kernel_commutation(machine: &KernelMachine, x: f64, y: f64, h: f64) -> Result<f64> {
    let a = machine.params().a();
    let k = |u: f64, v: f64| machine.k_block(BlockTag::PP, u, v);
    let k0 = k(x, y)?;
    let (kxp, kxm) = (k(x + h, y)?, k(x - h, y)?);
    let (kyp, kym) = (k(x, y + h)?, k(x, y - h)?);
    let dx = (kxp - kxm) / (2.0 * h);
    let dxx = (kxp - 2.0 * k0 + kxm) / (h * h);
    let dy = (kyp - kym) / (2.0 * h);
    let dyy = (kyp - 2.0 * k0 + kym) / (h * h);
    let tx = [-2.0 * x * dx, -x * x * dxx, (a - 0.5 * x).powi(2) * k0];
    let ty = [-2.0 * y * dy, -y * y * dyy, (a - 0.5 * y).powi(2) * k0];
    let diff: f64 = tx.iter().sum::<f64>() - ty.iter().sum::<f64>();
    let scale = tx.iter().chain(&ty).map(|v| v.abs()).fold(0.0, f64::max);
    Ok(diff.abs() / scale)
}

/// Γ(½ − a + im)Γ(½ − a − im) = |Γ(½ − a + im)|².
pub fn gamma_pair(a: f64, m: f64) -> Result<f64> {
    Ok((2.0 * log_gamma(Complex64::new(0.5 - a, m))?.re).exp())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Transform {
    /// A f_{−a,m} = (σ/π)|Γ(½−a+im)|² f_{a,m}.
    A,
    /// B f_{a,m} = (σ/π)|Γ(½+a+im)|² f_{−a,m}.
    B,
}

/// Eigenvalue of A (or B) between the two bases.
pub fn transform_eigenvalue(which: Transform, params: &ParameterSet, m: f64) -> Result<f64> {
    let a = match which {
        Transform::A => params.a(),
        Transform::B => -params.a(),
    };
    Ok(params.sigma() / PI * gamma_pair(a, m)?)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProbeResidual {
    pub x: f64,
    /// Grid quadrature plus the analytic piece below the grid.
    pub quadrature: f64,
    pub tail: f64,
    pub closed_form: f64,
    pub rel: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TransformReport {
    pub which: Transform,
    pub m: f64,
    pub nodes: usize,
    pub probes: Vec<ProbeResidual>,
}

impl TransformReport {
    pub fn max_rel(&self) -> f64 {
        self.probes.iter().map(|p| p.rel).fold(0.0, f64::max)
    }
}

/// Quadrature of the transform over `grid` against the closed form, with the
/// σ/π prefactor divided out. The result depends on a only, so it is usable
/// even where (a, μ) has σ² ≤ 0.
pub fn transform_identity_a(
    which: Transform,
    a: f64,
    m: f64,
    probes: &[f64],
    grid: &QuadratureGrid,
    policy: &AccuracyPolicy,
) -> Result<TransformReport> {
    if a.abs() >= 0.5 {
        return Err(crate::lab::LabError::Unbounded.into());
    }
    // A₀(x,y) = (x/y)^{a}…, B₀(x,y) = (x/y)^{−a}…
    let (sa, src) = match which {
        Transform::A => (a, -a),
        Transform::B => (-a, a),
    };
    let samples: Vec<f64> =
        grid.nodes().iter().map(|&y| f_am(src, m, y, policy)).collect::<Result<_>>()?;
    let eig = gamma_pair(-src, m)?;
    // below the grid f(y) ≈ Σ P_s y^{−1/2 + s·im}, so the integrand is a sum
    // of powers y^{e_s} with Re e_s = −sa − 1/2 > −1
    let delta = grid.lower_edge();
    let mut below = Complex64::new(0.0, 0.0);
    for part in series_parts(src, imag(m))? {
        if let Some(lp) = part.log_prefactor {
            let e1 = Complex64::new(0.5 - sa, part.sign * m);
            below += (lp + e1 * delta.ln()).exp() / e1;
        }
    }
    let mut out = Vec::with_capacity(probes.len());
    for &x in probes {
        let mut acc = 0.0;
        for ((&y, &w), &fy) in grid.nodes().iter().zip(grid.weights()).zip(&samples) {
            acc += w * (x / y).powf(sa) * (-0.5 * (x + y)).exp() / (x + y) * fy;
        }
        let tail = x.powf(sa) * (-0.5 * x).exp() / x * below.re;
        let total = acc + tail;
        let closed = eig * f_am(sa, m, x, policy)?;
        out.push(ProbeResidual { x, quadrature: total, tail, closed_form: closed, rel: (total - closed).abs() / closed.abs() });
    }
    Ok(TransformReport { which, m, nodes: grid.len(), probes: out })
}

pub fn transform_identity(
    which: Transform,
    params: &ParameterSet,
    m: f64,
    probes: &[f64],
    grid: &QuadratureGrid,
    policy: &AccuracyPolicy,
) -> Result<TransformReport> {
    transform_identity_a(which, params.a(), m, probes, grid, policy)
}

/// λ_AB(m) = (cos 2πμ − cos 2πa)/(ch 2πm + cos 2πa).
pub fn ab_eigenvalue(params: &ParameterSet, m: f64) -> f64 {
    2.0 * params.sigma() * params.sigma() / ((2.0 * PI * m).cosh() + (2.0 * PI * params.a()).cos())
}

/// λ_K(m) = (cos 2πμ − cos 2πa)/(ch 2πm + cos 2πμ).
pub fn kpp_eigenvalue(params: &ParameterSet, m: f64) -> f64 {
    let c2mu = (params.mu() * (2.0 * PI)).cos().re;
    2.0 * params.sigma() * params.sigma() / ((2.0 * PI * m).cosh() + c2mu)
}

/// A smooth bump supported on [lo, hi].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bump {
    pub lo: f64,
    pub hi: f64,
}

impl Bump {
    pub fn new(lo: f64, hi: f64) -> Self {
        Bump { lo, hi }
    }

    pub fn eval(&self, x: f64) -> f64 {
        let t = (2.0 * x - self.lo - self.hi) / (self.hi - self.lo);
        if t.abs() >= 1.0 {
            0.0
        } else {
            (-1.0 / (1.0 - t * t)).exp()
        }
    }

    /// Gauss nodes and weights resolving the bump.
    fn rule(&self) -> (Vec<f64>, Vec<f64>) {
        let edges: Vec<f64> = (0..=8).map(|k| self.lo + (self.hi - self.lo) * k as f64 / 8.0).collect();
        composite(&edges, 16)
    }
}

/// Plancherel density m·sh(2πm)|Γ(½−a+im)|²/π² that makes
/// (f, g) = ∫₀^∞ (f, f_{a,m})(f_{a,m}, g) ρ(m) dm.
pub fn plancherel_density(a: f64, m: f64) -> Result<f64> {
    let lg = 2.0 * log_gamma(Complex64::new(0.5 - a, m))?.re;
    // sh(2πm) e^{lg} without overflow for large m
    let e = 2.0 * PI * m;
    let sh = if e > 30.0 { 0.5 * (e + lg).exp() } else { e.sinh() * lg.exp() };
    Ok(m * sh / (PI * PI))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlancherelReport {
    pub direct: f64,
    pub reconstructed: f64,
    /// |reconstructed − direct| / (‖f‖‖g‖).
    pub rel_error: f64,
    pub m_max: f64,
    /// Contribution of the last unit interval in m, relative to ‖f‖‖g‖.
    pub tail_estimate: f64,
    /// The cap on m was hit before the tail fell below tolerance.
    pub cutoff_warning: bool,
}

pub const PLANCHEREL_TAIL_TOL: f64 = 1e-8;
pub const PLANCHEREL_M_CAP: f64 = 200.0;

/// Reconstructs (f, g) from the spectral side on unit panels in m with 32
/// points each, stopping once a whole panel contributes less than
/// [`PLANCHEREL_TAIL_TOL`] · ‖f‖‖g‖.
pub fn plancherel_reconstruct(a: f64, f: &Bump, g: &Bump, policy: &AccuracyPolicy) -> Result<PlancherelReport> {
    if a.abs() >= 0.5 {
        return Err(crate::lab::LabError::Unbounded.into());
    }
    let (fx, fw) = f.rule();
    let (gx, gw) = g.rule();
    let ip = |xs: &[f64], ws: &[f64], u: &dyn Fn(f64) -> f64, v: &dyn Fn(f64) -> Result<f64>| -> Result<f64> {
        let mut s = 0.0;
        for (&x, &w) in xs.iter().zip(ws) {
            let ux = u(x);
            if ux != 0.0 {
                s += w * ux * v(x)?;
            }
        }
        Ok(s)
    };
    let ff = ip(&fx, &fw, &|x| f.eval(x), &|x| Ok(f.eval(x)))?;
    let gg = ip(&gx, &gw, &|x| g.eval(x), &|x| Ok(g.eval(x)))?;
    let direct = ip(&fx, &fw, &|x| f.eval(x), &|x| Ok(g.eval(x)))?;
    let scale = (ff * gg).sqrt();
    let (mn, mw) = crate::quad::gauss_legendre(32);
    let mut total = 0.0;
    let mut m_max = 0.0;
    let mut tail = f64::INFINITY;
    let mut lo = 0.0;
    while lo < PLANCHEREL_M_CAP {
        let mut panel = 0.0;
        let mut panel_abs = 0.0;
        for (t, w) in mn.iter().zip(&mw) {
            let m = lo + 0.5 * (1.0 + t);
            let w = 0.5 * w;
            let phi = |x: f64| f_am(a, m, x, policy);
            let cf = ip(&fx, &fw, &|x| f.eval(x), &phi)?;
            let cg = ip(&gx, &gw, &|x| g.eval(x), &phi)?;
            let term = w * cf * cg * plancherel_density(a, m)?;
            panel += term;
            panel_abs += term.abs();
        }
        total += panel;
        lo += 1.0;
        m_max = lo;
        tail = panel_abs / scale;
        if tail < PLANCHEREL_TAIL_TOL {
            break;
        }
    }
    Ok(PlancherelReport {
        direct,
        reconstructed: total,
        rel_error: (total - direct).abs() / scale,
        m_max,
        tail_estimate: tail,
        cutoff_warning: tail >= PLANCHEREL_TAIL_TOL,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KppEigen {
    pub m: f64,
    pub closed: f64,
    pub resolvent: f64,
    pub rayleigh: f64,
}

/// λ_K(m) three ways. The quadrature route is ⟨g, K₊₊f⟩/⟨g, f⟩ for
/// f = f_{a,m} sampled on `grid` and a bump g on the core; it equals λ_K
/// for any g whenever f is an eigenfunction.
pub fn kpp_eigen_three_ways(
    params: &ParameterSet,
    ms: &[f64],
    grid: &QuadratureGrid,
    window: Bump,
    policy: &AccuracyPolicy,
) -> Result<Vec<KppEigen>> {
    let machine = KernelMachine::new(*params, *policy)?;
    let k = discretize_block(&machine, BlockTag::PP, grid)?;
    let sw: Vec<f64> = grid.weights().iter().map(|w| w.sqrt()).collect();
    let mut out = Vec::with_capacity(ms.len());
    for &m in ms {
        let f: Vec<f64> = grid.nodes().iter().map(|&x| f_am(params.a(), m, x, policy)).collect::<Result<_>>()?;
        let v = nalgebra::DVector::from_iterator(f.len(), f.iter().zip(&sw).map(|(f, s)| f * s));
        let kv = &k * &v;
        let (mut num, mut den) = (0.0, 0.0);
        for (i, &x) in grid.nodes().iter().enumerate() {
            let gw = window.eval(x) * sw[i];
            num += gw * kv[i];
            den += gw * v[i];
        }
        let lab = ab_eigenvalue(params, m);
        out.push(KppEigen { m, closed: kpp_eigenvalue(params, m), resolvent: lab / (1.0 + lab), rayleigh: num / den });
    }
    Ok(out)
}

/// (1/π)∫₀^∞ ln(1 + λ_AB(m)) dm: the growth rate of ln det(1 + AB) per unit
/// of ln(1/δ) as the domain [δ, X] extends toward 0.
pub fn log_det_rate(params: &ParameterSet) -> f64 {
    let (mn, mw) = crate::quad::gauss_legendre(32);
    let mut s = 0.0;
    for k in 0..40 {
        for (t, w) in mn.iter().zip(&mw) {
            let m = 0.25 * (k as f64 + 0.5 * (1.0 + t));
            s += 0.125 * w * ab_eigenvalue(params, m).ln_1p();
        }
    }
    s / PI
}

/// Slope of ln det(1 + AB) between the domains [δ₁, 40] and [δ₂, 40],
/// per unit of ln(δ₁/δ₂).
pub fn log_det_slope(params: &ParameterSet, delta1: f64, delta2: f64, per_panel: usize) -> Result<f64> {
    let ld = |d: f64| -> Result<f64> {
        let g = QuadratureGrid::log_panels(d, 40.0, per_panel)?;
        let (sigma, a) = (params.sigma(), params.a());
        let op = crate::lab::discretize(|u, v| Ok(crate::kernels::l_kernel_value(sigma, a, u, v)), &g)?;
        let ab = &op.matrix * op.matrix.transpose();
        Ok(crate::lab::fredholm_log_det(&ab, 1.0)?.1)
    };
    Ok((ld(delta2)? - ld(delta1)?) / (delta1 / delta2).ln())
}
