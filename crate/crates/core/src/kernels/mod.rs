//! The matrix Whittaker kernel, its auxiliary functions and the L-kernel.
//!
//! Profiles are the decaying functions p_κ(x) = x^{−1/2} W_{κ,μ}(x) with
//! κ ∈ {a+½, a−½, −a+½, −a−½}; the auxiliary functions φ, φ₋, ψ, ψ₋ are
//! e^{x/2} times these. The blocks are
//!
//! K₊₊ = [p(x)p₋(y) − p₋(x)p(y)] / (Γ(z)Γ(z′)(x−y)),
//! K₋₋ = [q(x)q₋(y) − q₋(x)q(y)] / (Γ(−z)Γ(−z′)(x−y)),
//! K₊₋ = (σ/π)[p(x)q(y) + zz′ p₋(x)q₋(y)] / (x+y),  K₋₊(x,y) = −K₊₋(y,x),
//!
//! with p = p_{a+½}, p₋ = p_{a−½}, q = p_{−a+½}, q₋ = p_{−a−½}.
//!
//! When both arguments are small the profiles are expanded in their ₁F₁
//! series and the divided differences are formed coefficientwise, which is
//! exact on the diagonal and free of the x^{−2μ} cancellation near 0.

mod split;

#[allow(unused_imports)]
use num_traits::Float;
use alloc::boxed::Box;
use alloc::vec::Vec;
use core::f64::consts::PI;
use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::params::ParameterSet;
use crate::specfun::{check_real, log_gamma, whittaker, AccuracyPolicy, SpecFunError};
use split::{SeriesSet, SplitNode};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sign {
    Plus,
    Minus,
}

/// One of the four blocks, indexed by (row sign, column sign).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct BlockTag {
    pub row: Sign,
    pub col: Sign,
}

impl BlockTag {
    pub const PP: BlockTag = BlockTag { row: Sign::Plus, col: Sign::Plus };
    pub const PM: BlockTag = BlockTag { row: Sign::Plus, col: Sign::Minus };
    pub const MP: BlockTag = BlockTag { row: Sign::Minus, col: Sign::Plus };
    pub const MM: BlockTag = BlockTag { row: Sign::Minus, col: Sign::Minus };
    pub const ALL: [BlockTag; 4] = [Self::PP, Self::PM, Self::MP, Self::MM];

    pub fn name(&self) -> &'static str {
        match (self.row, self.col) {
            (Sign::Plus, Sign::Plus) => "pp",
            (Sign::Plus, Sign::Minus) => "pm",
            (Sign::Minus, Sign::Plus) => "mp",
            (Sign::Minus, Sign::Minus) => "mm",
        }
    }

    pub fn parse(s: &str) -> Option<BlockTag> {
        Self::ALL.iter().copied().find(|t| t.name() == s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Aux {
    Phi,
    PhiMinus,
    Psi,
    PsiMinus,
    PhiTilde,
    PsiTilde,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LBlock {
    A,
    B,
}

/// Switches between the evaluation paths of the kernel blocks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelOptions {
    /// Both arguments at most this large: coefficientwise series path.
    pub split_max: f64,
    /// Relative gap below which the far-field path uses the midpoint Wronskian.
    pub diag_rel: f64,
    /// |μ| below this: even extrapolation from μ = ε, 2ε.
    pub log_eps: f64,
}

impl Default for KernelOptions {
    fn default() -> Self {
        KernelOptions { split_max: 2.0, diag_rel: 1e-5, log_eps: 1e-3 }
    }
}

/// Profile index in the order p, p₋, q, q₋.
const P: usize = 0;
const PM: usize = 1;
const Q: usize = 2;
const QM: usize = 3;

/// Everything the block formulas need at one argument.
#[derive(Debug, Clone)]
pub struct KernelNode {
    x: f64,
    /// (value, x-derivative) of each profile.
    prof: [(f64, f64); 4],
    split: Option<SplitNode>,
}

impl KernelNode {
    pub fn x(&self) -> f64 {
        self.x
    }
}

/// Evaluator for the kernel blocks at fixed parameters.
#[derive(Debug, Clone)]
pub struct KernelMachine {
    params: ParameterSet,
    policy: AccuracyPolicy,
    options: KernelOptions,
    kappas: [f64; 4],
    /// log(1/(Γ(z)Γ(z′))) and log(1/(Γ(−z)Γ(−z′))).
    log_gpp: Complex64,
    log_gmm: Complex64,
    series: Option<SeriesSet>,
    /// Machines at μ = ε and μ = 2ε when |μ| is below `log_eps`.
    offsets: Option<Box<[KernelMachine; 2]>>,
}

impl KernelMachine {
    pub fn new(params: ParameterSet, policy: AccuracyPolicy) -> Result<Self, SpecFunError> {
        Self::with_options(params, policy, KernelOptions::default())
    }

    pub fn with_options(
        params: ParameterSet,
        policy: AccuracyPolicy,
        options: KernelOptions,
    ) -> Result<Self, SpecFunError> {
        policy.validate()?;
        let a = params.a();
        let z = params.z();
        let zp = params.z_prime();
        let log_gpp = -(log_gamma(z)? + log_gamma(zp)?);
        let log_gmm = -(log_gamma(-z)? + log_gamma(-zp)?);
        let kappas = [a + 0.5, a - 0.5, -a + 0.5, -a - 0.5];
        let mu = params.mu();
        let (series, offsets) = if mu.norm() < options.log_eps {
            let eps = options.log_eps;
            let at = |m: f64| -> Result<KernelMachine, SpecFunError> {
                let shifted = if mu.im != 0.0 { Complex64::new(0.0, m) } else { Complex64::new(m, 0.0) };
                let p = ParameterSet::from_a_mu(a, shifted)
                    .map_err(|_| SpecFunError::DegenerateOrder { what: "kernel offset parameters" })?;
                KernelMachine::with_options(p, policy, KernelOptions { log_eps: 0.0, ..options })
            };
            (None, Some(Box::new([at(eps)?, at(2.0 * eps)?])))
        } else {
            (SeriesSet::new(&kappas, mu, options.split_max, &policy)?, None)
        };
        Ok(KernelMachine { params, policy, options, kappas, log_gpp, log_gmm, series, offsets })
    }

    pub fn params(&self) -> &ParameterSet {
        &self.params
    }

    pub fn policy(&self) -> &AccuracyPolicy {
        &self.policy
    }

    pub fn options(&self) -> &KernelOptions {
        &self.options
    }

    fn profile(&self, which: usize, x: f64) -> Result<(f64, f64), SpecFunError> {
        let w = whittaker(self.kappas[which], self.params.mu(), x, &self.policy)?;
        let s = x.powf(-0.5);
        Ok((s * w.value, s * (w.d1 - 0.5 * w.value / x)))
    }

    /// Precomputes the per-argument data used by [`Self::block_at`].
    pub fn node(&self, x: f64) -> Result<KernelNode, SpecFunError> {
        if !(x > 0.0 && x.is_finite()) {
            return Err(SpecFunError::Domain { what: "kernel argument must be positive" });
        }
        let mut prof = [(0.0, 0.0); 4];
        if self.offsets.is_none() {
            for (j, slot) in prof.iter_mut().enumerate() {
                *slot = self.profile(j, x)?;
            }
        }
        let split = match &self.series {
            Some(s) if x <= self.options.split_max => s.node(x, &self.policy),
            _ => None,
        };
        Ok(KernelNode { x, prof, split })
    }

    /// φ, φ₋, ψ, ψ₋ and the tilde variants xφ′, xψ′.
    pub fn aux(&self, name: Aux, x: f64) -> Result<f64, SpecFunError> {
        if !(x > 0.0) {
            return Err(SpecFunError::Domain { what: "aux: need x > 0" });
        }
        let e = (0.5 * x).exp();
        let (which, tilde) = match name {
            Aux::Phi => (P, false),
            Aux::PhiMinus => (PM, false),
            Aux::Psi => (Q, false),
            Aux::PsiMinus => (QM, false),
            Aux::PhiTilde => (P, true),
            Aux::PsiTilde => (Q, true),
        };
        let (v, d) = self.profile(which, x)?;
        Ok(if tilde { x * e * (d + 0.5 * v) } else { e * v })
    }

    /// A block at two arguments.
    pub fn k_block(&self, tag: BlockTag, x: f64, y: f64) -> Result<f64, SpecFunError> {
        if let Some(off) = &self.offsets {
            let k1 = off[0].k_block(tag, x, y)?;
            let k2 = off[1].k_block(tag, x, y)?;
            return Ok(self.even_extrapolate(k1, k2));
        }
        let nx = self.node(x)?;
        if x == y {
            return self.block_at(tag, &nx, &nx);
        }
        let ny = self.node(y)?;
        self.block_at(tag, &nx, &ny)
    }

    /// K(μ) from K(ε), K(2ε), assuming evenness in μ.
    fn even_extrapolate(&self, k1: f64, k2: f64) -> f64 {
        let eps = self.options.log_eps;
        let mu2 = (self.params.mu() * self.params.mu()).re;
        let k0 = (4.0 * k1 - k2) / 3.0;
        let c = (k2 - k1) / (3.0 * eps * eps);
        k0 + c * mu2
    }

    /// A block from precomputed nodes.
    pub fn block_at(&self, tag: BlockTag, nx: &KernelNode, ny: &KernelNode) -> Result<f64, SpecFunError> {
        if self.offsets.is_some() {
            return self.k_block(tag, nx.x, ny.x);
        }
        match (tag.row, tag.col) {
            (Sign::Plus, Sign::Plus) => self.diag_block(true, nx, ny),
            (Sign::Minus, Sign::Minus) => self.diag_block(false, nx, ny),
            (Sign::Plus, Sign::Minus) => self.cross_block(nx, ny),
            (Sign::Minus, Sign::Plus) => Ok(-self.cross_block(ny, nx)?),
        }
    }

    fn diag_block(&self, plus: bool, nx: &KernelNode, ny: &KernelNode) -> Result<f64, SpecFunError> {
        let (u, v, lg) = if plus { (P, PM, self.log_gpp) } else { (Q, QM, self.log_gmm) };
        let (x, y) = (nx.x, ny.x);
        let gap = (x - y).abs();
        let near = gap < self.options.diag_rel * x.max(y).max(1.0);
        let g = lg.exp();
        let plain = |g: f64| {
            let (pux, pvx, puy, pvy) = (nx.prof[u].0, nx.prof[v].0, ny.prof[u].0, ny.prof[v].0);
            let err = self.policy.target_rel_error * g.abs() * ((pux * pvy).abs() + (pvx * puy).abs()) / gap;
            (g * (pux * pvy - pvx * puy) / (x - y), err)
        };
        if let (Some(sx), Some(sy), Some(s)) = (&nx.split, &ny.split, &self.series) {
            let (val, scale) = s.diag_block(u, v, lg, sx, sy);
            let e = (-0.5 * (x + y)).exp();
            // the split sum cancels badly for small μ; the direct difference may do better
            if !near && g.im.abs() <= 1e-10 * g.norm() {
                let (pv, perr) = plain(g.re);
                if perr < f64::EPSILON * scale * e {
                    return Ok(pv);
                }
            }
            let val = check_real("kernel diagonal block", val, scale, 1e-8)?;
            return Ok(e * val);
        }
        let g = check_real("gamma prefactor", g, 0.0, 1e-10)?;
        if near {
            let c = 0.5 * (x + y);
            let (pu, du) = self.profile(u, c)?;
            let (pv, dv) = self.profile(v, c)?;
            return Ok(g * (du * pv - pu * dv));
        }
        Ok(plain(g).0)
    }

    fn cross_block(&self, nx: &KernelNode, ny: &KernelNode) -> Result<f64, SpecFunError> {
        let sp = self.params.sigma() / PI;
        let (x, y) = (nx.x, ny.x);
        let zz = self.params.zz();
        let (t1, t2) = (nx.prof[P].0 * ny.prof[Q].0, zz * nx.prof[PM].0 * ny.prof[QM].0);
        let plain = sp * (t1 + t2) / (x + y);
        if let (Some(sx), Some(sy), Some(s)) = (&nx.split, &ny.split, &self.series) {
            let (val, scale) = s.cross_block(zz, sx, sy);
            let e = (-0.5 * (x + y)).exp();
            let perr = self.policy.target_rel_error * (t1.abs() + t2.abs());
            if perr < f64::EPSILON * scale * e {
                return Ok(plain);
            }
            let val = check_real("kernel cross block", val, scale, 1e-8)?;
            return Ok(sp * e * val / (x + y));
        }
        Ok(plain)
    }

    /// C = K₊₋.
    pub fn c_kernel(&self, x: f64, y: f64) -> Result<f64, SpecFunError> {
        self.k_block(BlockTag::PM, x, y)
    }

    /// D(x,y) = (σ/π)(x/y)^{−a} e^{−(x+y)/2}/(x+y).
    pub fn d_kernel(&self, x: f64, y: f64) -> f64 {
        l_kernel_value(self.params.sigma(), self.params.a(), y, x)
    }

    /// A(x,y) = D(y,x) and B(x,y) = D(x,y).
    pub fn l_block(&self, which: LBlock, x: f64, y: f64) -> f64 {
        match which {
            LBlock::A => self.d_kernel(y, x),
            LBlock::B => self.d_kernel(x, y),
        }
    }

    /// Unweighted kernel values on a node list, row index first.
    pub fn block_matrix(&self, tag: BlockTag, nodes: &[KernelNode]) -> Result<DMatrix<f64>, SpecFunError> {
        let n = nodes.len();
        let mut m = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                m[(i, j)] = self.block_at(tag, &nodes[i], &nodes[j])?;
            }
        }
        Ok(m)
    }

    /// Nodes for a list of arguments.
    pub fn nodes(&self, xs: &[f64]) -> Result<Vec<KernelNode>, SpecFunError> {
        xs.iter().map(|&x| self.node(x)).collect()
    }
}

/// (σ/π)(x/y)^{a} e^{−(x+y)/2}/(x+y), i.e. A(x, y).
pub fn l_kernel_value(sigma: f64, a: f64, x: f64, y: f64) -> f64 {
    sigma / PI * (a * (x / y).ln() - 0.5 * (x + y)).exp() / (x + y)
}
