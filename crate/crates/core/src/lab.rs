//! Nyström discretization and numerical checks of the operator identities.
//!
//! A kernel k on a grid (x_i, w_i) becomes M_ij = √w_i k(x_i, x_j) √w_j, so
//! operator products are plain matrix products. Grids may carry extra
//! "buffer" panels below the domain of interest: they take part in every
//! product but residuals are reported on the core block only.

#[allow(unused_imports)]
use num_traits::Float;
use alloc::vec::Vec;
use core::f64::consts::PI;
use core::ops::Range;
use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::kernels::{BlockTag, KernelMachine, KernelNode, LBlock};
use crate::params::ParameterSet;
use crate::quad::composite;
use crate::specfun::AccuracyPolicy;
use crate::Result;

pub type RMatrix = DMatrix<f64>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum LabError {
    #[error("invalid grid: {0}")]
    Grid(&'static str),
    #[error("non-finite kernel value at nodes ({i}, {j})")]
    NonFinite { i: usize, j: usize },
    #[error("{0} is singular")]
    Singular(&'static str),
    #[error("|a| < 1/2 is required for operator-level checks")]
    Unbounded,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Rule {
    /// Panels of equal width.
    GaussLegendreComposite,
    /// Panels with edges x_max·2^{−k}.
    LogGauss,
}

/// Nodes and weights of a composite Gauss–Legendre rule.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureGrid {
    nodes: Vec<f64>,
    weights: Vec<f64>,
    x_min: f64,
    x_max: f64,
    rule: Rule,
    core_start: usize,
    lower_edge: f64,
}

fn doubling_edges(lo: f64, hi: f64) -> Vec<f64> {
    let mut edges = alloc::vec![hi];
    while edges[edges.len() - 1] * 0.5 > lo * (1.0 + 1e-12) {
        let e = edges[edges.len() - 1] * 0.5;
        edges.push(e);
    }
    edges.push(lo);
    edges.reverse();
    edges
}

impl QuadratureGrid {
    fn check(x_min: f64, x_max: f64, per_panel: usize) -> Result<()> {
        if !(x_min.is_finite() && x_max.is_finite() && x_min < x_max) {
            return Err(LabError::Grid("need x_min < x_max").into());
        }
        if per_panel == 0 {
            return Err(LabError::Grid("need at least one node per panel").into());
        }
        Ok(())
    }

    /// Equal-width panels on [x_min, x_max].
    pub fn affine(x_min: f64, x_max: f64, panel_count: usize, per_panel: usize) -> Result<Self> {
        Self::check(x_min, x_max, per_panel)?;
        if panel_count == 0 {
            return Err(LabError::Grid("need at least one panel").into());
        }
        let h = (x_max - x_min) / panel_count as f64;
        let edges: Vec<f64> = (0..=panel_count).map(|k| x_min + h * k as f64).collect();
        let (nodes, weights) = composite(&edges, per_panel);
        Ok(QuadratureGrid {
            nodes,
            weights,
            x_min,
            x_max,
            rule: Rule::GaussLegendreComposite,
            core_start: 0,
            lower_edge: x_min,
        })
    }

    /// Panels with edges x_max·2^{−k} down to x_min (x_min > 0).
    pub fn log_panels(x_min: f64, x_max: f64, per_panel: usize) -> Result<Self> {
        Self::buffered(x_min, x_max, x_min, per_panel)
    }

    /// As [`Self::log_panels`] on [buffer_min, x_max]; nodes below x_min
    /// form a buffer that is excluded from [`Self::core`].
    pub fn buffered(x_min: f64, x_max: f64, buffer_min: f64, per_panel: usize) -> Result<Self> {
        Self::check(x_min, x_max, per_panel)?;
        if !(buffer_min > 0.0 && buffer_min <= x_min) {
            return Err(LabError::Grid("need 0 < buffer_min <= x_min").into());
        }
        let mut edges = doubling_edges(x_min, x_max);
        if buffer_min < x_min {
            let mut below = doubling_edges(buffer_min, x_min);
            below.pop();
            below.extend_from_slice(&edges);
            edges = below;
        }
        let (nodes, weights) = composite(&edges, per_panel);
        let core_start = nodes.partition_point(|&x| x < x_min);
        Ok(QuadratureGrid { nodes, weights, x_min, x_max, rule: Rule::LogGauss, core_start, lower_edge: buffer_min })
    }

    /// Level ℓ of a refinement ladder on [x_min, x_max] starting from about
    /// `core_nodes` nodes: one more point per panel per level, and a buffer
    /// down to x_min · 10^{−9−3ℓ}.
    pub fn ladder_level(x_min: f64, x_max: f64, core_nodes: usize, level: usize) -> Result<Self> {
        Self::check(x_min, x_max, 1)?;
        if !(x_min > 0.0) {
            return Err(LabError::Grid("need x_min > 0").into());
        }
        let panels = doubling_edges(x_min, x_max).len() - 1;
        let per = ((core_nodes as f64 / panels as f64).round() as usize).max(2);
        let buffer = x_min * 10f64.powi(-9 - 3 * level as i32);
        Self::buffered(x_min, x_max, buffer, per + level)
    }

    /// The standard ladder: [1e-3, 40] from 200 nodes.
    pub fn lab_level(level: usize) -> Result<Self> {
        Self::ladder_level(1e-3, 40.0, 200, level)
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.x_min, self.x_max)
    }

    pub fn rule(&self) -> Rule {
        self.rule
    }

    /// Left end of the integration range, below x_min when buffered.
    pub fn lower_edge(&self) -> f64 {
        self.lower_edge
    }

    /// Indices of the nodes inside [x_min, x_max].
    pub fn core(&self) -> Range<usize> {
        self.core_start..self.nodes.len()
    }

    fn sqrt_weights(&self) -> Vec<f64> {
        self.weights.iter().map(|w| w.sqrt()).collect()
    }
}

/// A symmetrically weighted Nyström matrix together with its grid.
#[derive(Debug, Clone)]
pub struct DiscretizedOperator {
    pub matrix: RMatrix,
    pub grid: QuadratureGrid,
}

impl DiscretizedOperator {
    /// Applies the operator to samples f(x_i), returning samples of the image.
    pub fn apply(&self, samples: &[f64]) -> Vec<f64> {
        let sw = self.grid.sqrt_weights();
        let v = nalgebra::DVector::from_iterator(samples.len(), samples.iter().zip(&sw).map(|(f, s)| f * s));
        let out = &self.matrix * v;
        out.iter().zip(&sw).map(|(y, s)| y / s).collect()
    }
}

fn weigh(mut m: RMatrix, grid: &QuadratureGrid) -> Result<RMatrix> {
    let sw = grid.sqrt_weights();
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            let v = m[(i, j)] * sw[i] * sw[j];
            if !v.is_finite() {
                return Err(LabError::NonFinite { i, j }.into());
            }
            m[(i, j)] = v;
        }
    }
    Ok(m)
}

/// Nyström matrix of an arbitrary kernel.
pub fn discretize<F>(kernel: F, grid: &QuadratureGrid) -> Result<DiscretizedOperator>
where
    F: Fn(f64, f64) -> Result<f64>,
{
    let x = grid.nodes();
    let n = x.len();
    let mut m = RMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            m[(i, j)] = kernel(x[i], x[j])?;
        }
    }
    Ok(DiscretizedOperator { matrix: weigh(m, grid)?, grid: grid.clone() })
}

/// Weighted matrices of all kernels attached to one parameter set.
#[derive(Debug, Clone)]
pub struct Discretized {
    pub pp: RMatrix,
    pub pm: RMatrix,
    pub mp: RMatrix,
    pub mm: RMatrix,
    /// A, with B = D = Aᵀ.
    pub a: RMatrix,
    pub grid: QuadratureGrid,
}

impl Discretized {
    pub fn c(&self) -> &RMatrix {
        &self.pm
    }

    pub fn d(&self) -> RMatrix {
        self.a.transpose()
    }

    /// The full (2n)×(2n) kernel in (+, −) order.
    pub fn full(&self) -> RMatrix {
        let n = self.grid.len();
        let mut k = RMatrix::zeros(2 * n, 2 * n);
        k.view_mut((0, 0), (n, n)).copy_from(&self.pp);
        k.view_mut((0, n), (n, n)).copy_from(&self.pm);
        k.view_mut((n, 0), (n, n)).copy_from(&self.mp);
        k.view_mut((n, n), (n, n)).copy_from(&self.mm);
        k
    }
}

/// Kernel nodes on a grid, reusable across blocks.
pub fn kernel_nodes(machine: &KernelMachine, grid: &QuadratureGrid) -> Result<Vec<KernelNode>> {
    Ok(machine.nodes(grid.nodes())?)
}

/// One weighted kernel block.
pub fn discretize_block(machine: &KernelMachine, tag: BlockTag, grid: &QuadratureGrid) -> Result<RMatrix> {
    let nodes = kernel_nodes(machine, grid)?;
    weigh(machine.block_matrix(tag, &nodes)?, grid)
}

/// Weighted L-kernel block.
pub fn discretize_l(machine: &KernelMachine, which: LBlock, grid: &QuadratureGrid) -> Result<RMatrix> {
    let x = grid.nodes();
    let m = RMatrix::from_fn(x.len(), x.len(), |i, j| machine.l_block(which, x[i], x[j]));
    weigh(m, grid)
}

/// All four blocks and A on one grid.
pub fn discretize_all(machine: &KernelMachine, grid: &QuadratureGrid) -> Result<Discretized> {
    let nodes = kernel_nodes(machine, grid)?;
    let pp = weigh(machine.block_matrix(BlockTag::PP, &nodes)?, grid)?;
    let pm = weigh(machine.block_matrix(BlockTag::PM, &nodes)?, grid)?;
    let mm = weigh(machine.block_matrix(BlockTag::MM, &nodes)?, grid)?;
    let mp = -pm.transpose();
    let a = discretize_l(machine, LBlock::A, grid)?;
    Ok(Discretized { pp, pm, mp, mm, a, grid: grid.clone() })
}

fn core_view(m: &RMatrix, core: &Range<usize>) -> RMatrix {
    let n = core.end - core.start;
    m.view((core.start, core.start), (n, n)).into_owned()
}

/// ‖X − Y‖_F/‖Y‖_F on the core block.
pub fn core_relative(x: &RMatrix, y: &RMatrix, core: &Range<usize>) -> f64 {
    let xc = core_view(x, core);
    let yc = core_view(y, core);
    (&xc - &yc).norm() / yc.norm()
}

/// ‖X‖_F/‖S‖_F on the core block.
fn core_ratio(x: &RMatrix, scale: &RMatrix, core: &Range<usize>) -> f64 {
    core_view(x, core).norm() / core_view(scale, core).norm()
}

/// Named residuals at one refinement level.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelResidual {
    pub level: usize,
    pub nodes: usize,
    pub core_nodes: usize,
    pub residuals: Vec<(&'static str, f64)>,
}

impl LevelResidual {
    pub fn get(&self, name: &str) -> Option<f64> {
        self.residuals.iter().find(|(n, _)| *n == name).map(|(_, v)| *v)
    }
}

/// Residuals across refinement levels.
#[derive(Debug, Clone, PartialEq)]
pub struct ResidualReport {
    pub what: &'static str,
    pub levels: Vec<LevelResidual>,
}

impl ResidualReport {
    pub fn names(&self) -> Vec<&'static str> {
        self.levels.first().map(|l| l.residuals.iter().map(|(n, _)| *n).collect()).unwrap_or_default()
    }

    pub fn series(&self, name: &str) -> Vec<f64> {
        self.levels.iter().filter_map(|l| l.get(name)).collect()
    }

    /// Strictly decreasing across levels for this residual.
    pub fn decreasing(&self, name: &str) -> bool {
        let s = self.series(name);
        s.len() >= 2 && s.windows(2).all(|w| w[1] < w[0])
    }

    pub fn all_decreasing(&self) -> bool {
        self.names().iter().all(|n| self.decreasing(n))
    }

    /// Each step strictly decreases unless both values are already at or
    /// below `floor`, where roundoff dominates.
    pub fn decreasing_to_floor(&self, name: &str, floor: f64) -> bool {
        let s = self.series(name);
        s.len() >= 2 && s.windows(2).all(|w| w[1] < w[0] || (w[0] <= floor && w[1] <= floor))
    }

    pub fn all_decreasing_to_floor(&self, floor: f64) -> bool {
        self.names().iter().all(|n| self.decreasing_to_floor(n, floor))
    }

    /// Largest residual at the first (coarsest) level.
    pub fn worst_at(&self, level_index: usize) -> f64 {
        self.levels[level_index].residuals.iter().map(|(_, v)| *v).fold(0.0, f64::max)
    }
}

fn require_bounded(params: &ParameterSet) -> Result<()> {
    if params.a().abs() >= 0.5 {
        return Err(LabError::Unbounded.into());
    }
    Ok(())
}

/// K₊₊ ≈ CD, K₋₋ ≈ DC, K₋₊ ≈ DCD − D.
pub fn factorization_residuals(d: &Discretized) -> Vec<(&'static str, f64)> {
    let core = d.grid.core();
    let c = d.c();
    let dd = d.d();
    let cd = c * &dd;
    let dc = &dd * c;
    let dcd = &dc * &dd - &dd;
    alloc::vec![
        ("pp", core_relative(&cd, &d.pp, &core)),
        ("mm", core_relative(&dc, &d.mm, &core)),
        ("mp", core_relative(&dcd, &d.mp, &core)),
    ]
}

/// C + CDDᵀ = Dᵀ and DC + DCDDᵀ − DDᵀ = 0.
pub fn proof_identity_residuals(d: &Discretized) -> Vec<(&'static str, f64)> {
    let core = d.grid.core();
    let c = d.c();
    let dd = d.d();
    let dt = &d.a;
    let ddt = &dd * dt;
    let first = c + c * &ddt;
    let second = &dd * c + &dd * c * &ddt - &ddt;
    alloc::vec![
        ("c_identity", core_relative(&first, dt, &core)),
        ("dc_identity", core_ratio(&second, &ddt, &core)),
    ]
}

/// Blockwise Λ(1 + Λ)⁻¹ against K, with Λ = [[0, A], [−B, 0]].
pub fn resolvent_residuals(d: &Discretized) -> Result<Vec<(&'static str, f64)>> {
    let n = d.grid.len();
    let core = d.grid.core();
    let mut lam = RMatrix::zeros(2 * n, 2 * n);
    lam.view_mut((0, n), (n, n)).copy_from(&d.a);
    lam.view_mut((n, 0), (n, n)).copy_from(&(-d.a.transpose()));
    let id = RMatrix::identity(2 * n, 2 * n);
    let inv = (&id + &lam).lu().try_inverse().ok_or(LabError::Singular("1 + L"))?;
    let r = &lam * inv;
    let blk = |i: usize, j: usize| r.view((i * n, j * n), (n, n)).into_owned();
    let mut out = alloc::vec![
        ("pp", core_relative(&blk(0, 0), &d.pp, &core)),
        ("pm", core_relative(&blk(0, 1), &d.pm, &core)),
        ("mp", core_relative(&blk(1, 0), &d.mp, &core)),
        ("mm", core_relative(&blk(1, 1), &d.mm, &core)),
    ];
    out.extend(proof_identity_residuals(d));
    Ok(out)
}

/// K₊₊ against AB(1 + AB)⁻¹.
pub fn kpp_from_ab(d: &Discretized) -> Result<f64> {
    let n = d.grid.len();
    let ab = &d.a * d.a.transpose();
    let inv = (RMatrix::identity(n, n) + &ab).lu().try_inverse().ok_or(LabError::Singular("1 + AB"))?;
    Ok(core_relative(&(ab * inv), &d.pp, &d.grid.core()))
}

fn run_levels<F>(what: &'static str, grids: &[QuadratureGrid], mut f: F) -> Result<ResidualReport>
where
    F: FnMut(&QuadratureGrid) -> Result<Vec<(&'static str, f64)>>,
{
    let mut levels = Vec::with_capacity(grids.len());
    for (level, g) in grids.iter().enumerate() {
        let residuals = f(g)?;
        levels.push(LevelResidual { level, nodes: g.len(), core_nodes: g.core().len(), residuals });
    }
    Ok(ResidualReport { what, levels })
}

/// The standard ladder of `levels` grids.
pub fn lab_grids(levels: usize) -> Result<Vec<QuadratureGrid>> {
    (0..levels).map(QuadratureGrid::lab_level).collect()
}

pub fn ladder(x_min: f64, x_max: f64, core_nodes: usize, levels: usize) -> Result<Vec<QuadratureGrid>> {
    (0..levels).map(|l| QuadratureGrid::ladder_level(x_min, x_max, core_nodes, l)).collect()
}

/// Grids for the norm law: log panels from 40 down to 10^{−10(ℓ+1)} (ℓ < 3)
/// and then 1e-40, with 10 points per panel. The top of the spectrum of A
/// lives at low frequency in ln x, so the domain length matters far more
/// than the node density.
pub fn norm_grids(levels: usize) -> Result<Vec<QuadratureGrid>> {
    (0..levels)
        .map(|l| {
            let lo = if l + 1 >= levels { 1e-40 } else { 10f64.powi(-10 * (l as i32 + 1)) };
            QuadratureGrid::log_panels(lo, 40.0, 10)
        })
        .collect()
}

pub fn verify_factorization(
    params: &ParameterSet,
    policy: &AccuracyPolicy,
    grids: &[QuadratureGrid],
) -> Result<ResidualReport> {
    require_bounded(params)?;
    let machine = KernelMachine::new(*params, *policy)?;
    run_levels("factorization", grids, |g| {
        let d = discretize_all(&machine, g)?;
        let mut r = factorization_residuals(&d);
        r.extend(proof_identity_residuals(&d));
        Ok(r)
    })
}

pub fn verify_resolvent(
    params: &ParameterSet,
    policy: &AccuracyPolicy,
    grids: &[QuadratureGrid],
) -> Result<ResidualReport> {
    require_bounded(params)?;
    let machine = KernelMachine::new(*params, *policy)?;
    run_levels("resolvent", grids, |g| resolvent_residuals(&discretize_all(&machine, g)?))
}

/// Resolvent and factorization reports from a single discretization per level.
pub fn verify_operator_identities(
    params: &ParameterSet,
    policy: &AccuracyPolicy,
    grids: &[QuadratureGrid],
) -> Result<(ResidualReport, ResidualReport)> {
    require_bounded(params)?;
    let machine = KernelMachine::new(*params, *policy)?;
    let mut res = ResidualReport { what: "resolvent", levels: Vec::new() };
    let mut fac = ResidualReport { what: "factorization", levels: Vec::new() };
    for (level, g) in grids.iter().enumerate() {
        let d = discretize_all(&machine, g)?;
        let (nodes, core_nodes) = (g.len(), g.core().len());
        res.levels.push(LevelResidual { level, nodes, core_nodes, residuals: resolvent_residuals(&d)? });
        let mut r = factorization_residuals(&d);
        r.extend(proof_identity_residuals(&d));
        fac.levels.push(LevelResidual { level, nodes, core_nodes, residuals: r });
    }
    Ok((res, fac))
}

/// Relative commutator norms of the full kernels and of the K₊₊ blocks,
/// measured on the core nodes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Commutator {
    pub full: f64,
    pub pp: f64,
}

fn commutator(x: &RMatrix, y: &RMatrix, core: &[usize]) -> f64 {
    let c = x * y - y * x;
    let pick = |m: &RMatrix| RMatrix::from_fn(core.len(), core.len(), |i, j| m[(core[i], core[j])]);
    pick(&c).norm() / (pick(x).norm() * pick(y).norm())
}

pub fn commutation_check(
    a: f64,
    mu1: Complex64,
    mu2: Complex64,
    policy: &AccuracyPolicy,
    grid: &QuadratureGrid,
) -> Result<Commutator> {
    let p1 = ParameterSet::from_a_mu(a, mu1)?;
    let p2 = ParameterSet::from_a_mu(a, mu2)?;
    require_bounded(&p1)?;
    let d1 = discretize_all(&KernelMachine::new(p1, *policy)?, grid)?;
    let d2 = discretize_all(&KernelMachine::new(p2, *policy)?, grid)?;
    let n = grid.len();
    let core: Vec<usize> = grid.core().collect();
    let both: Vec<usize> = grid.core().chain(grid.core().map(|i| i + n)).collect();
    Ok(Commutator { full: commutator(&d1.full(), &d2.full(), &both), pp: commutator(&d1.pp, &d2.pp, &core) })
}

/// det(1 + s·M), as (sign, log|det|).
pub fn fredholm_log_det(m: &RMatrix, scale: f64) -> Result<(f64, f64)> {
    let n = m.nrows();
    let lu = (RMatrix::identity(n, n) + m * scale).lu();
    let u = lu.u();
    let mut sign = if lu.p().determinant::<f64>() < 0.0 { -1.0 } else { 1.0 };
    let mut log = 0.0;
    for i in 0..n {
        let d = u[(i, i)];
        if d == 0.0 {
            return Err(LabError::Singular("1 + sM").into());
        }
        if d < 0.0 {
            sign = -sign;
        }
        log += d.abs().ln();
    }
    Ok((sign, log))
}

/// det(1 + s·M).
pub fn fredholm_det(op: &DiscretizedOperator, scale: f64) -> Result<f64> {
    let (s, l) = fredholm_log_det(&op.matrix, scale)?;
    Ok(s * l.exp())
}

/// Largest singular value by power iteration on MᵀM.
pub fn top_singular_value(m: &RMatrix) -> f64 {
    let n = m.ncols();
    if n == 0 {
        return 0.0;
    }
    let mut v = nalgebra::DVector::from_element(n, 1.0 / (n as f64).sqrt());
    let mut lambda = 0.0;
    for _ in 0..5000 {
        let w = m.transpose() * (m * &v);
        let norm = w.norm();
        if norm == 0.0 {
            return 0.0;
        }
        let next = norm.sqrt();
        v = w / norm;
        if (next - lambda).abs() <= 1e-14 * next {
            return next;
        }
        lambda = next;
    }
    lambda
}

/// ‖A‖ bound σ/cos(πa) from the Fourier multiplier.
pub fn norm_bound(params: &ParameterSet) -> f64 {
    params.sigma() / (PI * params.a()).cos()
}

/// (largest singular value of the discretized A, σ/cos(πa)).
pub fn norm_law(params: &ParameterSet, grid: &QuadratureGrid) -> Result<(f64, f64)> {
    require_bounded(params)?;
    let (sigma, a) = (params.sigma(), params.a());
    let x = grid.nodes();
    let m = weigh(
        RMatrix::from_fn(x.len(), x.len(), |i, j| crate::kernels::l_kernel_value(sigma, a, x[i], x[j])),
        grid,
    )?;
    Ok((top_singular_value(&m), norm_bound(params)))
}
