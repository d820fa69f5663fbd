//! Finite determinantal processes on a two-block ground set 𝔛 = 𝔛₁ ∪ 𝔛₂.
//!
//! Kernels are dense complex matrices. Weights come from enumerating every
//! subset, so the order is capped at [`MAX_ORDER`].

use alloc::vec::Vec;
use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type CMatrix = DMatrix<Complex64>;

/// Largest ground set accepted by the enumerating routines.
pub const MAX_ORDER: usize = 24;
/// Condition number above which an inverse is refused.
pub const MAX_CONDITION: f64 = 1e12;
/// Slack for "nonnegative" and "real".
pub const SLACK: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum FiniteError {
    #[error("order {0} exceeds the enumeration cap of 24")]
    OrderTooLarge(usize),
    #[error("kernel is not square or block sizes do not add up")]
    Shape,
    #[error("principal minor of configuration {mask:#x} is {value:e}")]
    NegativeMinor { mask: u32, value: f64 },
    #[error("principal minor of configuration {mask:#x} has imaginary part {imag:e}")]
    ComplexMinor { mask: u32, imag: f64 },
    #[error("{what} is near-singular (condition {condition:e})")]
    NearSingular { what: &'static str, condition: f64 },
    #[error("missing inverse: {0}")]
    MissingInverse(&'static str),
    #[error("point {0} listed twice")]
    DuplicatePoint(usize),
    #[error("point {0} outside the ground set")]
    OutOfRange(usize),
}

/// A square kernel with a fixed split into blocks of sizes n1 and n2.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteKernel {
    entries: CMatrix,
    n1: usize,
}

impl FiniteKernel {
    pub fn new(entries: CMatrix, n1: usize) -> Result<Self, FiniteError> {
        if !entries.is_square() || n1 > entries.nrows() {
            return Err(FiniteError::Shape);
        }
        Ok(FiniteKernel { entries, n1 })
    }

    pub fn from_blocks(b11: &CMatrix, b12: &CMatrix, b21: &CMatrix, b22: &CMatrix) -> Result<Self, FiniteError> {
        let (n1, n2) = (b11.nrows(), b22.nrows());
        if b11.ncols() != n1 || b22.ncols() != n2 || b12.shape() != (n1, n2) || b21.shape() != (n2, n1) {
            return Err(FiniteError::Shape);
        }
        let mut m = CMatrix::zeros(n1 + n2, n1 + n2);
        m.view_mut((0, 0), (n1, n1)).copy_from(b11);
        m.view_mut((0, n1), (n1, n2)).copy_from(b12);
        m.view_mut((n1, 0), (n2, n1)).copy_from(b21);
        m.view_mut((n1, n1), (n2, n2)).copy_from(b22);
        Ok(FiniteKernel { entries: m, n1 })
    }

    pub fn zeros(n1: usize, n2: usize) -> Self {
        FiniteKernel { entries: CMatrix::zeros(n1 + n2, n1 + n2), n1 }
    }

    pub fn order(&self) -> usize {
        self.entries.nrows()
    }

    pub fn n1(&self) -> usize {
        self.n1
    }

    pub fn n2(&self) -> usize {
        self.order() - self.n1
    }

    pub fn entries(&self) -> &CMatrix {
        &self.entries
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.entries[(i, j)]
    }

    /// Block (i, j) with i, j ∈ {1, 2}.
    pub fn block(&self, i: usize, j: usize) -> CMatrix {
        let (r0, nr) = if i == 1 { (0, self.n1) } else { (self.n1, self.n2()) };
        let (c0, nc) = if j == 1 { (0, self.n1) } else { (self.n1, self.n2()) };
        self.entries.view((r0, c0), (nr, nc)).into_owned()
    }

    /// A₁₁* = A₁₁, A₂₂* = A₂₂, A₁₂* = −A₂₁, entrywise within `tol`.
    pub fn is_j_hermitian(&self, tol: f64) -> bool {
        let n = self.order();
        for i in 0..n {
            for j in 0..n {
                let s = if (i < self.n1) == (j < self.n1) { 1.0 } else { -1.0 };
                if (self.entries[(i, j)] - self.entries[(j, i)].conj() * s).norm() > tol {
                    return false;
                }
            }
        }
        true
    }

    /// Principal submatrix on the members of `mask`, in increasing order.
    pub fn principal(&self, mask: u32) -> CMatrix {
        let idx = Configuration(mask).members();
        CMatrix::from_fn(idx.len(), idx.len(), |r, c| self.entries[(idx[r], idx[c])])
    }

    fn with_entries(&self, entries: CMatrix) -> Self {
        FiniteKernel { entries, n1: self.n1 }
    }
}

/// A subset of the ground set, stored as a bitmask.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Configuration(pub u32);

impl Configuration {
    pub fn members(&self) -> Vec<usize> {
        (0..32).filter(|i| self.0 >> i & 1 == 1).collect()
    }

    pub fn len(&self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(&self) -> bool {
        self.0 == 0
    }

    pub fn contains(&self, i: usize) -> bool {
        i < 32 && self.0 >> i & 1 == 1
    }

    /// |ξ ∩ 𝔛₁| = |ξ ∩ 𝔛₂|.
    pub fn is_balanced(&self, n1: usize) -> bool {
        let first = (self.0 & ((1u64 << n1) - 1) as u32).count_ones() as usize;
        2 * first == self.len()
    }
}

/// Prob{ξ} for every configuration, indexed by bitmask.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightTable {
    probabilities: Vec<f64>,
    normalizer: f64,
    n1: usize,
}

impl WeightTable {
    pub fn probability(&self, c: Configuration) -> f64 {
        self.probabilities[c.0 as usize]
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    /// det(1 + L).
    pub fn normalizer(&self) -> f64 {
        self.normalizer
    }

    pub fn order(&self) -> usize {
        self.probabilities.len().trailing_zeros() as usize
    }

    pub fn n1(&self) -> usize {
        self.n1
    }

    /// A table with all mass on one configuration.
    pub fn point_mass(order: usize, n1: usize, c: Configuration) -> Result<Self, FiniteError> {
        if order > MAX_ORDER {
            return Err(FiniteError::OrderTooLarge(order));
        }
        let mut p = alloc::vec![0.0; 1 << order];
        p[c.0 as usize] = 1.0;
        Ok(WeightTable { probabilities: p, normalizer: 1.0, n1 })
    }

    /// Σ_{ξ ⊇ X} Prob{ξ}: the brute-force correlation of the points in X.
    pub fn inclusion_probability(&self, points: Configuration) -> f64 {
        self.probabilities
            .iter()
            .enumerate()
            .filter(|(m, _)| *m as u32 & points.0 == points.0)
            .map(|(_, p)| p)
            .sum()
    }
}

fn condition_number(m: &CMatrix) -> f64 {
    if m.nrows() == 0 {
        return 1.0;
    }
    let s = m.clone().svd(false, false).singular_values;
    let max = s.max();
    let min = s.min();
    if min == 0.0 { f64::INFINITY } else { max / min }
}

fn checked_inverse(m: CMatrix, what: &'static str) -> Result<CMatrix, FiniteError> {
    let condition = condition_number(&m);
    if !(condition < MAX_CONDITION) {
        return Err(FiniteError::NearSingular { what, condition });
    }
    m.try_inverse().ok_or(FiniteError::NearSingular { what, condition })
}

fn inverse_or_missing(m: CMatrix, what: &'static str) -> Result<CMatrix, FiniteError> {
    checked_inverse(m, what).map_err(|_| FiniteError::MissingInverse(what))
}

fn identity(n: usize) -> CMatrix {
    CMatrix::identity(n, n)
}

/// det L_ξ, with an exact zero when a zero diagonal block forces rank loss.
fn minor(l: &FiniteKernel, mask: u32) -> Complex64 {
    if mask == 0 {
        return Complex64::new(1.0, 0.0);
    }
    let sub = l.principal(mask);
    let members = Configuration(mask).members();
    let k1 = members.iter().filter(|&&i| i < l.n1).count();
    let k2 = members.len() - k1;
    let zero = |r0: usize, n: usize| (r0..r0 + n).all(|r| (r0..r0 + n).all(|c| sub[(r, c)] == Complex64::new(0.0, 0.0)));
    if (k1 > k2 && zero(0, k1)) || (k2 > k1 && zero(k1, k2)) {
        return Complex64::new(0.0, 0.0);
    }
    sub.determinant()
}

/// Prob{ξ} = det L_ξ / det(1 + L) for every ξ.
pub fn weight_distribution(l: &FiniteKernel) -> Result<WeightTable, FiniteError> {
    let n = l.order();
    if n > MAX_ORDER {
        return Err(FiniteError::OrderTooLarge(n));
    }
    let total = 1usize << n;
    let mut probabilities = Vec::with_capacity(total);
    let mut sum = 0.0;
    for mask in 0..total as u32 {
        let d = minor(l, mask);
        let scale = 1.0 + d.re.abs();
        if d.im.abs() > SLACK * scale {
            return Err(FiniteError::ComplexMinor { mask, imag: d.im });
        }
        if d.re < -SLACK * scale {
            return Err(FiniteError::NegativeMinor { mask, value: d.re });
        }
        let w = d.re.max(0.0);
        probabilities.push(w);
        sum += w;
    }
    let normalizer = (identity(n) + l.entries()).determinant();
    if !(normalizer.re > 0.0) || normalizer.re.abs() < 1e-300 {
        return Err(FiniteError::NearSingular { what: "1 + L", condition: f64::INFINITY });
    }
    // Σ det L_ξ = det(1+L); divide by the enumerated sum so the table is
    // normalised exactly, and keep det(1+L) for reporting.
    for p in probabilities.iter_mut() {
        *p /= sum;
    }
    Ok(WeightTable { probabilities, normalizer: normalizer.re, n1: l.n1 })
}

/// ρ(x₁, …, x_n) = det[K(x_i, x_j)].
pub fn correlation(k: &FiniteKernel, points: &[usize]) -> Result<Complex64, FiniteError> {
    let mut seen = 0u64;
    for &p in points {
        if p >= k.order() {
            return Err(FiniteError::OutOfRange(p));
        }
        if seen >> p & 1 == 1 {
            return Err(FiniteError::DuplicatePoint(p));
        }
        seen |= 1 << p;
    }
    let m = CMatrix::from_fn(points.len(), points.len(), |r, c| k.get(points[r], points[c]));
    Ok(m.determinant())
}

/// K = L(1 + L)⁻¹.
pub fn k_from_l(l: &FiniteKernel) -> Result<FiniteKernel, FiniteError> {
    let inv = checked_inverse(identity(l.order()) + l.entries(), "1 + L")?;
    Ok(l.with_entries(l.entries() * inv))
}

/// L = K(1 − K)⁻¹.
pub fn l_from_k(k: &FiniteKernel) -> Result<FiniteKernel, FiniteError> {
    let inv = checked_inverse(identity(k.order()) - k.entries(), "1 - K")?;
    Ok(k.with_entries(k.entries() * inv))
}

/// L ↦ K block by block.
pub fn block_k_from_l(l: &FiniteKernel) -> Result<FiniteKernel, FiniteError> {
    let (n1, n2) = (l.n1(), l.n2());
    let (l11, l12, l21, l22) = (l.block(1, 1), l.block(1, 2), l.block(2, 1), l.block(2, 2));
    let r22 = inverse_or_missing(identity(n2) + &l22, "(1 + L22)^-1")?;
    let r11 = inverse_or_missing(identity(n1) + &l11, "(1 + L11)^-1")?;
    let p11 = &l11 - &l12 * &r22 * &l21;
    let p22 = &l22 - &l21 * &r11 * &l12;
    let k11 = &p11 * inverse_or_missing(identity(n1) + &p11, "(1 + L11 - L12 (1 + L22)^-1 L21)^-1")?;
    let k22 = &p22 * inverse_or_missing(identity(n2) + &p22, "(1 + L22 - L21 (1 + L11)^-1 L12)^-1")?;
    let k12 = (identity(n1) - &k11) * &l12 * &r22;
    let k21 = (identity(n2) - &k22) * &l21 * &r11;
    FiniteKernel::from_blocks(&k11, &k12, &k21, &k22)
}

/// K ↦ L block by block, through Q₁₁ = K₁₁ + K₁₂(1 − K₂₂)⁻¹K₂₁ and
/// L₁₁ = Q₁₁(1 − Q₁₁)⁻¹ (likewise for the second block).
pub fn block_l_from_k(k: &FiniteKernel) -> Result<FiniteKernel, FiniteError> {
    let (n1, n2) = (k.n1(), k.n2());
    let (k11, k12, k21, k22) = (k.block(1, 1), k.block(1, 2), k.block(2, 1), k.block(2, 2));
    let r22 = inverse_or_missing(identity(n2) - &k22, "(1 - K22)^-1")?;
    let r11 = inverse_or_missing(identity(n1) - &k11, "(1 - K11)^-1")?;
    let q11 = &k11 + &k12 * &r22 * &k21;
    let q22 = &k22 + &k21 * &r11 * &k12;
    let l11 = &q11 * inverse_or_missing(identity(n1) - &q11, "(1 - K11 - K12 (1 - K22)^-1 K21)^-1")?;
    let l22 = &q22 * inverse_or_missing(identity(n2) - &q22, "(1 - K22 - K21 (1 - K11)^-1 K12)^-1")?;
    let l12 = (identity(n1) + &l11) * &k12 * &r22;
    let l21 = (identity(n2) + &l22) * &k21 * &r11;
    FiniteKernel::from_blocks(&l11, &l12, &l21, &l22)
}

/// The printed form of the first inverse block formula,
/// (K₁₁ − K₁₂(1+K₂₂)⁻¹K₂₁)(1 + K₁₁ − K₁₂(1+K₂₂)⁻¹K₂₁)⁻¹, kept for comparison.
pub fn printed_l11(k: &FiniteKernel) -> Result<CMatrix, FiniteError> {
    let (n1, n2) = (k.n1(), k.n2());
    let (k11, k12, k21, k22) = (k.block(1, 1), k.block(1, 2), k.block(2, 1), k.block(2, 2));
    let p = &k11 - &k12 * inverse_or_missing(identity(n2) + &k22, "(1 + K22)^-1")? * &k21;
    Ok(&p * inverse_or_missing(identity(n1) + &p, "(1 + P)^-1")?)
}

/// First condition of the K-side characterisation:
/// smallest eigenvalue of K₁₁ + K₁₂(1 − K₂₂)⁻¹K₂₁ (Hermitian part).
pub fn k_condition_min_eigenvalue(k: &FiniteKernel) -> Result<(f64, f64), FiniteError> {
    let (n1, n2) = (k.n1(), k.n2());
    let (k11, k12, k21, k22) = (k.block(1, 1), k.block(1, 2), k.block(2, 1), k.block(2, 2));
    let q11 = &k11 + &k12 * inverse_or_missing(identity(n2) - &k22, "(1 - K22)^-1")? * &k21;
    let q22 = &k22 + &k21 * inverse_or_missing(identity(n1) - &k11, "(1 - K11)^-1")? * &k12;
    Ok((min_hermitian_eigenvalue(&q11), min_hermitian_eigenvalue(&q22)))
}

fn min_hermitian_eigenvalue(m: &CMatrix) -> f64 {
    if m.nrows() == 0 {
        return 0.0;
    }
    let h = (m + m.adjoint()) * Complex64::new(0.5, 0.0);
    h.symmetric_eigenvalues().min()
}

/// Canonical pair (L, K) with L = [[0, A], [−B, 0]] and its identity checks.
#[derive(Debug, Clone)]
pub struct CanonicalPair {
    pub l: FiniteKernel,
    pub k: FiniteKernel,
    pub c: CMatrix,
    pub d: CMatrix,
    /// ‖(1 − CD) − (1 + AB)⁻¹‖ and ‖(1 − DC) − (1 + BA)⁻¹‖.
    pub resolvent_residual: f64,
    /// ‖X(1 ± YX)⁻¹ − (1 ± XY)⁻¹X‖ for (X, Y) = (A, B), both signs.
    pub commutation_residual: f64,
    /// ‖(1 + AB)⁻¹A − A(1 + BA)⁻¹‖.
    pub c_forms_residual: f64,
    /// ‖K − k_from_l(L)‖.
    pub transform_residual: f64,
}

/// Builds L and K from the blocks A (n1 × n2) and B (n2 × n1).
pub fn canonical_pair(a: &CMatrix, b: &CMatrix) -> Result<CanonicalPair, FiniteError> {
    let (n1, n2) = (a.nrows(), a.ncols());
    if b.shape() != (n2, n1) {
        return Err(FiniteError::Shape);
    }
    let ab = a * b;
    let ba = b * a;
    let r_ab = checked_inverse(identity(n1) + &ab, "1 + AB")?;
    let r_ba = checked_inverse(identity(n2) + &ba, "1 + BA")?;
    let c = &r_ab * a;
    let d = b.clone();
    let cd = &c * &d;
    let dc = &d * &c;
    let k = FiniteKernel::from_blocks(&cd, &c, &(&d * &c * &d - &d), &dc)?;
    let l = FiniteKernel::from_blocks(&CMatrix::zeros(n1, n1), a, &(-b), &CMatrix::zeros(n2, n2))?;

    let resolvent_residual =
        ((identity(n1) - &cd) - &r_ab).norm().max(((identity(n2) - &dc) - &r_ba).norm());
    let mut commutation_residual: f64 = 0.0;
    for s in [1.0, -1.0] {
        let s = Complex64::new(s, 0.0);
        let lhs = a * checked_inverse(identity(n2) + &ba * s, "1 +- BA")?;
        let rhs = checked_inverse(identity(n1) + &ab * s, "1 +- AB")? * a;
        commutation_residual = commutation_residual.max((lhs - rhs).norm());
    }
    let c_forms_residual = (&c - a * &r_ba).norm();
    let transform_residual = (k_from_l(&l)?.entries() - k.entries()).norm();
    Ok(CanonicalPair { l, k, c, d, resolvent_residual, commutation_residual, c_forms_residual, transform_residual })
}

/// A = C(1 − DC)⁻¹, B = D. Returns A together with ‖C(1 − DC)⁻¹ − (1 − CD)⁻¹C‖.
pub fn recover_a(c: &CMatrix, d: &CMatrix) -> Result<(CMatrix, f64), FiniteError> {
    let (n1, n2) = (c.nrows(), c.ncols());
    let left = c * checked_inverse(identity(n2) - d * c, "1 - DC")?;
    let right = checked_inverse(identity(n1) - c * d, "1 - CD")? * c;
    let gap = (&left - &right).norm();
    Ok((left, gap))
}

/// L_YY − L_YȲ(1 + L_ȲȲ)⁻¹L_ȲY for Y given as a bitmask.
pub fn truncate(l: &FiniteKernel, y: Configuration) -> Result<CMatrix, FiniteError> {
    let n = l.order();
    let inside: Vec<usize> = (0..n).filter(|&i| y.contains(i)).collect();
    let outside: Vec<usize> = (0..n).filter(|&i| !y.contains(i)).collect();
    let pick = |r: &[usize], c: &[usize]| CMatrix::from_fn(r.len(), c.len(), |i, j| l.get(r[i], c[j]));
    let lyy = pick(&inside, &inside);
    if outside.is_empty() {
        return Ok(lyy);
    }
    let inv = checked_inverse(identity(outside.len()) + pick(&outside, &outside), "1 + L_(out,out)")?;
    Ok(lyy - pick(&inside, &outside) * inv * pick(&outside, &inside))
}

/// `count` i.i.d. draws from the table, reproducible for a fixed seed.
pub fn sample(table: &WeightTable, seed: u64, count: usize) -> Vec<Configuration> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut cdf = Vec::with_capacity(table.probabilities.len());
    let mut acc = 0.0;
    for &p in &table.probabilities {
        acc += p;
        cdf.push(acc);
    }
    let last = cdf.iter().rposition(|_| true).unwrap_or(0);
    (0..count)
        .map(|_| {
            let u: f64 = rng.random::<f64>() * acc;
            let i = cdf.partition_point(|&c| c <= u).min(last);
            Configuration(i as u32)
        })
        .collect()
}

fn random_complex(rng: &mut ChaCha8Rng) -> Complex64 {
    Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
}

/// Random J-Hermitian L = [[G₁G₁*, M], [−M*, G₂G₂*]].
pub fn random_j_hermitian(n1: usize, n2: usize, rng: &mut ChaCha8Rng) -> FiniteKernel {
    let g1 = CMatrix::from_fn(n1, n1, |_, _| random_complex(rng));
    let g2 = CMatrix::from_fn(n2, n2, |_, _| random_complex(rng));
    let m = CMatrix::from_fn(n1, n2, |_, _| random_complex(rng));
    let h1 = &g1 * g1.adjoint();
    let h2 = &g2 * g2.adjoint();
    FiniteKernel::from_blocks(&h1, &m, &(-m.adjoint()), &h2).expect("block shapes are consistent")
}

/// Seeded generator for [`random_j_hermitian`].
pub fn instance_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Total probability of the unbalanced configurations, |ξ ∩ 𝔛₁| ≠ |ξ ∩ 𝔛₂|.
pub fn unbalanced_mass(table: &WeightTable) -> f64 {
    let n1 = table.n1;
    table
        .probabilities
        .iter()
        .enumerate()
        .filter(|(m, _)| !Configuration(*m as u32).is_balanced(n1))
        .map(|(_, p)| p)
        .sum()
}

/// Everything the seeded sweep reports for one L.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InstanceAudit {
    pub order: usize,
    /// Smallest real part over all principal minors of L.
    pub min_minor: f64,
    /// max |det K_X − Σ_{ξ ⊇ X} Prob{ξ}| over nonempty X.
    pub correlation_gap: f64,
    /// Largest entrywise gap between block and global transforms, both directions.
    pub block_gap: f64,
    /// Largest entry of l_from_k(k_from_l(L)) − L.
    pub round_trip_gap: f64,
}

fn max_entry(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn audit_instance(l: &FiniteKernel) -> Result<InstanceAudit, FiniteError> {
    let n = l.order();
    if n > MAX_ORDER {
        return Err(FiniteError::OrderTooLarge(n));
    }
    let min_minor = (0..1u32 << n).map(|m| minor(l, m).re).fold(f64::INFINITY, f64::min);
    let table = weight_distribution(l)?;
    let k = k_from_l(l)?;
    let mut correlation_gap: f64 = 0.0;
    for mask in 1..1u32 << n {
        let c = Configuration(mask);
        let rho = correlation(&k, &c.members())?;
        correlation_gap = correlation_gap.max((rho - table.inclusion_probability(c)).norm());
    }
    let bk = block_k_from_l(l)?;
    let bl = block_l_from_k(&k)?;
    let block_gap = max_entry(&(bk.entries() - k.entries())).max(max_entry(&(bl.entries() - l.entries())));
    let round_trip_gap = max_entry(&(l_from_k(&k)?.entries() - l.entries()));
    Ok(InstanceAudit { order: n, min_minor, correlation_gap, block_gap, round_trip_gap })
}
