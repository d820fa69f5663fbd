//! Coefficientwise series form of the kernel blocks for small arguments.
//!
//! Each profile is e^{−x/2} Σ_s P_s x^{sμ} F_s(x) with F_s = 1 + F̂_s a ₁F₁
//! series. Numerators of the diagonal blocks are divided by x − y through
//! the exact divided differences dd_k = (x^k − y^k)/(x − y).

#[allow(unused_imports)]
use num_traits::Float;
use alloc::vec::Vec;
use num_complex::Complex64;

use crate::specfun::{series_parts, AccuracyPolicy, SpecFunError};

#[derive(Debug, Clone)]
struct Part {
    log_p: Option<Complex64>,
    smu: Complex64,
    /// Taylor coefficients of F_s; c[0] = 1.
    c: Vec<Complex64>,
}

#[derive(Debug, Clone)]
pub(super) struct SeriesSet {
    parts: [[Part; 2]; 4],
}

#[derive(Debug, Clone)]
pub(super) struct SplitNode {
    x: f64,
    lx: f64,
    fhat: [[Complex64; 2]; 4],
}

fn coefficients(alpha: Complex64, gamma: Complex64, xmax: f64, policy: &AccuracyPolicy) -> Option<Vec<Complex64>> {
    let mut c = Vec::with_capacity(64);
    c.push(Complex64::new(1.0, 0.0));
    let mut term = Complex64::new(1.0, 0.0);
    let mut peak: f64 = 1.0;
    let mut scaled = 1.0;
    for k in 0..policy.max_terms {
        let kf = k as f64;
        let ratio = (alpha + kf) / ((gamma + kf) * (kf + 1.0));
        term *= ratio;
        c.push(term);
        scaled *= ratio.norm() * xmax;
        peak = peak.max(scaled);
        if scaled == 0.0 || (scaled < 1e-18 * peak && ratio.norm() * xmax < 0.5) {
            return Some(c);
        }
    }
    None
}

impl SeriesSet {
    pub(super) fn new(
        kappas: &[f64; 4],
        mu: Complex64,
        xmax: f64,
        policy: &AccuracyPolicy,
    ) -> Result<Option<Self>, SpecFunError> {
        let mut parts: [[Option<Part>; 2]; 4] = Default::default();
        for (j, &kappa) in kappas.iter().enumerate() {
            let sp = series_parts(kappa, mu)?;
            for (s, p) in sp.iter().enumerate() {
                let Some(c) = coefficients(p.alpha, p.gamma, xmax, policy) else {
                    return Ok(None);
                };
                parts[j][s] = Some(Part { log_p: p.log_prefactor, smu: mu * p.sign, c });
            }
        }
        Ok(Some(SeriesSet { parts: parts.map(|row| row.map(|p| p.expect("filled above"))) }))
    }

    /// F̂ values at x, or `None` when the series cancels too much there.
    pub(super) fn node(&self, x: f64, policy: &AccuracyPolicy) -> Option<SplitNode> {
        let mut fhat = [[Complex64::new(0.0, 0.0); 2]; 4];
        for (j, row) in self.parts.iter().enumerate() {
            for (s, part) in row.iter().enumerate() {
                let mut sum = Complex64::new(0.0, 0.0);
                let mut abs = 0.0;
                let mut xk = 1.0;
                for ck in &part.c[1..] {
                    xk *= x;
                    let t = ck * xk;
                    sum += t;
                    abs += t.norm();
                }
                let est = f64::EPSILON * (1.0 + abs) / (Complex64::new(1.0, 0.0) + sum).norm();
                if !(est <= 0.1 * policy.target_rel_error) {
                    return None;
                }
                fhat[j][s] = sum;
            }
        }
        Some(SplitNode { x, lx: x.ln(), fhat })
    }

    fn dd_sum(&self, j: usize, s: usize, dd: &[f64]) -> Complex64 {
        let c = &self.parts[j][s].c;
        let mut acc = Complex64::new(0.0, 0.0);
        for k in 1..c.len().min(dd.len()) {
            acc += c[k] * dd[k];
        }
        acc
    }

    fn max_len(&self) -> usize {
        self.parts.iter().flatten().map(|p| p.c.len()).max().unwrap_or(1)
    }

    /// [u(x)v(y) − v(x)u(y)]/(x − y) with the e^{−(x+y)/2} factor removed
    /// and exp(`log_g`) applied, together with the sum of the moduli of the
    /// contributions.
    pub(super) fn diag_block(
        &self,
        u: usize,
        v: usize,
        log_g: Complex64,
        nx: &SplitNode,
        ny: &SplitNode,
    ) -> (Complex64, f64) {
        let (x, y) = (nx.x, ny.x);
        let dd = divided_powers(x, y, self.max_len());
        let one = Complex64::new(1.0, 0.0);
        let mut total = Complex64::new(0.0, 0.0);
        let mut scale = 0.0;
        for s in 0..2 {
            for t in 0..2 {
                let (pu, pv) = (&self.parts[u][s], &self.parts[v][t]);
                let (Some(lu), Some(lv)) = (pu.log_p, pv.log_p) else { continue };
                let e = (lu + lv + log_g).exp();
                let du = self.dd_sum(u, s, &dd);
                let dv = self.dd_sum(v, t, &dd);
                let fu_y = ny.fhat[u][s];
                let fv_y = ny.fhat[v][t];
                // [F^u(x)F^v(y) − F^u(y)F^v(x)]/(x − y)
                let q = du - dv + du * fv_y - fu_y * dv;
                let term = if s == t {
                    e * (pu.smu * (nx.lx + ny.lx)).exp() * q
                } else {
                    let r = (pu.smu * (nx.lx - ny.lx)).exp();
                    let b_yx = (one + fu_y) * (one + nx.fhat[v][t]);
                    e * (r * q + b_yx * power_gap(pu.smu, x, y))
                };
                total += term;
                scale += term.norm();
            }
        }
        (total, scale)
    }

    /// p(x)q(y) + zz′ p₋(x)q₋(y) with the e^{−(x+y)/2} factor removed, and
    /// the sum of the moduli of the contributions.
    pub(super) fn cross_block(&self, zz: f64, nx: &SplitNode, ny: &SplitNode) -> (Complex64, f64) {
        use super::{P, PM, Q, QM};
        let one = Complex64::new(1.0, 0.0);
        let mut total = Complex64::new(0.0, 0.0);
        let mut scale = 0.0;
        let mut add = |t: Complex64| {
            total += t;
            scale += t.norm();
        };
        for s in 0..2 {
            for t in 0..2 {
                let smu = self.parts[P][s].smu;
                let tmu = self.parts[Q][t].smu;
                let pref = (smu * nx.lx + tmu * ny.lx).exp();
                let first = self.parts[P][s].log_p.zip(self.parts[Q][t].log_p);
                let second = self.parts[PM][s].log_p.zip(self.parts[QM][t].log_p);
                if s == t {
                    if let (Some((lp, lq)), Some(_)) = (first, second) {
                        // P^p P^q = −zz′ P^{p₋} P^{q₋}: the constant terms cancel exactly
                        let pi = (lp + lq).exp();
                        let (fp, fpm) = (nx.fhat[P][s], nx.fhat[PM][s]);
                        let (fq, fqm) = (ny.fhat[Q][s], ny.fhat[QM][s]);
                        add(pi * pref * (fp - fpm + fq - fqm + fp * fq - fpm * fqm));
                        continue;
                    }
                }
                if let Some((lp, lq)) = first {
                    add((lp + lq).exp() * pref * (one + nx.fhat[P][s]) * (one + ny.fhat[Q][t]));
                }
                if let Some((lp, lq)) = second {
                    add((lp + lq).exp() * pref * zz * (one + nx.fhat[PM][s]) * (one + ny.fhat[QM][t]));
                }
            }
        }
        (total, scale)
    }
}

/// dd_k = (x^k − y^k)/(x − y) for k < len, by dd_k = x·dd_{k−1} + y^{k−1}.
fn divided_powers(x: f64, y: f64, len: usize) -> Vec<f64> {
    let mut dd = Vec::with_capacity(len);
    dd.push(0.0);
    let mut yk = 1.0;
    for k in 1..len {
        let prev = dd[k - 1];
        dd.push(x * prev + yk);
        yk *= y;
    }
    dd
}

/// ((x/y)^{w} − (x/y)^{−w})/(x − y), continuous through x = y.
fn power_gap(w: Complex64, x: f64, y: f64) -> Complex64 {
    let t = (x - y) / y;
    let (l, l_over_d) = if t == 0.0 {
        (0.0, 1.0 / y)
    } else if t.abs() < 0.5 {
        let l_over_d = t.ln_1p() / t / y;
        (l_over_d * (x - y), l_over_d)
    } else {
        let l = (x / y).ln();
        (l, l / (x - y))
    };
    let arg = w * l;
    let shc = if arg.norm() < 1e-3 {
        let a2 = arg * arg;
        Complex64::new(1.0, 0.0) + a2 / 6.0 + a2 * a2 / 120.0
    } else {
        arg.sinh() / arg
    };
    w * shc * (2.0 * l_over_d)
}
