//! Fourier transforms of the tail profiles on a uniform ζ grid.

use num_complex::Complex64;
use rustfft::FftPlanner;
use whitkern_core::tail::TailKernel;
use whitkern_core::BlockTag;

/// Default half-width of the ζ window, in units of 1/B.
pub const WINDOW_B: f64 = 60.0;
pub const SAMPLES: usize = 1 << 16;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymbolBin {
    pub u: f64,
    pub value: Complex64,
}

/// h·Σ k(ζ_j) e^{iuζ_j} with ζ_j = −L + jh, h = 2L/n, at every frequency
/// u_k = πk/L the FFT produces, sorted by u.
pub fn profile_transform(profile: impl Fn(f64) -> f64, half_width: f64, samples: usize) -> Vec<SymbolBin> {
    assert!(samples >= 2 && samples.is_multiple_of(2), "need an even sample count");
    let h = 2.0 * half_width / samples as f64;
    let mut buf: Vec<Complex64> =
        (0..samples).map(|j| Complex64::new(profile(-half_width + h * j as f64), 0.0)).collect();
    // e^{+2πijk/n} is the unnormalized inverse transform
    FftPlanner::new().plan_fft_inverse(samples).process(&mut buf);
    let half = samples / 2;
    let mut bins: Vec<SymbolBin> = buf
        .iter()
        .enumerate()
        .map(|(k, &x)| {
            let kk = if k < half { k as i64 } else { k as i64 - samples as i64 };
            // e^{−iu_k L} = (−1)^k
            let sign = if kk.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
            SymbolBin { u: core::f64::consts::PI * kk as f64 / half_width, value: x * (h * sign) }
        })
        .collect();
    bins.sort_by(|a, b| a.u.total_cmp(&b.u));
    bins
}

pub fn tail_symbols(tk: &TailKernel, tag: BlockTag, window_b: f64, samples: usize) -> Vec<SymbolBin> {
    let half_width = window_b / tk.constants().rate_b;
    profile_transform(|z| tk.block(tag, z), half_width, samples)
}

/// The closed-form symbol entry the transform of `tag` should reproduce.
pub fn symbol_entry(tk: &TailKernel, tag: BlockTag, u: f64) -> Complex64 {
    let s = tk.symbol(u);
    let i = |s: whitkern_core::Sign| if s == whitkern_core::Sign::Plus { 0 } else { 1 };
    s[i(tag.row)][i(tag.col)]
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymbolCheck {
    pub bins: usize,
    /// Largest |FFT − f| on the k₊₊ profile.
    pub f_error: f64,
    /// Largest |FFT − g| on the k₊₋ profile.
    pub g_error: f64,
}

/// Worst deviation from the closed-form symbol over the bins with |u| ≤ u_max.
pub fn check_symbols(tk: &TailKernel, u_max: f64, window_b: f64, samples: usize) -> SymbolCheck {
    let worst = |tag: BlockTag| -> (usize, f64) {
        let bins = tail_symbols(tk, tag, window_b, samples);
        let inside: Vec<&SymbolBin> = bins.iter().filter(|b| b.u.abs() <= u_max).collect();
        let e = inside.iter().map(|b| (b.value - symbol_entry(tk, tag, b.u)).norm()).fold(0.0, f64::max);
        (inside.len(), e)
    };
    let (bins, f_error) = worst(BlockTag::PP);
    let (_, g_error) = worst(BlockTag::PM);
    SymbolCheck { bins, f_error, g_error }
}

/// The bin whose frequency is closest to u.
pub fn nearest_bin(bins: &[SymbolBin], u: f64) -> SymbolBin {
    let i = bins.partition_point(|b| b.u < u);
    let cand = [i.saturating_sub(1), i.min(bins.len() - 1)];
    let j = cand.into_iter().min_by(|&a, &b| (bins[a].u - u).abs().total_cmp(&(bins[b].u - u).abs())).unwrap();
    bins[j]
}
