//! Differential and Walsh spectra, and the APN / AB / crooked predicates.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::function::{rank_u32, VectorialFunction};

/// Histogram of `delta_F(a, b) = #{x : F(x + a) + F(x) = b}` over all `(a, b) != (0, 0)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DifferentialSpectrum {
    pub histogram: BTreeMap<u32, u64>,
    /// Maximum of `delta_F(a, b)` over `(a, b) != (0, 0)`.
    pub uniformity: u32,
}

/// Character sums of the graph of `F`:
/// `W(alpha, beta) = sum_x (-1)^(tr(alpha x) + tr(beta F(x)))`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct WalshSpectrum {
    /// Signed values over all `(alpha, beta)`, including the trivial character.
    pub values: BTreeMap<i64, u64>,
    /// Absolute values over all `(alpha, beta)`.
    pub abs_values: BTreeMap<u64, u64>,
    /// Maximum `|W(alpha, beta)|` over nontrivial characters.
    pub linearity: u64,
}

impl WalshSpectrum {
    /// Number of distinct absolute values.
    pub fn distinct_abs_values(&self) -> usize {
        self.abs_values.len()
    }
}

/// Counts of each derivative value `F(x + a) + F(x)`, indexed by `b`.
pub fn derivative_counts(f: &VectorialFunction, a: u32) -> Vec<u32> {
    let mut counts = vec![0u32; f.lut().len()];
    accumulate_derivative(f.lut(), a, &mut counts);
    counts
}

fn accumulate_derivative(lut: &[u32], a: u32, counts: &mut [u32]) {
    for (x, &y) in lut.iter().enumerate() {
        counts[(y ^ lut[x ^ a as usize]) as usize] += 1;
    }
}

/// Full difference distribution table, row `a`, column `b`. Intended for small `m`.
pub fn difference_table(f: &VectorialFunction) -> Vec<Vec<u32>> {
    (0..f.lut().len() as u32).map(|a| derivative_counts(f, a)).collect()
}

/// Computes the complete differential spectrum (no early abort).
pub fn differential_spectrum(f: &VectorialFunction) -> DifferentialSpectrum {
    let n = f.lut().len();
    let lut = f.lut();
    let per_row: Vec<BTreeMap<u32, u64>> = (1..n as u32)
        .into_par_iter()
        .map_init(
            || vec![0u32; n],
            |counts, a| {
                counts.fill(0);
                accumulate_derivative(lut, a, counts);
                let mut h = BTreeMap::new();
                for &c in counts.iter() {
                    *h.entry(c).or_insert(0) += 1;
                }
                h
            },
        )
        .collect();
    // row a = 0 contributes delta(0, b) = 0 for every b != 0
    let mut histogram = BTreeMap::from([(0u32, n as u64 - 1)]);
    for h in per_row {
        for (k, v) in h {
            *histogram.entry(k).or_insert(0) += v;
        }
    }
    let uniformity = *histogram.keys().next_back().unwrap_or(&0);
    DifferentialSpectrum { histogram, uniformity }
}

fn derivative_is_two_to_one(lut: &[u32], a: u32, stamps: &mut [u32]) -> bool {
    // x and x + a give the same derivative value, so only inputs with the top
    // bit of `a` cleared are visited; all of their values must be distinct.
    let top = 1u32 << (31 - a.leading_zeros());
    let a = a as usize;
    for (x, &y) in lut.iter().enumerate() {
        if x as u32 & top != 0 {
            continue;
        }
        let b = (y ^ lut[x ^ a]) as usize;
        if stamps[b] == a as u32 {
            return false;
        }
        stamps[b] = a as u32;
    }
    true
}

/// True iff every derivative equation `F(x + a) + F(x) = b`, `a != 0`, has at
/// most two solutions. Aborts on the first row with a repeated value.
pub fn is_apn(f: &VectorialFunction) -> bool {
    let n = f.lut().len();
    let lut = f.lut();
    (1..n as u32)
        .into_par_iter()
        .map_init(|| vec![0u32; n], |stamps, a| derivative_is_two_to_one(lut, a, stamps))
        .all(|ok| ok)
}

/// Sequential variant of [`is_apn`], for callers that already parallelize.
pub fn is_apn_sequential(f: &VectorialFunction) -> bool {
    let n = f.lut().len();
    let mut stamps = vec![0u32; n];
    (1..n as u32).all(|a| derivative_is_two_to_one(f.lut(), a, &mut stamps))
}

/// In-place fast Walsh-Hadamard transform.
pub fn fwht(v: &mut [i32]) {
    let n = v.len();
    debug_assert!(n.is_power_of_two());
    let mut h = 1;
    while h < n {
        for block in v.chunks_mut(2 * h) {
            let (lo, hi) = block.split_at_mut(h);
            for (a, b) in lo.iter_mut().zip(hi.iter_mut()) {
                let (x, y) = (*a, *b);
                *a = x + y;
                *b = x - y;
            }
        }
        h <<= 1;
    }
}

/// Walsh values for a fixed output mask `beta`, indexed by `alpha`.
pub fn walsh_component(f: &VectorialFunction, beta: u32, alpha_of_mask: &[u32]) -> Vec<i32> {
    let field = f.field();
    let tmask = field.trace_form_mask(beta);
    let mut v: Vec<i32> = f.lut().iter().map(|&y| 1 - 2 * ((y & tmask).count_ones() & 1) as i32).collect();
    fwht(&mut v);
    // FWHT index w is the dot-product character x -> w.x; map it back to the
    // trace character x -> tr(alpha x).
    let mut out = vec![0i32; v.len()];
    for (w, &val) in v.iter().enumerate() {
        out[alpha_of_mask[w] as usize] = val;
    }
    out
}

/// `alpha_of_mask[trace_form_mask(alpha)] = alpha`.
pub fn trace_dual_table(f: &VectorialFunction) -> Vec<u32> {
    let field = f.field();
    let mut t = vec![0u32; field.size()];
    for alpha in 0..field.size() as u32 {
        t[field.trace_form_mask(alpha) as usize] = alpha;
    }
    t
}

/// The full table of Walsh values, indexed by `(alpha << m) | beta`.
pub fn walsh_table(f: &VectorialFunction) -> Vec<i32> {
    let n = f.lut().len();
    let m = f.m();
    let dual = trace_dual_table(f);
    let mut table = vec![0i32; n * n];
    for beta in 0..n as u32 {
        for (alpha, v) in walsh_component(f, beta, &dual).into_iter().enumerate() {
            table[(alpha << m) | beta as usize] = v;
        }
    }
    table
}

/// Computes the signed and absolute Walsh spectra, parallel over `beta`.
pub fn walsh_spectrum(f: &VectorialFunction) -> WalshSpectrum {
    let n = f.lut().len();
    let dual = trace_dual_table(f);
    let per_beta: Vec<BTreeMap<i64, u64>> = (0..n as u32)
        .into_par_iter()
        .map(|beta| {
            let mut h = BTreeMap::new();
            for v in walsh_component(f, beta, &dual) {
                *h.entry(i64::from(v)).or_insert(0) += 1;
            }
            h
        })
        .collect();
    let mut values = BTreeMap::new();
    for h in per_beta {
        for (k, c) in h {
            *values.entry(k).or_insert(0) += c;
        }
    }
    let mut abs_values = BTreeMap::new();
    for (&k, &c) in &values {
        *abs_values.entry(k.unsigned_abs()).or_insert(0) += c;
    }
    // W(0,0) = 2^m is the only trivial value; every other entry counts.
    let linearity = {
        let mut rest = abs_values.clone();
        let top = rest.entry(n as u64).or_insert(0);
        *top -= 1;
        if *top == 0 {
            rest.remove(&(n as u64));
        }
        *rest.keys().next_back().unwrap_or(&0)
    };
    WalshSpectrum { values, abs_values, linearity }
}

/// Almost bent: `m` odd and linearity exactly `2^((m+1)/2)`.
pub fn is_ab(f: &VectorialFunction) -> bool {
    let m = f.m();
    m % 2 == 1 && walsh_spectrum(f).linearity == 1u64 << m.div_ceil(2)
}

/// True iff every derivative image `{F(x + a) + F(x)}`, `a != 0`, is an affine hyperplane.
pub fn is_crooked(f: &VectorialFunction) -> bool {
    let n = f.lut().len();
    let m = f.m();
    let lut = f.lut();
    (1..n as u32).into_par_iter().all(|a| {
        let mut seen = vec![false; n];
        let mut image = Vec::with_capacity(n / 2);
        for (x, &y) in lut.iter().enumerate() {
            let b = y ^ lut[x ^ a as usize];
            if !std::mem::replace(&mut seen[b as usize], true) {
                image.push(b);
            }
        }
        if image.len() != n / 2 {
            return false;
        }
        // The translate spans a space of dimension m - 1 containing 2^(m-1)
        // points, so it is exactly that subspace.
        let shift = image[0];
        let translated: Vec<u32> = image.iter().map(|&b| b ^ shift).collect();
        rank_u32(&translated) == (m - 1) as usize
    })
}

/// Compares differential histograms and absolute Walsh spectra. Both multisets
/// are independent of the polynomial basis, so only the degrees must agree.
pub fn spectra_equal(f1: &VectorialFunction, f2: &VectorialFunction) -> Result<bool> {
    if f1.m() != f2.m() {
        return Err(Error::FieldMismatch);
    }
    Ok(differential_spectrum(f1) == differential_spectrum(f2)
        && walsh_spectrum(f1).abs_values == walsh_spectrum(f2).abs_values)
}
