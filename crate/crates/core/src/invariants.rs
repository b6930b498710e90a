//! Group-algebra invariants in F2[U x V] with U = V = GF(2^m).
//!
//! An element of F2[U x V] is a bit vector of length 2^(2m); the point
//! `(a, b)` sits at index `(a << m) | b`. Multiplying by a group element is a
//! translation of the support, so the ideal generated by `A` is the span of
//! all translates of `A`. Its dimension over F2 is invariant under CCZ
//! equivalence when `A = A_F`.

use std::collections::VecDeque;
use std::io::{self, Read, Write};
use std::time::Instant;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::function::VectorialFunction;
use crate::spectra::is_apn;

/// Largest group rank accepted by the dense oracle.
pub const ORACLE_MAX_RANK: u32 = 14;

const LOW_MASKS: [u64; 6] = [
    0x5555_5555_5555_5555,
    0x3333_3333_3333_3333,
    0x0f0f_0f0f_0f0f_0f0f,
    0x00ff_00ff_00ff_00ff,
    0x0000_ffff_0000_ffff,
    0x0000_0000_ffff_ffff,
];

fn words_for(rank: u32) -> usize {
    (1usize << rank).div_ceil(64)
}

#[inline]
fn bit(row: &[u64], i: usize) -> bool {
    row[i >> 6] >> (i & 63) & 1 == 1
}

#[inline]
fn xor_into(dst: &mut [u64], src: &[u64]) {
    for (d, s) in dst.iter_mut().zip(src) {
        *d ^= *s;
    }
}

fn lowest_bit(row: &[u64]) -> Option<usize> {
    row.iter().position(|&w| w != 0).map(|i| i * 64 + row[i].trailing_zeros() as usize)
}

/// `out[h] = src[h ^ g]` on packed rows.
fn translate_words(src: &[u64], g: usize, out: &mut [u64]) {
    let word_shift = g >> 6;
    let in_word = g & 63;
    for (w, o) in out.iter_mut().enumerate() {
        let mut x = src[w ^ word_shift];
        for (k, &mask) in LOW_MASKS.iter().enumerate() {
            if in_word >> k & 1 == 1 {
                let s = 1 << k;
                x = ((x & mask) << s) | ((x >> s) & mask);
            }
        }
        *o = x;
    }
}

/// An element of F2[G] for G = (Z/2)^rank, stored as a packed bit vector.
#[derive(Clone, PartialEq, Eq)]
pub struct GroupAlgebraElement {
    rank: u32,
    words: Vec<u64>,
}

impl std::fmt::Debug for GroupAlgebraElement {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("GroupAlgebraElement").field("rank", &self.rank).field("weight", &self.weight()).finish()
    }
}

impl GroupAlgebraElement {
    pub fn zero(rank: u32) -> Self {
        GroupAlgebraElement { rank, words: vec![0; words_for(rank)] }
    }

    /// The single group element `g`.
    pub fn point(rank: u32, g: usize) -> Self {
        let mut e = Self::zero(rank);
        e.set(g, true);
        e
    }

    /// The sum of all group elements.
    pub fn full(rank: u32) -> Self {
        let mut e = Self::zero(rank);
        for g in 0..e.group_size() {
            e.set(g, true);
        }
        e
    }

    pub fn from_support<I: IntoIterator<Item = usize>>(rank: u32, support: I) -> Self {
        let mut e = Self::zero(rank);
        for g in support {
            e.set(g, true);
        }
        e
    }

    /// Group rank `n`; the group has `2^n` elements.
    pub fn rank(&self) -> u32 {
        self.rank
    }

    /// Number of group elements, `2^rank`.
    pub fn group_size(&self) -> usize {
        1 << self.rank
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    pub fn get(&self, g: usize) -> bool {
        bit(&self.words, g)
    }

    pub fn set(&mut self, g: usize, value: bool) {
        let (w, b) = (g >> 6, g & 63);
        if value {
            self.words[w] |= 1 << b;
        } else {
            self.words[w] &= !(1 << b);
        }
    }

    pub fn weight(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn support(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.group_size()).filter(move |&g| self.get(g))
    }

    /// Product with the group element `g`: the support shifted by `g`.
    pub fn translate(&self, g: usize) -> Self {
        assert!(g < self.group_size(), "group element out of range");
        let mut out = Self::zero(self.rank);
        translate_words(&self.words, g, &mut out.words);
        out
    }

    /// Image under the group automorphism sending generator `e_j` to `columns[j]`.
    pub fn map_automorphism(&self, columns: &[usize]) -> Self {
        assert_eq!(columns.len(), self.rank as usize);
        let image =
            |g: usize| columns.iter().enumerate().filter(|(j, _)| g >> j & 1 == 1).fold(0usize, |acc, (_, &c)| acc ^ c);
        Self::from_support(self.rank, self.support().map(image))
    }
}

/// The graph `{(x, F(x))}` as an element of F2[U x V].
pub fn build_graph_element(f: &VectorialFunction) -> GroupAlgebraElement {
    let m = f.m();
    GroupAlgebraElement::from_support(2 * m, f.lut().iter().enumerate().map(|(x, &y)| (x << m) | y as usize))
}

/// `A_F = (G_F^2 - 2^m) / 2`: the points `(a, b)`, `a != 0`, for which
/// `F(x + a) + F(x) = b` has exactly two solutions.
pub fn build_af(f: &VectorialFunction) -> Result<GroupAlgebraElement> {
    if !is_apn(f) {
        return Err(Error::NotApn);
    }
    let m = f.m();
    let lut = f.lut();
    let mut e = GroupAlgebraElement::zero(2 * m);
    for a in 1..lut.len() {
        for (x, &y) in lut.iter().enumerate() {
            e.set((a << m) | (y ^ lut[x ^ a]) as usize, true);
        }
    }
    Ok(e)
}

/// A fully reduced echelon basis of packed bit rows. The pivot of a row is its
/// lowest set bit, and no other row has a 1 in that column.
#[derive(Clone, Debug)]
pub struct EchelonBasis {
    rank: u32,
    rows: Vec<Vec<u64>>,
    pivots: Vec<usize>,
}

impl EchelonBasis {
    pub fn new(rank: u32) -> Self {
        EchelonBasis { rank, rows: Vec::new(), pivots: Vec::new() }
    }

    pub fn dimension(&self) -> usize {
        self.rows.len()
    }

    pub fn group_rank(&self) -> u32 {
        self.rank
    }

    /// Pivots in row (insertion) order.
    pub fn pivots(&self) -> &[usize] {
        &self.pivots
    }

    pub fn rows(&self) -> &[Vec<u64>] {
        &self.rows
    }

    /// Reduces `row` against the basis in place.
    pub fn reduce(&self, row: &mut [u64]) {
        for (r, &p) in self.rows.iter().zip(&self.pivots) {
            if bit(row, p) {
                xor_into(row, r);
            }
        }
    }

    /// Inserts `row` if it is independent; returns whether it was.
    pub fn insert(&mut self, mut row: Vec<u64>) -> bool {
        self.reduce(&mut row);
        match lowest_bit(&row) {
            None => false,
            Some(p) => {
                for r in &mut self.rows {
                    if bit(r, p) {
                        xor_into(r, &row);
                    }
                }
                self.rows.push(row);
                self.pivots.push(p);
                true
            }
        }
    }

    pub fn contains(&self, row: &[u64]) -> bool {
        let mut r = row.to_vec();
        self.reduce(&mut r);
        r.iter().all(|&w| w == 0)
    }

    /// Rows sorted by strictly increasing pivot.
    pub fn sorted(&self) -> EchelonBasis {
        let mut idx: Vec<usize> = (0..self.rows.len()).collect();
        idx.sort_by_key(|&i| self.pivots[i]);
        EchelonBasis {
            rank: self.rank,
            rows: idx.iter().map(|&i| self.rows[i].clone()).collect(),
            pivots: idx.iter().map(|&i| self.pivots[i]).collect(),
        }
    }

    /// Checks the fully-reduced echelon invariant.
    pub fn is_fully_reduced(&self) -> bool {
        self.rows.iter().zip(&self.pivots).enumerate().all(|(i, (r, &p))| {
            lowest_bit(r) == Some(p) && self.pivots.iter().enumerate().all(|(j, &q)| j == i || !bit(r, q))
        })
    }

    /// Writes the basis: magic `APNBASIS`, format version, group rank, row
    /// count, number of rows already closed under translation, then every row
    /// as little-endian 64-bit words in insertion order.
    pub fn save<W: Write>(&self, mut w: W, processed: usize) -> io::Result<()> {
        w.write_all(b"APNBASIS")?;
        w.write_all(&1u32.to_le_bytes())?;
        w.write_all(&self.rank.to_le_bytes())?;
        w.write_all(&(self.rows.len() as u64).to_le_bytes())?;
        w.write_all(&(processed as u64).to_le_bytes())?;
        for row in &self.rows {
            for word in row {
                w.write_all(&word.to_le_bytes())?;
            }
        }
        Ok(())
    }

    /// Reads a basis written by [`save`](Self::save); returns it with the processed-row count.
    pub fn load<R: Read>(mut r: R) -> io::Result<(EchelonBasis, usize)> {
        let bad = |msg: &str| io::Error::new(io::ErrorKind::InvalidData, msg.to_string());
        let mut magic = [0u8; 8];
        r.read_exact(&mut magic)?;
        if &magic != b"APNBASIS" {
            return Err(bad("not a basis file"));
        }
        let mut b4 = [0u8; 4];
        let mut b8 = [0u8; 8];
        r.read_exact(&mut b4)?;
        if u32::from_le_bytes(b4) != 1 {
            return Err(bad("unsupported basis file version"));
        }
        r.read_exact(&mut b4)?;
        let rank = u32::from_le_bytes(b4);
        if rank > 2 * crate::field::MAX_DEGREE {
            return Err(bad("group rank out of range"));
        }
        r.read_exact(&mut b8)?;
        let count = u64::from_le_bytes(b8) as usize;
        r.read_exact(&mut b8)?;
        let processed = u64::from_le_bytes(b8) as usize;
        let words = words_for(rank);
        let mut basis = EchelonBasis::new(rank);
        for _ in 0..count {
            let mut row = vec![0u64; words];
            for word in &mut row {
                r.read_exact(&mut b8)?;
                *word = u64::from_le_bytes(b8);
            }
            let p = lowest_bit(&row).ok_or_else(|| bad("zero row in basis file"))?;
            basis.rows.push(row);
            basis.pivots.push(p);
        }
        if processed > count || !basis.is_fully_reduced() {
            return Err(bad("basis file is inconsistent"));
        }
        Ok((basis, processed))
    }
}

/// Snapshot passed to the progress callback of [`translate_closure`].
#[derive(Clone, Copy, Debug)]
pub struct ClosureProgress {
    pub dimension: usize,
    pub processed: usize,
    pub candidates: u64,
    pub seconds: f64,
}

/// Tuning and safeguards for [`translate_closure`].
pub struct ClosureOptions<'a> {
    /// Abort once the dimension exceeds this value.
    pub max_dim: Option<usize>,
    /// Candidate rows reduced per round.
    pub batch: usize,
    /// Called after every round with the current (partially closed) basis.
    pub progress: Option<&'a mut ProgressFn<'a>>,
    /// Resume from a partially closed basis and the number of its rows
    /// (in insertion order) whose translates were already reduced.
    pub resume: Option<(EchelonBasis, usize)>,
}

impl Default for ClosureOptions<'_> {
    fn default() -> Self {
        ClosureOptions { max_dim: None, batch: 512, progress: None, resume: None }
    }
}

/// Result of a closure run.
#[derive(Debug)]
pub struct Closure {
    pub basis: EchelonBasis,
    pub candidates: u64,
    pub seconds: f64,
}

/// Called after every round with the current basis.
pub type ProgressFn<'a> = dyn FnMut(ClosureProgress, &EchelonBasis) + 'a;

/// Columns per stripe in the table-driven reduction.
const STRIPE_WORDS: usize = 256;
/// Rows per lookup table.
const GROUP_BITS: usize = 8;

/// `targets[c] ^= sum of rows[j]` over every `j` whose pivot bit is set in
/// `targets[c]`. `rows` must be fully reduced with respect to `pivots`; the
/// result is then zero in every pivot column.
fn reduce_with_tables(rows: &[Vec<u64>], pivots: &[usize], targets: &mut [Vec<u64>]) {
    if rows.is_empty() || targets.is_empty() {
        return;
    }
    let groups = rows.len().div_ceil(GROUP_BITS);
    let coeffs: Vec<Vec<u8>> = targets
        .par_iter()
        .map(|t| {
            (0..groups)
                .map(|g| {
                    let lo = g * GROUP_BITS;
                    let hi = (lo + GROUP_BITS).min(rows.len());
                    (lo..hi).fold(0u8, |acc, j| acc | (u8::from(bit(t, pivots[j])) << (j - lo)))
                })
                .collect()
        })
        .collect();
    let words = rows[0].len();
    let stripe = STRIPE_WORDS.min(words);
    let mut table = vec![0u64; (1 << GROUP_BITS) * stripe];
    for start in (0..words).step_by(stripe) {
        let end = (start + stripe).min(words);
        let width = end - start;
        for g in 0..groups {
            let lo = g * GROUP_BITS;
            let hi = (lo + GROUP_BITS).min(rows.len());
            let entries = 1usize << (hi - lo);
            for i in 1..entries {
                let prev = (i & (i - 1)) * width;
                let j = lo + i.trailing_zeros() as usize;
                let (head, tail) = table.split_at_mut(i * width);
                let dst = &mut tail[..width];
                dst.copy_from_slice(&head[prev..prev + width]);
                xor_into(dst, &rows[j][start..end]);
            }
            let table = &table;
            targets.par_iter_mut().zip(coeffs.par_iter()).for_each(|(t, c)| {
                let k = c[g] as usize;
                if k != 0 {
                    xor_into(&mut t[start..end], &table[k * width..(k + 1) * width]);
                }
            });
        }
    }
}

/// Dimension of the ideal generated by `a`: the span of all its translates.
pub fn ideal_dimension(a: &GroupAlgebraElement) -> Result<usize> {
    Ok(translate_closure(a, ClosureOptions::default())?.basis.dimension())
}

/// Computes a basis of the ideal generated by `a`.
///
/// Starting from `a`, every basis row is translated by each of the `rank`
/// group generators and the translates are reduced against the basis;
/// nonzero residues are inserted and queued in turn. When the queue is empty
/// the span is closed under the generators, hence under the whole group, so
/// it is the ideal.
pub fn translate_closure(a: &GroupAlgebraElement, mut opts: ClosureOptions<'_>) -> Result<Closure> {
    if a.is_zero() {
        return Err(Error::EmptyElement);
    }
    let start = Instant::now();
    let rank = a.rank();
    let words = a.words.len();
    let (mut basis, mut processed) = match opts.resume.take() {
        Some((b, p)) if b.rank == rank && b.dimension() > 0 => (b, p),
        _ => {
            let mut b = EchelonBasis::new(rank);
            b.insert(a.words.clone());
            (b, 0)
        }
    };
    let mut queue: VecDeque<usize> = (processed..basis.dimension()).collect();
    let per_row = rank as usize;
    let rows_per_round = (opts.batch / per_row).max(1);
    let mut candidates_total = 0u64;

    while !queue.is_empty() {
        let take = rows_per_round.min(queue.len());
        let sources: Vec<usize> = queue.drain(..take).collect();
        let mut cands: Vec<Vec<u64>> = sources
            .par_iter()
            .flat_map_iter(|&i| {
                let row = &basis.rows[i];
                (0..rank).map(move |k| {
                    let mut out = vec![0u64; words];
                    translate_words(row, 1 << k, &mut out);
                    out
                })
            })
            .collect();
        candidates_total += cands.len() as u64;
        reduce_with_tables(&basis.rows, &basis.pivots, &mut cands);

        // Eliminate among the residues of this round.
        let mut fresh = EchelonBasis::new(rank);
        for c in cands {
            if c.iter().any(|&w| w != 0) {
                fresh.insert(c);
            }
        }
        processed += take;
        if !fresh.rows.is_empty() {
            reduce_with_tables(&fresh.rows, &fresh.pivots, &mut basis.rows);
            let first = basis.dimension();
            basis.rows.extend(fresh.rows);
            basis.pivots.extend(fresh.pivots);
            queue.extend(first..basis.dimension());
        }
        if let Some(cap) = opts.max_dim {
            if basis.dimension() > cap {
                return Err(Error::DimensionCap(cap));
            }
        }
        if let Some(cb) = opts.progress.as_mut() {
            let snapshot = ClosureProgress {
                dimension: basis.dimension(),
                processed,
                candidates: candidates_total,
                seconds: start.elapsed().as_secs_f64(),
            };
            cb(snapshot, &basis);
        }
    }
    Ok(Closure { basis, candidates: candidates_total, seconds: start.elapsed().as_secs_f64() })
}

/// Rank of the full `2^n x 2^n` translate matrix `M[g][h] = A(g + h)`, by
/// plain Gaussian elimination. Independent of [`translate_closure`].
pub fn ideal_dimension_oracle(a: &GroupAlgebraElement) -> Result<usize> {
    if a.rank() > ORACLE_MAX_RANK {
        return Err(Error::TooLarge { rank: a.rank(), max: ORACLE_MAX_RANK });
    }
    if a.is_zero() {
        return Err(Error::EmptyElement);
    }
    let n = a.group_size();
    let mut matrix: Vec<Vec<u64>> = (0..n).map(|g| a.translate(g).words).collect();
    let mut rank = 0;
    for col in 0..n {
        let Some(p) = (rank..n).find(|&r| bit(&matrix[r], col)) else {
            continue;
        };
        matrix.swap(rank, p);
        let (done, rest) = matrix.split_at_mut(rank + 1);
        let pivot_row = &done[rank];
        for r in rest.iter_mut() {
            if bit(r, col) {
                xor_into(r, pivot_row);
            }
        }
        rank += 1;
    }
    Ok(rank)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::FieldSpec;
    use std::sync::Arc;

    fn field(m: u32) -> Arc<FieldSpec> {
        Arc::new(FieldSpec::new(m, None).unwrap())
    }

    #[test]
    fn translation_matches_definition() {
        let e = GroupAlgebraElement::from_support(8, [0, 3, 77, 200, 255]);
        for g in [0, 1, 5, 63, 64, 130, 255] {
            let t = e.translate(g);
            for h in 0..256 {
                assert_eq!(t.get(h), e.get(h ^ g));
            }
            assert_eq!(t.translate(g), e);
        }
        // group smaller than one word
        let e = GroupAlgebraElement::from_support(4, [1, 2, 12]);
        let t = e.translate(5);
        assert_eq!(t.support().collect::<Vec<_>>(), vec![4, 7, 9]);
    }

    #[test]
    fn graph_element() {
        let f = VectorialFunction::identity(&field(2));
        let g = build_graph_element(&f);
        assert_eq!(g.support().collect::<Vec<_>>(), vec![0, 5, 10, 15]);
    }

    #[test]
    fn af_requires_apn() {
        let f = VectorialFunction::power(&field(4), 2);
        assert_eq!(build_af(&f).unwrap_err(), Error::NotApn);
        let f = VectorialFunction::power(&field(5), 3);
        let a = build_af(&f).unwrap();
        assert_eq!(a.weight(), 31 * 16);
        assert!(!a.get(0));
    }

    #[test]
    fn trivial_ideals() {
        for rank in [4, 6, 8] {
            let p = GroupAlgebraElement::point(rank, 0);
            assert_eq!(ideal_dimension(&p).unwrap(), 1 << rank);
            assert_eq!(ideal_dimension(&GroupAlgebraElement::full(rank)).unwrap(), 1);
        }
        assert_eq!(ideal_dimension_oracle(&GroupAlgebraElement::point(6, 0)).unwrap(), 64);
        assert_eq!(ideal_dimension_oracle(&GroupAlgebraElement::full(6)).unwrap(), 1);
        assert_eq!(ideal_dimension(&GroupAlgebraElement::zero(6)).unwrap_err(), Error::EmptyElement);
        assert!(matches!(ideal_dimension_oracle(&GroupAlgebraElement::point(16, 0)), Err(Error::TooLarge { .. })));
    }

    #[test]
    fn echelon_insert_keeps_basis_reduced() {
        let mut b = EchelonBasis::new(6);
        let rows = [
            GroupAlgebraElement::from_support(6, [3, 4, 9]),
            GroupAlgebraElement::from_support(6, [1, 4]),
            GroupAlgebraElement::from_support(6, [1, 3, 9]),
            GroupAlgebraElement::from_support(6, [0, 63]),
        ];
        let inserted: Vec<bool> = rows.iter().map(|r| b.insert(r.words.clone())).collect();
        assert_eq!(inserted, vec![true, true, false, true]);
        assert!(b.is_fully_reduced());
        let s = b.sorted();
        assert!(s.pivots().windows(2).all(|w| w[0] < w[1]));
        assert!(b.contains(&rows[2].words));
    }

    #[test]
    fn basis_file_round_trip() {
        let f = VectorialFunction::power(&field(3), 3);
        let a = build_af(&f).unwrap();
        let closure = translate_closure(&a, ClosureOptions::default()).unwrap();
        let mut buf = Vec::new();
        closure.basis.save(&mut buf, 2).unwrap();
        let (b, processed) = EchelonBasis::load(buf.as_slice()).unwrap();
        assert_eq!(processed, 2);
        assert_eq!(b.dimension(), closure.basis.dimension());
        assert_eq!(b.rows(), closure.basis.rows());
        assert!(EchelonBasis::load(&b"NOTABASIS..."[..]).is_err());
    }

    #[test]
    fn resume_from_partial_basis() {
        let f = VectorialFunction::power(&field(4), 3);
        let a = build_af(&f).unwrap();
        let full = ideal_dimension(&a).unwrap();
        // stop early via the cap, then restart from a hand-made partial state
        let mut partial = EchelonBasis::new(8);
        partial.insert(a.words.clone());
        partial.insert(a.translate(1).words);
        let closure =
            translate_closure(&a, ClosureOptions { resume: Some((partial, 1)), ..Default::default() }).unwrap();
        assert_eq!(closure.basis.dimension(), full);
        let err = translate_closure(&a, ClosureOptions { max_dim: Some(3), ..Default::default() });
        assert_eq!(err.unwrap_err(), Error::DimensionCap(3));
    }
}
