//! Functions GF(2^m) -> GF(2^m) stored as lookup tables.

use std::fmt::Write as _;
use std::sync::Arc;

use rand::Rng;

use crate::error::{Error, Result};
use crate::field::FieldSpec;

/// A polynomial term `coefficient * x^exponent`.
pub type Term = (u64, u32);

/// A vectorial Boolean function `F: GF(2^m) -> GF(2^m)`.
///
/// The lookup table is the canonical form. When the function was built from a
/// univariate polynomial, the (merged) terms are kept as `source`.
#[derive(Clone, Debug)]
pub struct VectorialFunction {
    field: Arc<FieldSpec>,
    lut: Vec<u32>,
    source: Option<Vec<Term>>,
}

impl PartialEq for VectorialFunction {
    fn eq(&self, other: &Self) -> bool {
        self.field == other.field && self.lut == other.lut
    }
}

impl VectorialFunction {
    /// Evaluates `sum c_i x^e_i` at every field element. Repeated exponents have
    /// their coefficients added.
    pub fn from_polynomial(field: &Arc<FieldSpec>, terms: &[Term]) -> Result<Self> {
        let mut merged: Vec<Term> = Vec::with_capacity(terms.len());
        for &(e, c) in terms {
            field.check(c)?;
            match merged.iter_mut().find(|(e2, _)| *e2 == e) {
                Some(t) => t.1 ^= c,
                None => merged.push((e, c)),
            }
        }
        merged.retain(|&(_, c)| c != 0);
        merged.sort_unstable();
        let lut = (0..field.size() as u32)
            .map(|x| merged.iter().fold(0, |acc, &(e, c)| acc ^ field.mul(c, field.pow(x, e))))
            .collect();
        Ok(VectorialFunction { field: Arc::clone(field), lut, source: Some(merged) })
    }

    /// The power map `x -> x^d`.
    pub fn power(field: &Arc<FieldSpec>, d: u64) -> Self {
        Self::from_polynomial(field, &[(d, 1)]).expect("1 is a field element")
    }

    pub fn identity(field: &Arc<FieldSpec>) -> Self {
        Self::power(field, 1)
    }

    pub fn from_lut(field: &Arc<FieldSpec>, lut: Vec<u32>) -> Result<Self> {
        if lut.len() != field.size() {
            return Err(Error::LutLength { len: lut.len(), expected: field.size() });
        }
        for &y in &lut {
            field.check(y)?;
        }
        Ok(VectorialFunction { field: Arc::clone(field), lut, source: None })
    }

    pub fn field(&self) -> &Arc<FieldSpec> {
        &self.field
    }

    pub fn m(&self) -> u32 {
        self.field.m()
    }

    pub fn lut(&self) -> &[u32] {
        &self.lut
    }

    pub fn source(&self) -> Option<&[Term]> {
        self.source.as_deref()
    }

    #[inline]
    pub fn eval(&self, x: u32) -> u32 {
        self.lut[x as usize]
    }

    pub fn is_bijective(&self) -> bool {
        let mut seen = vec![false; self.lut.len()];
        self.lut.iter().all(|&y| !std::mem::replace(&mut seen[y as usize], true))
    }

    /// Algebraic normal form of all coordinate functions.
    pub fn anf(&self) -> Anf {
        Anf { m: self.m(), coeffs: mobius(self.lut.clone()) }
    }

    /// Largest monomial weight in the ANF of any coordinate function
    /// (0 for constant functions).
    pub fn algebraic_degree(&self) -> u32 {
        self.anf().degree()
    }

    /// Pointwise sum `F1 + F2`.
    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.field != other.field {
            return Err(Error::FieldMismatch);
        }
        let lut = self.lut.iter().zip(&other.lut).map(|(a, b)| a ^ b).collect();
        Ok(VectorialFunction { field: Arc::clone(&self.field), lut, source: None })
    }

    /// `x -> L2(F(L1(x + a))) + b`.
    pub fn compose_with_linear(&self, l1: &LinearMap, l2: &LinearMap, a: u32, b: u32) -> Result<Self> {
        let m = self.m();
        if l1.m() != m || l2.m() != m {
            return Err(Error::FieldMismatch);
        }
        self.field.check(a)?;
        self.field.check(b)?;
        let lut = (0..self.field.size() as u32).map(|x| l2.apply(self.eval(l1.apply(x ^ a))) ^ b).collect();
        Ok(VectorialFunction { field: Arc::clone(&self.field), lut, source: None })
    }

    /// Applies a random affine equivalence and returns the transformed function.
    pub fn random_affine_image<R: Rng + ?Sized>(&self, rng: &mut R) -> Self {
        let m = self.m();
        let l1 = LinearMap::random_invertible(m, rng);
        let l2 = LinearMap::random_invertible(m, rng);
        let a = rng.gen_range(0..self.field.size() as u32);
        let b = rng.gen_range(0..self.field.size() as u32);
        self.compose_with_linear(&l1, &l2, a, b).expect("maps share the degree")
    }

    /// Renders the lookup table in the one-hex-value-per-line file format.
    pub fn to_lut_text(&self) -> String {
        let mut s = String::with_capacity(self.lut.len() * 5);
        for y in &self.lut {
            let _ = writeln!(s, "{y:x}");
        }
        s
    }
}

/// In-place subset-sum (Möbius) transform over F2 applied to every bit of the
/// table entries at once. It is an involution.
pub fn mobius(mut t: Vec<u32>) -> Vec<u32> {
    let n = t.len();
    let mut step = 1;
    while step < n {
        for block in t.chunks_mut(2 * step) {
            let (lo, hi) = block.split_at_mut(step);
            for (h, l) in hi.iter_mut().zip(lo.iter()) {
                *h ^= *l;
            }
        }
        step <<= 1;
    }
    t
}

/// Algebraic normal form of a vectorial function.
///
/// `coeffs[mask]` has bit `j` set iff the monomial `prod_{i in mask} x_i`
/// occurs in coordinate function `j`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Anf {
    m: u32,
    coeffs: Vec<u32>,
}

impl Anf {
    pub fn coeffs(&self) -> &[u32] {
        &self.coeffs
    }

    /// Monomials (as input-bit masks) of coordinate `j`.
    pub fn coordinate(&self, j: u32) -> Vec<u32> {
        (0..self.coeffs.len() as u32).filter(|&mask| self.coeffs[mask as usize] >> j & 1 == 1).collect()
    }

    pub fn degree(&self) -> u32 {
        (0..self.coeffs.len() as u32)
            .filter(|&mask| self.coeffs[mask as usize] != 0)
            .map(u32::count_ones)
            .max()
            .unwrap_or(0)
    }

    /// Back to the lookup table.
    pub fn to_lut(&self) -> Vec<u32> {
        mobius(self.coeffs.clone())
    }

    pub fn m(&self) -> u32 {
        self.m
    }
}

/// An F2-linear bijection of GF(2^m) stored as a lookup table.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LinearMap {
    m: u32,
    lut: Vec<u32>,
}

impl LinearMap {
    /// Validates linearity (exhaustively) and bijectivity.
    pub fn from_lut(m: u32, lut: Vec<u32>) -> Result<Self> {
        let n = 1usize << m;
        if lut.len() != n {
            return Err(Error::LutLength { len: lut.len(), expected: n });
        }
        if lut.iter().any(|&y| y as usize >= n) {
            return Err(Error::NotBijective);
        }
        for x in 0..n {
            for y in x..n {
                if lut[x ^ y] != lut[x] ^ lut[y] {
                    return Err(Error::NotLinear);
                }
            }
        }
        let mut seen = vec![false; n];
        for &y in &lut {
            if std::mem::replace(&mut seen[y as usize], true) {
                return Err(Error::NotBijective);
            }
        }
        Ok(LinearMap { m, lut })
    }

    /// The map sending basis vector `e_j` to `columns[j]`; must have full rank.
    pub fn from_columns(columns: &[u32]) -> Result<Self> {
        let m = columns.len() as u32;
        if rank_u32(columns) != columns.len() {
            return Err(Error::NotBijective);
        }
        Ok(LinearMap { m, lut: span_table(columns) })
    }

    pub fn identity(m: u32) -> Self {
        LinearMap { m, lut: (0..1u32 << m).collect() }
    }

    /// `x -> c * x` for nonzero `c`.
    pub fn scalar(field: &FieldSpec, c: u32) -> Result<Self> {
        field.check(c)?;
        if c == 0 {
            return Err(Error::NotBijective);
        }
        let lut = (0..field.size() as u32).map(|x| field.mul(c, x)).collect();
        Ok(LinearMap { m: field.m(), lut })
    }

    /// Uniformly random invertible map, by rejection sampling of bit matrices.
    pub fn random_invertible<R: Rng + ?Sized>(m: u32, rng: &mut R) -> Self {
        let mask = (1u32 << m) - 1;
        loop {
            let cols: Vec<u32> = (0..m).map(|_| rng.gen::<u32>() & mask).collect();
            if rank_u32(&cols) == m as usize {
                return LinearMap { m, lut: span_table(&cols) };
            }
        }
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn lut(&self) -> &[u32] {
        &self.lut
    }

    #[inline]
    pub fn apply(&self, x: u32) -> u32 {
        self.lut[x as usize]
    }
}

/// Rank over F2 of a set of bit vectors.
pub(crate) fn rank_u32(vectors: &[u32]) -> usize {
    // basis[i] has its top bit at position i
    let mut basis = [0u32; 32];
    let mut rank = 0;
    for &v in vectors {
        let mut r = v;
        while r != 0 {
            let top = 31 - r.leading_zeros() as usize;
            if basis[top] == 0 {
                basis[top] = r;
                rank += 1;
                break;
            }
            r ^= basis[top];
        }
    }
    rank
}

fn span_table(columns: &[u32]) -> Vec<u32> {
    let n = 1usize << columns.len();
    let mut lut = vec![0u32; n];
    for x in 1..n {
        let low = x.trailing_zeros() as usize;
        lut[x] = lut[x & (x - 1)] ^ columns[low];
    }
    lut
}

/// Parses `"3:1,36:0x2f4"`: comma-separated `exponent:coefficient` pairs with
/// decimal exponents and hexadecimal coefficients.
pub fn parse_polynomial(text: &str) -> Result<Vec<Term>> {
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|pair| {
            let (e, c) = pair
                .split_once(':')
                .ok_or_else(|| Error::Parse(format!("term `{pair}` is not exponent:coefficient")))?;
            let e = e.trim().parse::<u64>().map_err(|_| Error::Parse(format!("bad exponent `{e}`")))?;
            Ok((e, parse_hex(c)?))
        })
        .collect()
}

/// Parses a hex value with optional `0x` prefix.
pub fn parse_hex(s: &str) -> Result<u32> {
    let s = s.trim();
    let digits = s.strip_prefix("0x").or_else(|| s.strip_prefix("0X")).unwrap_or(s);
    u32::from_str_radix(digits, 16).map_err(|_| Error::Parse(format!("bad hex value `{s}`")))
}

/// Parses a lookup table file: one hex value per line, line `i` holding `F(i)`.
/// Blank lines are ignored.
pub fn parse_lut(text: &str) -> Result<Vec<u32>> {
    text.lines().map(str::trim).filter(|l| !l.is_empty()).map(parse_hex).collect()
}
