//! Exhaustive search for APN binomials `x^d1 + u x^d2`.
//!
//! Triples are identified up to the affine equivalences that keep the
//! binomial shape:
//! * `x -> a x` followed by division by `a^d1`, sending `u` to `u a^(d2 - d1)`;
//! * Frobenius on the output, `(d1, d2, u) -> (2 d1, 2 d2, u^2)`;
//! * Frobenius on the input, `(d1, d2, u) -> (2 d1, 2 d2, u)`;
//! * division by `u` when the exponent order flips, `(d2, d1, u) -> (d1, d2, 1/u)`.
//!
//! Working with discrete logs, `u = g^e` only matters through `e mod h` with
//! `h = gcd(d2 - d1, 2^m - 1)`, so each exponent pair splits into `h` cosets.

use std::collections::{BTreeSet, HashSet};
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::FieldSpec;
use crate::function::VectorialFunction;
use crate::spectra::{differential_spectrum, is_apn};

/// A binomial `x^d1 + u x^d2`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Triple {
    pub d1: u64,
    pub d2: u64,
    pub u: u32,
}

impl Triple {
    pub fn function(&self, field: &Arc<FieldSpec>) -> Result<VectorialFunction> {
        VectorialFunction::from_polynomial(field, &[(self.d1, 1), (self.d2, self.u)])
    }
}

/// One APN orbit found by [`search_binomials`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchHit {
    /// Canonical representative of the orbit.
    pub d1: u64,
    pub d2: u64,
    pub u: u32,
    /// Re-checked with the full (non-aborting) differential spectrum.
    pub apn_verified: bool,
    /// Number of coefficients `u'` in the slice `(d1, d2)` that are equivalent to `u`.
    pub orbit_size: u64,
    /// `d2 = 2^k d1`, so the binomial is a linear map applied to `x^d1`, or one
    /// term is linear, so the binomial is a monomial plus a linear map.
    pub monomial_like: bool,
    /// The exponent pair whose slice produced the hit.
    pub slice: (u64, u64),
}

/// Which exponent pairs a search covers.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PairSelection {
    /// Every canonical pair `1 <= d1 < d2 <= 2^m - 1`.
    All,
    Fixed(u64, u64),
}

#[derive(Clone, Debug)]
pub struct SearchSpace {
    pub m: u32,
    pub pairs: PairSelection,
    /// Inclusive range of coefficients; `None` means every nonzero `u`, tested
    /// once per orbit.
    pub u_range: Option<(u32, u32)>,
}

/// Reduces an exponent into `1..=2^m - 1`; `x^d` and the result agree everywhere.
fn reduce_exponent(d: u64, q1: u64) -> u64 {
    if d == 0 {
        0
    } else {
        (d - 1) % q1 + 1
    }
}

/// `2^k d` reduced into `1..=q1`.
fn double(d: u64, k: u32, q1: u64) -> u64 {
    reduce_exponent(d << k, q1)
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// The smallest ordered pair reachable from `{d1, d2}` by exponent doubling.
pub fn canonical_pair(m: u32, d1: u64, d2: u64) -> Result<(u64, u64)> {
    let q1 = (1u64 << m) - 1;
    let (a, b) = (reduce_exponent(d1, q1), reduce_exponent(d2, q1));
    if a == b || a == 0 || b == 0 {
        return Err(Error::DegenerateExponents);
    }
    Ok(doublings(m, a, b).map(|(x, y, _)| (x, y)).min().expect("m >= 1"))
}

/// Ordered pairs `(2^k d1, 2^k d2)` with a flag telling whether the pair was swapped.
fn doublings(m: u32, d1: u64, d2: u64) -> impl Iterator<Item = (u64, u64, bool)> {
    let q1 = (1u64 << m) - 1;
    (0..m).map(move |k| {
        let (a, b) = (double(d1, k, q1), double(d2, k, q1));
        if a < b {
            (a, b, false)
        } else {
            (b, a, true)
        }
    })
}

/// Coset structure of one exponent pair.
struct Slice {
    d1: u64,
    d2: u64,
    /// `gcd(d2 - d1, 2^m - 1)`.
    h: u64,
}

impl Slice {
    fn new(m: u32, d1: u64, d2: u64) -> Result<Self> {
        let q1 = (1u64 << m) - 1;
        let (d1, d2) = (reduce_exponent(d1, q1), reduce_exponent(d2, q1));
        if d1 == d2 || d1 == 0 || d2 == 0 {
            return Err(Error::DegenerateExponents);
        }
        let diff = (d2 + q1 - d1) % q1;
        Ok(Slice { d1, d2, h: gcd(diff, q1) })
    }

    /// Classes `e mod h` equivalent to `class` within this slice.
    fn class_orbit(&self, m: u32, class: u64) -> BTreeSet<u64> {
        let h = self.h;
        let mut out = BTreeSet::new();
        for (a, b, swapped) in doublings(m, self.d1, self.d2) {
            let same = (a, b) == (self.d1.min(self.d2), self.d1.max(self.d2));
            if !same {
                continue;
            }
            // a swapped image of an ordered slice pair means u -> 1/u
            let flip = swapped != (self.d1 > self.d2);
            for j in 0..m {
                let c = (class << j) % h;
                out.insert(if flip { (h - c) % h } else { c });
            }
        }
        out
    }
}

fn min_element_in_classes(field: &FieldSpec, h: u64, classes: &BTreeSet<u64>) -> u32 {
    field
        .nonzero()
        .find(|&u| classes.contains(&(u64::from(field.log(u).expect("nonzero")) % h)))
        .expect("every coset is nonempty")
}

/// The lexicographically least triple equivalent to `(d1, d2, u)`.
pub fn canonical_orbit_representative(field: &FieldSpec, d1: u64, d2: u64, u: u32) -> Result<Triple> {
    let m = field.m();
    field.check(u)?;
    let slice = Slice::new(m, d1, d2)?;
    if u == 0 {
        let (a, b) = canonical_pair(m, d1, d2)?;
        return Ok(Triple { d1: a, d2: b, u: 0 });
    }
    let h = slice.h;
    let e = u64::from(field.log(u).expect("nonzero"));
    let (best_a, best_b) = canonical_pair(m, d1, d2)?;
    let mut classes = BTreeSet::new();
    for (a, b, swapped) in doublings(m, slice.d1, slice.d2) {
        if (a, b) != (best_a, best_b) {
            continue;
        }
        for j in 0..m {
            let c = ((e % h) << j) % h;
            classes.insert(if swapped { (h - c) % h } else { c });
        }
    }
    Ok(Triple { d1: best_a, d2: best_b, u: min_element_in_classes(field, h, &classes) })
}

/// All `u'` with `(d1, d2, u')` equivalent to `(d1, d2, u)`, sorted.
pub fn slice_orbit(field: &FieldSpec, d1: u64, d2: u64, u: u32) -> Result<Vec<u32>> {
    let m = field.m();
    field.check(u)?;
    if u == 0 {
        return Ok(vec![0]);
    }
    let slice = Slice::new(m, d1, d2)?;
    let e = u64::from(field.log(u).expect("nonzero"));
    let classes = slice.class_orbit(m, e % slice.h);
    Ok(field.nonzero().filter(|&v| classes.contains(&(u64::from(field.log(v).expect("nonzero")) % slice.h))).collect())
}

fn orbit_size(field: &FieldSpec, slice: &Slice, class: u64) -> u64 {
    slice.class_orbit(field.m(), class).len() as u64 * (u64::from(field.group_order()) / slice.h)
}

fn is_monomial_like(m: u32, d1: u64, d2: u64) -> bool {
    let q1 = (1u64 << m) - 1;
    d1.is_power_of_two() || d2.is_power_of_two() || (0..m).any(|k| double(d1, k, q1) == d2 || double(d2, k, q1) == d1)
}

/// Canonical exponent pairs covered by `space`.
pub fn slices(space: &SearchSpace) -> Result<Vec<(u64, u64)>> {
    let q1 = (1u64 << space.m) - 1;
    match space.pairs {
        PairSelection::Fixed(d1, d2) => {
            let s = Slice::new(space.m, d1, d2)?;
            Ok(vec![(s.d1.min(s.d2), s.d1.max(s.d2))])
        }
        PairSelection::All => {
            let mut out = Vec::new();
            for d1 in 1..=q1 {
                for d2 in d1 + 1..=q1 {
                    if canonical_pair(space.m, d1, d2)? == (d1, d2) {
                        out.push((d1, d2));
                    }
                }
            }
            Ok(out)
        }
    }
}

/// Searches one exponent pair and returns its APN orbits.
pub fn search_slice(field: &Arc<FieldSpec>, d1: u64, d2: u64, u_range: Option<(u32, u32)>) -> Result<Vec<SearchHit>> {
    let m = field.m();
    let slice = Slice::new(m, d1, d2)?;
    let h = slice.h;
    let test = |u: u32| -> Result<bool> {
        let f = VectorialFunction::from_polynomial(field, &[(slice.d1, 1), (slice.d2, u)])?;
        Ok(is_apn(&f))
    };
    let mut hits = Vec::new();
    let mut seen: HashSet<Triple> = HashSet::new();
    let mut record = |u: u32| -> Result<()> {
        let t = canonical_orbit_representative(field, slice.d1, slice.d2, u)?;
        if seen.insert(t) {
            let class = u64::from(field.log(u).expect("nonzero")) % h;
            let full = differential_spectrum(&t.function(field)?);
            hits.push(SearchHit {
                d1: t.d1,
                d2: t.d2,
                u: t.u,
                apn_verified: full.uniformity == 2,
                orbit_size: orbit_size(field, &slice, class),
                monomial_like: is_monomial_like(m, t.d1, t.d2),
                slice: (slice.d1, slice.d2),
            });
        }
        Ok(())
    };
    match u_range {
        Some((lo, hi)) => {
            for u in lo.max(1)..=hi.min(field.group_order()) {
                if test(u)? {
                    record(u)?;
                }
            }
        }
        None => {
            let mut done = vec![false; h as usize];
            for class in 0..h {
                if done[class as usize] {
                    continue;
                }
                for c in slice.class_orbit(m, class) {
                    done[c as usize] = true;
                }
                let u = field.exp(class);
                if test(u)? {
                    record(u)?;
                }
            }
        }
    }
    hits.sort_by_key(|hit| (hit.d1, hit.d2, hit.u));
    Ok(hits)
}

/// Receives each finished slice and its hits.
pub type SliceCallback<'a> = dyn Fn((u64, u64), &[SearchHit]) + Sync + 'a;

/// Runs the search over every slice not in `skip`, calling `on_slice` after each
/// slice finishes. Hits are sorted, so the output does not depend on scheduling.
pub fn search_binomials_with(
    field: &Arc<FieldSpec>,
    space: &SearchSpace,
    skip: &HashSet<(u64, u64)>,
    on_slice: &SliceCallback<'_>,
) -> Result<Vec<SearchHit>> {
    if field.m() != space.m {
        return Err(Error::FieldMismatch);
    }
    let todo: Vec<(u64, u64)> = slices(space)?.into_iter().filter(|s| !skip.contains(s)).collect();
    let per_slice: Vec<Vec<SearchHit>> = todo
        .par_iter()
        .map(|&(d1, d2)| {
            let hits = search_slice(field, d1, d2, space.u_range)?;
            on_slice((d1, d2), &hits);
            Ok(hits)
        })
        .collect::<Result<_>>()?;
    let mut all: Vec<SearchHit> = per_slice.into_iter().flatten().collect();
    all.sort_by_key(|hit| (hit.d1, hit.d2, hit.u, hit.slice));
    all.dedup_by_key(|hit| (hit.d1, hit.d2, hit.u));
    Ok(all)
}

/// Every APN orbit in `space`, canonicalized, deduplicated and sorted.
pub fn search_binomials(field: &Arc<FieldSpec>, space: &SearchSpace) -> Result<Vec<SearchHit>> {
    search_binomials_with(field, space, &HashSet::new(), &|_, _| {})
}
