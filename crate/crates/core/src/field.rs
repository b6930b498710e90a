//! Arithmetic in GF(2^m), 2 <= m <= 16, in a polynomial basis.
//!
//! Elements are plain `u32` values whose bit `i` is the coefficient of `x^i`.
//! Multiplication goes through discrete-log tables built from a primitive
//! element, which is found by search when the reduction polynomial is
//! irreducible but not primitive.

use crate::error::{Error, Result};

/// Smallest supported extension degree.
pub const MIN_DEGREE: u32 = 2;
/// Largest supported extension degree.
pub const MAX_DEGREE: u32 = 16;

/// Built-in primitive reduction polynomials, indexed by `m`.
const DEFAULT_POLYS: [u32; 17] =
    [0, 0, 0x7, 0xb, 0x13, 0x25, 0x43, 0x83, 0x11d, 0x211, 0x409, 0x805, 0x1053, 0x201b, 0x4443, 0x8003, 0x1100b];

/// The default primitive polynomial for degree `m` (bit `i` = coefficient of `x^i`).
pub fn default_poly(m: u32) -> Result<u32> {
    check_degree(m)?;
    Ok(DEFAULT_POLYS[m as usize])
}

fn check_degree(m: u32) -> Result<()> {
    if (MIN_DEGREE..=MAX_DEGREE).contains(&m) {
        Ok(())
    } else {
        Err(Error::UnsupportedDegree(m))
    }
}

fn degree(p: u32) -> i32 {
    31 - p.leading_zeros() as i32
}

/// Remainder of `a` modulo `b` as polynomials over F2.
fn poly_rem(mut a: u32, b: u32) -> u32 {
    let db = degree(b);
    while a != 0 && degree(a) >= db {
        a ^= b << (degree(a) - db);
    }
    a
}

/// Trial division by every polynomial of degree 1..=m/2.
pub fn is_irreducible(poly: u32) -> bool {
    let m = degree(poly);
    if m < 1 {
        return false;
    }
    for d in 1..=m / 2 {
        for low in 0..(1u32 << d) {
            if poly_rem(poly, (1 << d) | low) == 0 {
                return false;
            }
        }
    }
    true
}

/// Carry-less product of `a` and `b` reduced modulo `poly`.
fn mulmod(mut a: u32, mut b: u32, poly: u32, m: u32) -> u32 {
    let top = 1u32 << m;
    let mut acc = 0;
    while b != 0 {
        if b & 1 == 1 {
            acc ^= a;
        }
        b >>= 1;
        a <<= 1;
        if a & top != 0 {
            a ^= poly;
        }
    }
    acc
}

fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut p = 2;
    while p * p <= n {
        if n.is_multiple_of(p) {
            out.push(p);
            while n.is_multiple_of(p) {
                n /= p;
            }
        }
        p += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

/// A concrete model of GF(2^m).
#[derive(Clone)]
pub struct FieldSpec {
    m: u32,
    poly: u32,
    generator: u32,
    /// `log[a]` for a != 0; `log[0]` is unused.
    log: Vec<u32>,
    /// `antilog[k] = g^k` for 0 <= k < 2(2^m - 1), doubled to skip a modulo in `mul`.
    antilog: Vec<u32>,
    order_primes: Vec<u64>,
    trace_mask: u32,
}

impl std::fmt::Debug for FieldSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FieldSpec")
            .field("m", &self.m)
            .field("poly", &format_args!("{:#x}", self.poly))
            .field("generator", &format_args!("{:#x}", self.generator))
            .finish()
    }
}

impl PartialEq for FieldSpec {
    fn eq(&self, other: &Self) -> bool {
        self.m == other.m && self.poly == other.poly
    }
}

impl Eq for FieldSpec {}

/// Builds GF(2^m) from `poly`, or from the built-in primitive polynomial when `poly` is `None`.
pub fn build_field(m: u32, poly: Option<u32>) -> Result<FieldSpec> {
    FieldSpec::new(m, poly)
}

impl FieldSpec {
    pub fn new(m: u32, poly: Option<u32>) -> Result<Self> {
        check_degree(m)?;
        let poly = match poly {
            Some(p) => {
                if degree(p) != m as i32 {
                    return Err(Error::RejectedPolynomial { poly: p, m, reason: "wrong degree" });
                }
                if !is_irreducible(p) {
                    return Err(Error::RejectedPolynomial { poly: p, m, reason: "reducible" });
                }
                p
            }
            None => DEFAULT_POLYS[m as usize],
        };
        let q1 = (1u64 << m) - 1;
        let order_primes = prime_factors(q1);
        let is_primitive = |g: u32| {
            order_primes.iter().all(|&p| {
                let mut acc = 1u32;
                let mut base = g;
                let mut e = q1 / p;
                while e > 0 {
                    if e & 1 == 1 {
                        acc = mulmod(acc, base, poly, m);
                    }
                    base = mulmod(base, base, poly, m);
                    e >>= 1;
                }
                acc != 1
            })
        };
        let generator =
            (2..(1u32 << m)).find(|&g| is_primitive(g)).expect("the multiplicative group of a finite field is cyclic");

        let n = q1 as usize;
        let mut log = vec![0u32; n + 1];
        let mut antilog = vec![0u32; 2 * n];
        let mut x = 1u32;
        for k in 0..n {
            antilog[k] = x;
            antilog[k + n] = x;
            log[x as usize] = k as u32;
            x = mulmod(x, generator, poly, m);
        }
        debug_assert_eq!(x, 1);

        let mut field = FieldSpec { m, poly, generator, log, antilog, order_primes, trace_mask: 0 };
        field.trace_mask = (0..m).filter(|&j| field.trace_by_frobenius(1 << j) == 1).fold(0, |acc, j| acc | (1 << j));
        Ok(field)
    }

    /// Extension degree.
    pub fn m(&self) -> u32 {
        self.m
    }

    /// Reduction polynomial as a bitmask.
    pub fn poly(&self) -> u32 {
        self.poly
    }

    /// Number of field elements, 2^m.
    pub fn size(&self) -> usize {
        1 << self.m
    }

    /// Order of the multiplicative group, 2^m - 1.
    pub fn group_order(&self) -> u32 {
        (1 << self.m) - 1
    }

    /// The primitive element the log tables are built on.
    pub fn generator(&self) -> u32 {
        self.generator
    }

    /// Prime divisors of 2^m - 1.
    pub fn group_order_primes(&self) -> &[u64] {
        &self.order_primes
    }

    pub fn contains(&self, a: u32) -> bool {
        a < (1 << self.m)
    }

    pub fn check(&self, a: u32) -> Result<u32> {
        if self.contains(a) {
            Ok(a)
        } else {
            Err(Error::InvalidElement { value: a, m: self.m })
        }
    }

    #[inline]
    pub fn mul(&self, a: u32, b: u32) -> u32 {
        if a == 0 || b == 0 {
            return 0;
        }
        self.antilog[(self.log[a as usize] + self.log[b as usize]) as usize]
    }

    /// Multiplicative inverse; `inv(0)` is defined as 0.
    #[inline]
    pub fn inv(&self, a: u32) -> u32 {
        if a == 0 {
            return 0;
        }
        let n = self.group_order();
        self.antilog[((n - self.log[a as usize]) % n) as usize]
    }

    pub fn div(&self, a: u32, b: u32) -> u32 {
        self.mul(a, self.inv(b))
    }

    /// `a^e`, with `0^0 = 1` and `0^e = 0` for `e > 0`.
    pub fn pow(&self, a: u32, e: u64) -> u32 {
        if a == 0 {
            return u32::from(e == 0);
        }
        let n = u64::from(self.group_order());
        let k = (u64::from(self.log[a as usize]) * (e % n)) % n;
        self.antilog[k as usize]
    }

    /// Discrete log to base [`generator`](Self::generator); `None` for zero.
    pub fn log(&self, a: u32) -> Option<u32> {
        (a != 0).then(|| self.log[a as usize])
    }

    /// `g^k` for the table generator `g`.
    pub fn exp(&self, k: u64) -> u32 {
        self.antilog[(k % u64::from(self.group_order())) as usize]
    }

    /// Multiplicative order of a nonzero element.
    pub fn element_order(&self, a: u32) -> Result<u64> {
        if a == 0 {
            return Err(Error::ZeroHasNoOrder);
        }
        let mut n = u64::from(self.group_order());
        for &p in &self.order_primes {
            while n % p == 0 && self.pow(a, n / p) == 1 {
                n /= p;
            }
        }
        Ok(n)
    }

    /// True iff `a` lies in the subfield GF(2^k), i.e. `a^(2^k) = a`.
    pub fn in_subfield(&self, a: u32, k: u32) -> Result<bool> {
        if k == 0 || !self.m.is_multiple_of(k) {
            return Err(Error::NotASubfield { k, m: self.m });
        }
        let mut x = a;
        for _ in 0..k {
            x = self.mul(x, x);
        }
        Ok(x == a)
    }

    fn trace_by_frobenius(&self, a: u32) -> u32 {
        let mut acc = 0;
        let mut x = a;
        for _ in 0..self.m {
            acc ^= x;
            x = self.mul(x, x);
        }
        debug_assert!(acc <= 1);
        acc
    }

    /// Absolute trace to F2.
    #[inline]
    pub fn trace(&self, a: u32) -> u32 {
        (a & self.trace_mask).count_ones() & 1
    }

    /// Bitmask `t` such that `trace(a) = parity(a & t)`.
    pub fn trace_mask(&self) -> u32 {
        self.trace_mask
    }

    /// Bitmask `t` with `trace(beta * y) = parity(y & t)` for every `y`.
    pub fn trace_form_mask(&self, beta: u32) -> u32 {
        (0..self.m).filter(|&j| self.trace(self.mul(beta, 1 << j)) == 1).fold(0, |acc, j| acc | (1 << j))
    }

    /// The element `g^((2^m - 1)/3)` of order 3, when 3 divides 2^m - 1 (m even).
    pub fn cube_root_of_unity(&self) -> Option<u32> {
        let n = u64::from(self.group_order());
        (n % 3 == 0).then(|| self.exp(n / 3))
    }

    /// Iterator over the nonzero elements.
    pub fn nonzero(&self) -> impl Iterator<Item = u32> {
        1..(1u32 << self.m)
    }
}
