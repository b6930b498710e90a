//! Known APN power maps and the two APN binomial families `x^3 + u x^36` on
//! GF(2^10) and `x^3 + u x^528` on GF(2^12).

use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::{FieldSpec, MAX_DEGREE, MIN_DEGREE};
use crate::function::VectorialFunction;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Family {
    Gold,
    Kasami,
    Welch,
    Niho,
    Inverse,
    Dobbertin,
    #[serde(rename = "Binomial-T1")]
    BinomialT1,
    #[serde(rename = "Binomial-T2")]
    BinomialT2,
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Family::Gold => "Gold",
            Family::Kasami => "Kasami",
            Family::Welch => "Welch",
            Family::Niho => "Niho",
            Family::Inverse => "Inverse",
            Family::Dobbertin => "Dobbertin",
            Family::BinomialT1 => "Binomial-T1",
            Family::BinomialT2 => "Binomial-T2",
        };
        f.write_str(s)
    }
}

/// One power map `x^d` from the table of known APN exponents.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CatalogEntry {
    pub family: Family,
    /// Name of the family parameter (`i` or `t`).
    pub parameter: &'static str,
    pub value: u32,
    pub exponent: u64,
    /// The applicability condition, as text.
    pub condition: String,
}

impl CatalogEntry {
    pub fn function(&self, field: &Arc<FieldSpec>) -> VectorialFunction {
        VectorialFunction::power(field, self.exponent)
    }

    /// Re-checks the family condition for degree `m`.
    pub fn condition_holds(&self, m: u32) -> bool {
        let v = self.value;
        let half = (m - 1) / 2;
        match self.family {
            Family::Gold | Family::Kasami => (1..=half).contains(&v) && gcd(v, m) == 1,
            Family::Welch | Family::Niho | Family::Inverse => m == 2 * v + 1,
            Family::Dobbertin => m == 5 * v,
            Family::BinomialT1 | Family::BinomialT2 => false,
        }
    }
}

fn gcd(a: u32, b: u32) -> u32 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Every known APN power exponent applicable to GF(2^m). An exponent already
/// produced by an earlier family (Kasami with `i = 1` is the Gold map `x^3`) is
/// listed once.
pub fn known_apn_functions(m: u32) -> Result<Vec<CatalogEntry>> {
    if !(MIN_DEGREE..=MAX_DEGREE).contains(&m) {
        return Err(Error::UnsupportedDegree(m));
    }
    let p = |k: u32| 1u64 << k;
    let mut out: Vec<CatalogEntry> = Vec::new();
    let mut push = |family, parameter, value, exponent, condition: String| {
        if !out.iter().any(|e| e.exponent == exponent) {
            out.push(CatalogEntry { family, parameter, value, exponent, condition });
        }
    };
    let half = (m - 1) / 2;
    for i in (1..=half).filter(|&i| gcd(i, m) == 1) {
        push(Family::Gold, "i", i, p(i) + 1, format!("gcd({i},{m})=1, 1<=i<=(m-1)/2"));
    }
    for i in (1..=half).filter(|&i| gcd(i, m) == 1) {
        push(Family::Kasami, "i", i, p(2 * i) - p(i) + 1, format!("gcd({i},{m})=1, 1<=i<=(m-1)/2"));
    }
    if m % 2 == 1 {
        let t = half;
        push(Family::Welch, "t", t, p(t) + 3, format!("m=2t+1, t={t}"));
        let niho = if t.is_multiple_of(2) { p(t) + p(t / 2) - 1 } else { p(t) + p((3 * t).div_ceil(2)) - 1 };
        push(Family::Niho, "t", t, niho, format!("m=2t+1, t={t}"));
        push(Family::Inverse, "t", t, p(2 * t) - 1, format!("m=2t+1, t={t}"));
    }
    if m.is_multiple_of(5) {
        let i = m / 5;
        push(Family::Dobbertin, "i", i, p(4 * i) + p(3 * i) + p(2 * i) + p(i) - 1, format!("m=5i, i={i}"));
    }
    Ok(out)
}

fn require_degree(field: &FieldSpec, m: u32) -> Result<()> {
    if field.m() == m {
        Ok(())
    } else {
        Err(Error::WrongField { expected: m, got: field.m() })
    }
}

/// `x^3 + u x^36` on GF(2^10).
pub fn theorem1_function(field: &Arc<FieldSpec>, u: u32) -> Result<VectorialFunction> {
    require_degree(field, 10)?;
    VectorialFunction::from_polynomial(field, &[(3, 1), (36, u)])
}

/// True iff `u` lies in `w GF(32)* ∪ w^2 GF(32)*` for `w` of order 3.
pub fn theorem1_u_is_valid(field: &FieldSpec, u: u32) -> Result<bool> {
    require_degree(field, 10)?;
    field.check(u)?;
    if u == 0 {
        return Ok(false);
    }
    let w = field.cube_root_of_unity().expect("3 divides 2^10 - 1");
    let w2 = field.mul(w, w);
    Ok(field.in_subfield(field.div(u, w), 5)? || field.in_subfield(field.div(u, w2), 5)?)
}

/// All 62 valid coefficients, sorted.
pub fn theorem1_valid_us(field: &FieldSpec) -> Result<Vec<u32>> {
    require_degree(field, 10)?;
    field.nonzero().filter_map(|u| theorem1_u_is_valid(field, u).map(|ok| ok.then_some(u)).transpose()).collect()
}

/// `x^3 + u x^528` on GF(2^12).
pub fn theorem2_function(field: &Arc<FieldSpec>, u: u32) -> Result<VectorialFunction> {
    require_degree(field, 12)?;
    VectorialFunction::from_polynomial(field, &[(3, 1), (528, u)])
}

/// Order-based validity: `45 | ord(u) | 585`, or `7 | ord(u) | 273`.
pub fn theorem2_u_is_valid(field: &FieldSpec, u: u32) -> Result<bool> {
    require_degree(field, 12)?;
    field.check(u)?;
    if u == 0 {
        return Ok(false);
    }
    let o = field.element_order(u)?;
    Ok((o % 45 == 0 && 585 % o == 0) || (o % 7 == 0 && 273 % o == 0))
}

pub fn theorem2_valid_us(field: &FieldSpec) -> Result<Vec<u32>> {
    require_degree(field, 12)?;
    field.nonzero().filter_map(|u| theorem2_u_is_valid(field, u).map(|ok| ok.then_some(u)).transpose()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn exponents(m: u32, family: Family) -> Vec<u64> {
        known_apn_functions(m).unwrap().into_iter().filter(|e| e.family == family).map(|e| e.exponent).collect()
    }

    #[test]
    fn gf1024_catalog() {
        let all = known_apn_functions(10).unwrap();
        assert_eq!(exponents(10, Family::Gold), vec![3, 9]);
        assert_eq!(exponents(10, Family::Kasami), vec![57]);
        assert_eq!(exponents(10, Family::Dobbertin), vec![339]);
        assert_eq!(all.len(), 4);
        assert!(all.iter().all(|e| e.condition_holds(10)));
    }

    #[test]
    fn gf32_catalog() {
        assert_eq!(exponents(5, Family::Welch), vec![7]);
        assert_eq!(exponents(5, Family::Inverse), vec![15]);
        assert_eq!(exponents(5, Family::Gold), vec![3, 5]);
        assert_eq!(exponents(5, Family::Kasami), vec![13]);
        assert_eq!(exponents(5, Family::Dobbertin), vec![29]);
    }

    #[test]
    fn unsupported_degree() {
        assert_eq!(known_apn_functions(1).unwrap_err(), Error::UnsupportedDegree(1));
    }

    #[test]
    fn theorem1_set() {
        let f = FieldSpec::new(10, None).unwrap();
        let valid = theorem1_valid_us(&f).unwrap();
        assert_eq!(valid.len(), 62);
        assert!(!theorem1_u_is_valid(&f, 1).unwrap());
        assert!(!theorem1_u_is_valid(&f, 0).unwrap());
        // same set as {u : u^31 has order 3}
        for u in f.nonzero() {
            let alt = f.element_order(f.pow(u, 31)).unwrap() == 3;
            assert_eq!(theorem1_u_is_valid(&f, u).unwrap(), alt);
        }
        let g12 = FieldSpec::new(12, None).unwrap();
        assert_eq!(theorem1_u_is_valid(&g12, 1), Err(Error::WrongField { expected: 10, got: 12 }));
    }

    #[test]
    fn theorem2_set() {
        let f = FieldSpec::new(12, None).unwrap();
        assert_eq!(theorem2_valid_us(&f).unwrap().len(), 546);
        let g = f.generator();
        assert!(theorem2_u_is_valid(&f, f.pow(g, 4095 / 45)).unwrap());
        assert!(!theorem2_u_is_valid(&f, f.pow(g, 4095 / 9)).unwrap());
    }
}
