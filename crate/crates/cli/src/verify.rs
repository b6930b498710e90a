//! Reproduction suites behind `apnlab verify`.

use std::sync::Arc;

use anyhow::Context;
use apnlab_core::catalog::{
    known_apn_functions, theorem1_function, theorem1_u_is_valid, theorem2_function, theorem2_u_is_valid, Family,
};
use apnlab_core::invariants::{
    build_af, build_graph_element, ideal_dimension_oracle, translate_closure, ClosureOptions, ClosureProgress,
    EchelonBasis,
};
use apnlab_core::spectra::{is_apn, walsh_spectrum};
use apnlab_core::{Error, FieldSpec, VectorialFunction};
use clap::ValueEnum;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    Theorem1,
    Theorem2Sample,
    Table1,
    Table2Small,
    Table2Full,
}

#[derive(Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Serialize)]
pub struct Outcome {
    pub suite: Suite,
    pub m: u32,
    pub seed: u64,
    pub passed: bool,
    pub checks: Vec<Check>,
}

fn check(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Check {
    Check { name: name.into(), passed, detail: detail.into() }
}

fn field(m: u32) -> anyhow::Result<Arc<FieldSpec>> {
    Ok(Arc::new(FieldSpec::new(m, None)?))
}

pub fn run_suite(suite: Suite, m: u32, seed: u64) -> anyhow::Result<Outcome> {
    eprintln!("[verify] suite={suite:?} seed={seed}");
    let (m, checks) = match suite {
        Suite::Theorem1 => (10, theorem1()?),
        Suite::Theorem2Sample => (12, theorem2_sample(seed)?),
        Suite::Table1 => (m, table1(m)?),
        Suite::Table2Small => (6, table2_small()?),
        Suite::Table2Full => (10, table2_full()?),
    };
    let passed = checks.iter().all(|c| c.passed);
    Ok(Outcome { suite, m, seed, passed, checks })
}

/// `x^3 + u x^36` is APN exactly for the predicted coefficients, over every nonzero `u`.
pub fn theorem1() -> anyhow::Result<Vec<Check>> {
    let k = field(10)?;
    let mut mismatches = Vec::new();
    let mut apn = 0;
    for u in k.nonzero() {
        let is = is_apn(&theorem1_function(&k, u)?);
        apn += usize::from(is);
        if is != theorem1_u_is_valid(&k, u)? {
            mismatches.push(format!("{u:#x}"));
        }
    }
    Ok(vec![
        check("iff over all nonzero u", mismatches.is_empty(), format!("mismatches: {mismatches:?}")),
        check("apn count", apn == 62, format!("{apn} APN coefficients")),
    ])
}

/// Every `u` of order 45 or 91 gives an APN map; random coefficients outside
/// the valid set do not.
pub fn theorem2_sample(seed: u64) -> anyhow::Result<Vec<Check>> {
    let k = field(12)?;
    let by_order =
        |o: u64| -> anyhow::Result<Vec<u32>> { Ok(k.nonzero().filter(|&u| k.element_order(u) == Ok(o)).collect()) };
    let order45 = by_order(45)?;
    let order91 = by_order(91)?;
    let mut checks = Vec::new();
    for (o, us, expected) in [(45, &order45, 24), (91, &order91, 72)] {
        let failing: Vec<String> = us
            .iter()
            .filter(|&&u| !is_apn(&theorem2_function(&k, u).expect("m = 12")))
            .map(|u| format!("{u:#x}"))
            .collect();
        check_push(
            &mut checks,
            format!("order {o} coefficients are APN"),
            failing.is_empty() && us.len() == expected,
            format!("{} coefficients, non-APN: {failing:?}", us.len()),
        );
    }
    let mut valid = 0;
    let mut invalid = Vec::new();
    for u in k.nonzero() {
        if theorem2_u_is_valid(&k, u)? {
            valid += 1;
        } else {
            invalid.push(u);
        }
    }
    check_push(&mut checks, "valid coefficient count", valid == 546, format!("{valid}"));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sample: Vec<u32> = invalid.choose_multiple(&mut rng, 50).copied().collect();
    let apn: Vec<String> = sample
        .iter()
        .filter(|&&u| is_apn(&theorem2_function(&k, u).expect("m = 12")))
        .map(|u| format!("{u:#x}"))
        .collect();
    check_push(
        &mut checks,
        "50 random invalid coefficients are not APN",
        apn.is_empty() && sample.len() == 50,
        format!("APN among sample: {apn:?}"),
    );
    Ok(checks)
}

fn check_push(checks: &mut Vec<Check>, name: impl Into<String>, passed: bool, detail: impl Into<String>) {
    checks.push(check(name, passed, detail));
}

/// Catalog entries are APN; for odd `m` the Gold, Kasami, Welch and Niho maps
/// are AB and the inverse map has more than three absolute Walsh values.
pub fn table1(m: u32) -> anyhow::Result<Vec<Check>> {
    let k = field(m)?;
    let mut checks = Vec::new();
    for e in known_apn_functions(m)? {
        let f = e.function(&k);
        let name = format!("{} {}={} x^{}", e.family, e.parameter, e.value, e.exponent);
        check_push(&mut checks, format!("{name} is APN"), is_apn(&f), "");
        if m % 2 == 1 {
            let w = walsh_spectrum(&f);
            match e.family {
                Family::Gold | Family::Kasami | Family::Welch | Family::Niho => {
                    let bound = 1u64 << m.div_ceil(2);
                    check_push(
                        &mut checks,
                        format!("{name} is AB"),
                        w.linearity == bound,
                        format!("linearity {} (bound {bound})", w.linearity),
                    );
                }
                Family::Inverse => check_push(
                    &mut checks,
                    format!("{name} has more than three absolute Walsh values"),
                    w.distinct_abs_values() > 3,
                    format!("{:?}", w.abs_values),
                ),
                _ => {}
            }
        }
    }
    Ok(checks)
}

/// Closure dimension against the dense oracle, for `x^3` and `x^5` at m = 4, 5, 6.
/// Where the map is not APN, `A_F` is undefined; the error is checked and the
/// comparison runs on the graph element instead.
pub fn table2_small() -> anyhow::Result<Vec<Check>> {
    let mut checks = Vec::new();
    for m in 4..=6 {
        let k = field(m)?;
        for d in [3u64, 5] {
            let f = VectorialFunction::power(&k, d);
            let (target, element) = match build_af(&f) {
                Ok(a) => ("A_F", a),
                Err(Error::NotApn) => {
                    check_push(&mut checks, format!("m={m} x^{d}: A_F rejected (not APN)"), true, "");
                    ("graph", build_graph_element(&f))
                }
                Err(e) => return Err(e.into()),
            };
            let closure = translate_closure(&element, ClosureOptions::default())?.basis.dimension();
            let oracle = ideal_dimension_oracle(&element)?;
            check_push(
                &mut checks,
                format!("m={m} x^{d} {target}: closure = oracle"),
                closure == oracle,
                format!("closure {closure}, oracle {oracle}"),
            );
        }
    }
    Ok(checks)
}

/// The m = 10 ideal dimensions. Long-running.
pub fn table2_full() -> anyhow::Result<Vec<Check>> {
    let k = field(10)?;
    let w = k.cube_root_of_unity().context("no cube root of unity")?;
    let cases: Vec<(String, VectorialFunction, usize)> = vec![
        ("x^3".into(), VectorialFunction::power(&k, 3), 1804),
        ("x^9".into(), VectorialFunction::power(&k, 9), 1804),
        ("x^57".into(), VectorialFunction::power(&k, 57), 5734),
        (format!("x^3+{w:#x}x^36"), theorem1_function(&k, w)?, 1896),
    ];
    let mut checks = Vec::new();
    for (name, f, expected) in cases {
        let a = build_af(&f)?;
        let mut last = 0.0;
        let mut beat = |p: ClosureProgress, _: &EchelonBasis| {
            if p.seconds - last >= 30.0 {
                last = p.seconds;
                eprintln!("[verify] {name}: dim={} processed={} {:.0}s", p.dimension, p.processed, p.seconds);
            }
        };
        let c = translate_closure(&a, ClosureOptions { progress: Some(&mut beat), ..Default::default() })?;
        let dim = c.basis.dimension();
        eprintln!("[verify] {name}: dim={dim} in {:.0}s", c.seconds);
        check_push(
            &mut checks,
            format!("{name} ideal dimension"),
            dim == expected,
            format!("{dim} (expected {expected})"),
        );
    }
    Ok(checks)
}
