//! End-to-end acceptance checks, one line per criterion.
//!
//! Criterion 3 (m = 10 ideal dimensions) takes tens of minutes and runs only
//! with `APNLAB_FULL=1`.

use std::path::Path;
use std::process::Command;
use std::sync::Arc;

use apnlab_core::catalog::theorem1_function;
use apnlab_core::field::{is_irreducible, FieldSpec};
use apnlab_core::function::LinearMap;
use apnlab_core::invariants::{build_af, build_graph_element, ideal_dimension, GroupAlgebraElement};
use apnlab_core::spectra::{derivative_counts, differential_spectrum, is_crooked, walsh_spectrum, walsh_table};
use apnlab_core::VectorialFunction;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

const SEED: u64 = 20240601;

fn apnlab(args: &[&str]) -> (i32, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_apnlab")).args(args).output().expect("run apnlab");
    (out.status.code().unwrap_or(-1), String::from_utf8_lossy(&out.stdout).into_owned())
}

/// Runs a verify suite; returns pass flag and a summary of failing checks.
fn suite(args: &[&str]) -> (bool, String) {
    let mut full = vec!["verify", "--seed", "1"];
    full.extend_from_slice(args);
    let (code, stdout) = apnlab(&full);
    let report: Value = serde_json::from_str(&stdout).unwrap_or(Value::Null);
    let checks = report["results"]["checks"].as_array().cloned().unwrap_or_default();
    let failing: Vec<String> = checks
        .iter()
        .filter(|c| c["passed"] != Value::Bool(true))
        .map(|c| format!("{}: {}", c["name"], c["detail"]))
        .collect();
    let ok = code == 0 && !checks.is_empty() && failing.is_empty();
    (ok, format!("{} checks, exit {code}; failing: {failing:?}", checks.len()))
}

fn field(m: u32) -> Arc<FieldSpec> {
    Arc::new(FieldSpec::new(m, None).unwrap())
}

fn criterion1() -> (bool, String) {
    suite(&["--suite", "theorem1"])
}

fn criterion2() -> (bool, String) {
    suite(&["--suite", "table2-small"])
}

fn criterion3() -> Option<(bool, String)> {
    if std::env::var("APNLAB_FULL").map_or(true, |v| v != "1") {
        return None;
    }
    Some(suite(&["--suite", "table2-full"]))
}

fn criterion4() -> (bool, String) {
    let k = field(10);
    let w = k.cube_root_of_unity().unwrap();
    let t1 = walsh_spectrum(&theorem1_function(&k, w).unwrap()).abs_values;
    let x3 = walsh_spectrum(&VectorialFunction::power(&k, 3)).abs_values;
    let x57 = walsh_spectrum(&VectorialFunction::power(&k, 57)).abs_values;
    let x339 = walsh_spectrum(&VectorialFunction::power(&k, 339)).abs_values;
    (t1 == x3 && x3 == x57 && x339 != x3, format!("T1/x^3/x^57 {t1:?}, x^339 {x339:?}"))
}

fn criterion5() -> (bool, String) {
    let mut ok = true;
    let mut notes = Vec::new();
    for m in ["5", "7", "9"] {
        let (pass, detail) = suite(&["--suite", "table1", "--m", m]);
        ok &= pass;
        notes.push(format!("m={m}: {detail}"));
    }
    (ok, notes.join("; "))
}

fn criterion6() -> (bool, String) {
    let k = field(10);
    let w = k.cube_root_of_unity().unwrap();
    let t1 = is_crooked(&theorem1_function(&k, w).unwrap());
    let x339 = is_crooked(&VectorialFunction::power(&k, 339));
    (t1 && !x339, format!("T1 crooked={t1}, x^339 crooked={x339}"))
}

fn criterion7() -> (bool, String) {
    suite(&["--suite", "theorem2-sample"])
}

fn random_automorphism(rank: u32, rng: &mut ChaCha8Rng) -> Vec<usize> {
    let l = LinearMap::random_invertible(rank, rng);
    (0..rank).map(|j| l.apply(1 << j) as usize).collect()
}

fn ideal_of(f: &VectorialFunction) -> (Option<usize>, usize) {
    (build_af(f).ok().map(|a| ideal_dimension(&a).unwrap()), ideal_dimension(&build_graph_element(f)).unwrap())
}

fn criterion8() -> (bool, String) {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut failures: Vec<String> = Vec::new();
    let mut fail = |s: String| failures.push(s);

    for m in 2..=6u32 {
        let k = field(m);
        let n = 1u32 << m;
        for _ in 0..10 {
            let lut: Vec<u32> = (0..n).map(|_| rng.gen_range(0..n)).collect();
            let f = VectorialFunction::from_lut(&k, lut).unwrap();
            for a in 1..n {
                let c = derivative_counts(&f, a);
                if c.iter().any(|v| v % 2 == 1) || c.iter().sum::<u32>() != n {
                    fail(format!("delta parity/mass m={m}"));
                }
            }
            let w = walsh_table(&f);
            for beta in 0..n as usize {
                let s: i64 = (0..n as usize).map(|al| i64::from(w[(al << m) | beta]).pow(2)).sum();
                if s != 1i64 << (2 * m) {
                    fail(format!("parseval m={m}"));
                }
            }
            if m <= 5 {
                for al in 0..n {
                    for beta in 0..n {
                        let naive: i64 = (0..n)
                            .map(|x| if k.trace(k.mul(al, x)) == k.trace(k.mul(beta, f.eval(x))) { 1 } else { -1 })
                            .sum();
                        if naive != i64::from(w[((al as usize) << m) | beta as usize]) {
                            fail(format!("fwht m={m}"));
                        }
                    }
                }
            }
            if f.anf().to_lut() != f.lut() {
                fail(format!("mobius m={m}"));
            }
        }
    }

    for m in 4..=6u32 {
        let k = field(m);
        for d in [3u64, 5] {
            let f = VectorialFunction::power(&k, d);
            let base = (differential_spectrum(&f), walsh_spectrum(&f).abs_values, f.algebraic_degree(), ideal_of(&f));
            for _ in 0..20 {
                let g = f.random_affine_image(&mut rng);
                let got =
                    (differential_spectrum(&g), walsh_spectrum(&g).abs_values, g.algebraic_degree(), ideal_of(&g));
                if got != base {
                    fail(format!("affine invariance m={m} d={d}"));
                }
            }
        }
        let a: GroupAlgebraElement = build_af(&VectorialFunction::power(&k, 3)).unwrap();
        let dim = ideal_dimension(&a).unwrap();
        for _ in 0..20 {
            let cols = random_automorphism(2 * m, &mut rng);
            if ideal_dimension(&a.map_automorphism(&cols)).unwrap() != dim {
                fail(format!("automorphism invariance m={m}"));
            }
        }
        let other = (1u32 << m..1 << (m + 1)).rev().find(|&p| p != k.poly() && is_irreducible(p)).unwrap();
        let k2 = Arc::new(FieldSpec::new(m, Some(other)).unwrap());
        for d in [3u64, 5, 7] {
            let (f1, f2) = (VectorialFunction::power(&k, d), VectorialFunction::power(&k2, d));
            let left =
                (differential_spectrum(&f1), walsh_spectrum(&f1).abs_values, f1.algebraic_degree(), ideal_of(&f1));
            let right =
                (differential_spectrum(&f2), walsh_spectrum(&f2).abs_values, f2.algebraic_degree(), ideal_of(&f2));
            if left != right {
                fail(format!("basis change m={m} d={d} poly {other:#x}"));
            }
        }
    }
    (failures.is_empty(), format!("seed {SEED}; failures: {failures:?}"))
}

fn search_out(dir: &Path, jobs: &str) -> Option<String> {
    let out = dir.join(format!("hits-{jobs}.jsonl"));
    let out_s = out.to_str()?;
    let (code, _) = apnlab(&["--jobs", jobs, "search", "--m", "10", "--d1", "3", "--d2", "36", "--out", out_s]);
    (code == 0).then(|| std::fs::read_to_string(&out).ok()).flatten()
}

fn criterion9() -> (bool, String) {
    let dir = tempfile::tempdir().unwrap();
    let (Some(one), Some(eight)) = (search_out(dir.path(), "1"), search_out(dir.path(), "8")) else {
        return (false, "search run failed".into());
    };
    let hits: Vec<Value> = one.lines().filter_map(|l| serde_json::from_str(l).ok()).collect();
    let ok = one == eight && hits.len() == 1 && hits[0]["orbit_size"] == 62 && hits[0]["apn_verified"] == true;
    (
        ok,
        format!(
            "{} orbit(s), sizes {:?}, identical across jobs: {}",
            hits.len(),
            hits.iter().map(|h| &h["orbit_size"]).collect::<Vec<_>>(),
            one == eight
        ),
    )
}

fn main() {
    // `cargo test -- --list` and filters pass arguments; only `--list` matters here.
    if std::env::args().any(|a| a == "--list") {
        println!("acceptance: test");
        return;
    }
    let mut all_ok = true;
    let mut report = |n: u32, r: Option<(bool, String)>| match r {
        Some((ok, detail)) => {
            all_ok &= ok;
            println!("[criterion {n}] {} {detail}", if ok { "PASS" } else { "FAIL" });
        }
        None => println!("[criterion {n}] SKIP opt-in; set APNLAB_FULL=1 to run the m=10 ideal dimensions"),
    };
    report(1, Some(criterion1()));
    report(2, Some(criterion2()));
    report(3, criterion3());
    report(4, Some(criterion4()));
    report(5, Some(criterion5()));
    report(6, Some(criterion6()));
    report(7, Some(criterion7()));
    report(8, Some(criterion8()));
    report(9, Some(criterion9()));
    if !all_ok {
        std::process::exit(1);
    }
}
