//! Times the translate-closure ideal dimension of `A_F` for a power map.
//!
//! Usage: `cargo run --release --example ideal_timing -- <m> <d|terms> [oracle]`
//! where `terms` is a polynomial such as `3:1,36:0x2f4`.

use std::sync::Arc;
use std::time::Instant;

use apnlab_core::function::parse_polynomial;
use apnlab_core::invariants::{build_af, ideal_dimension_oracle, translate_closure, ClosureOptions};
use apnlab_core::{FieldSpec, VectorialFunction};

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let m: u32 = args.get(1).and_then(|s| s.parse().ok()).unwrap_or(6);
    let d = args.get(2).cloned().unwrap_or_else(|| "3".into());
    let field = Arc::new(FieldSpec::new(m, None).unwrap());
    let f = match d.parse::<u64>() {
        Ok(e) => VectorialFunction::power(&field, e),
        Err(_) => VectorialFunction::from_polynomial(&field, &parse_polynomial(&d).unwrap()).unwrap(),
    };
    let a = build_af(&f).expect("APN function");
    let t = Instant::now();
    let mut last = 0.0;
    let mut cb = |p: apnlab_core::invariants::ClosureProgress, _: &apnlab_core::invariants::EchelonBasis| {
        if p.seconds - last > 5.0 {
            last = p.seconds;
            eprintln!("dim {} processed {} cands {} t {:.1}s", p.dimension, p.processed, p.candidates, p.seconds);
        }
    };
    let c = translate_closure(&a, ClosureOptions { progress: Some(&mut cb), ..Default::default() }).unwrap();
    println!(
        "m={m} d={d} closure dim={} candidates={} {:.2}s",
        c.basis.dimension(),
        c.candidates,
        t.elapsed().as_secs_f64()
    );
    if args.get(3).is_some() {
        let t = Instant::now();
        println!("oracle dim={} {:.2}s", ideal_dimension_oracle(&a).unwrap(), t.elapsed().as_secs_f64());
    }
}
