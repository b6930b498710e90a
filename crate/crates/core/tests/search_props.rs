use std::collections::BTreeSet;
use std::sync::Arc;

use apnlab_core::catalog::{theorem1_valid_us, theorem2_valid_us};
use apnlab_core::field::FieldSpec;
use apnlab_core::search::{
    canonical_orbit_representative, search_binomials, search_slice, slice_orbit, PairSelection, SearchSpace, Triple,
};
use apnlab_core::spectra::differential_spectrum;
use proptest::prelude::*;

fn field(m: u32) -> Arc<FieldSpec> {
    Arc::new(FieldSpec::new(m, None).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn canonicalization_is_idempotent(m in 3u32..=10, d1 in 1u64..4096, d2 in 1u64..4096, u in 1u32..4096) {
        let k = field(m);
        let q1 = (1u64 << m) - 1;
        let (d1, d2, u) = ((d1 - 1) % q1 + 1, (d2 - 1) % q1 + 1, (u - 1) % q1 as u32 + 1);
        prop_assume!(d1 != d2);
        let t = canonical_orbit_representative(&k, d1, d2, u).unwrap();
        prop_assert!(t.d1 < t.d2);
        prop_assert_eq!(canonical_orbit_representative(&k, t.d1, t.d2, t.u).unwrap(), t);
        // every member of the slice orbit has the same representative
        for v in slice_orbit(&k, d1, d2, u).unwrap().into_iter().take(8) {
            prop_assert_eq!(canonical_orbit_representative(&k, d1, d2, v).unwrap(), t);
        }
    }

    #[test]
    fn orbit_members_share_uniformity(m in 4u32..=7, d1 in 1u64..128, d2 in 1u64..128, u in 1u32..128, pick in any::<prop::sample::Index>()) {
        let k = field(m);
        let q1 = (1u64 << m) - 1;
        let (d1, d2, u) = ((d1 - 1) % q1 + 1, (d2 - 1) % q1 + 1, (u - 1) % q1 as u32 + 1);
        prop_assume!(d1 != d2);
        let orbit = slice_orbit(&k, d1, d2, u).unwrap();
        let v = orbit[pick.index(orbit.len())];
        let f = Triple { d1, d2, u }.function(&k).unwrap();
        let g = Triple { d1, d2, u: v }.function(&k).unwrap();
        let t = canonical_orbit_representative(&k, d1, d2, u).unwrap().function(&k).unwrap();
        let s = differential_spectrum(&f);
        prop_assert_eq!(&differential_spectrum(&g), &s);
        prop_assert_eq!(&differential_spectrum(&t), &s);
    }
}

#[test]
fn orbit_sizes_partition_the_slice() {
    let k = field(10);
    let mut reps = BTreeSet::new();
    for u in k.nonzero() {
        reps.insert(canonical_orbit_representative(&k, 3, 36, u).unwrap());
    }
    let total: usize = reps.iter().map(|t| slice_orbit(&k, 3, 36, t.u).unwrap().len()).sum();
    assert_eq!(total, 1023);
}

#[test]
fn gf1024_slice_is_one_orbit_of_62() {
    let k = field(10);
    let hits = search_slice(&k, 3, 36, None).unwrap();
    assert_eq!(hits.len(), 1);
    assert_eq!(hits[0].orbit_size, 62);
    assert!(hits[0].apn_verified && !hits[0].monomial_like);
    assert_eq!(slice_orbit(&k, 3, 36, hits[0].u).unwrap(), theorem1_valid_us(&k).unwrap());
    // the exhaustive u-range gives the same orbit
    assert_eq!(search_slice(&k, 3, 36, Some((1, 1023))).unwrap(), hits);
}

#[test]
fn gf4096_slice_matches_valid_set() {
    let k = field(12);
    let hits = search_slice(&k, 3, 528, None).unwrap();
    let mut found: Vec<u32> = hits.iter().flat_map(|h| slice_orbit(&k, 3, 528, h.u).unwrap()).collect();
    found.sort_unstable();
    assert_eq!(found, theorem2_valid_us(&k).unwrap());
    assert_eq!(hits.iter().map(|h| h.orbit_size).sum::<u64>(), 546);
    assert!(hits.iter().all(|h| h.apn_verified));
}

#[test]
fn linear_binomials_are_never_apn() {
    let k = field(4);
    assert!(search_slice(&k, 1, 2, Some((1, 15))).unwrap().is_empty());
}

#[test]
fn search_is_deterministic_across_thread_counts() {
    let k = field(7);
    let space = SearchSpace { m: 7, pairs: PairSelection::All, u_range: None };
    let run = |threads| {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        pool.install(|| search_binomials(&k, &space)).unwrap()
    };
    let one = run(1);
    assert!(!one.is_empty());
    assert!(one.iter().all(|h| h.apn_verified));
    assert_eq!(one, run(4));
}
