//! Euclideaness under duality, role exchange, minors and Mandel witnesses, on matroids
//! reached by random flip walks from the alternating matroid C(4, 8).

use std::collections::{BTreeMap, HashSet};

use om_forge::classify::{certifies_mandel, classify, witness_extension, ClassifyOptions, MandelWitness};
use om_forge::faces::{flip, mutations};
use om_forge::geometry::moment_curve;
use om_forge::programs::{euclidean_all, is_euclidean_om};
use om_forge::OrientedMatroid;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn verdicts(om: &OrientedMatroid) -> BTreeMap<(usize, usize), bool> {
    euclidean_all(om).into_iter().map(|v| ((v.g, v.f), v.euclidean)).collect()
}

/// Walks until `want` pairwise distinct matroids satisfying `keep` are found.
fn walk_collect(seed: u64, want: usize, keep: impl Fn(&OrientedMatroid) -> bool) -> Vec<OrientedMatroid> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let start = OrientedMatroid::from_points(&moment_curve(4, 8)).unwrap();
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    let mut cur = start.clone();
    for step in 0..20000 {
        if step % 40 == 0 {
            cur = start.clone();
        }
        let certs = mutations(&cur);
        cur = flip(&cur, certs.choose(&mut rng).unwrap()).unwrap();
        let key = cur.chirotope().unwrap().sign_string();
        if keep(&cur) && seen.insert(key) {
            out.push(cur.clone());
            if out.len() == want {
                break;
            }
        }
    }
    assert_eq!(out.len(), want, "walk did not find enough instances");
    out
}

fn non_euclidean() -> Vec<OrientedMatroid> {
    walk_collect(11, 4, |om| !is_euclidean_om(om))
}

#[test]
fn exchanging_target_and_infinity_keeps_the_verdict() {
    for om in non_euclidean() {
        let v = verdicts(&om);
        assert!(v.values().any(|&e| !e));
        for (&(g, f), &e) in &v {
            assert_eq!(v[&(f, g)], e, "({g}, {f})");
        }
    }
}

#[test]
fn dual_programs_keep_the_verdict() {
    for om in non_euclidean() {
        let v = verdicts(&om);
        let dual = om.dual().unwrap();
        assert_eq!(dual.rank(), om.n() - om.rank());
        let dv = verdicts(&dual);
        for (&(g, f), &e) in &v {
            assert_eq!(dv[&(f, g)], e, "({g}, {f})");
        }
    }
}

#[test]
fn minors_of_euclidean_matroids_are_euclidean() {
    let euclidean = walk_collect(12, 6, |om| is_euclidean_om(om));
    for om in &euclidean {
        for e in 0..om.n() {
            assert!(is_euclidean_om(&om.delete(e).unwrap()), "deleting {e}");
            assert!(is_euclidean_om(&om.contract(e).unwrap()), "contracting {e}");
        }
    }
}

#[test]
fn non_euclidean_eight_point_matroids_get_a_mutant_witness() {
    for om in non_euclidean().into_iter().take(2) {
        let report = classify(&om, ClassifyOptions::default()).unwrap();
        assert!(!report.euclidean_all_programs && !report.totally_non_euclidean);
        assert!(report.las_vergnas);
        assert!(report.chain_violations().is_empty());
        let w = report.mandel_witness.expect("witnessed");
        assert!(matches!(w, MandelWitness::MutantConstruction { .. }));
        let ext = witness_extension(&om, &w).unwrap();
        assert_eq!(ext.delete(om.n()).unwrap().cocircuits(), om.cocircuits());
        assert!(certifies_mandel(&ext, om.n()).unwrap());
    }
}
