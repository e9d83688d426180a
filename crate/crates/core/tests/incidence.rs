use std::collections::BTreeMap;

use proptest::prelude::*;
use weyllab::incidence::*;

fn dyadic_q(n: usize) -> Vec<u64> {
    (0..).map(|e| 1u64 << e).take_while(|&q| q as usize <= n).collect()
}

#[test]
fn random_families_within_bound() {
    for n in [128usize, 256, 512] {
        for seed in 0..3 {
            let p = PointFamily::random(n, n, seed).unwrap();
            for q in dyadic_q(n) {
                let c = count_incidences(&p, q, 1.0).unwrap() as f64;
                assert!(c <= 100.0 * incidence_scale(p.len(), q, n), "N = {n}, Q = {q}: {c}");
            }
        }
    }
}

#[test]
fn sharpness_configuration_is_tight() {
    for (q, m, n) in [(8u64, 160usize, 1024usize), (4, 128, 512), (2, 40, 128)] {
        let p = sharpness_configuration(q, m, n).unwrap();
        let c = count_incidences(&p, q, 1.0).unwrap() as f64;
        assert!(c >= (q as usize * p.len()) as f64 / 100.0);
        assert!(c <= 100.0 * incidence_scale(p.len(), q, n));
        assert!(incidence_bound_ratio(&p, q).unwrap() >= 1.0 / 100.0);
    }
}

#[test]
fn full_interval_sample_ratio() {
    let p = PointFamily::random(512, 512, 17).unwrap();
    for q in dyadic_q(64) {
        assert!(incidence_bound_ratio(&p, q).unwrap() <= 100.0);
    }
}

#[test]
fn records_satisfy_the_incidence_condition() {
    let p = PointFamily::random(64, 40, 5).unwrap();
    for q in [1, 2, 4, 8] {
        let tol = 1.0 / (q as f64 * 64.0);
        for r in incidence_records(&p, q, 1.0).unwrap() {
            assert!(r.frac.den() >= q && r.frac.den() < 2 * q);
            let d = (p.members()[&r.i] - p.members()[&r.j] - r.frac.to_f64()).rem_euclid(1.0);
            assert!(d.min(1.0 - d) <= tol * (1.0 + 1e-12));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn fast_count_matches_oracle(n in 1usize..200, m in 1usize..64, seed in 0u64..10_000, e in 0u32..8, tol in 0.25f64..4.0) {
        let m = m.min(n);
        let q = 1u64 << e;
        prop_assume!(q as usize <= n);
        let p = PointFamily::random(n, m, seed).unwrap();
        let fast = count_incidences(&p, q, tol).unwrap();
        let slow = incidence_records(&p, q, tol).unwrap().len() as u64;
        prop_assert_eq!(fast, slow);
    }

    #[test]
    fn count_is_symmetric(n in 1usize..200, m in 1usize..64, seed in 0u64..10_000, e in 0u32..6) {
        let m = m.min(n);
        let q = 1u64 << e;
        prop_assume!(q as usize <= n);
        let p = PointFamily::random(n, m, seed).unwrap();
        let recs = incidence_records(&p, q, 1.0).unwrap();
        let mut fwd: Vec<_> = recs.iter().map(|r| (r.i, r.j, r.frac.mod_one())).collect();
        let mut rev: Vec<_> = recs.iter().map(|r| (r.j, r.i, r.frac.neg().mod_one())).collect();
        fwd.sort();
        rev.sort();
        prop_assert_eq!(fwd, rev);
    }

    #[test]
    fn enlarging_the_family_never_decreases_the_count(n in 8usize..300, seed in 0u64..10_000, keep in 1usize..100, e in 0u32..6) {
        let q = 1u64 << e;
        prop_assume!(q as usize <= n);
        let p = PointFamily::random(n, n / 2, seed).unwrap();
        let strips: Vec<usize> = p.members().keys().copied().take(keep).collect();
        let sub = p.restrict(&strips);
        prop_assert!(count_incidences(&sub, q, 1.0).unwrap() <= count_incidences(&p, q, 1.0).unwrap());
    }

    #[test]
    fn singletons_count_once(n in 1usize..1000, j in 1usize..1000, u in 0.0f64..=1.0) {
        let j = 1 + (j - 1) % n;
        let t = ((j - 1) as f64 + u) / n as f64;
        let t = t.clamp((j - 1) as f64 / n as f64, j as f64 / n as f64);
        let p = PointFamily::new(n, BTreeMap::from([(j, t)])).unwrap();
        prop_assert_eq!(count_incidences(&p, 1, 1.0).unwrap(), 1);
    }
}
