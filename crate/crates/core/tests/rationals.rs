use num_complex::Complex64;
use proptest::prelude::*;
use weyllab::expsum::e;
use weyllab::rationals::*;

fn direct_ramanujan(q: u64, n: i64) -> f64 {
    let s: Complex64 = (0..q)
        .filter(|&a| gcd(a, q) == 1)
        .map(|a| e(-((a as i128 * n as i128).rem_euclid(q as i128) as f64) / q as f64))
        .sum();
    s.re
}

fn divisor_count(n: u64) -> u64 {
    (1..=n).filter(|d| n % d == 0).count() as u64
}

#[test]
fn ramanujan_matches_direct_sum_small_range() {
    for q in 1..=60u64 {
        for n in -60..=60i64 {
            let c = ramanujan_sum(q, n).unwrap();
            assert!((c as f64 - direct_ramanujan(q, n)).abs() < 1e-9, "c_{q}({n})");
            assert_eq!(c, ramanujan_sum(q, n.rem_euclid(q as i64)).unwrap());
            assert!(c.unsigned_abs() <= gcd(q, n.unsigned_abs()));
        }
    }
}

#[test]
fn dyadic_sums_of_ramanujan_sums() {
    for q_scale in [1u64, 2, 4, 8, 16, 32, 64, 128, 256] {
        for n in [1i64, 2, 6, 12, 60, 360, 997] {
            let s: u64 = (q_scale..2 * q_scale).map(|q| ramanujan_sum(q, n).unwrap().unsigned_abs()).sum();
            let bound = 8.0 * q_scale as f64 * ((q_scale + 1) as f64).ln().max(1.0) * divisor_count(n as u64) as f64;
            assert!((s as f64) <= bound, "Q = {q_scale}, n = {n}: {s}");
        }
    }
}

#[test]
fn dirichlet_matches_brute_force() {
    for n_max in 1..=30u64 {
        for i in 0..200u64 {
            let t = i as f64 / 200.0 + 1e-4;
            let got = dirichlet_approx(t, n_max).unwrap();
            let mut best: Option<(u64, f64, i64)> = None;
            for q in 1..=n_max {
                for a in 0..=q as i64 {
                    if gcd(a as u64, q) != 1 {
                        continue;
                    }
                    let d = (t - a as f64 / q as f64).abs();
                    if d <= 1.0 / (q as f64 * n_max as f64) && best.is_none_or(|b| (q, d) < (b.0, b.1)) {
                        best = Some((q, d, a));
                    }
                }
            }
            let (q, _, a) = best.unwrap();
            let g = gcd(a.unsigned_abs(), q);
            let (a, q) = (a / g as i64, q / g);
            assert_eq!((got.num().rem_euclid(got.den() as i64), got.den()), (a.rem_euclid(q as i64), q), "t = {t}, N = {n_max}");
        }
    }
}

#[test]
fn major_arcs_agree_with_layer_scan() {
    let n = 64u64;
    for q_scale in ArcCutoff::Desk.q_values(n) {
        let centres = arc_centres(q_scale);
        for i in 0..2000 {
            let t = (i as f64 + 0.37) / 2000.0;
            let got = major_arc_membership(t, q_scale, n, ArcCutoff::Desk).unwrap();
            let radius = 1.0 / (q_scale * n) as f64;
            let brute = centres.iter().find(|f| {
                let d = (t - f.to_f64()).rem_euclid(1.0);
                d.min(1.0 - d) <= radius
            });
            assert_eq!(got.map(|f| f.mod_one()), brute.map(|f| f.mod_one()), "t = {t}, Q = {q_scale}");
        }
    }
}

#[test]
fn desk_arcs_are_disjoint() {
    for n in [32u64, 64, 128, 256] {
        for q_scale in ArcCutoff::Desk.q_values(n) {
            let mut c = arc_centres(q_scale);
            c.sort();
            let mut pairs: Vec<(ReducedFraction, ReducedFraction)> = c.windows(2).map(|w| (w[0], w[1])).collect();
            pairs.push((*c.last().unwrap(), ReducedFraction::new(c[0].num() + c[0].den() as i64, c[0].den() as i64).unwrap()));
            for (a, b) in pairs {
                // b - a > 2/(QN), cross-multiplied
                let gap = b.num() as i128 * a.den() as i128 - a.num() as i128 * b.den() as i128;
                assert!(gap * (q_scale * n) as i128 > 2 * (a.den() * b.den()) as i128, "N = {n}, Q = {q_scale}: {a} {b}");
            }
        }
    }
}

proptest! {
    #[test]
    fn dirichlet_inequality_holds_exactly(num in 0u64..1_000_000_007, n_max in 1u64..100_000) {
        let den = 1_000_000_007u128;
        let f = dirichlet_approx_rational(num as u128, den, n_max).unwrap();
        let (a, q) = (f.num() as i128, f.den() as i128);
        prop_assert!(q >= 1 && q as u64 <= n_max);
        prop_assert_eq!(gcd(a.unsigned_abs() as u64, q as u64), 1);
        // |num/den - a/q| <= 1/(qN)  <=>  |num q - a den| N <= den
        let lhs = (num as i128 * q - a * den as i128).abs() * n_max as i128;
        prop_assert!(lhs <= den as i128);
    }

    #[test]
    fn reduced_fractions_are_reduced(a in -10_000i64..10_000, q in 1i64..10_000) {
        let f = ReducedFraction::new(a, q).unwrap();
        prop_assert_eq!(gcd(f.num().unsigned_abs(), f.den()), 1);
        prop_assert!((f.to_f64() - a as f64 / q as f64).abs() < 1e-12);
    }

    #[test]
    fn layers_are_sorted_and_dyadic(e in 0u32..7) {
        let layer = farey_layer(1 << e).unwrap();
        let q_scale = 1u64 << e;
        prop_assert!(layer.fractions().windows(2).all(|w| w[0] < w[1]));
        prop_assert!(layer.fractions().iter().all(|f| f.den() >= q_scale && f.den() < 2 * q_scale));
        prop_assert!(layer.fractions().iter().all(|f| f.to_f64().abs() <= 1.0));
    }
}
