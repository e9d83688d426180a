use num_complex::Complex64;
use proptest::prelude::*;
use weyllab::counterexamples::*;
use weyllab::expsum::CoefficientVector;
use weyllab::rationals::{gcd, totient};
use weyllab::weights::*;

/// Independent enumeration of the primitive directions, in slope order.
fn primitive_vectors(k: u64) -> Vec<(u64, u64)> {
    let mut v: Vec<(u64, u64)> = (1..=k)
        .flat_map(|q| (0..=q).filter(move |&p| gcd(p, q) == 1).map(move |p| (q, p)))
        .collect();
    v.sort_by(|a, b| (a.1 * b.0).cmp(&(b.1 * a.0)));
    v
}

#[test]
fn small_curves() {
    let t = jarnik_curve(1).unwrap();
    assert_eq!((t.n_max, t.support_size()), (2, 3));
    let t = jarnik_curve(2).unwrap();
    assert_eq!((t.n_max, t.support_size()), (4, 4));
    assert_eq!(t.values.iter().map(|(&x, &y)| (x, y)).collect::<Vec<_>>(), vec![(0, 0), (1, 0), (3, 1), (4, 2)]);
}

#[test]
fn curves_are_convex_and_counted_exactly() {
    for k in 1..=MAX_JARNIK_K {
        let t = jarnik_curve(k).unwrap();
        assert!(t.is_discretely_convex());
        let dirs = primitive_vectors(k);
        assert_eq!(t.support_size(), dirs.len() + 1, "k = {k}");
        assert_eq!(t.n_max, dirs.iter().map(|d| d.0).sum::<u64>());
        assert_eq!(t.support_size() as u64, jarnik_support_size(k));
        assert_eq!(t.n_max, jarnik_extent(k));
        assert_eq!(jarnik_support_size(k), 2 + (1..=k).map(totient).sum::<u64>());
        if k >= 8 {
            assert!(t.support_size() as f64 >= (t.n_max as f64).powf(2.0 / 3.0) / 10.0);
        }
    }
    let p = lattice_polygon(12).unwrap();
    assert!(p.is_convex());
    assert!(p.edges().iter().all(|&(dx, dy)| gcd(dx.unsigned_abs(), dy.unsigned_abs()) == 1));
}

#[test]
fn lattice_points_attain_the_support_size() {
    let t = jarnik_curve(8).unwrap();
    let n = t.n_max as f64;
    let pts = [(0.0, 0.0), (n, 0.0), (3.0 * n, 7.0 * n), (n * n - n, n)];
    for v in curve_extension_sum(&t, &pts) {
        assert!((v - Complex64::new(t.support_size() as f64, 0.0)).norm() < 1e-9);
    }
}

#[test]
fn ratio_grows_across_scales() {
    let mut samples = Vec::new();
    let mut last = 0.0;
    for k in [8u64, 16, 32] {
        let rep = counterexample_ratio(&jarnik_curve(k).unwrap()).unwrap();
        let r = rep.r_scale as f64;
        assert!(rep.ratio > last);
        last = rep.ratio;
        assert!(rep.tube.mass <= 4.0 * r.sqrt());
        assert!((rep.norm_sq - r * rep.support_size as f64).abs() < 1e-6);
        samples.push((r, rep.ratio));
    }
    assert!(exponent_fit(&samples).unwrap() >= 0.04);
}

#[test]
fn lattice_tubes_hold_at_most_a_column() {
    for n in [4u64, 9, 16] {
        let w = Weight::root_lattice(n).unwrap();
        let s = tube_sup(&w, TubeMode::AllDirections).unwrap();
        assert_eq!(s.mass, n as f64);
    }
}

#[test]
fn weyl_set_examples() {
    assert_eq!(weyl_denominators(64), vec![4, 5, 6, 7]);
    assert!(weyl_example_set(2).is_err());
    for n in [32u64, 64] {
        let r = (n * n) as f64;
        let w = weyl_example_set(n).unwrap();
        let share = w.total() / r;
        assert!((0.01..=100.0).contains(&share), "{share}");
        let qs = weyl_denominators(n);
        let Storage::Sparse(cells) = w.storage() else { panic!("sparse expected") };
        for p in cells.values() {
            let s = p.centre.1 / r;
            assert!(qs.iter().any(|&q| {
                let a = (s * q as f64).round();
                (s - a / q as f64).abs() < 1e-12 && gcd(a as u64, q) == 1
            }));
            assert!(qs.iter().all(|&q| (q as f64) >= r.powf(1.0 / 6.0) - 1e-9 && (q as f64) < 2.0 * r.powf(1.0 / 6.0)));
        }
    }
}

#[test]
fn weyl_sum_is_large_on_the_set() {
    let n = 64u64;
    let r = (n * n) as f64;
    let w = weyl_example_set(n).unwrap();
    let Storage::Sparse(cells) = w.storage() else { panic!("sparse expected") };
    let centres: Vec<(f64, f64)> = cells.values().map(|p| p.centre).collect();
    let mut g: Vec<f64> = g_at(&CoefficientVector::ones(n as usize).unwrap(), &centres).unwrap().iter().map(|z| z.norm()).collect();
    g.sort_by(f64::total_cmp);
    let median = g[g.len() / 2];
    let target = r.powf(5.0 / 12.0);
    assert!(median >= target / 4.0 && median <= 4.0 * target, "{median} vs {target}");
    let capped = w.capped_to(r).unwrap();
    let rep = weighted_ratio(&CoefficientVector::ones(n as usize).unwrap(), &capped, TubeMode::Horizontal).unwrap();
    assert!(rep.ratio <= 10.0 * r.ln());
    assert!(is_one_dimensional(&capped).unwrap().holds_within(10.0));
}

#[test]
fn fit_needs_two_scales() {
    assert_eq!(exponent_fit(&[(2.0, 3.0)]), None);
    let s = exponent_fit(&[(1.0, 1.0), (4.0, 2.0), (16.0, 4.0)]).unwrap();
    assert!((s - 0.5).abs() < 1e-12);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn summation_orders_agree(k in 1u64..20, x in 0.0f64..1.0, t in 0.0f64..1.0) {
        let table = jarnik_curve(k).unwrap();
        let r = table.r_scale() as f64;
        let (x, t) = (x * r, t * r);
        let fast = curve_extension_sum(&table, &[(x, t)])[0];
        let n = table.n_max as f64;
        // reversed order, each phase reduced with a plain float remainder
        let slow: Complex64 = table
            .values
            .iter()
            .rev()
            .map(|(&m, &v)| {
                let ph = ((m as f64 * x / n).rem_euclid(1.0) + (v as f64 * t / n).rem_euclid(1.0)) * std::f64::consts::TAU;
                Complex64::new(ph.cos(), ph.sin())
            })
            .sum();
        prop_assert!((fast - slow).norm() <= 1e-10 * table.support_size() as f64 * r.max(1.0).sqrt());
    }

    #[test]
    fn non_convex_tables_are_rejected(a in 0i64..5, b in 0i64..5, c in 0i64..5) {
        let vals = std::collections::BTreeMap::from([(0u64, a), (1, b), (2, c)]);
        let convex = b - a < c - b;
        prop_assert_eq!(ConvexCurveTable::new(2, vals).is_ok(), convex);
    }
}
