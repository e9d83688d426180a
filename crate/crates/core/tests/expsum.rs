use num_complex::Complex64;
use proptest::prelude::*;
use weyllab::expsum::*;

fn random_grid_samples(grid: &TorusGrid, count: usize, seed: u64) -> Vec<GridPoint> {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| GridPoint { xi: rng.random_range(0..grid.nx()), ti: rng.random_range(0..grid.nt()) })
        .collect()
}

#[test]
fn grid_matches_direct_on_random_samples() {
    let a = CoefficientVector::random_gaussian(64, 1).unwrap();
    let g = TorusGrid::standard(64).unwrap();
    let field = eval_grid(&a, &g).unwrap();
    let tol = 1e-9 * 8.0 * a.l2_norm();
    let pts = random_grid_samples(&g, 1000, 7);
    let direct = eval_at_grid_points(&a, &g, &pts).unwrap();
    for (p, d) in pts.iter().zip(direct) {
        let v = field.row(p.ti)[p.xi];
        assert!((v - d).norm() <= tol, "{p:?}: {v} vs {d}");
    }
}

#[test]
fn locally_constant_defect_is_small() {
    let g = TorusGrid::standard(32).unwrap();
    let ones = eval_grid(&CoefficientVector::ones(32).unwrap(), &g).unwrap();
    assert!(locally_constant_defect(&ones, 2.0, LC_BOX_CONSTANT).unwrap() <= 3.0);
    let rnd = eval_grid(&CoefficientVector::random_phase(32, 2).unwrap(), &g).unwrap();
    assert!(locally_constant_defect(&rnd, 4.0, LC_BOX_CONSTANT).unwrap() <= 3.0);
}

#[test]
fn locally_constant_defect_bounded_across_scales() {
    for n in [16usize, 32] {
        let g = TorusGrid::standard(n).unwrap();
        for seed in 1..=2 {
            let f = eval_grid(&CoefficientVector::random_phase(n, seed).unwrap(), &g).unwrap();
            for p in [1.0, 2.0, 4.0] {
                let d = locally_constant_defect(&f, p, LC_BOX_CONSTANT).unwrap();
                assert!(d <= 10.0, "N = {n}, seed {seed}, p = {p}: {d}");
            }
        }
    }
}

#[test]
fn translation_covariance() {
    let a = CoefficientVector::random_phase(16, 3).unwrap();
    let g = TorusGrid::standard(16).unwrap();
    let f = eval_grid(&a, &g).unwrap();
    let k = 77;
    let row = f.row(k);
    let dx = g.dx();
    let pts: Vec<(f64, f64)> = (0..g.nx()).map(|j| (g.x_of(j) + dx, g.t_of(k))).collect();
    let shifted = eval_direct(&a, &pts).unwrap();
    for j in 0..g.nx() {
        assert!((shifted[j] - row[(j + 1) % g.nx()]).norm() < 1e-12 * 16.0 * a.l2_norm().max(1.0));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn parseval_on_the_grid(n in 1usize..24, seed in 0u64..1000) {
        let a = CoefficientVector::random_gaussian(n, seed).unwrap();
        let g = TorusGrid::standard(n).unwrap();
        let ms = eval_grid(&a, &g).unwrap().mean_square();
        let l2 = a.l2_norm().powi(2);
        prop_assert!((ms - l2).abs() <= 1e-6 * l2);
    }

    #[test]
    fn rows_match_direct(n in 1usize..20, seed in 0u64..1000, k in 0usize..10_000) {
        let a = CoefficientVector::random_phase(n, seed).unwrap();
        let g = TorusGrid::standard(n).unwrap();
        let f = eval_grid(&a, &g).unwrap();
        let k = k % g.nt();
        let row = f.row(k);
        let pts: Vec<(f64, f64)> = (0..g.nx()).map(|j| (g.x_of(j), g.t_of(k))).collect();
        let direct = eval_direct(&a, &pts).unwrap();
        let tol = 1e-9 * (n as f64).sqrt() * a.l2_norm();
        for (u, v) in row.iter().zip(direct) {
            prop_assert!((u - v).norm() <= tol);
        }
    }

    #[test]
    fn cached_norm_is_exact(vals in prop::collection::vec((-5.0f64..5.0, -5.0f64..5.0), 1..50)) {
        let v: Vec<Complex64> = vals.iter().map(|&(r, i)| Complex64::new(r, i)).collect();
        let s: f64 = v.iter().map(|z| z.norm_sqr()).sum();
        let a = CoefficientVector::new(v).unwrap();
        prop_assert!((a.l2_norm().powi(2) - s).abs() <= 1e-12 * s.max(1e-300));
    }
}
