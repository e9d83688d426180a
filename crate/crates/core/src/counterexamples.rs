//! Extremal examples: the Weyl-sum set `U` at scale `R`, and a convex
//! integer table `Γ(n/N) = v_n / N` built from primitive lattice vectors,
//! whose extension operator beats the `R^eps` bound by `R^(1/12)` on the
//! lattice `{x/N, t/N in Z}`.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::expsum::e;
use crate::rationals::{gcd, totient};
use crate::weights::{tube_sup, TubeMass, TubeMode, Weight};

/// Largest `k` accepted by [`jarnik_curve`].
pub const MAX_JARNIK_K: u64 = 60;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LatticePolygon {
    pub vertices: Vec<(i64, i64)>,
}

impl LatticePolygon {
    pub fn edges(&self) -> Vec<(i64, i64)> {
        self.vertices.windows(2).map(|w| (w[1].0 - w[0].0, w[1].1 - w[0].1)).collect()
    }

    /// Primitive edges with strictly increasing slopes.
    pub fn is_convex(&self) -> bool {
        let edges = self.edges();
        edges.iter().all(|&(q, p)| q > 0 && gcd(q as u64, p.unsigned_abs()) == 1)
            && edges.windows(2).all(|w| {
                let ((q1, p1), (q2, p2)) = (w[0], w[1]);
                (p1 as i128) * (q2 as i128) < (p2 as i128) * (q1 as i128)
            })
    }
}

/// The primitive vectors `(q, p)`, `1 <= q <= k`, `0 <= p <= q`, sorted by
/// slope and chained from the origin.
pub fn lattice_polygon(k: u64) -> Result<LatticePolygon> {
    if k == 0 || k > MAX_JARNIK_K {
        return invalid(format!("k = {k} outside 1..={MAX_JARNIK_K}"));
    }
    let mut vecs: Vec<(i64, i64)> = (1..=k as i64)
        .flat_map(|q| (0..=q).filter(move |&p| gcd(q as u64, p as u64) == 1).map(move |p| (q, p)))
        .collect();
    vecs.sort_by(|a, b| (a.1 * b.0).cmp(&(b.1 * a.0)));
    let mut vertices = vec![(0i64, 0i64)];
    for (q, p) in vecs {
        let (x, y) = *vertices.last().unwrap();
        vertices.push((x + q, y + p));
    }
    Ok(LatticePolygon { vertices })
}

/// `Γ(n/N) = v_n / N` on the support `ℐ ⊆ {0, ..., N}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConvexCurveTable {
    pub n_max: u64,
    pub values: BTreeMap<u64, i64>,
}

impl ConvexCurveTable {
    pub fn new(n_max: u64, values: BTreeMap<u64, i64>) -> Result<Self> {
        if values.is_empty() {
            return invalid("empty support");
        }
        if values.keys().any(|&n| n > n_max) {
            return invalid("support exceeds N");
        }
        let t = Self { n_max, values };
        if !t.is_discretely_convex() {
            return invalid("slopes are not strictly increasing");
        }
        Ok(t)
    }

    pub fn support_size(&self) -> usize {
        self.values.len()
    }

    pub fn support(&self) -> impl Iterator<Item = u64> + '_ {
        self.values.keys().copied()
    }

    /// Strictly increasing slopes between consecutive support points.
    pub fn is_discretely_convex(&self) -> bool {
        let pts: Vec<(i128, i128)> = self.values.iter().map(|(&n, &v)| (n as i128, v as i128)).collect();
        pts.windows(3).all(|w| {
            let (d1x, d1y) = (w[1].0 - w[0].0, w[1].1 - w[0].1);
            let (d2x, d2y) = (w[2].0 - w[1].0, w[2].1 - w[1].1);
            d1y * d2x < d2y * d1x
        })
    }

    /// `R = N^2`.
    pub fn r_scale(&self) -> u64 {
        self.n_max * self.n_max
    }
}

/// The convex table of [`lattice_polygon`]: `N` is the total x-extent and
/// `ℐ` the vertex abscissae.
pub fn jarnik_curve(k: u64) -> Result<ConvexCurveTable> {
    let poly = lattice_polygon(k)?;
    let n_max = poly.vertices.last().unwrap().0 as u64;
    ConvexCurveTable::new(n_max, poly.vertices.iter().map(|&(x, y)| (x as u64, y)).collect())
}

/// `|ℐ|` in closed form: `2 + sum_{q <= k} phi(q)`.
pub fn jarnik_support_size(k: u64) -> u64 {
    2 + (1..=k).map(totient).sum::<u64>()
}

/// `N` in closed form: `2 + sum_{2 <= q <= k} q phi(q)`.
pub fn jarnik_extent(k: u64) -> u64 {
    2 + (2..=k).map(|q| q * totient(q)).sum::<u64>()
}

/// `e(m y / N)` with `y` split into integer and fractional parts so that the
/// integer part is reduced exactly.
fn phase(m: i128, y: f64, n: i128) -> f64 {
    let yi = y.floor();
    let yf = y - yi;
    let exact = (m * yi as i128).rem_euclid(n);
    exact as f64 / n as f64 + m as f64 * yf / n as f64
}

/// `E_Γ g(x, t) = sum_{n in ℐ} e((n/N) x + Γ(n/N) t)`.
pub fn curve_extension_sum(table: &ConvexCurveTable, points: &[(f64, f64)]) -> Vec<Complex64> {
    let n = table.n_max as i128;
    points
        .par_iter()
        .map(|&(x, t)| {
            table
                .values
                .iter()
                .map(|(&m, &v)| e(phase(m as i128, x, n) + phase(v as i128, t, n)))
                .sum()
        })
        .collect()
}

/// `||g||^2 = R^-1 ||E_Γ g||^2_{L^2(B_R)}`. The frequencies `(n/N, v_n/N)`
/// are distinct and `B_R` spans `N` full periods in each variable, so the
/// cross terms integrate to zero and `||E_Γ g||^2 = R^2 |ℐ|`.
pub fn curve_norm_sq(table: &ConvexCurveTable) -> f64 {
    table.r_scale() as f64 * table.support_size() as f64
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CounterexampleReport {
    pub n_max: u64,
    pub r_scale: u64,
    pub support_size: usize,
    /// `int |E_Γ g|^2 w` for the lattice weight `w`.
    pub numerator: f64,
    pub tube: TubeMass,
    pub norm_sq: f64,
    /// `numerator / (sup_T w(T)^(1/2) ||g||^2)`.
    pub ratio: f64,
}

/// The ratio on the unit-mass lattice `{x/N, t/N in Z} ∩ B_R`. All phases
/// are integral there, so each of the `R` lattice cells carries
/// `|E_Γ g|^2 = |E_Γ g(0,0)|^2`.
pub fn counterexample_ratio(table: &ConvexCurveTable) -> Result<CounterexampleReport> {
    let n = table.n_max;
    if n == 0 {
        return invalid("N must be positive");
    }
    let w = Weight::root_lattice(n)?;
    let origin = curve_extension_sum(table, &[(0.0, 0.0)])[0].norm_sqr();
    let numerator = w.total() * origin;
    let tube = tube_sup(&w, TubeMode::AllDirections)?;
    let norm_sq = curve_norm_sq(table);
    Ok(CounterexampleReport {
        n_max: n,
        r_scale: table.r_scale(),
        support_size: table.support_size(),
        numerator,
        tube,
        norm_sq,
        ratio: numerator / (tube.mass.sqrt() * norm_sq),
    })
}

/// Least-squares slope of `ln ratio` against `ln R`.
pub fn exponent_fit(samples: &[(f64, f64)]) -> Option<f64> {
    if samples.len() < 2 {
        return None;
    }
    let pts: Vec<(f64, f64)> = samples.iter().map(|&(r, v)| (r.ln(), v.ln())).collect();
    let m = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

/// Denominators `q` with `R^(1/6) <= q < 2 R^(1/6)`, i.e. `N <= q^3 < 8N`.
pub fn weyl_denominators(n: u64) -> Vec<u64> {
    (1..).skip_while(|&q: &u64| q * q * q < n).take_while(|&q| q * q * q < 8 * n).collect()
}

/// Unit masses at `(N (j + k/q), R a/q)` for `q ~ R^(1/6)`, `(a, q) = 1`,
/// `0 <= a, k < q`, `0 <= j < N`: the Weyl-sum example set `U`.
pub fn weyl_example_set(n: u64) -> Result<Weight> {
    let r = (n * n) as f64;
    if r.powf(1.0 / 6.0) < 2.0 {
        return invalid(format!("R^(1/6) = {} < 2", r.powf(1.0 / 6.0)));
    }
    let nf = n as f64;
    let mut points = Vec::new();
    for q in weyl_denominators(n) {
        for a in (0..q).filter(|&a| gcd(a, q) == 1) {
            let t = r * a as f64 / q as f64;
            for j in 0..n {
                for k in 0..q {
                    points.push((nf * (j as f64 + k as f64 / q as f64), t, 1.0));
                }
            }
        }
    }
    Weight::from_points(n, points)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_polygons() {
        let t = jarnik_curve(1).unwrap();
        assert_eq!(t.n_max, 2);
        assert_eq!(t.values, BTreeMap::from([(0, 0), (1, 0), (2, 1)]));
        let p = lattice_polygon(2).unwrap();
        assert_eq!(p.vertices, vec![(0, 0), (1, 0), (3, 1), (4, 2)]);
        assert!(p.is_convex());
        let t = jarnik_curve(2).unwrap();
        assert_eq!((t.n_max, t.support_size()), (4, 4));
        assert!(jarnik_curve(0).is_err() && jarnik_curve(61).is_err());
    }

    #[test]
    fn closed_forms_match_enumeration() {
        for k in 1..=60 {
            let t = jarnik_curve(k).unwrap();
            assert!(t.is_discretely_convex());
            assert_eq!(t.support_size() as u64, jarnik_support_size(k));
            assert_eq!(t.n_max, jarnik_extent(k));
            if k >= 8 {
                assert!(t.support_size() as f64 >= (t.n_max as f64).powf(2.0 / 3.0) / 10.0);
            }
        }
    }

    #[test]
    fn extension_sum_on_the_lattice() {
        let t = jarnik_curve(5).unwrap();
        let n = t.n_max as f64;
        let size = t.support_size() as f64;
        let pts = [(0.0, 0.0), (n, 0.0), (3.0 * n, 7.0 * n), (n * (n - 1.0), n * (n - 2.0))];
        for v in curve_extension_sum(&t, &pts) {
            assert!((v - Complex64::new(size, 0.0)).norm() < 1e-9, "{v}");
        }
    }

    #[test]
    fn norm_matches_quadrature() {
        // midpoint rule on a half-cell mesh is exact for these frequencies
        for k in 1..=2 {
            let t = jarnik_curve(k).unwrap();
            let r = t.r_scale() as f64;
            let h = 0.5;
            let steps = (r / h) as usize;
            let pts: Vec<(f64, f64)> = (0..steps)
                .flat_map(|i| (0..steps).map(move |j| ((i as f64 + 0.5) * h, (j as f64 + 0.5) * h)))
                .collect();
            let quad: f64 = curve_extension_sum(&t, &pts).iter().map(|v| v.norm_sqr()).sum::<f64>() * h * h;
            assert!((quad / r - curve_norm_sq(&t)).abs() < 1e-8 * curve_norm_sq(&t), "k = {k}");
        }
    }

    #[test]
    fn weyl_set_shape() {
        assert_eq!(weyl_denominators(64), vec![4, 5, 6, 7]);
        assert_eq!(weyl_denominators(32), vec![4, 5, 6]);
        assert!(weyl_example_set(2).is_err());
        let w = weyl_example_set(16).unwrap();
        let r = 256.0;
        assert!(w.total() / r >= 0.01 && w.total() / r <= 100.0);
    }

    #[test]
    fn slope_fit() {
        let s = exponent_fit(&[(1.0, 1.0), (std::f64::consts::E, std::f64::consts::E.powf(0.5))]).unwrap();
        assert!((s - 0.5).abs() < 1e-12);
        assert!(exponent_fit(&[(2.0, 1.0)]).is_none());
    }
}
