//! Incidences `(i, j, a/q)` between points `t_j in I_j = [(j-1)/N, j/N]`
//! and the torus classes `a/q`, `q in [Q, 2Q)`.

use std::collections::BTreeMap;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dyadic::is_power_of_two;
use crate::error::{invalid, Result};
use crate::rationals::{arc_centres, ReducedFraction};

/// One point `t_j` in each interval `I_j`, `j in W`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointFamily {
    n_max: usize,
    members: BTreeMap<usize, f64>,
}

impl PointFamily {
    pub fn new(n_max: usize, members: BTreeMap<usize, f64>) -> Result<Self> {
        if n_max == 0 {
            return invalid("N must be positive");
        }
        let n = n_max as f64;
        for (&j, &t) in &members {
            if j == 0 || j > n_max {
                return invalid(format!("strip index {j} outside 1..={n_max}"));
            }
            if !(t >= (j - 1) as f64 / n && t <= j as f64 / n) {
                return invalid(format!("t_{j} = {t} outside I_{j}"));
            }
        }
        Ok(Self { n_max, members })
    }

    /// `t_j = (j - 1)/N` for every `j`.
    pub fn left_endpoints(n_max: usize) -> Result<Self> {
        let n = n_max as f64;
        Self::new(n_max, (1..=n_max).map(|j| (j, (j - 1) as f64 / n)).collect())
    }

    /// `M` distinct random strips, each with a uniform point of its interval.
    pub fn random(n_max: usize, m: usize, seed: u64) -> Result<Self> {
        if m > n_max {
            return invalid(format!("M = {m} exceeds N = {n_max}"));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut strips = sample(&mut rng, n_max, m).into_vec();
        strips.sort_unstable();
        let n = n_max as f64;
        let members = strips
            .into_iter()
            .map(|s| (s + 1, (s as f64 + rng.random::<f64>()) / n))
            .collect();
        Self::new(n_max, members)
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn members(&self) -> &BTreeMap<usize, f64> {
        &self.members
    }

    /// `M = |W|`.
    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// The family restricted to `W' ⊆ W` (strips not in `W` are ignored).
    pub fn restrict(&self, strips: &[usize]) -> Self {
        let members = strips
            .iter()
            .filter_map(|j| self.members.get(j).map(|&t| (*j, t)))
            .collect();
        Self {
            n_max: self.n_max,
            members,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct IncidenceRecord {
    pub i: usize,
    pub j: usize,
    pub frac: ReducedFraction,
}

/// `t mod 1` in `[0, 1]`; the `x + 1` branch may round up to exactly 1.
fn wrap(x: f64) -> f64 {
    let f = x - x.floor();
    if f >= 1.0 {
        0.0
    } else {
        f
    }
}

/// The shared closeness predicate on `d, c in [0, 1)`.
#[inline]
fn close(d: f64, c: f64, tol: f64) -> bool {
    let a = (d - c).abs();
    a <= tol || 1.0 - a <= tol
}

fn check(points: &PointFamily, q_scale: u64, tol_mult: f64) -> Result<f64> {
    if !(tol_mult > 0.0) || !tol_mult.is_finite() {
        return invalid(format!("tol_mult = {tol_mult} must be positive"));
    }
    if !is_power_of_two(q_scale) || q_scale as usize > points.n_max {
        return invalid(format!("Q = {q_scale} must be dyadic and at most N = {}", points.n_max));
    }
    Ok(tol_mult / (q_scale as f64 * points.n_max as f64))
}

fn differences(points: &PointFamily) -> Vec<f64> {
    let ts: Vec<f64> = points.members.values().copied().collect();
    ts.iter()
        .flat_map(|&ti| ts.iter().map(move |&tj| wrap(ti - tj)))
        .collect()
}

/// Number of ordered triples `(i, j, a/q)` with `i, j in W`, `q in [Q, 2Q)`,
/// `0 <= a < q` and `|t_i - t_j - a/q| <= tol_mult/(QN)` on the torus.
///
/// Sorted differences plus one binary search per region and fraction.
pub fn count_incidences(points: &PointFamily, q_scale: u64, tol_mult: f64) -> Result<u64> {
    let tol = check(points, q_scale, tol_mult)?;
    let mut d = differences(points);
    d.sort_unstable_by(f64::total_cmp);
    let fracs = arc_centres(q_scale);
    Ok(fracs
        .par_iter()
        .map(|f| {
            let c = f.to_f64();
            // On each side of c the two halves of the predicate are a prefix
            // and a suffix, because rounded subtraction is monotone.
            let split = d.partition_point(|&x| x < c);
            let (below, above) = d.split_at(split);
            let far = |x: &f64| 1.0 - (x - c).abs() <= tol;
            let near = |x: &f64| (x - c).abs() <= tol;
            let b_pre = below.partition_point(far);
            let b_suf = below.len() - below.partition_point(|x| !near(x));
            let a_pre = above.partition_point(near);
            let a_suf = above.len() - above.partition_point(|x| !far(x));
            ((b_pre + b_suf).min(below.len()) + (a_pre + a_suf).min(above.len())) as u64
        })
        .sum())
}

/// Triple-loop oracle for [`count_incidences`], returning every incidence.
pub fn incidence_records(
    points: &PointFamily,
    q_scale: u64,
    tol_mult: f64,
) -> Result<Vec<IncidenceRecord>> {
    let tol = check(points, q_scale, tol_mult)?;
    let fracs = arc_centres(q_scale);
    let mut out = Vec::new();
    for (&i, &ti) in &points.members {
        for (&j, &tj) in &points.members {
            let d = wrap(ti - tj);
            for f in &fracs {
                if close(d, f.to_f64(), tol) {
                    out.push(IncidenceRecord { i, j, frac: *f });
                }
            }
        }
    }
    Ok(out)
}

/// `count / (Q M log(N + 1))`.
pub fn incidence_bound_ratio(points: &PointFamily, q_scale: u64) -> Result<f64> {
    let count = count_incidences(points, q_scale, 1.0)?;
    Ok(count as f64 / incidence_scale(points.len(), q_scale, points.n_max))
}

/// `Q M log(N + 1)`.
pub fn incidence_scale(m: usize, q_scale: u64, n_max: usize) -> f64 {
    q_scale as f64 * m as f64 * ((n_max + 1) as f64).ln()
}

/// Points `m/N + k/q` for `0 <= m < floor(M/(10q))`, `0 <= k < q`, each in
/// strip `m + floor(kN/q) + 1`.
pub fn sharpness_configuration(q: u64, m: usize, n_max: usize) -> Result<PointFamily> {
    if q == 0 || 10 * q as usize > m || m > n_max {
        return invalid(format!("need 10q <= M <= N, got q = {q}, M = {m}, N = {n_max}"));
    }
    let rows = m / (10 * q as usize);
    let n = n_max as f64;
    let mut members = BTreeMap::new();
    for r in 0..rows {
        for k in 0..q as usize {
            let strip = r + k * n_max / q as usize + 1;
            if strip > n_max {
                return invalid(format!("point {r}/N + {k}/{q} wraps past t = 1"));
            }
            // exact when N and q divide a power of two; otherwise within one ulp of I_j
            let t = ((r as f64 + (k * n_max) as f64 / q as f64) / n).clamp((strip - 1) as f64 / n, strip as f64 / n);
            if members.insert(strip, t).is_some() {
                return invalid(format!("two points of the configuration share strip {strip}"));
            }
        }
    }
    PointFamily::new(n_max, members)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_point_single_incidence() {
        for t in [0.0, 0.3, 0.999] {
            let p = PointFamily::new(1, BTreeMap::from([(1, t)])).unwrap();
            assert_eq!(count_incidences(&p, 1, 1.0).unwrap(), 1);
            let r = incidence_records(&p, 1, 1.0).unwrap();
            assert_eq!(r, vec![IncidenceRecord { i: 1, j: 1, frac: ReducedFraction::zero() }]);
            assert!((incidence_bound_ratio(&p, 1).unwrap() - 1.0 / 2f64.ln()).abs() < 1e-15);
        }
    }

    #[test]
    fn left_endpoints_q1() {
        // neighbours sit exactly at distance tol, so only exact (dyadic) points are tested
        for n in [8usize, 64, 128] {
            let p = PointFamily::left_endpoints(n).unwrap();
            let c = count_incidences(&p, 1, 1.0).unwrap() as usize;
            assert_eq!(c, incidence_records(&p, 1, 1.0).unwrap().len());
            assert!(c + 6 >= 3 * n && c <= 9 * n, "N = {n}: {c}");
        }
    }

    #[test]
    fn points_must_sit_in_their_interval() {
        assert!(PointFamily::new(4, BTreeMap::from([(2, 0.1)])).is_err());
        assert!(PointFamily::new(4, BTreeMap::from([(2, 0.25)])).is_ok());
        assert!(PointFamily::new(4, BTreeMap::from([(5, 0.9)])).is_err());
        let p = PointFamily::left_endpoints(4).unwrap();
        assert!(count_incidences(&p, 1, 0.0).is_err());
        assert!(count_incidences(&p, 8, 1.0).is_err());
        assert!(count_incidences(&p, 3, 1.0).is_err());
    }

    #[test]
    fn sharpness_layouts() {
        let p = sharpness_configuration(2, 20, 100).unwrap();
        let ts: Vec<f64> = p.members().values().copied().collect();
        assert_eq!(ts, vec![0.0, 0.5]);
        let p = sharpness_configuration(1, 30, 100).unwrap();
        assert_eq!(p.members().values().copied().collect::<Vec<_>>(), vec![0.0, 0.01, 0.02]);
        let p = sharpness_configuration(8, 160, 1024).unwrap();
        assert_eq!(p.len(), 16);
        assert!(count_incidences(&p, 8, 1.0).unwrap() >= 32);
        assert!(sharpness_configuration(8, 64, 1024).is_err());
    }
}
