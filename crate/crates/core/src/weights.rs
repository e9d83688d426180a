//! Weights on `B_R = [0,R]^2`, `R = N^2`, at unit-cell resolution: tube
//! masses, one-dimensionality, the ratio
//! `int |G|^2 w / (sup_T w(T)^(1/2) R ||a||^2)` with `G(x,t) = f(x/N, t/R)`,
//! and the dyadic decomposition of `w` by the size of `|G|`.
//!
//! Cell `(i, k)` is the unit cell centred at the integer point `(i, k)`,
//! `0 <= i, k < R`. Sparse weights may carry an exact (non-integral) centre
//! inside each cell, used when `G` is evaluated.

use std::collections::{BTreeMap, BTreeSet};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::dyadic::window_exponent;
use crate::error::{invalid, Result};
use crate::expsum::{eval_direct, CoefficientVector, PhaseTable};
use crate::io::WeightRecord;

/// Largest number of explicit point masses a periodic weight is expanded
/// into for geometric queries.
pub const MAX_EXPANDED_CELLS: usize = 1 << 22;

/// Direction cap per axis for oriented tube scans.
pub const MAX_DIRECTIONS: usize = 513;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PointMass {
    pub centre: (f64, f64),
    pub mass: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Storage {
    Sparse(BTreeMap<(u32, u32), PointMass>),
    /// The same mass on every cell.
    Uniform { density: f64 },
    /// Unit mass on the cells `(aN, bN)`.
    RootLattice,
    /// `density` on every cell `(i, k)` with `(i mod N, k)` in `cells`.
    Periodic { density: f64, cells: BTreeSet<(u32, u32)> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Weight {
    n: u64,
    storage: Storage,
    total: f64,
}

/// Integer cell and mass, the common currency of the geometric scans.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Pt {
    x: i64,
    t: i64,
    mass: f64,
}

impl Weight {
    fn check_n(n: u64) -> Result<()> {
        if n == 0 || n > u16::MAX as u64 {
            return invalid(format!("N = {n} must be in 1..=65535"));
        }
        Ok(())
    }

    pub fn zero(n: u64) -> Result<Self> {
        Self::sparse(n, std::iter::empty())
    }

    /// Point masses on integer cells; repeated cells accumulate.
    pub fn sparse(n: u64, cells: impl IntoIterator<Item = (u32, u32, f64)>) -> Result<Self> {
        Self::from_points(n, cells.into_iter().map(|(x, t, m)| (x as f64, t as f64, m)))
    }

    /// Point masses at arbitrary centres in `[0, R)^2`, each filed under the
    /// cell of the nearest integer point. A cell keeps the first centre it
    /// received; masses accumulate.
    pub fn from_points(n: u64, points: impl IntoIterator<Item = (f64, f64, f64)>) -> Result<Self> {
        Self::check_n(n)?;
        let r = (n * n) as f64;
        let mut map: BTreeMap<(u32, u32), PointMass> = BTreeMap::new();
        for (x, t, mass) in points {
            if !(mass >= 0.0) || !mass.is_finite() {
                return invalid(format!("mass {mass} must be finite and nonnegative"));
            }
            if !(0.0..r).contains(&x) || !(0.0..r).contains(&t) {
                return invalid(format!("point ({x}, {t}) outside [0, R)^2"));
            }
            if mass == 0.0 {
                continue;
            }
            let cell = ((x.round() as u64).min(n * n - 1) as u32, (t.round() as u64).min(n * n - 1) as u32);
            map.entry(cell)
                .and_modify(|p| p.mass += mass)
                .or_insert(PointMass { centre: (x, t), mass });
        }
        Ok(Self::with_storage(n, Storage::Sparse(map)))
    }

    pub fn from_records(n: u64, records: &[WeightRecord]) -> Result<Self> {
        let r = n * n;
        for rec in records {
            if rec.x_cell as u64 >= r || rec.t_cell as u64 >= r {
                return invalid(format!("cell ({}, {}) outside B_R", rec.x_cell, rec.t_cell));
            }
        }
        Self::sparse(n, records.iter().map(|r| (r.x_cell, r.t_cell, r.mass)))
    }

    /// Uniform weight with the given total mass.
    pub fn uniform(n: u64, total: f64) -> Result<Self> {
        Self::check_n(n)?;
        if !(total >= 0.0) || !total.is_finite() {
            return invalid("total mass must be finite and nonnegative");
        }
        let r = (n * n) as f64;
        Ok(Self::with_storage(n, Storage::Uniform { density: total / (r * r) }))
    }

    /// Unit masses on the lattice `{x/N, t/N in Z}` inside `B_R`.
    pub fn root_lattice(n: u64) -> Result<Self> {
        Self::check_n(n)?;
        Ok(Self::with_storage(n, Storage::RootLattice))
    }

    fn with_storage(n: u64, storage: Storage) -> Self {
        let r = (n * n) as f64;
        let total = match &storage {
            Storage::Sparse(m) => m.values().map(|p| p.mass).sum(),
            Storage::Uniform { density } => density * r * r,
            Storage::RootLattice => r,
            Storage::Periodic { density, cells } => density * n as f64 * cells.len() as f64,
        };
        Self { n, storage, total }
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    /// `R = N^2`.
    pub fn r_scale(&self) -> u64 {
        self.n * self.n
    }

    pub fn storage(&self) -> &Storage {
        &self.storage
    }

    /// `w(B_R)`.
    pub fn total(&self) -> f64 {
        self.total
    }

    pub fn is_zero(&self) -> bool {
        self.total == 0.0
    }

    /// The weight times `factor >= 0`.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        if !(factor >= 0.0) || !factor.is_finite() {
            return invalid("scale factor must be finite and nonnegative");
        }
        let storage = match &self.storage {
            Storage::Sparse(m) => Storage::Sparse(
                m.iter()
                    .map(|(c, p)| (*c, PointMass { centre: p.centre, mass: p.mass * factor }))
                    .collect(),
            ),
            Storage::Uniform { density } => Storage::Uniform { density: density * factor },
            Storage::RootLattice => {
                let pts = self.points(usize::MAX)?;
                Storage::Sparse(
                    pts.iter()
                        .map(|p| {
                            let c = (p.x as u32, p.t as u32);
                            (c, PointMass { centre: (p.x as f64, p.t as f64), mass: p.mass * factor })
                        })
                        .collect(),
                )
            }
            Storage::Periodic { density, cells } => Storage::Periodic {
                density: density * factor,
                cells: cells.clone(),
            },
        };
        Ok(Self::with_storage(self.n, storage))
    }

    /// Rescaled so that `w(B_R) <= budget` (unchanged if already within).
    pub fn capped_to(&self, budget: f64) -> Result<Self> {
        if self.total <= budget {
            return Ok(self.clone());
        }
        self.scaled(budget / self.total)
    }

    /// Explicit integer-cell masses, refusing to expand past `limit`.
    fn points(&self, limit: usize) -> Result<Vec<Pt>> {
        let n = self.n as i64;
        let r = n * n;
        let count = match &self.storage {
            Storage::Sparse(m) => m.len(),
            Storage::Uniform { .. } => (r * r) as usize,
            Storage::RootLattice => r as usize,
            Storage::Periodic { cells, .. } => cells.len() * n as usize,
        };
        if count > limit {
            return invalid(format!("weight has {count} cells, too many to expand"));
        }
        Ok(match &self.storage {
            Storage::Sparse(m) => m
                .iter()
                .map(|(&(x, t), p)| Pt { x: x as i64, t: t as i64, mass: p.mass })
                .collect(),
            Storage::Uniform { density } => (0..r)
                .flat_map(|x| (0..r).map(move |t| Pt { x, t, mass: *density }))
                .collect(),
            Storage::RootLattice => (0..n)
                .flat_map(|a| (0..n).map(move |b| Pt { x: a * n, t: b * n, mass: 1.0 }))
                .collect(),
            Storage::Periodic { density, cells } => cells
                .iter()
                .flat_map(|&(i0, k)| {
                    (0..n).map(move |c| Pt { x: i0 as i64 + c * n, t: k as i64, mass: *density })
                })
                .collect(),
        })
    }

    /// CSV records of a sparse weight.
    pub fn records(&self) -> Result<Vec<WeightRecord>> {
        Ok(self
            .points(MAX_EXPANDED_CELLS)?
            .into_iter()
            .map(|p| WeightRecord { x_cell: p.x as u32, t_cell: p.t as u32, mass: p.mass })
            .collect())
    }
}

/// Mass `w(B(y, r))` of the cells with centres in
/// `[cx - r, cx + r) x [ct - r, ct + r)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BallWitness {
    pub centre: (i64, i64),
    pub r: u64,
    pub mass: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OneDimReport {
    /// `max w(B(y, r)) / r` over dyadic `r` and lattice centres.
    pub max_ratio: f64,
    pub witness: Option<BallWitness>,
}

impl OneDimReport {
    /// `w(B(y, r)) <= r` everywhere.
    pub fn holds(&self) -> bool {
        self.holds_within(1.0)
    }

    pub fn holds_within(&self, c: f64) -> bool {
        self.max_ratio <= c * (1.0 + 1e-12)
    }
}

/// Range-add / global-max segment tree over `0..len`.
struct MaxTree {
    size: usize,
    max: Vec<f64>,
    lazy: Vec<f64>,
}

impl MaxTree {
    fn new(len: usize) -> Self {
        let size = len.next_power_of_two();
        let mut max = vec![f64::NEG_INFINITY; 2 * size];
        for v in &mut max[size..size + len] {
            *v = 0.0;
        }
        for i in (1..size).rev() {
            max[i] = max[2 * i].max(max[2 * i + 1]);
        }
        Self { size, max, lazy: vec![0.0; 2 * size] }
    }

    fn add(&mut self, lo: usize, hi: usize, v: f64) {
        self.add_at(1, 0, self.size, lo, hi, v);
    }

    fn add_at(&mut self, node: usize, nlo: usize, nhi: usize, lo: usize, hi: usize, v: f64) {
        if hi <= nlo || nhi <= lo {
            return;
        }
        if lo <= nlo && nhi <= hi {
            self.max[node] += v;
            self.lazy[node] += v;
            return;
        }
        let mid = (nlo + nhi) / 2;
        self.add_at(2 * node, nlo, mid, lo, hi, v);
        self.add_at(2 * node + 1, mid, nhi, lo, hi, v);
        self.max[node] = self.max[2 * node].max(self.max[2 * node + 1]) + self.lazy[node];
    }

    /// Global maximum and its lowest index.
    fn argmax(&self) -> (f64, usize) {
        let mut node = 1;
        let mut acc = 0.0;
        while node < self.size {
            acc += self.lazy[node];
            // compare the children directly: max - lazy need not round back
            node = if self.max[2 * node] >= self.max[2 * node + 1] { 2 * node } else { 2 * node + 1 };
        }
        (self.max[node] + acc, node - self.size)
    }
}

/// Heaviest square of side `2r` with centre in `[0, R)^2`, by a sweep in x
/// with a segment tree over the t-coordinate of the lower-left corner.
fn heaviest_square(pts: &[Pt], r: i64, big_r: i64) -> (f64, (i64, i64)) {
    let lo_corner = -r;
    let hi_corner = big_r - 1 - r;
    let len = (hi_corner - lo_corner + 1) as usize;
    // (X, order, t, mass): order 0 = add, 1 = remove; applied lazily per X
    let mut events: Vec<(i64, i64, f64)> = Vec::with_capacity(2 * pts.len());
    for p in pts {
        events.push((p.x - 2 * r + 1, p.t, p.mass));
        events.push((p.x + 1, p.t, -p.mass));
    }
    events.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.cmp(&b.1)));
    let mut tree = MaxTree::new(len);
    let mut best = (0.0f64, (lo_corner + r, lo_corner + r));
    let corner_range = |t: i64| -> Option<(usize, usize)> {
        let lo = (t - 2 * r + 1).max(lo_corner);
        let hi = t.min(hi_corner);
        (lo <= hi).then(|| ((lo - lo_corner) as usize, (hi - lo_corner + 1) as usize))
    };
    let mut i = 0;
    while i < events.len() {
        let x = events[i].0;
        while i < events.len() && events[i].0 == x {
            let (_, t, m) = events[i];
            if let Some((a, b)) = corner_range(t) {
                tree.add(a, b, m);
            }
            i += 1;
        }
        // the state is constant until the next event X
        let next = events.get(i).map_or(i64::MAX, |e| e.0);
        let cx = x.max(lo_corner);
        if cx <= hi_corner && cx < next {
            let (m, ti) = tree.argmax();
            if m > best.0 * (1.0 + 1e-12) + 1e-300 {
                best = (m, (cx + r, ti as i64 + lo_corner + r));
            }
        }
    }
    best
}

/// Dyadic radii `1, 2, 4, ..., <= R`.
fn radii(big_r: u64) -> Vec<u64> {
    std::iter::successors(Some(1u64), |&r| Some(2 * r)).take_while(|&r| r <= big_r).collect()
}

/// Checks `w(B(y, r)) <= r` over dyadic `r in [1, R]` and all lattice
/// centres, balls taken as the squares `[y - r, y + r)^2` of cell centres.
pub fn is_one_dimensional(w: &Weight) -> Result<OneDimReport> {
    let big_r = w.r_scale();
    let n = w.n as i64;
    let mut report = OneDimReport { max_ratio: 0.0, witness: None };
    if w.is_zero() {
        return Ok(report);
    }
    let mut consider = |wit: BallWitness| {
        let ratio = wit.mass / wit.r as f64;
        if ratio > report.max_ratio * (1.0 + 1e-12) {
            report.max_ratio = ratio;
            report.witness = Some(wit);
        }
    };
    match &w.storage {
        Storage::Uniform { density } => {
            for r in radii(big_r) {
                let side = (2 * r).min(big_r) as f64;
                let c = r.min(big_r - 1) as i64;
                consider(BallWitness { centre: (c, c), r, mass: density * side * side });
            }
        }
        Storage::RootLattice => {
            for r in radii(big_r) {
                let per_axis = (2 * r).div_ceil(w.n).min(w.n) as f64;
                let c = r.min(big_r - 1) as i64;
                consider(BallWitness { centre: (c, c), r, mass: per_axis * per_axis });
            }
        }
        _ => {
            let pts = w.points(MAX_EXPANDED_CELLS)?;
            for r in radii(big_r) {
                let (mass, centre) = heaviest_square(&pts, r as i64, n * n);
                consider(BallWitness { centre, r, mass });
            }
        }
    }
    Ok(report)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TubeMode {
    #[default]
    Horizontal,
    AllDirections,
}

/// Axis across which an oriented tube has width `N`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Axis {
    /// Cells with `2(N t - kappa x) in [m N^2, m N^2 + 2 N^2)`.
    T,
    /// Cells with `2(N x - kappa t) in [m N^2, m N^2 + 2 N^2)`.
    X,
}

/// An `R x R^(1/2)` tube (oriented tubes are sheared strips of vertical
/// width `N` over the full square, so their length is between `R` and `R sqrt 2`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Tube {
    /// `T_j`: rows `[(j-1)N, jN)`, shifted up by `floor(N/2)` if `shifted`.
    Horizontal { index: u64, shifted: bool },
    /// Slope `kappa / N`, offset `m N / 2`.
    Oriented { axis: Axis, kappa: i64, offset: i64 },
}

impl Tube {
    pub fn contains(&self, n: u64, x: i64, t: i64) -> bool {
        let n = n as i64;
        match *self {
            Tube::Horizontal { index, shifted } => {
                let lo = (index as i64 - 1) * n + if shifted { n / 2 } else { 0 };
                (lo..lo + n).contains(&t)
            }
            Tube::Oriented { axis, kappa, offset } => {
                let (u, v) = match axis {
                    Axis::T => (t, x),
                    Axis::X => (x, t),
                };
                let s = 2 * (n * u - kappa * v);
                (offset * n * n..offset * n * n + 2 * n * n).contains(&s)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TubeMass {
    pub tube: Tube,
    pub mass: f64,
}

/// Mass of a single tube.
pub fn tube_mass(w: &Weight, tube: &Tube) -> Result<f64> {
    if let Storage::Uniform { density } = w.storage {
        // every column meets exactly N consecutive rows of the sheared strip,
        // clipped to [0, R)
        let r = w.r_scale() as i64;
        let mut cells = 0i64;
        let probe = |u: i64, v: i64| tube.contains(w.n, u, v);
        for x in 0..r {
            cells += (0..r).filter(|&t| probe(x, t)).count() as i64;
        }
        return Ok(density * cells as f64);
    }
    Ok(w.points(MAX_EXPANDED_CELLS)?
        .iter()
        .filter(|p| tube.contains(w.n, p.x, p.t))
        .map(|p| p.mass)
        .sum())
}

/// `kappa` values of the oriented scan: all `|kappa| <= N`, or
/// [`MAX_DIRECTIONS`] evenly spaced ones when that is fewer.
pub fn directions(n: u64) -> Vec<i64> {
    let n = n as i64;
    if 2 * n + 1 <= MAX_DIRECTIONS as i64 {
        return (-n..=n).collect();
    }
    let steps = MAX_DIRECTIONS as i64 - 1;
    let mut out: Vec<i64> = (0..=steps).map(|i| -n + (2 * n * i + steps / 2) / steps).collect();
    out.dedup();
    out
}

fn better(c: &TubeMass, best: &Option<TubeMass>) -> bool {
    match best {
        None => true,
        Some(b) => c.mass > b.mass * (1.0 + 1e-12) + 1e-300,
    }
}

fn horizontal_sup_points(n: u64, pts: &[Pt]) -> TubeMass {
    let ni = n as i64;
    let mut rows: BTreeMap<i64, f64> = BTreeMap::new();
    for p in pts {
        *rows.entry(p.t).or_default() += p.mass;
    }
    let prefix: Vec<(i64, f64)> = rows
        .iter()
        .scan(0.0, |acc, (&t, &m)| {
            *acc += m;
            Some((t, *acc))
        })
        .collect();
    let below = |t: i64| -> f64 {
        let i = prefix.partition_point(|&(u, _)| u < t);
        if i == 0 { 0.0 } else { prefix[i - 1].1 }
    };
    let mut best: Option<TubeMass> = None;
    for shifted in [false, true] {
        let count = if shifted { n - 1 } else { n };
        for index in 1..=count {
            let lo = (index as i64 - 1) * ni + if shifted { ni / 2 } else { 0 };
            let c = TubeMass { tube: Tube::Horizontal { index, shifted }, mass: below(lo + ni) - below(lo) };
            if better(&c, &best) {
                best = Some(c);
            }
        }
    }
    best.expect("N >= 1 tubes")
}

fn oriented_sup_points(n: u64, pts: &[Pt], best: &mut Option<TubeMass>) {
    let ni = n as i64;
    let n2 = ni * ni;
    for axis in [Axis::T, Axis::X] {
        for kappa in directions(n) {
            let mut buckets: BTreeMap<i64, f64> = BTreeMap::new();
            for p in pts {
                let (u, v) = match axis {
                    Axis::T => (p.t, p.x),
                    Axis::X => (p.x, p.t),
                };
                *buckets.entry((2 * (ni * u - kappa * v)).div_euclid(n2)).or_default() += p.mass;
            }
            // tube m covers buckets m and m + 1
            let mut candidates: BTreeSet<i64> = BTreeSet::new();
            for &b in buckets.keys() {
                candidates.insert(b - 1);
                candidates.insert(b);
            }
            for m in candidates {
                let mass = buckets.get(&m).copied().unwrap_or(0.0) + buckets.get(&(m + 1)).copied().unwrap_or(0.0);
                let c = TubeMass { tube: Tube::Oriented { axis, kappa, offset: m }, mass };
                if better(&c, best) {
                    *best = Some(c);
                }
            }
        }
    }
}

/// First `a` in `lo..hi` where the monotone `pred` turns true.
fn first_true(mut lo: i64, mut hi: i64, pred: impl Fn(i64) -> bool) -> i64 {
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        if pred(mid) {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    lo
}

/// Oriented scan of the root lattice: in each column `x = aN` a tube holds
/// exactly one lattice row index `b(a) = ceil((mN + 2 kappa a) / 2N)`, and
/// `b` is monotone in `a`, so the count is the length of an interval.
fn oriented_sup_lattice(n: u64, best: &mut Option<TubeMass>) {
    let ni = n as i64;
    let b_of = |kappa: i64, m: i64, a: i64| -> i64 { (m * ni + 2 * kappa * a).div_euclid(2 * ni) + i64::from((m * ni + 2 * kappa * a).rem_euclid(2 * ni) != 0) };
    // the lattice is symmetric under x <-> t, so axis X repeats axis T
    for kappa in directions(n) {
        let k_abs = kappa.abs();
        for m in (-2 * k_abs - 4)..=(2 * ni + 2 * k_abs + 4) {
            let count = if kappa >= 0 {
                let start = first_true(0, ni, |a| b_of(kappa, m, a) >= 0);
                let end = first_true(0, ni, |a| b_of(kappa, m, a) > ni - 1);
                (end - start).max(0)
            } else {
                let start = first_true(0, ni, |a| b_of(kappa, m, a) <= ni - 1);
                let end = first_true(0, ni, |a| b_of(kappa, m, a) < 0);
                (end - start).max(0)
            };
            let c = TubeMass { tube: Tube::Oriented { axis: Axis::T, kappa, offset: m }, mass: count as f64 };
            if better(&c, best) {
                *best = Some(c);
            }
        }
    }
}

/// Heaviest tube. Horizontal mode scans the `N` tiling tubes and the
/// `N - 1` half-shifted ones; all-directions mode adds the oriented tubes
/// on both axes. Ties keep the first tube in scan order.
pub fn tube_sup(w: &Weight, mode: TubeMode) -> Result<TubeMass> {
    let n = w.n;
    let ni = n as i64;
    let r = (n * n) as f64;
    match &w.storage {
        Storage::Uniform { density } => {
            // no tube holds more than N cells per column
            Ok(TubeMass { tube: Tube::Horizontal { index: 1, shifted: false }, mass: density * r * ni as f64 })
        }
        Storage::RootLattice => {
            let mut best = Some(TubeMass { tube: Tube::Horizontal { index: 1, shifted: false }, mass: ni as f64 });
            if mode == TubeMode::AllDirections {
                oriented_sup_lattice(n, &mut best);
            }
            Ok(best.unwrap())
        }
        Storage::Periodic { density, cells } if mode == TubeMode::Horizontal => {
            // horizontal tubes only see rows: fold the N copies of each cell
            let pts: Vec<Pt> = cells
                .iter()
                .map(|&(i0, k)| Pt { x: i0 as i64, t: k as i64, mass: density * n as f64 })
                .collect();
            Ok(horizontal_sup_points(n, &pts))
        }
        _ => {
            let pts = w.points(MAX_EXPANDED_CELLS)?;
            let mut best = Some(horizontal_sup_points(n, &pts));
            if mode == TubeMode::AllDirections {
                oriented_sup_points(n, &pts, &mut best);
            }
            Ok(best.unwrap())
        }
    }
}

fn check_pair(coeffs: &CoefficientVector, w: &Weight) -> Result<()> {
    if coeffs.n_max() as u64 != w.n {
        return invalid(format!("coefficients have N = {}, weight has N = {}", coeffs.n_max(), w.n));
    }
    Ok(())
}

/// `|G(i0, k)|` for `0 <= i0 < N`, `0 <= k < R`, row-major in `i0`, by one
/// length-`R` transform per residue `i0`: `G` has period `N` in `x`.
fn g_on_periods(coeffs: &CoefficientVector) -> Vec<Vec<Complex64>> {
    let n = coeffs.n_max() as u64;
    let r = n * n;
    let fft = FftPlanner::new().plan_fft_inverse(r as usize);
    let x_table = PhaseTable::new(n);
    (0..n)
        .map(|i0| {
            let mut buf = vec![Complex64::new(0.0, 0.0); r as usize];
            for (m, a) in coeffs.iter() {
                let m = m as u64;
                buf[(m * m % r) as usize] += a * x_table.get((m * i0 % n) as usize);
            }
            fft.process(&mut buf);
            buf
        })
        .collect()
}

/// `G` at arbitrary centres of `B_R`.
pub fn g_at(coeffs: &CoefficientVector, centres: &[(f64, f64)]) -> Result<Vec<Complex64>> {
    let n = coeffs.n_max() as f64;
    let r = n * n;
    let pts: Vec<(f64, f64)> = centres.iter().map(|&(x, t)| (x / n, t / r)).collect();
    eval_direct(coeffs, &pts)
}

/// `int_{B_R} |G|^2 w`, cell masses at their centres.
pub fn weighted_integral(coeffs: &CoefficientVector, w: &Weight) -> Result<f64> {
    check_pair(coeffs, w)?;
    let n = w.n;
    Ok(match &w.storage {
        Storage::Sparse(m) => {
            let centres: Vec<(f64, f64)> = m.values().map(|p| p.centre).collect();
            let g = g_at(coeffs, &centres)?;
            g.iter().zip(m.values()).map(|(v, p)| v.norm_sqr() * p.mass).sum()
        }
        Storage::Uniform { density } => {
            let rows = g_on_periods(coeffs);
            let s: f64 = rows.iter().flat_map(|row| row.iter().map(|v| v.norm_sqr())).sum();
            density * n as f64 * s
        }
        Storage::RootLattice => {
            // G(aN, bN) = sum a_m e(m^2 b / N) does not depend on a
            let table = PhaseTable::new(n);
            let s: f64 = (0..n)
                .map(|b| {
                    coeffs
                        .iter()
                        .map(|(m, a)| a * table.get(((m as u64 * m as u64) % n * b % n) as usize))
                        .sum::<Complex64>()
                        .norm_sqr()
                })
                .sum();
            n as f64 * s
        }
        Storage::Periodic { density, cells } => {
            let centres: Vec<(f64, f64)> = cells.iter().map(|&(i, k)| (i as f64, k as f64)).collect();
            let g = g_at(coeffs, &centres)?;
            density * n as f64 * g.iter().map(|v| v.norm_sqr()).sum::<f64>()
        }
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatioReport {
    pub numerator: f64,
    pub tube: TubeMass,
    /// `sup_T w(T)^(1/2) R ||a||^2`.
    pub denominator: f64,
    pub ratio: f64,
}

/// `int |G|^2 w / (sup_T w(T)^(1/2) R ||a||^2)`; requires `w(B_R) <= R`.
pub fn weighted_ratio(coeffs: &CoefficientVector, w: &Weight, mode: TubeMode) -> Result<RatioReport> {
    check_pair(coeffs, w)?;
    let r = w.r_scale() as f64;
    if w.total > r * (1.0 + 1e-9) {
        return invalid(format!("w(B_R) = {} exceeds R = {r}", w.total));
    }
    let numerator = weighted_integral(coeffs, w)?;
    let tube = tube_sup(w, mode)?;
    let denominator = tube.mass.sqrt() * r * coeffs.l2_norm().powi(2);
    let ratio = if numerator == 0.0 { 0.0 } else { numerator / denominator };
    Ok(RatioReport { numerator, tube, denominator, ratio })
}

/// `w = sum_mu w_mu + discard` with `|G| / ||a|| in [mu, 2 mu)` on the
/// support of `w_mu`; cells with `|G| < R^-10 ||a||` are discarded.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelDecomposition {
    pub n: u64,
    /// Keyed by the exponent `e` of `mu = 2^e`.
    pub buckets: BTreeMap<i32, Weight>,
    pub discard: Weight,
}

impl LevelDecomposition {
    pub fn mu(e: i32) -> f64 {
        2f64.powi(e)
    }
}

enum Bucketed {
    Sparse(BTreeMap<(u32, u32), PointMass>),
    Periodic(BTreeSet<(u32, u32)>),
}

pub fn decompose_weight_by_level(w: &Weight, coeffs: &CoefficientVector) -> Result<LevelDecomposition> {
    check_pair(coeffs, w)?;
    let n = w.n;
    let r = (n * n) as f64;
    let norm = coeffs.l2_norm();
    let floor = r.powi(-10) * norm;
    let key = |g: f64| -> Option<i32> {
        if norm == 0.0 || g < floor {
            None
        } else {
            window_exponent(g / norm)
        }
    };
    let mut sparse: BTreeMap<Option<i32>, BTreeMap<(u32, u32), PointMass>> = BTreeMap::new();
    let mut periodic: BTreeMap<Option<i32>, BTreeSet<(u32, u32)>> = BTreeMap::new();
    let mut density = 0.0;
    match &w.storage {
        Storage::Sparse(m) => {
            let centres: Vec<(f64, f64)> = m.values().map(|p| p.centre).collect();
            let g = g_at(coeffs, &centres)?;
            for ((c, p), v) in m.iter().zip(g) {
                sparse.entry(key(v.norm())).or_default().insert(*c, *p);
            }
        }
        Storage::RootLattice => {
            let pts = w.points(usize::MAX)?;
            let centres: Vec<(f64, f64)> = pts.iter().map(|p| (p.x as f64, p.t as f64)).collect();
            let g = g_at(coeffs, &centres)?;
            for (p, v) in pts.iter().zip(g) {
                let c = (p.x as u32, p.t as u32);
                sparse
                    .entry(key(v.norm()))
                    .or_default()
                    .insert(c, PointMass { centre: (p.x as f64, p.t as f64), mass: p.mass });
            }
        }
        Storage::Uniform { density: d } => {
            density = *d;
            for (i0, row) in g_on_periods(coeffs).iter().enumerate() {
                for (k, v) in row.iter().enumerate() {
                    periodic.entry(key(v.norm())).or_default().insert((i0 as u32, k as u32));
                }
            }
        }
        Storage::Periodic { density: d, cells } => {
            density = *d;
            let centres: Vec<(f64, f64)> = cells.iter().map(|&(i, k)| (i as f64, k as f64)).collect();
            let g = g_at(coeffs, &centres)?;
            for (c, v) in cells.iter().zip(g) {
                periodic.entry(key(v.norm())).or_default().insert(*c);
            }
        }
    }
    let mut parts: BTreeMap<Option<i32>, Bucketed> = BTreeMap::new();
    for (k, m) in sparse {
        parts.insert(k, Bucketed::Sparse(m));
    }
    for (k, s) in periodic {
        parts.insert(k, Bucketed::Periodic(s));
    }
    let build = |b: Bucketed| match b {
        Bucketed::Sparse(m) => Weight::with_storage(n, Storage::Sparse(m)),
        Bucketed::Periodic(cells) => Weight::with_storage(n, Storage::Periodic { density, cells }),
    };
    let mut discard = Weight::zero(n)?;
    let mut buckets = BTreeMap::new();
    for (k, b) in parts {
        match k {
            None => discard = build(b),
            Some(e) => {
                buckets.insert(e, build(b));
            }
        }
    }
    Ok(LevelDecomposition { n, buckets, discard })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Regime {
    /// `mu < R^(1/8)`.
    Below,
    Above,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegimeRow {
    pub mu: f64,
    pub mass: f64,
    pub tube_sup: f64,
    /// `mu^2 w_mu(B_R)`.
    pub lhs: f64,
    /// `R sup_T w_mu(T)^(1/2)`.
    pub rhs: f64,
    pub regime: Regime,
    pub ratio: f64,
    /// `ratio <= 100 ln R`.
    pub holds: bool,
}

/// One row per nonempty level `mu`, checking `mu^2 w_mu(B_R) <= C R sup_T w_mu(T)^(1/2)`.
pub fn mu_regime_report(dec: &LevelDecomposition, mode: TubeMode) -> Result<Vec<RegimeRow>> {
    let r = (dec.n * dec.n) as f64;
    let limit = 100.0 * r.ln();
    let mut rows = Vec::new();
    for (&e, w) in &dec.buckets {
        if w.is_zero() {
            continue;
        }
        let mu = LevelDecomposition::mu(e);
        let sup = tube_sup(w, mode)?.mass;
        let lhs = mu * mu * w.total;
        let rhs = r * sup.sqrt();
        let ratio = lhs / rhs;
        rows.push(RegimeRow {
            mu,
            mass: w.total,
            tube_sup: sup,
            lhs,
            rhs,
            regime: if mu < r.powf(0.125) { Regime::Below } else { Regime::Above },
            ratio,
            holds: ratio <= limit,
        });
    }
    Ok(rows)
}

/// Unit masses, one in each even column `x = 2i < R`, at uniformly random
/// rows. Any square of side `2r` meets at most `r` even columns, so the
/// weight is one-dimensional with constant 1.
pub fn random_one_dimensional(n: u64, seed: u64) -> Result<Weight> {
    Weight::check_n(n)?;
    let r = n * n;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cells: Vec<(u32, u32, f64)> = (0..r.div_ceil(2))
        .map(|i| ((2 * i) as u32, rng.random_range(0..r) as u32, 1.0))
        .collect();
    Weight::sparse(n, cells)
}

/// Unit masses on the `R` cells with the largest `|G|^2` (ties: lowest
/// `(i mod N, k)`, then lowest copy `i div N`).
pub fn greedy_adversarial(coeffs: &CoefficientVector) -> Result<Weight> {
    let n = coeffs.n_max() as u64;
    Weight::check_n(n)?;
    let r = n * n;
    let rows = g_on_periods(coeffs);
    let mut cells: Vec<(f64, u32, u32)> = rows
        .iter()
        .enumerate()
        .flat_map(|(i0, row)| row.iter().enumerate().map(move |(k, v)| (v.norm_sqr(), i0 as u32, k as u32)))
        .collect();
    cells.sort_by(|a, b| b.0.total_cmp(&a.0).then((a.1, a.2).cmp(&(b.1, b.2))));
    // each (i0, k) has N copies along x
    let picks = cells
        .iter()
        .flat_map(|&(_, i0, k)| (0..n).map(move |c| (i0 + (c * n) as u32, k, 1.0)))
        .take(r as usize);
    Weight::sparse(n, picks)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_weight_is_one_dimensional_and_ratio_zero() {
        let w = Weight::zero(8).unwrap();
        let rep = is_one_dimensional(&w).unwrap();
        assert!(rep.holds());
        assert!(rep.witness.is_none());
        let a = CoefficientVector::ones(8).unwrap();
        assert_eq!(weighted_ratio(&a, &w, TubeMode::Horizontal).unwrap().ratio, 0.0);
        let dec = decompose_weight_by_level(&w, &a).unwrap();
        assert!(mu_regime_report(&dec, TubeMode::Horizontal).unwrap().is_empty());
    }

    #[test]
    fn double_mass_cell_fails_at_unit_radius() {
        let w = Weight::sparse(8, [(10, 20, 2.0)]).unwrap();
        let rep = is_one_dimensional(&w).unwrap();
        assert!(!rep.holds());
        let wit = rep.witness.unwrap();
        assert_eq!(wit.r, 1);
        assert_eq!(wit.mass, 2.0);
    }

    #[test]
    fn horizontal_line_within_two() {
        let n = 8u64;
        let r = n * n;
        let w = Weight::sparse(n, (0..r as u32).map(|x| (x, 17, 1.0))).unwrap();
        let rep = is_one_dimensional(&w).unwrap();
        assert!(!rep.holds());
        assert!(rep.holds_within(2.0), "{}", rep.max_ratio);
    }

    #[test]
    fn square_sweep_matches_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let n = 4i64;
        let big_r = n * n;
        let pts: Vec<Pt> = (0..30)
            .map(|_| Pt { x: rng.random_range(0..big_r), t: rng.random_range(0..big_r), mass: rng.random_range(0.1..2.0) })
            .collect();
        for r in [1i64, 2, 4, 8, 16] {
            let (m, (cx, ct)) = heaviest_square(&pts, r, big_r);
            let mass_at = |cx: i64, ct: i64| -> f64 {
                pts.iter()
                    .filter(|p| (cx - r..cx + r).contains(&p.x) && (ct - r..ct + r).contains(&p.t))
                    .map(|p| p.mass)
                    .sum()
            };
            let mut brute = 0.0f64;
            for cx in 0..big_r {
                for ct in 0..big_r {
                    brute = brute.max(mass_at(cx, ct));
                }
            }
            assert!((m - brute).abs() < 1e-9, "r = {r}: {m} vs {brute}");
            assert!((mass_at(cx, ct) - m).abs() < 1e-9);
        }
    }

    #[test]
    fn concentrated_in_first_tube() {
        let n = 8u64;
        let w = Weight::sparse(n, [(3, 0, 1.0), (40, 5, 2.0), (63, 7, 0.5)]).unwrap();
        let t = tube_sup(&w, TubeMode::Horizontal).unwrap();
        assert_eq!(t.tube, Tube::Horizontal { index: 1, shifted: false });
        assert_eq!(t.mass, 3.5);
        assert_eq!(tube_mass(&w, &t.tube).unwrap(), 3.5);
        let all = tube_sup(&w, TubeMode::AllDirections).unwrap();
        assert!(all.mass >= 3.5);
    }

    #[test]
    fn uniform_tubes_and_ratio() {
        let n = 8u64;
        let r = (n * n) as f64;
        let w = Weight::uniform(n, r).unwrap();
        let t = tube_sup(&w, TubeMode::Horizontal).unwrap();
        assert!((t.mass - r.sqrt()).abs() < 1e-9);
        assert!((tube_mass(&w, &Tube::Horizontal { index: 3, shifted: true }).unwrap() - r.sqrt()).abs() < 1e-9);
        let expanded = Weight::from_points(n, w.points(usize::MAX).unwrap().iter().map(|p| (p.x as f64, p.t as f64, p.mass))).unwrap();
        let te = tube_sup(&expanded, TubeMode::AllDirections).unwrap();
        assert!((te.mass - t.mass).abs() < 1e-9);
        let a = CoefficientVector::random_phase(8, 2).unwrap();
        let rep = weighted_ratio(&a, &w, TubeMode::Horizontal).unwrap();
        let direct = weighted_integral(&a, &expanded).unwrap();
        assert!((rep.numerator - direct).abs() < 1e-9 * direct);
        assert!((rep.ratio - r.powf(-0.25)).abs() < 0.1 * r.powf(-0.25), "{}", rep.ratio);
        assert!(weighted_ratio(&a, &Weight::uniform(n, 2.0 * r).unwrap(), TubeMode::Horizontal).is_err());
    }

    #[test]
    fn root_lattice_closed_forms() {
        let n = 6u64;
        let w = Weight::root_lattice(n).unwrap();
        let expanded = Weight::sparse(n, w.points(usize::MAX).unwrap().iter().map(|p| (p.x as u32, p.t as u32, 1.0))).unwrap();
        for mode in [TubeMode::Horizontal, TubeMode::AllDirections] {
            let a = tube_sup(&w, mode).unwrap();
            let b = tube_sup(&expanded, mode).unwrap();
            assert_eq!(a.mass, b.mass);
        }
        let c = CoefficientVector::random_gaussian(6, 1).unwrap();
        let lhs = weighted_integral(&c, &w).unwrap();
        let rhs = weighted_integral(&c, &expanded).unwrap();
        assert!((lhs - rhs).abs() < 1e-9 * rhs);
        let one_d = is_one_dimensional(&w).unwrap();
        assert!((one_d.max_ratio - is_one_dimensional(&expanded).unwrap().max_ratio).abs() < 1e-12);
    }

    #[test]
    fn level_buckets_partition_the_weight() {
        let n = 8u64;
        let a = CoefficientVector::random_phase(8, 9).unwrap();
        let w = random_one_dimensional(n, 3).unwrap();
        let dec = decompose_weight_by_level(&w, &a).unwrap();
        let mut seen: BTreeMap<(u32, u32), f64> = BTreeMap::new();
        for b in dec.buckets.values().chain(std::iter::once(&dec.discard)) {
            if let Storage::Sparse(m) = b.storage() {
                for (c, p) in m {
                    assert!(seen.insert(*c, p.mass).is_none());
                }
            }
        }
        let Storage::Sparse(orig) = w.storage() else { unreachable!() };
        assert_eq!(seen.len(), orig.len());
        for (c, p) in orig {
            assert_eq!(seen[c], p.mass);
        }
        let single = Weight::sparse(n, [(5, 5, 1.0)]).unwrap();
        let d = decompose_weight_by_level(&single, &a).unwrap();
        assert_eq!(d.buckets.len() + usize::from(!d.discard.is_zero()), 1);
    }

    #[test]
    fn random_weights_are_one_dimensional() {
        let w = random_one_dimensional(8, 1).unwrap();
        assert!(is_one_dimensional(&w).unwrap().holds());
        assert_eq!(w.total(), 32.0);
    }

    #[test]
    fn greedy_uses_the_budget() {
        let a = CoefficientVector::ones(8).unwrap();
        let w = greedy_adversarial(&a).unwrap();
        assert_eq!(w.total(), 64.0);
        assert!(weighted_ratio(&a, &w, TubeMode::Horizontal).unwrap().ratio > 0.0);
    }
}
