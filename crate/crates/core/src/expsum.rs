//! Coefficient vectors, torus grids and evaluation of
//! `f(x, t) = sum_{n=1}^N a_n e(n x + n^2 t)`.
//!
//! Two evaluation routes exist and are kept independent: [`eval_direct`]
//! sums term by term at arbitrary points, [`eval_grid`] produces whole
//! `t`-rows with one inverse FFT per row.

use std::f64::consts::TAU;
use std::sync::Arc;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Name of the pseudo-random generator behind every seeded preset.
pub const GENERATOR: &str = "ChaCha8";

/// `e(z) = exp(2 pi i z)`.
#[inline]
pub fn e(z: f64) -> Complex64 {
    let (s, c) = (TAU * z).sin_cos();
    Complex64::new(c, s)
}

/// `m * z mod 1` for an integer `m`, keeping the rounding error of the
/// product (recovered with an fma) instead of discarding it.
#[inline]
fn frac_mul(m: f64, z: f64) -> f64 {
    let p = m * z;
    let err = m.mul_add(z, -p);
    let f = p - p.floor();
    f + err
}

/// Table of `e(m / len)` for `0 <= m < len`.
#[derive(Debug, Clone)]
pub struct PhaseTable {
    len: u64,
    values: Vec<Complex64>,
}

impl PhaseTable {
    pub fn new(len: u64) -> Self {
        let values = (0..len)
            .map(|m| e(m as f64 / len as f64))
            .collect::<Vec<_>>();
        Self { len, values }
    }

    pub fn len(&self) -> u64 {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// `e(m / len)` for an already reduced `0 <= m < len`.
    #[inline]
    pub fn get(&self, m: usize) -> Complex64 {
        self.values[m]
    }

    /// `e(m / len)` for any integer `m`.
    #[inline]
    pub fn at(&self, m: i128) -> Complex64 {
        self.values[m.rem_euclid(self.len as i128) as usize]
    }
}

/// The coefficients `a_1, ..., a_N` with a cached l2 norm.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientVector {
    values: Vec<Complex64>,
    l2_norm: f64,
}

impl CoefficientVector {
    pub fn new(values: Vec<Complex64>) -> Result<Self> {
        if values.is_empty() {
            return invalid("coefficient vector must have at least one entry");
        }
        if values.iter().any(|a| !a.re.is_finite() || !a.im.is_finite()) {
            return invalid("coefficients must be finite");
        }
        let l2_norm = values.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        Ok(Self { values, l2_norm })
    }

    /// `a_n = 1` for all `n`: the quadratic Weyl sum.
    pub fn ones(n_max: usize) -> Result<Self> {
        Self::new(vec![Complex64::new(1.0, 0.0); n_max])
    }

    pub fn zeros(n_max: usize) -> Result<Self> {
        Self::new(vec![Complex64::new(0.0, 0.0); n_max])
    }

    /// Only `a_n = c` nonzero, so `|f| = |c|` everywhere.
    pub fn single_frequency(n_max: usize, n: usize, c: Complex64) -> Result<Self> {
        if n == 0 || n > n_max {
            return invalid(format!("frequency {n} outside 1..={n_max}"));
        }
        let mut values = vec![Complex64::new(0.0, 0.0); n_max];
        values[n - 1] = c;
        Self::new(values)
    }

    /// Unimodular coefficients `e(theta_n)` with uniform random phases.
    pub fn random_phase(n_max: usize, seed: u64) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Self::new((0..n_max).map(|_| e(rng.random::<f64>())).collect())
    }

    /// Independent standard complex normal coefficients.
    pub fn random_gaussian(n_max: usize, seed: u64) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let values = (0..n_max)
            .map(|_| {
                let re: f64 = rng.sample(StandardNormal);
                let im: f64 = rng.sample(StandardNormal);
                Complex64::new(re, im)
            })
            .collect();
        Self::new(values)
    }

    pub fn n_max(&self) -> usize {
        self.values.len()
    }

    pub fn l2_norm(&self) -> f64 {
        self.l2_norm
    }

    /// `a_n` for `1 <= n <= N`.
    pub fn get(&self, n: usize) -> Complex64 {
        self.values[n - 1]
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn is_zero(&self) -> bool {
        self.l2_norm == 0.0
    }

    /// Iterate `(n, a_n)` for `n = 1..=N`.
    pub fn iter(&self) -> impl Iterator<Item = (usize, Complex64)> + '_ {
        self.values.iter().enumerate().map(|(i, &a)| (i + 1, a))
    }
}

/// Named coefficient families used by the experiments.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Preset {
    Ones,
    RandomPhase,
    RandomGaussian,
}

impl Preset {
    pub fn build(self, n_max: usize, seed: u64) -> Result<CoefficientVector> {
        match self {
            Preset::Ones => CoefficientVector::ones(n_max),
            Preset::RandomPhase => CoefficientVector::random_phase(n_max, seed),
            Preset::RandomGaussian => CoefficientVector::random_gaussian(n_max, seed),
        }
    }

    pub fn is_random(self) -> bool {
        !matches!(self, Preset::Ones)
    }
}

impl std::str::FromStr for Preset {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ones" => Ok(Preset::Ones),
            "random-phase" => Ok(Preset::RandomPhase),
            "random-gaussian" => Ok(Preset::RandomGaussian),
            other => invalid(format!("unknown preset '{other}'")),
        }
    }
}

/// Sampling lattice on the torus: `x_oversample` samples per `1/N` in `x`,
/// `t_oversample` samples per `1/N^2` in `t`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TorusGrid {
    pub n_max: usize,
    pub x_oversample: usize,
    pub t_oversample: usize,
}

/// Minimum oversampling for which grid maxima stand in for suprema.
pub const MIN_OVERSAMPLE: usize = 4;

impl TorusGrid {
    pub fn new(n_max: usize, x_oversample: usize, t_oversample: usize) -> Result<Self> {
        if n_max == 0 || x_oversample == 0 || t_oversample == 0 {
            return invalid("grid sizes must be positive");
        }
        Ok(Self {
            n_max,
            x_oversample,
            t_oversample,
        })
    }

    /// The default grid, oversampling 4 in both directions.
    pub fn standard(n_max: usize) -> Result<Self> {
        Self::new(n_max, MIN_OVERSAMPLE, MIN_OVERSAMPLE)
    }

    /// Rejects grids too coarse for the locally constant sampling contract.
    pub fn check_sampling(&self) -> Result<()> {
        if self.x_oversample < MIN_OVERSAMPLE || self.t_oversample < MIN_OVERSAMPLE {
            return invalid(format!(
                "oversampling ({}, {}) below {MIN_OVERSAMPLE}",
                self.x_oversample, self.t_oversample
            ));
        }
        Ok(())
    }

    pub fn nx(&self) -> usize {
        self.x_oversample * self.n_max
    }

    pub fn nt(&self) -> usize {
        self.t_oversample * self.n_max * self.n_max
    }

    pub fn dx(&self) -> f64 {
        1.0 / self.nx() as f64
    }

    pub fn dt(&self) -> f64 {
        1.0 / self.nt() as f64
    }

    pub fn cell_area(&self) -> f64 {
        self.dx() * self.dt()
    }

    pub fn x_of(&self, j: usize) -> f64 {
        j as f64 / self.nx() as f64
    }

    pub fn t_of(&self, k: usize) -> f64 {
        k as f64 / self.nt() as f64
    }

    /// Rows in one horizontal strip of height `1/N`.
    pub fn rows_per_strip(&self) -> usize {
        self.t_oversample * self.n_max
    }

    /// Strip index `j` in `1..=N` owning row `k`. A row on the boundary of
    /// two strips goes to the lower one; row 0 belongs to strip 1.
    pub fn strip_of_row(&self, k: usize) -> usize {
        let per = self.rows_per_strip();
        k.div_ceil(per).max(1)
    }

    fn check_coeffs(&self, coeffs: &CoefficientVector) -> Result<()> {
        if coeffs.n_max() != self.n_max {
            return invalid(format!(
                "grid built for N = {} but coefficients have N = {}",
                self.n_max,
                coeffs.n_max()
            ));
        }
        Ok(())
    }
}

/// A grid sample `(x_index, t_index)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct GridPoint {
    pub xi: usize,
    pub ti: usize,
}

/// Direct summation at points of `[0,1)^2` (coordinates reduced mod 1).
pub fn eval_direct(coeffs: &CoefficientVector, points: &[(f64, f64)]) -> Result<Vec<Complex64>> {
    if points
        .iter()
        .any(|(x, t)| !x.is_finite() || !t.is_finite())
    {
        return invalid("evaluation points must be finite");
    }
    Ok(points
        .par_iter()
        .map(|&(x, t)| eval_point(coeffs, x.rem_euclid(1.0), t.rem_euclid(1.0)))
        .collect())
}

fn eval_point(coeffs: &CoefficientVector, x: f64, t: f64) -> Complex64 {
    coeffs
        .iter()
        .filter(|(_, a)| *a != Complex64::new(0.0, 0.0))
        .map(|(n, a)| {
            let nf = n as f64;
            let phase = frac_mul(nf, x) + frac_mul(nf * nf, t);
            a * e(phase)
        })
        .sum()
}

/// Direct summation at grid samples with exact integer phase reduction.
pub fn eval_at_grid_points(
    coeffs: &CoefficientVector,
    grid: &TorusGrid,
    points: &[GridPoint],
) -> Result<Vec<Complex64>> {
    grid.check_coeffs(coeffs)?;
    let tx = PhaseTable::new(grid.nx() as u64);
    let tt = PhaseTable::new(grid.nt() as u64);
    Ok(points
        .par_iter()
        .map(|p| {
            coeffs
                .iter()
                .map(|(n, a)| {
                    let n = n as i128;
                    a * tx.at(n * p.xi as i128) * tt.at(n * n * p.ti as i128)
                })
                .sum()
        })
        .collect())
}

/// Lazily evaluated samples of `f` on a [`TorusGrid`]. Rows are produced
/// on demand; the full field is never held in memory.
#[derive(Clone)]
pub struct TorusField {
    coeffs: Arc<CoefficientVector>,
    grid: TorusGrid,
    fft: Arc<dyn Fft<f64>>,
    t_phases: Arc<PhaseTable>,
    /// `n^2 mod nt`, so row phases reduce in `u64` when `nt^2` fits.
    squares: Arc<Vec<u64>>,
}

impl std::fmt::Debug for TorusField {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("TorusField")
            .field("grid", &self.grid)
            .field("l2_norm", &self.coeffs.l2_norm())
            .finish()
    }
}

/// Rows evaluated together before being handed out in order.
const ROW_BATCH: usize = 256;

/// Prepares the row-wise FFT evaluation of `f` on `grid`.
pub fn eval_grid(coeffs: &CoefficientVector, grid: &TorusGrid) -> Result<TorusField> {
    grid.check_coeffs(coeffs)?;
    grid.check_sampling()?;
    Ok(TorusField::build(coeffs, grid))
}

impl TorusField {
    /// Like [`eval_grid`] but without the oversampling check; used for
    /// coarse lattices such as the unit-cell grid of `B_R`.
    pub(crate) fn build(coeffs: &CoefficientVector, grid: &TorusGrid) -> Self {
        let fft = FftPlanner::new().plan_fft_inverse(grid.nx());
        let nt = grid.nt() as u128;
        let squares = (1..=coeffs.n_max() as u128).map(|n| (n * n % nt) as u64).collect();
        Self {
            coeffs: Arc::new(coeffs.clone()),
            grid: *grid,
            fft,
            t_phases: Arc::new(PhaseTable::new(grid.nt() as u64)),
            squares: Arc::new(squares),
        }
    }

    pub fn grid(&self) -> &TorusGrid {
        &self.grid
    }

    pub fn coeffs(&self) -> &CoefficientVector {
        &self.coeffs
    }

    /// Row `k`: `f(x_j, t_k)` for `j = 0..nx`.
    pub fn row(&self, k: usize) -> Vec<Complex64> {
        let nx = self.grid.nx();
        let mut buf = vec![Complex64::new(0.0, 0.0); nx];
        let nt = self.grid.nt() as u64;
        let k = k as u64 % nt;
        if nt.checked_mul(nt).is_some() {
            for ((n, a), &sq) in self.coeffs.iter().zip(self.squares.iter()) {
                buf[n % nx] += a * self.t_phases.values[(sq * k % nt) as usize];
            }
        } else {
            for ((n, a), &sq) in self.coeffs.iter().zip(self.squares.iter()) {
                buf[n % nx] += a * self.t_phases.at(sq as i128 * k as i128);
            }
        }
        self.fft.process(&mut buf);
        buf
    }

    /// Streams rows `k = 0..nt` in ascending order. Batches of rows are
    /// evaluated in parallel; delivery order is always ascending.
    pub fn for_each_row(&self, mut visit: impl FnMut(usize, &[Complex64])) {
        self.for_each_row_in(0, self.grid.nt(), &mut visit);
    }

    /// Streams rows `start, start+1, ..., start+count-1` (indices taken mod
    /// `nt`); the visitor sees the unreduced index.
    pub fn for_each_row_in(
        &self,
        start: usize,
        count: usize,
        visit: &mut impl FnMut(usize, &[Complex64]),
    ) {
        let mut k = start;
        let end = start + count;
        while k < end {
            let hi = (k + ROW_BATCH).min(end);
            let rows: Vec<Vec<Complex64>> = (k..hi).into_par_iter().map(|r| self.row(r)).collect();
            for (off, row) in rows.iter().enumerate() {
                visit(k + off, row);
            }
            k = hi;
        }
    }

    /// Maps every row to a summary in parallel; the result is in row order.
    pub fn map_rows<T: Send>(&self, f: impl Fn(usize, &[Complex64]) -> T + Sync) -> Vec<T> {
        (0..self.grid.nt())
            .into_par_iter()
            .map(|k| f(k, &self.row(k)))
            .collect()
    }

    /// Mean of `|f|^2` over all grid samples.
    pub fn mean_square(&self) -> f64 {
        let per_row = self.map_rows(|_, row| row.iter().map(|v| v.norm_sqr()).sum::<f64>());
        per_row.iter().sum::<f64>() / (self.grid.nx() * self.grid.nt()) as f64
    }
}

/// Default side of the locally constant box, in units of `1/N` (x) and `1/N^2` (t).
pub const LC_BOX_CONSTANT: usize = 10;

/// The empirical constant of the locally constant inequality
/// `|f(x,t)| <= C (N^3 int_{B(x,t)} |f|^p)^(1/p)`: the maximum over grid
/// points of the left side divided by the bracket, where `B(x,t)` is the
/// centered `box_constant/N x box_constant/N^2` box wrapped on the torus.
pub fn locally_constant_defect(field: &TorusField, p: f64, box_constant: usize) -> Result<f64> {
    if !(1.0..=8.0).contains(&p) {
        return invalid(format!("exponent p = {p} outside [1, 8]"));
    }
    if box_constant == 0 {
        return invalid("box constant must be positive");
    }
    let g = *field.grid();
    let (nx, nt) = (g.nx(), g.nt());
    let wx = box_constant * g.x_oversample;
    let wt = box_constant * g.t_oversample;
    if wx > nx || wt > nt {
        return invalid(format!(
            "field of {nx} x {nt} samples is smaller than one {wx} x {wt} box"
        ));
    }
    let hx = wx / 2;
    let ht = wt / 2;
    // N^3 * cell area = 1 / (x_oversample * t_oversample)
    let norm = 1.0 / (g.x_oversample * g.t_oversample) as f64;

    // Ring of the last `wt` rows: their |f| and their cyclic x-window sums.
    let mut abs_ring = vec![vec![0.0f64; nx]; wt];
    let mut hsum_ring = vec![vec![0.0f64; nx]; wt];
    let mut vsum = vec![0.0f64; nx];
    let mut defect = 0.0f64;
    let mut ingested = 0usize;

    let start = nt - ht;
    let mut visit = |_: usize, row: &[Complex64]| {
        let slot = ingested % wt;
        let abs: Vec<f64> = row.iter().map(|v| v.norm()).collect();
        let pow: Vec<f64> = abs.iter().map(|a| a.powf(p)).collect();
        // window [j - hx, j - hx + wx) for each j
        let mut hs = vec![0.0f64; nx];
        let mut acc: f64 = (0..wx).map(|d| pow[(nx + d - hx) % nx]).sum();
        for (j, h) in hs.iter_mut().enumerate() {
            *h = acc;
            acc += pow[(j + wx - hx) % nx] - pow[(nx + j - hx) % nx];
        }
        if ingested >= wt {
            for (v, (new, old)) in vsum.iter_mut().zip(hs.iter().zip(&hsum_ring[slot])) {
                *v += new - old;
            }
        } else {
            for (v, new) in vsum.iter_mut().zip(&hs) {
                *v += new;
            }
        }
        hsum_ring[slot] = hs;
        abs_ring[slot] = abs;
        ingested += 1;
        if ingested % wt == 0 {
            // drop accumulated cancellation error once per full cycle
            for (j, v) in vsum.iter_mut().enumerate() {
                *v = hsum_ring.iter().map(|h| h[j]).sum();
            }
        }
        if ingested >= wt {
            // the window now holds centre row (ingested - wt + ht)
            let centre_slot = (ingested - wt + ht) % wt;
            for (a, s) in abs_ring[centre_slot].iter().zip(&vsum) {
                let bracket = (s.max(0.0) * norm).powf(1.0 / p);
                if bracket > 0.0 {
                    defect = defect.max(a / bracket);
                }
            }
        }
    };
    field.for_each_row_in(start, nt + wt - 1, &mut visit);
    Ok(defect)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn empty_vector_rejected() {
        assert!(CoefficientVector::new(vec![]).is_err());
    }

    #[test]
    fn ones_at_origin_is_n() {
        let a = CoefficientVector::ones(37).unwrap();
        let v = eval_direct(&a, &[(0.0, 0.0)]).unwrap();
        assert_eq!(v[0], c(37.0, 0.0));
    }

    #[test]
    fn single_term_has_constant_modulus() {
        let cc = c(0.3, -1.2);
        let a = CoefficientVector::new(vec![cc]).unwrap();
        let pts = [(0.1, 0.7), (0.55, 0.123), (0.9, 0.0)];
        for (v, &(x, t)) in eval_direct(&a, &pts).unwrap().iter().zip(&pts) {
            assert!((v - cc * e(x + t)).norm() < 1e-14);
            assert!((v.norm() - cc.norm()).abs() < 1e-14);
        }
    }

    #[test]
    fn gauss_sum_at_three_sevenths() {
        let a = CoefficientVector::ones(7).unwrap();
        let v = eval_direct(&a, &[(0.0, 3.0 / 7.0)]).unwrap();
        assert!((v[0].norm() - 7f64.sqrt()).abs() < 1e-9);
    }

    #[test]
    fn zero_coefficients_give_zero_rows() {
        let a = CoefficientVector::zeros(8).unwrap();
        let g = TorusGrid::standard(8).unwrap();
        let f = eval_grid(&a, &g).unwrap();
        for k in [0, 5, 100] {
            assert!(f.row(k).iter().all(|v| v.norm() == 0.0));
        }
    }

    #[test]
    fn single_frequency_row_matches_closed_form() {
        let a = CoefficientVector::new(vec![c(1.0, 0.0), c(0.0, 0.0)]).unwrap();
        let g = TorusGrid::new(2, 5, 4).unwrap();
        let f = eval_grid(&a, &g).unwrap();
        for k in [0, 3, 7, 15] {
            let row = f.row(k);
            for (j, v) in row.iter().enumerate() {
                let expect = e(g.x_of(j)) * e(g.t_of(k));
                assert!((v - expect).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn undersampled_grid_rejected() {
        let a = CoefficientVector::ones(8).unwrap();
        assert!(eval_grid(&a, &TorusGrid::new(8, 3, 4).unwrap()).is_err());
        assert!(eval_grid(&a, &TorusGrid::new(8, 4, 2).unwrap()).is_err());
        assert!(eval_grid(&a, &TorusGrid::standard(9).unwrap()).is_err());
    }

    #[test]
    fn strip_assignment_prefers_lower_strip() {
        let g = TorusGrid::standard(8).unwrap();
        let per = g.rows_per_strip();
        assert_eq!(g.strip_of_row(0), 1);
        assert_eq!(g.strip_of_row(per), 1);
        assert_eq!(g.strip_of_row(per + 1), 2);
        assert_eq!(g.strip_of_row(g.nt() - 1), 8);
    }

    #[test]
    fn grid_points_match_direct() {
        let a = CoefficientVector::random_gaussian(12, 9).unwrap();
        let g = TorusGrid::standard(12).unwrap();
        let pts = [GridPoint { xi: 3, ti: 101 }, GridPoint { xi: 47, ti: 575 }];
        let exact = eval_at_grid_points(&a, &g, &pts).unwrap();
        let xy: Vec<_> = pts.iter().map(|p| (g.x_of(p.xi), g.t_of(p.ti))).collect();
        let direct = eval_direct(&a, &xy).unwrap();
        for (u, v) in exact.iter().zip(&direct) {
            assert!((u - v).norm() < 1e-11);
        }
    }

    #[test]
    fn constant_field_defect_is_box_normalisation() {
        let a = CoefficientVector::single_frequency(16, 16, c(0.0, 2.5)).unwrap();
        let f = eval_grid(&a, &TorusGrid::standard(16).unwrap()).unwrap();
        for p in [1.0, 2.0, 4.0] {
            let d = locally_constant_defect(&f, p, LC_BOX_CONSTANT).unwrap();
            assert!((d - 100f64.powf(-1.0 / p)).abs() < 1e-9, "p={p} d={d}");
        }
    }

    #[test]
    fn defect_rejects_tiny_fields_and_bad_exponents() {
        let a = CoefficientVector::ones(1).unwrap();
        let f = eval_grid(&a, &TorusGrid::standard(1).unwrap()).unwrap();
        assert!(locally_constant_defect(&f, 2.0, 10).is_err());
        let a = CoefficientVector::ones(16).unwrap();
        let f = eval_grid(&a, &TorusGrid::standard(16).unwrap()).unwrap();
        assert!(locally_constant_defect(&f, 0.5, 10).is_err());
        assert!(locally_constant_defect(&f, 9.0, 10).is_err());
    }
}
