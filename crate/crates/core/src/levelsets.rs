//! Superlevel strip statistics and box estimates on unions of
//! `1/N x 1/N^2` boxes, one per horizontal strip.

use std::collections::BTreeMap;

use log::warn;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dyadic::{dyadics_in, exact_power_of_two, window_exponent};
use crate::error::{invalid, Result};
use crate::expsum::{eval_at_grid_points, eval_grid, CoefficientVector, GridPoint, TorusGrid};

/// Offset of exponent 0 in the per-strip window masks.
const MASK_OFFSET: i32 = 64;

/// Boxes `B_j`, each anchored at its lower-left grid sample and made of
/// `x_oversample x t_oversample` samples, so that `B_j` is exactly a
/// `1/N x 1/N^2` box inside `S_j = [0,1] x [(j-1)/N, j/N]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoxSelection {
    grid: TorusGrid,
    boxes: BTreeMap<usize, GridPoint>,
}

impl BoxSelection {
    pub fn new(grid: TorusGrid, boxes: BTreeMap<usize, GridPoint>) -> Result<Self> {
        let per = grid.rows_per_strip();
        for (&j, anchor) in &boxes {
            if j == 0 || j > grid.n_max {
                return invalid(format!("strip index {j} outside 1..={}", grid.n_max));
            }
            if anchor.xi >= grid.nx() {
                return invalid(format!("x-anchor {} outside the grid", anchor.xi));
            }
            let lo = (j - 1) * per;
            let hi = j * per;
            if anchor.ti < lo || anchor.ti + grid.t_oversample > hi {
                return invalid(format!(
                    "box at t-anchor {} escapes strip {j} (rows {lo}..{hi})",
                    anchor.ti
                ));
            }
        }
        Ok(Self { grid, boxes })
    }

    pub fn grid(&self) -> &TorusGrid {
        &self.grid
    }

    pub fn boxes(&self) -> &BTreeMap<usize, GridPoint> {
        &self.boxes
    }

    /// `M = |W|`.
    pub fn len(&self) -> usize {
        self.boxes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.boxes.is_empty()
    }

    pub fn covers_all_strips(&self) -> bool {
        self.boxes.len() == self.grid.n_max
    }

    /// Lebesgue measure of `E_W`: exactly `M N^-3`.
    pub fn measure(&self) -> f64 {
        let n = self.grid.n_max as f64;
        self.len() as f64 / (n * n * n)
    }

    /// Grid samples of box `B_j`.
    pub fn box_samples(&self, anchor: GridPoint) -> impl Iterator<Item = GridPoint> + '_ {
        let nx = self.grid.nx();
        let (xo, to) = (self.grid.x_oversample, self.grid.t_oversample);
        (0..to).flat_map(move |dk| {
            (0..xo).map(move |dj| GridPoint {
                xi: (anchor.xi + dj) % nx,
                ti: anchor.ti + dk,
            })
        })
    }

    /// All samples of `E_W`, box by box in strip order.
    pub fn samples(&self) -> Vec<GridPoint> {
        self.boxes
            .values()
            .flat_map(|&a| self.box_samples(a).collect::<Vec<_>>())
            .collect()
    }

    /// The sub-selection on strips `W' ⊆ W`.
    pub fn restrict(&self, strips: &[usize]) -> Result<Self> {
        let mut boxes = BTreeMap::new();
        for j in strips {
            match self.boxes.get(j) {
                Some(a) => {
                    boxes.insert(*j, *a);
                }
                None => return invalid(format!("strip {j} not in the selection")),
            }
        }
        Self::new(self.grid, boxes)
    }
}

/// Per-strip maxima and attained dyadic windows of `|f| / ||a||`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StripStatistics {
    pub n_max: usize,
    /// `max |f| / ||a||` over the grid samples of each strip (index `j - 1`).
    pub strip_max: Vec<f64>,
    /// Bit `e + 64` set when the strip has a sample with value in `[2^e, 2^(e+1))`.
    attained: Vec<u128>,
}

impl StripStatistics {
    fn window_bit(e: i32) -> Option<u128> {
        let b = e + MASK_OFFSET;
        (0..128).contains(&b).then(|| 1u128 << b)
    }

    /// `#_lambda`: strips with some sample in `[lambda, 2 lambda)`.
    pub fn count(&self, lambda: f64) -> Result<usize> {
        let Some(e) = exact_power_of_two(lambda) else {
            return invalid(format!("lambda = {lambda} is not dyadic"));
        };
        let Some(bit) = Self::window_bit(e) else {
            return Ok(0);
        };
        Ok(self.attained.iter().filter(|m| *m & bit != 0).count())
    }

    /// Strips whose maximum lies in `[lambda, 2 lambda)`: the partition of
    /// strips by dyadic maximum.
    pub fn max_window_count(&self, lambda: f64) -> Result<usize> {
        let Some(e) = exact_power_of_two(lambda) else {
            return invalid(format!("lambda = {lambda} is not dyadic"));
        };
        Ok(self
            .strip_max
            .iter()
            .filter(|&&m| window_exponent(m) == Some(e))
            .count())
    }

    /// Dyadic `lambda` in `[N^(1/4), N^(1/2)]`.
    pub fn lambda_windows(&self) -> Vec<f64> {
        lambda_range(self.n_max)
    }

    /// `(lambda, #_lambda)` over the admissible windows.
    pub fn counts(&self) -> Vec<(f64, usize)> {
        self.lambda_windows()
            .into_iter()
            .map(|l| (l, self.count(l).unwrap_or(0)))
            .collect()
    }
}

/// Dyadic `lambda` with `N^(1/4) <= lambda <= N^(1/2)`.
pub fn lambda_range(n_max: usize) -> Vec<f64> {
    let n = n_max as f64;
    dyadics_in(n.powf(0.25), n.sqrt())
}

/// `N^2 lambda^-4 ln N`, the level-set count scale.
pub fn level_count_bound(n_max: usize, lambda: f64) -> f64 {
    let n = n_max as f64;
    n * n * lambda.powi(-4) * n.ln()
}

/// One streaming pass over the grid collecting [`StripStatistics`].
pub fn strip_statistics(coeffs: &CoefficientVector, grid: &TorusGrid) -> Result<StripStatistics> {
    let field = eval_grid(coeffs, grid)?;
    let n = grid.n_max;
    let norm_sq = coeffs.l2_norm() * coeffs.l2_norm();
    // Windows are read off the exponent bits of r^2 = |f|^2 / ||a||^2:
    // r in [2^e, 2^(e+1)) iff floor(log2 r^2) in {2e, 2e+1}.
    let per_row = field.map_rows(|k, row| {
        let mut mask = 0u128;
        let mut max_sq = 0.0f64;
        if norm_sq > 0.0 {
            for v in row {
                let r2 = v.norm_sqr() / norm_sq;
                max_sq = max_sq.max(r2);
                if r2.is_normal() {
                    let e2 = ((r2.to_bits() >> 52) & 0x7ff) as i32 - 1023;
                    if let Some(bit) = StripStatistics::window_bit(e2.div_euclid(2)) {
                        mask |= bit;
                    }
                }
            }
        }
        (grid.strip_of_row(k), max_sq.sqrt(), mask)
    });
    let mut strip_max = vec![0.0f64; n];
    let mut attained = vec![0u128; n];
    for (j, max, mask) in per_row {
        strip_max[j - 1] = strip_max[j - 1].max(max);
        attained[j - 1] |= mask;
    }
    Ok(StripStatistics {
        n_max: n,
        strip_max,
        attained,
    })
}

/// `#_lambda` for a single dyadic `lambda`. Values outside
/// `[N^(1/4), N^(1/2)]` are computed but flagged with a warning.
pub fn strip_level_count(coeffs: &CoefficientVector, grid: &TorusGrid, lambda: f64) -> Result<usize> {
    if exact_power_of_two(lambda).is_none() {
        return invalid(format!("lambda = {lambda} is not dyadic"));
    }
    let n = grid.n_max as f64;
    if lambda < n.powf(0.25) || lambda > n.sqrt() {
        warn!("lambda = {lambda} outside [N^1/4, N^1/2] for N = {}", grid.n_max);
    }
    strip_statistics(coeffs, grid)?.count(lambda)
}

fn values_on(coeffs: &CoefficientVector, sel: &BoxSelection) -> Result<Vec<Complex64>> {
    eval_at_grid_points(coeffs, sel.grid(), &sel.samples())
}

fn lp_norm_on(coeffs: &CoefficientVector, sel: &BoxSelection, p: i32) -> Result<f64> {
    if coeffs.n_max() != sel.grid().n_max {
        return invalid("selection grid and coefficients disagree on N");
    }
    let area = sel.grid().cell_area();
    let s: f64 = values_on(coeffs, sel)?
        .iter()
        .map(|v| v.norm().powi(p))
        .sum();
    Ok((s * area).powf(1.0 / p as f64))
}

/// `||f||_{L^4(E)}` over a selection with one box in every strip.
pub fn l4_on_selection(coeffs: &CoefficientVector, sel: &BoxSelection) -> Result<f64> {
    if !sel.covers_all_strips() {
        return invalid(format!(
            "selection has {} boxes, need one per strip ({})",
            sel.len(),
            sel.grid().n_max
        ));
    }
    lp_norm_on(coeffs, sel, 4)
}

/// `||f||_{L^2(E_W)}` over any nonempty selection.
pub fn local_l2_on_selection(coeffs: &CoefficientVector, sel: &BoxSelection) -> Result<f64> {
    if sel.is_empty() {
        return invalid("empty selection");
    }
    lp_norm_on(coeffs, sel, 2)
}

/// `N^{-1/4} ||a||`.
pub fn l4_bound(coeffs: &CoefficientVector) -> f64 {
    (coeffs.n_max() as f64).powf(-0.25) * coeffs.l2_norm()
}

/// `M^{1/4} N^{-1} ||a||`.
pub fn local_l2_bound(coeffs: &CoefficientVector, m: usize) -> f64 {
    (m as f64).powf(0.25) / coeffs.n_max() as f64 * coeffs.l2_norm()
}

/// Best box of one strip.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StripBox {
    pub strip: usize,
    pub anchor: GridPoint,
    /// `int_{B_j} |f|^2`.
    pub mass: f64,
}

const TIE_RTOL: f64 = 1e-12;

fn beats(candidate: f64, best: f64) -> bool {
    candidate > best + TIE_RTOL * best.abs()
}

/// For every strip, the grid-anchored box inside it maximising
/// `int_B |f|^2`; ties go to the lowest t-anchor, then the lowest x-anchor.
pub fn strip_box_maxima(coeffs: &CoefficientVector, grid: &TorusGrid) -> Result<Vec<StripBox>> {
    let field = eval_grid(coeffs, grid)?;
    let (nx, nt) = (grid.nx(), grid.nt());
    let (xo, to) = (grid.x_oversample, grid.t_oversample);
    let per = grid.rows_per_strip();
    let area = grid.cell_area();
    let mut best: Vec<Option<StripBox>> = vec![None; grid.n_max];
    let mut ring = vec![vec![0.0f64; nx]; to];
    field.for_each_row_in(0, nt, &mut |r, row: &[Complex64]| {
        let sq: Vec<f64> = row.iter().map(|v| v.norm_sqr()).collect();
        let hs = &mut ring[r % to];
        let mut acc: f64 = sq[..xo].iter().sum();
        for j in 0..nx {
            hs[j] = acc;
            acc += sq[(j + xo) % nx] - sq[j];
        }
        if r + 1 < to {
            return;
        }
        let ti = r + 1 - to;
        if ti / per != r / per {
            return; // box would straddle two strips
        }
        let strip = ti / per + 1;
        for xi in 0..nx {
            let mass = ring.iter().map(|h| h[xi]).sum::<f64>() * area;
            let better = match &best[strip - 1] {
                None => true,
                Some(b) => beats(mass, b.mass),
            };
            if better {
                best[strip - 1] = Some(StripBox {
                    strip,
                    anchor: GridPoint { xi, ti },
                    mass,
                });
            }
        }
    });
    Ok(best.into_iter().map(|b| b.expect("strip has a box")).collect())
}

/// The `M` strips with the largest best-box masses, each with its best box.
/// Exact ties (within 1e-12 relative) prefer lower strip indices.
pub fn adversarial_selection(
    coeffs: &CoefficientVector,
    grid: &TorusGrid,
    m: usize,
) -> Result<BoxSelection> {
    if m == 0 || m > grid.n_max {
        return invalid(format!("M = {m} outside 1..={}", grid.n_max));
    }
    let maxima = strip_box_maxima(coeffs, grid)?;
    let mut taken = vec![false; maxima.len()];
    let mut boxes = BTreeMap::new();
    for _ in 0..m {
        let mut pick: Option<usize> = None;
        for (i, b) in maxima.iter().enumerate() {
            if taken[i] {
                continue;
            }
            if pick.is_none_or(|p| beats(b.mass, maxima[p].mass)) {
                pick = Some(i);
            }
        }
        let i = pick.expect("m <= N strips available");
        taken[i] = true;
        boxes.insert(maxima[i].strip, maxima[i].anchor);
    }
    BoxSelection::new(*grid, boxes)
}

/// The selection whose box in strip `j` has the given anchors; convenience
/// for fixed placements such as "all boxes at the bottom-left of their strip".
pub fn strip_bottom_selection(grid: &TorusGrid, strips: &[usize], xi: usize) -> Result<BoxSelection> {
    let per = grid.rows_per_strip();
    let boxes = strips
        .iter()
        .map(|&j| (j, GridPoint { xi, ti: (j.max(1) - 1) * per }))
        .collect();
    BoxSelection::new(*grid, boxes)
}
