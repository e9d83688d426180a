//! The kernel `K(x,t) = sum_{n<=N} e(nx + n^2 t)`, its major-arc pieces
//! `K_Q = K * sum_{q~Q} sum_a phi((t - a/q) QN)` and the remainder
//! `K' = K - sum_Q K_Q`, with sup-norm and bilinear-form checks.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dyadic::window_exponent;
use crate::error::{invalid, Result};
use crate::expsum::{eval_direct, eval_grid, CoefficientVector, GridPoint, PhaseTable, TorusGrid};
use crate::levelsets::BoxSelection;
use crate::rationals::{arc_centres, ArcCutoff};

/// `K` at arbitrary points.
pub fn kernel_eval(n_max: usize, points: &[(f64, f64)]) -> Result<Vec<Complex64>> {
    eval_direct(&CoefficientVector::ones(n_max)?, points)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Smoothness {
    /// Quintic smoothstep transition, `C^2`.
    #[default]
    C2,
    /// Septic smoothstep transition, `C^3`.
    C3,
}

/// Even plateau bump: 1 on `[-1, 1]`, 0 outside `(-2, 2)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ArcBump {
    pub smoothness: Smoothness,
}

impl ArcBump {
    pub fn new(smoothness: Smoothness) -> Self {
        Self { smoothness }
    }

    /// Order of the continuous derivatives.
    pub fn order(&self) -> u32 {
        match self.smoothness {
            Smoothness::C2 => 2,
            Smoothness::C3 => 3,
        }
    }

    pub fn profile(&self, u: f64) -> f64 {
        let a = u.abs();
        if a <= 1.0 {
            return 1.0;
        }
        if a >= 2.0 {
            return 0.0;
        }
        let s = a - 1.0;
        let step = match self.smoothness {
            Smoothness::C2 => s * s * s * (10.0 + s * (-15.0 + 6.0 * s)),
            Smoothness::C3 => s * s * s * s * (35.0 + s * (-84.0 + s * (70.0 - 20.0 * s))),
        };
        1.0 - step
    }
}

/// Which part of `K` to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Piece {
    Full,
    Major(u64),
    Minor,
}

/// Per-row arc masks on a sampling grid. Since the masks depend on `t`
/// only, each `K_Q` row is the `K` row times a scalar.
#[derive(Debug, Clone)]
pub struct KernelDecomposition {
    grid: TorusGrid,
    bump: ArcBump,
    masks: BTreeMap<u64, Vec<f64>>,
}

/// Torus-distance `|k/nt - a/q|` computed from integers.
fn grid_dist(k: i128, nt: i128, a: i128, q: i128) -> f64 {
    let p = q * nt;
    let r = (k * q - a * nt).rem_euclid(p);
    r.min(p - r) as f64 / p as f64
}

/// Decomposition on `grid` over the dyadic `Q` admitted by `cutoff`.
pub fn decompose(grid: &TorusGrid, bump: ArcBump, cutoff: ArcCutoff) -> Result<KernelDecomposition> {
    let q_values = cutoff.q_values(grid.n_max as u64);
    decompose_with(grid, bump, &q_values)
}

/// Decomposition over an explicit list of dyadic scales.
pub fn decompose_with(grid: &TorusGrid, bump: ArcBump, q_values: &[u64]) -> Result<KernelDecomposition> {
    if grid.t_oversample < 2 {
        return invalid("t-resolution coarser than 1/(2N^2) does not resolve the arcs");
    }
    grid.check_sampling()?;
    let n = grid.n_max as i128;
    let nt = grid.nt() as i128;
    let mut masks = BTreeMap::new();
    for &qs in q_values {
        if !crate::dyadic::is_power_of_two(qs) || qs as i128 > n {
            return invalid(format!("Q = {qs} must be dyadic and at most N"));
        }
        let width = qs as i128 * n;
        let mut mask = vec![0.0f64; nt as usize];
        for f in arc_centres(qs) {
            let (a, q) = (f.num() as i128, f.den() as i128);
            // rows with |k/nt - a/q| < 2/(QN)
            let lo = (a * nt * width - 2 * nt * q).div_euclid(q * width);
            let hi = (a * nt * width + 2 * nt * q).div_euclid(q * width) + 1;
            for k in lo..=hi {
                let u = grid_dist(k, nt, a, q) * width as f64;
                let v = bump.profile(u);
                if v > 0.0 {
                    mask[k.rem_euclid(nt) as usize] += v;
                }
            }
        }
        masks.insert(qs, mask);
    }
    Ok(KernelDecomposition {
        grid: *grid,
        bump,
        masks,
    })
}

impl KernelDecomposition {
    pub fn grid(&self) -> &TorusGrid {
        &self.grid
    }

    pub fn bump(&self) -> ArcBump {
        self.bump
    }

    pub fn q_values(&self) -> Vec<u64> {
        self.masks.keys().copied().collect()
    }

    /// `sum_{q~Q} sum_a phi((t_k - a/q) QN)` at grid row `k`.
    pub fn mask(&self, q_scale: u64, k: usize) -> Option<f64> {
        let m = self.masks.get(&q_scale)?;
        Some(m[k % m.len()])
    }

    /// Multiplier turning `K` into the requested piece at row `k`.
    pub fn factor(&self, piece: Piece, k: usize) -> Result<f64> {
        let k = k % self.grid.nt();
        match piece {
            Piece::Full => Ok(1.0),
            Piece::Major(q) => match self.masks.get(&q) {
                Some(m) => Ok(m[k]),
                None => invalid(format!("Q = {q} is not part of this decomposition")),
            },
            Piece::Minor => Ok(1.0 - self.masks.values().map(|m| m[k]).sum::<f64>()),
        }
    }

    pub fn pieces(&self) -> Vec<Piece> {
        let mut out = vec![Piece::Full];
        out.extend(self.masks.keys().map(|&q| Piece::Major(q)));
        out.push(Piece::Minor);
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SupEntry {
    pub piece: Piece,
    pub sup: f64,
    pub bound: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SupReport {
    pub n_max: usize,
    /// `sup |K_Q|` against `N / Q^(1/2)`, ascending `Q`.
    pub major: Vec<SupEntry>,
    /// `sup |K'|` against `N^(1/2) (ln N)^3`.
    pub minor: SupEntry,
    /// `max |K - sum K_Q - K'|` over the grid.
    pub reconstruction_error: f64,
}

fn entry(piece: Piece, sup: f64, bound: f64) -> SupEntry {
    SupEntry {
        piece,
        sup,
        bound,
        ratio: sup / bound,
    }
}

/// Grid sups of every piece, plus the reconstruction residual, in one
/// streaming pass over the rows of `K`.
pub fn sup_norm_report(dec: &KernelDecomposition) -> Result<SupReport> {
    let grid = dec.grid;
    let field = eval_grid(&CoefficientVector::ones(grid.n_max)?, &grid)?;
    let qs = dec.q_values();
    let rows = field.map_rows(|k, row| {
        let factors: Vec<f64> = qs.iter().map(|&q| dec.masks[&q][k]).collect();
        let mut sups = vec![0.0f64; qs.len()];
        let mut minor = 0.0f64;
        let mut resid = 0.0f64;
        for &v in row {
            let mut total = Complex64::new(0.0, 0.0);
            for (s, &f) in sups.iter_mut().zip(&factors) {
                let piece = v * f;
                *s = s.max(piece.norm());
                total += piece;
            }
            let rest = v - total;
            minor = minor.max(rest.norm());
            resid = resid.max((v - total - rest).norm());
        }
        (sups, minor, resid)
    });
    let mut sups = vec![0.0f64; qs.len()];
    let (mut minor, mut resid) = (0.0f64, 0.0f64);
    for (s, m, r) in rows {
        for (a, b) in sups.iter_mut().zip(s) {
            *a = a.max(b);
        }
        minor = minor.max(m);
        resid = resid.max(r);
    }
    let n = grid.n_max as f64;
    Ok(SupReport {
        n_max: grid.n_max,
        major: qs
            .iter()
            .zip(sups)
            .map(|(&q, s)| entry(Piece::Major(q), s, major_sup_bound(grid.n_max, q)))
            .collect(),
        minor: entry(Piece::Minor, minor, n.sqrt() * n.ln().powi(3)),
        reconstruction_error: resid,
    })
}

/// `N / Q^(1/2)`.
pub fn major_sup_bound(n_max: usize, q_scale: u64) -> f64 {
    n_max as f64 / (q_scale as f64).sqrt()
}

/// A function sampled on the grid points of a box union `E_M`.
#[derive(Debug, Clone, PartialEq)]
pub struct BoxFunction {
    grid: TorusGrid,
    boxes: usize,
    samples: Vec<GridPoint>,
    values: Vec<Complex64>,
}

impl BoxFunction {
    pub fn from_fn(sel: &BoxSelection, mut f: impl FnMut(GridPoint) -> Complex64) -> Self {
        let samples = sel.samples();
        let values = samples.iter().map(|&p| f(p)).collect();
        Self {
            grid: *sel.grid(),
            boxes: sel.len(),
            samples,
            values,
        }
    }

    pub fn constant(sel: &BoxSelection, c: Complex64) -> Self {
        Self::from_fn(sel, |_| c)
    }

    /// Independent standard complex Gaussian samples.
    pub fn random(sel: &BoxSelection, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Self::from_fn(sel, |_| {
            let re: f64 = rng.sample(rand_distr::StandardNormal);
            let im: f64 = rng.sample(rand_distr::StandardNormal);
            Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
        })
    }

    pub fn grid(&self) -> &TorusGrid {
        &self.grid
    }

    /// Number of boxes `M` of the underlying selection.
    pub fn boxes(&self) -> usize {
        self.boxes
    }

    pub fn samples(&self) -> &[GridPoint] {
        &self.samples
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    /// `||h||^2_{L^2(E_M)}`.
    pub fn l2_norm_sq(&self) -> f64 {
        self.values.iter().map(|v| v.norm_sqr()).sum::<f64>() * self.grid.cell_area()
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|v| *v == Complex64::new(0.0, 0.0))
    }
}

fn check_subset(h: &BoxFunction, y: Option<&[usize]>) -> Result<Vec<usize>> {
    match y {
        None => Ok((0..h.samples.len()).collect()),
        Some(ix) => {
            if let Some(&bad) = ix.iter().find(|&&i| i >= h.samples.len()) {
                return invalid(format!("sample index {bad} outside E_M"));
            }
            Ok(ix.to_vec())
        }
    }
}

/// `<K_piece * (h 1_Y1), h 1_Y2>` for every piece of `dec` at once, by
/// direct summation over sample pairs. `None` means all of `E_M`. The
/// result is in the order of [`KernelDecomposition::pieces`].
pub fn bilinear_forms(
    dec: &KernelDecomposition,
    h: &BoxFunction,
    y1: Option<&[usize]>,
    y2: Option<&[usize]>,
) -> Result<Vec<(Piece, Complex64)>> {
    if h.grid != dec.grid {
        return invalid("function and decomposition live on different grids");
    }
    let y1 = check_subset(h, y1)?;
    let y2 = check_subset(h, y2)?;
    let grid = dec.grid;
    let (nx, nt) = (grid.nx() as i128, grid.nt() as i128);
    let x_table = PhaseTable::new(nx as u64);
    let t_table = PhaseTable::new(nt as u64);
    let pieces = dec.pieces();
    let (ux, ut) = (nx as u64, nt as u64);
    let squares: Vec<u64> = (1..=grid.n_max as u64).map(|m| m * m % ut).collect();
    // nt^2 fits in u64 for every grid this is run on; i128 otherwise
    let narrow = ut.checked_mul(ut).is_some();
    let kernel = |dj: i128, dk: i128| -> Complex64 {
        let dj = dj.rem_euclid(nx) as u64;
        let dk = dk as u64;
        let mut ix = 0u64;
        let mut acc = Complex64::new(0.0, 0.0);
        for &sq in &squares {
            ix += dj;
            if ix >= ux {
                ix -= ux;
            }
            let it = if narrow {
                sq * dk % ut
            } else {
                (sq as u128 * dk as u128 % ut as u128) as u64
            };
            acc += x_table.get(ix as usize) * t_table.get(it as usize);
        }
        acc
    };
    let area = grid.cell_area();
    let sums = y2
        .par_iter()
        .map(|&ix| {
            let x = h.samples[ix];
            let hx = h.values[ix].conj();
            let mut acc = vec![Complex64::new(0.0, 0.0); pieces.len()];
            for &iy in &y1 {
                let y = h.samples[iy];
                let hy = h.values[iy];
                if hy == Complex64::new(0.0, 0.0) {
                    continue;
                }
                let dk = (x.ti as i128 - y.ti as i128).rem_euclid(nt);
                let k = kernel(x.xi as i128 - y.xi as i128, dk) * hy * hx;
                for (a, p) in acc.iter_mut().zip(&pieces) {
                    *a += k * dec.factor(*p, dk as usize).unwrap_or(0.0);
                }
            }
            acc
        })
        .collect::<Vec<_>>();
    let mut total = vec![Complex64::new(0.0, 0.0); pieces.len()];
    for acc in sums {
        for (t, a) in total.iter_mut().zip(acc) {
            *t += a;
        }
    }
    Ok(pieces
        .into_iter()
        .zip(total)
        .map(|(p, v)| (p, v * area * area))
        .collect())
}

/// A single piece of [`bilinear_forms`].
pub fn bilinear_form(
    dec: &KernelDecomposition,
    piece: Piece,
    h: &BoxFunction,
    y1: Option<&[usize]>,
    y2: Option<&[usize]>,
) -> Result<Complex64> {
    dec.factor(piece, 0)?;
    let all = bilinear_forms(dec, h, y1, y2)?;
    Ok(all.into_iter().find(|(p, _)| *p == piece).map(|(_, v)| v).unwrap())
}

/// `M^(1/2) N^-2 ||h||^2`.
pub fn bilinear_bound(h: &BoxFunction) -> f64 {
    (h.boxes as f64).sqrt() / (h.grid.n_max as f64).powi(2) * h.l2_norm_sq()
}

/// Samples with `|h| in [lambda, 2 lambda)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelWindow {
    pub lambda: f64,
    pub indices: Vec<usize>,
    /// `|Y|`, the measure of the window's samples.
    pub measure: f64,
}

impl LevelWindow {
    /// `lambda |Y|^(1/2)`.
    pub fn weight(&self) -> f64 {
        self.lambda * self.measure.sqrt()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Pigeonhole {
    /// All nonempty windows, ascending `lambda`.
    pub windows: Vec<LevelWindow>,
    /// Indices into `windows` of `(lambda_1, Y_1)` and `(lambda_2, Y_2)`.
    pub best: (usize, usize),
}

impl Pigeonhole {
    pub fn first(&self) -> &LevelWindow {
        &self.windows[self.best.0]
    }

    pub fn second(&self) -> &LevelWindow {
        &self.windows[self.best.1]
    }
}

/// Dyadic level windows of `|h|` and the pair maximising
/// `lambda_1 lambda_2 |Y_1|^(1/2) |Y_2|^(1/2)`.
pub fn dyadic_pigeonhole(h: &BoxFunction) -> Result<Pigeonhole> {
    if h.is_zero() {
        return invalid("h vanishes identically");
    }
    let area = h.grid.cell_area();
    let mut by_e: BTreeMap<i32, Vec<usize>> = BTreeMap::new();
    for (i, v) in h.values.iter().enumerate() {
        if let Some(e) = window_exponent(v.norm()) {
            by_e.entry(e).or_default().push(i);
        }
    }
    let windows: Vec<LevelWindow> = by_e
        .into_iter()
        .map(|(e, indices)| LevelWindow {
            lambda: 2f64.powi(e),
            measure: indices.len() as f64 * area,
            indices,
        })
        .collect();
    // The proxy factorises, so both windows maximise lambda |Y|^(1/2);
    // the lowest such window wins ties.
    let mut best = 0;
    for (i, w) in windows.iter().enumerate() {
        if w.weight() > windows[best].weight() {
            best = i;
        }
    }
    Ok(Pigeonhole {
        windows,
        best: (best, best),
    })
}
