//! Reduced fractions, Farey layers, Dirichlet approximation, the
//! Möbius/totient sieve, Ramanujan sums and major-arc membership.

use std::cmp::Ordering;
use std::fmt;
use std::sync::{Arc, Mutex, OnceLock};

use serde::{Deserialize, Serialize};

use crate::dyadic::is_power_of_two;
use crate::error::{invalid, Result};

pub fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

fn gcd_u128(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// `num / den` in lowest terms with `den >= 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ReducedFraction {
    num: i64,
    den: u64,
}

impl ReducedFraction {
    pub fn new(num: i64, den: i64) -> Result<Self> {
        if den == 0 {
            return invalid("zero denominator");
        }
        let sign = if (num < 0) != (den < 0) && num != 0 { -1 } else { 1 };
        let (n, d) = (num.unsigned_abs(), den.unsigned_abs());
        let g = gcd(n, d);
        Ok(Self {
            num: sign * (n / g) as i64,
            den: d / g,
        })
    }

    pub const fn zero() -> Self {
        Self { num: 0, den: 1 }
    }

    pub fn num(&self) -> i64 {
        self.num
    }

    pub fn den(&self) -> u64 {
        self.den
    }

    pub fn to_f64(&self) -> f64 {
        self.num as f64 / self.den as f64
    }

    pub fn neg(&self) -> Self {
        Self {
            num: -self.num,
            den: self.den,
        }
    }

    /// Representative of the same class mod 1 in `[0, 1)`.
    pub fn mod_one(&self) -> Self {
        Self {
            num: self.num.rem_euclid(self.den as i64),
            den: self.den,
        }
    }
}

impl Ord for ReducedFraction {
    fn cmp(&self, other: &Self) -> Ordering {
        let l = self.num as i128 * other.den as i128;
        let r = other.num as i128 * self.den as i128;
        l.cmp(&r)
    }
}

impl PartialOrd for ReducedFraction {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for ReducedFraction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.num, self.den)
    }
}

/// Smallest-prime-factor sieve with Möbius and Euler totient tables.
#[derive(Debug, Clone)]
pub struct Sieve {
    mu: Vec<i8>,
    phi: Vec<u64>,
}

impl Sieve {
    /// Linear sieve over `0..=limit`.
    pub fn new(limit: usize) -> Self {
        let limit = limit.max(1);
        let mut spf = vec![0u32; limit + 1];
        let mut primes: Vec<u32> = Vec::new();
        let mut mu = vec![0i8; limit + 1];
        let mut phi = vec![0u64; limit + 1];
        mu[1] = 1;
        phi[1] = 1;
        for i in 2..=limit {
            if spf[i] == 0 {
                spf[i] = i as u32;
                primes.push(i as u32);
                mu[i] = -1;
                phi[i] = i as u64 - 1;
            }
            for &p in &primes {
                let m = i * p as usize;
                if p > spf[i] || m > limit {
                    break;
                }
                spf[m] = p;
                if p == spf[i] {
                    mu[m] = 0;
                    phi[m] = phi[i] * p as u64;
                } else {
                    mu[m] = -mu[i];
                    phi[m] = phi[i] * (p as u64 - 1);
                }
            }
        }
        Self { mu, phi }
    }

    pub fn limit(&self) -> usize {
        self.mu.len() - 1
    }

    pub fn mobius(&self, n: usize) -> i8 {
        self.mu[n]
    }

    pub fn totient(&self, n: usize) -> u64 {
        self.phi[n]
    }

    /// `c_q(n) = mu(q/(q,n)) phi(q) / phi(q/(q,n))`.
    pub fn ramanujan_sum(&self, q: u64, n: i64) -> i64 {
        let g = gcd(q, n.unsigned_abs());
        let m = (q / g) as usize;
        let q = q as usize;
        self.mu[m] as i64 * (self.phi[q] / self.phi[m]) as i64
    }
}

fn sieve_cache() -> &'static Mutex<Arc<Sieve>> {
    static CACHE: OnceLock<Mutex<Arc<Sieve>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(Arc::new(Sieve::new(1 << 12))))
}

/// Process-wide sieve covering at least `0..=limit`; rebuilt (doubling)
/// when a larger bound is requested.
pub fn shared_sieve(limit: usize) -> Arc<Sieve> {
    let mut guard = sieve_cache().lock().unwrap_or_else(|e| e.into_inner());
    if guard.limit() < limit {
        let new_limit = limit.max(2 * guard.limit());
        *guard = Arc::new(Sieve::new(new_limit));
    }
    guard.clone()
}

pub fn totient(q: u64) -> u64 {
    shared_sieve(q as usize).totient(q as usize)
}

pub fn mobius(q: u64) -> i8 {
    shared_sieve(q as usize).mobius(q as usize)
}

/// Ramanujan sum `c_q(n) = sum_{0 <= a < q, (a,q)=1} e(-a n / q)`.
pub fn ramanujan_sum(q: u64, n: i64) -> Result<i64> {
    if q == 0 {
        return invalid("Ramanujan sum needs q >= 1");
    }
    Ok(shared_sieve(q as usize).ramanujan_sum(q, n))
}

/// The reduced fractions of `[-1, 1]` with denominator in `[Q, 2Q)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FareyLayer {
    q_scale: u64,
    fractions: Vec<ReducedFraction>,
}

impl FareyLayer {
    pub fn q_scale(&self) -> u64 {
        self.q_scale
    }

    pub fn fractions(&self) -> &[ReducedFraction] {
        &self.fractions
    }

    pub fn len(&self) -> usize {
        self.fractions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.fractions.is_empty()
    }

    /// One representative per class mod 1: `a/q` with `0 <= a < q`, sorted.
    pub fn torus_classes(&self) -> Vec<ReducedFraction> {
        let mut v: Vec<_> = self
            .fractions
            .iter()
            .filter(|f| f.num >= 0 && (f.num as u64) < f.den)
            .copied()
            .collect();
        v.sort();
        v
    }
}

/// Builds `S_Q` for a power of two `Q`.
pub fn farey_layer(q_scale: u64) -> Result<FareyLayer> {
    if !is_power_of_two(q_scale) {
        return invalid(format!("Q = {q_scale} is not a power of two"));
    }
    let mut fractions = Vec::new();
    for q in q_scale..2 * q_scale {
        let qi = q as i64;
        for a in -qi..=qi {
            if gcd(a.unsigned_abs(), q) == 1 {
                fractions.push(ReducedFraction { num: a, den: q });
            }
        }
    }
    fractions.sort();
    Ok(FareyLayer { q_scale, fractions })
}

/// Reduced residues `a/q`, `0 <= a < q`, for all `q` in `[Q, 2Q)`, sorted.
/// Same set as [`FareyLayer::torus_classes`] without building the layer.
pub fn arc_centres(q_scale: u64) -> Vec<ReducedFraction> {
    let mut v = Vec::new();
    for q in q_scale..2 * q_scale {
        for a in 0..q {
            if gcd(a, q) == 1 {
                v.push(ReducedFraction { num: a as i64, den: q });
            }
        }
    }
    v.sort();
    v
}

/// Exact rational `num / den` with `den > 0`, wide enough for f64 inputs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExactRational {
    pub num: i128,
    pub den: u128,
}

impl ExactRational {
    /// The exact value of a finite double.
    pub fn from_f64(v: f64) -> Option<Self> {
        if !v.is_finite() {
            return None;
        }
        if v == 0.0 {
            return Some(Self { num: 0, den: 1 });
        }
        let bits = v.to_bits();
        let sign = if bits >> 63 == 1 { -1i128 } else { 1 };
        let exp = ((bits >> 52) & 0x7ff) as i32;
        let frac = bits & ((1u64 << 52) - 1);
        let (mant, e) = if exp == 0 {
            (frac, -1074)
        } else {
            (frac | (1u64 << 52), exp - 1075)
        };
        let tz = mant.trailing_zeros() as i32;
        let (mant, e) = (mant >> tz, e + tz);
        if e >= 0 {
            if e > 70 {
                return None;
            }
            Some(Self {
                num: sign * ((mant as i128) << e),
                den: 1,
            })
        } else if -e <= 120 {
            Some(Self {
                num: sign * mant as i128,
                den: 1u128 << (-e),
            })
        } else {
            None
        }
    }
}

/// Dirichlet approximation of `t` at level `N`: the reduced `a/q` with
/// `1 <= q <= N` and `|t - a/q| <= 1/(qN)` of smallest `q`, ties broken by
/// the smaller distance. Works exactly on the binary value of `t`.
pub fn dirichlet_approx(t: f64, n_max: u64) -> Result<ReducedFraction> {
    if !t.is_finite() {
        return invalid("t must be finite");
    }
    let t = t.rem_euclid(1.0);
    match ExactRational::from_f64(t) {
        Some(r) => dirichlet_approx_rational(r.num as u128, r.den, n_max),
        // below 2^-120, so within 1/N of 0 for every admissible N
        None => {
            check_level(n_max)?;
            Ok(ReducedFraction::zero())
        }
    }
}

/// Largest level accepted by the Dirichlet routines; keeps every exact
/// product inside 128 bits.
pub const MAX_DIRICHLET_LEVEL: u64 = u32::MAX as u64;

fn check_level(n_max: u64) -> Result<()> {
    if n_max == 0 || n_max > MAX_DIRICHLET_LEVEL {
        return invalid(format!("N = {n_max} outside 1..={MAX_DIRICHLET_LEVEL}"));
    }
    Ok(())
}

/// [`dirichlet_approx`] for an exact rational `num/den` in `[0, 1)`.
pub fn dirichlet_approx_rational(num: u128, den: u128, n_max: u64) -> Result<ReducedFraction> {
    if den == 0 || num >= den {
        return invalid("need 0 <= num/den < 1");
    }
    check_level(n_max)?;
    let g = gcd_u128(num, den);
    let (num, den) = (num / g, den / g);
    let n = n_max as u128;
    // Whether |q t - a| <= 1/N, i.e. |q num - a den| * N <= den.
    let fits = |q: u128, a: u128| -> Option<u128> {
        let lhs = q.checked_mul(num)?;
        let rhs = a.checked_mul(den)?;
        let diff = lhs.abs_diff(rhs);
        let scaled = diff.checked_mul(n)?;
        (scaled <= den).then_some(diff)
    };
    let q1 = [0u128, 1].iter().filter_map(|&a| fits(1, a).map(|d| (d, a))).min();
    if let Some((_, a)) = q1 {
        return ReducedFraction::new(a as i64, 1);
    }
    // The least q with ||q t|| <= 1/N is a record of ||q t||, hence a
    // continued-fraction convergent denominator.
    let (mut p_prev, mut q_prev) = (0u128, 1u128);
    let (mut p_cur, mut q_cur) = (1u128, 0u128);
    let (mut x_num, mut x_den) = (num, den);
    while x_den != 0 {
        let a = x_num / x_den;
        (x_num, x_den) = (x_den, x_num - a * x_den);
        let Some(p_next) = a.checked_mul(p_cur).and_then(|v| v.checked_add(p_prev)) else {
            break;
        };
        let Some(q_next) = a.checked_mul(q_cur).and_then(|v| v.checked_add(q_prev)) else {
            break;
        };
        (p_prev, q_prev, p_cur, q_cur) = (p_cur, q_cur, p_next, q_next);
        if q_cur > n {
            break;
        }
        if q_cur >= 2 && fits(q_cur, p_cur).is_some() {
            return ReducedFraction::new(p_cur as i64, q_cur as i64);
        }
    }
    // Unreachable for valid input: the convergent with q_k <= N < q_{k+1}
    // always satisfies the bound.
    invalid("no Dirichlet approximation found")
}

/// How the admissible dyadic range of `Q` for major arcs is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum ArcCutoff {
    /// `Q <= N / 8`: the largest dyadic range on which arcs of radius
    /// `1/(QN)` around fractions with `q` in `[Q, 2Q)` are pairwise disjoint.
    #[default]
    Desk,
    /// `Q <= N / (ln N)^10`; empty for every `N` below about `10^27`.
    LogPower,
}

impl ArcCutoff {
    pub fn q_max(self, n_max: u64) -> f64 {
        let n = n_max as f64;
        match self {
            ArcCutoff::Desk => n / 8.0,
            ArcCutoff::LogPower => {
                if n_max < 2 {
                    0.0
                } else {
                    n / n.ln().powi(10)
                }
            }
        }
    }

    /// Admissible dyadic `Q` values, ascending.
    pub fn q_values(self, n_max: u64) -> Vec<u64> {
        let hi = self.q_max(n_max);
        let mut out = Vec::new();
        let mut q = 1u64;
        while (q as f64) <= hi {
            out.push(q);
            q *= 2;
        }
        out
    }
}

fn torus_dist(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(1.0);
    d.min(1.0 - d)
}

/// The fraction `a/q`, `q` in `[Q, 2Q)`, whose major arc (radius `1/(QN)`,
/// torus distance) contains `t`, if any.
pub fn major_arc_membership(
    t: f64,
    q_scale: u64,
    n_max: u64,
    cutoff: ArcCutoff,
) -> Result<Option<ReducedFraction>> {
    if !is_power_of_two(q_scale) || (q_scale as f64) > cutoff.q_max(n_max) {
        return invalid(format!(
            "Q = {q_scale} outside the admissible dyadic range for N = {n_max}"
        ));
    }
    if !t.is_finite() {
        return invalid("t must be finite");
    }
    let t = t.rem_euclid(1.0);
    let radius = 1.0 / (q_scale as f64 * n_max as f64);
    for q in q_scale..2 * q_scale {
        let a0 = (t * q as f64).floor() as i64;
        for a in [a0, a0 + 1] {
            let a = a.rem_euclid(q as i64) as u64;
            if gcd(a, q) != 1 {
                continue;
            }
            if torus_dist(t, a as f64 / q as f64) <= radius {
                return Ok(Some(ReducedFraction {
                    num: a as i64,
                    den: q,
                }));
            }
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fr(a: i64, q: i64) -> ReducedFraction {
        ReducedFraction::new(a, q).unwrap()
    }

    #[test]
    fn fractions_reduce_and_order() {
        assert_eq!(fr(4, -6), fr(-2, 3));
        assert_eq!(fr(0, -5), ReducedFraction::zero());
        assert!(fr(1, 3) < fr(1, 2));
        assert!(ReducedFraction::new(1, 0).is_err());
        assert_eq!(fr(-1, 3).mod_one(), fr(2, 3));
    }

    #[test]
    fn sieve_tables() {
        let s = Sieve::new(30);
        let mu: Vec<i8> = (1..=12).map(|n| s.mobius(n)).collect();
        assert_eq!(mu, vec![1, -1, -1, 0, -1, 1, -1, 0, 0, 1, -1, 0]);
        let phi: Vec<u64> = (1..=12).map(|n| s.totient(n)).collect();
        assert_eq!(phi, vec![1, 1, 2, 2, 4, 2, 6, 4, 6, 4, 10, 4]);
    }

    #[test]
    fn ramanujan_small_values() {
        for n in -5..5 {
            assert_eq!(ramanujan_sum(1, n).unwrap(), 1);
        }
        assert_eq!(ramanujan_sum(6, 0).unwrap(), 2);
        assert_eq!(ramanujan_sum(4, 2).unwrap(), -2);
        assert!(ramanujan_sum(0, 1).is_err());
    }

    #[test]
    fn farey_layer_examples() {
        let l1 = farey_layer(1).unwrap();
        assert_eq!(l1.fractions(), &[fr(-1, 1), fr(0, 1), fr(1, 1)]);
        let l2 = farey_layer(2).unwrap();
        assert_eq!(
            l2.fractions(),
            &[fr(-2, 3), fr(-1, 2), fr(-1, 3), fr(1, 3), fr(1, 2), fr(2, 3)]
        );
        assert_eq!(farey_layer(4).unwrap().len(), 28);
        assert!(farey_layer(3).is_err());
        assert_eq!(l2.torus_classes(), arc_centres(2));
    }

    #[test]
    fn dirichlet_examples() {
        assert_eq!(dirichlet_approx(0.5, 10).unwrap(), fr(1, 2));
        assert_eq!(dirichlet_approx(0.0, 5).unwrap(), fr(0, 1));
        assert_eq!(dirichlet_approx(0.1415926, 10).unwrap(), fr(1, 7));
        assert_eq!(dirichlet_approx(0.97, 10).unwrap(), fr(1, 1));
        assert!(dirichlet_approx(0.3, 0).is_err());
    }

    #[test]
    fn exact_conversion() {
        let r = ExactRational::from_f64(0.375).unwrap();
        assert_eq!((r.num, r.den), (3, 8));
        let r = ExactRational::from_f64(-2.0).unwrap();
        assert_eq!((r.num, r.den), (-2, 1));
    }

    #[test]
    fn cutoffs() {
        assert_eq!(ArcCutoff::Desk.q_values(100), vec![1, 2, 4, 8]);
        assert_eq!(ArcCutoff::Desk.q_values(64), vec![1, 2, 4, 8]);
        assert!(ArcCutoff::LogPower.q_values(1 << 20).is_empty());
    }

    #[test]
    fn major_arc_examples() {
        let third = 1.0 / 3.0;
        let got = major_arc_membership(third, 2, 100, ArcCutoff::Desk).unwrap();
        assert_eq!(got, Some(fr(1, 3)));
        let off = third + 2.0 / 200.0;
        assert_eq!(major_arc_membership(off, 2, 100, ArcCutoff::Desk).unwrap(), None);
        assert!(major_arc_membership(0.2, 3, 100, ArcCutoff::Desk).is_err());
        assert!(major_arc_membership(0.2, 16, 100, ArcCutoff::Desk).is_err());
        // arc around 0/1 wraps to t near 1
        let near_one = 1.0 - 0.5 / 64.0;
        assert_eq!(
            major_arc_membership(near_one, 1, 64, ArcCutoff::Desk).unwrap(),
            Some(fr(0, 1))
        );
    }
}
