//! Small value parsers shared by the argument definitions.

use weyllab::ReducedFraction;

/// A real given as a decimal (`0.25`) or a fraction (`3/7`, `-1/2`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Real {
    Decimal(f64),
    Fraction(i64, u64),
}

impl Real {
    pub fn value(self) -> f64 {
        match self {
            Real::Decimal(v) => v,
            Real::Fraction(p, q) => p as f64 / q as f64,
        }
    }

    /// `p/q` reduced, if given as a fraction.
    pub fn fraction(self) -> Option<ReducedFraction> {
        match self {
            Real::Fraction(p, q) => ReducedFraction::new(p, q as i64).ok(),
            Real::Decimal(_) => None,
        }
    }
}

impl std::fmt::Display for Real {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Real::Decimal(v) => write!(f, "{v}"),
            Real::Fraction(p, q) => write!(f, "{p}/{q}"),
        }
    }
}

impl serde::Serialize for Real {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

pub fn real(s: &str) -> Result<Real, String> {
    let s = s.trim();
    if let Some((p, q)) = s.split_once('/') {
        let p: i64 = p.trim().parse().map_err(|_| format!("bad numerator in '{s}'"))?;
        let q: u64 = q.trim().parse().map_err(|_| format!("bad denominator in '{s}'"))?;
        if q == 0 {
            return Err(format!("zero denominator in '{s}'"));
        }
        return Ok(Real::Fraction(p, q));
    }
    let v: f64 = s.parse().map_err(|_| format!("'{s}' is not a number"))?;
    if !v.is_finite() {
        return Err(format!("'{s}' is not finite"));
    }
    Ok(Real::Decimal(v))
}

/// `x,t` with each coordinate a [`Real`].
pub fn point(s: &str) -> Result<(Real, Real), String> {
    let (x, t) = s.split_once(',').ok_or_else(|| format!("expected x,t, got '{s}'"))?;
    Ok((real(x)?, real(t)?))
}

/// `3`, `1,2,7`, `1..5` or `1..=5` (ranges inclusive).
pub fn seeds(s: &str) -> Result<Vec<u64>, String> {
    let s = s.trim();
    let bad = || format!("bad seed list '{s}'");
    let out: Vec<u64> = if let Some((a, b)) = s.split_once("..") {
        let b = b.strip_prefix('=').unwrap_or(b);
        let (a, b): (u64, u64) = (a.parse().map_err(|_| bad())?, b.parse().map_err(|_| bad())?);
        if a > b {
            return Err(bad());
        }
        (a..=b).collect()
    } else {
        s.split(',').map(|x| x.trim().parse().map_err(|_| bad())).collect::<Result<_, _>>()?
    };
    if out.is_empty() {
        return Err(bad());
    }
    Ok(out)
}

/// Comma-separated positive integers.
pub fn usize_list(s: &str) -> Result<Vec<usize>, String> {
    let v: Vec<usize> = s
        .split(',')
        .map(|x| x.trim().parse().map_err(|_| format!("bad integer list '{s}'")))
        .collect::<Result<_, _>>()?;
    if v.is_empty() || v.contains(&0) {
        return Err(format!("bad integer list '{s}'"));
    }
    Ok(v)
}

/// `R` must be `n^2`; returns `n`.
pub fn perfect_square_root(r: u64) -> Option<u64> {
    let n = (r as f64).sqrt().round() as u64;
    (n.checked_mul(n) == Some(r) && n > 0).then_some(n)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reals_and_points() {
        assert_eq!(real("3/7").unwrap(), Real::Fraction(3, 7));
        assert_eq!(real(" -0.5 ").unwrap().value(), -0.5);
        assert!(real("1/0").is_err() && real("inf").is_err() && real("x").is_err());
        let (x, t) = point("0,3/7").unwrap();
        assert_eq!((x.value(), t.fraction().unwrap().den()), (0.0, 7));
    }

    #[test]
    fn seed_lists() {
        assert_eq!(seeds("1..5").unwrap(), vec![1, 2, 3, 4, 5]);
        assert_eq!(seeds("2..=3").unwrap(), vec![2, 3]);
        assert_eq!(seeds("4,9").unwrap(), vec![4, 9]);
        assert!(seeds("5..1").is_err() && seeds("").is_err());
    }

    #[test]
    fn squares() {
        assert_eq!(perfect_square_root(4096), Some(64));
        assert_eq!(perfect_square_root(7), None);
        assert_eq!(perfect_square_root(0), None);
    }
}
