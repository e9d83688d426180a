//! Dyadic windows. A value `v > 0` lives in the window `[2^e, 2^(e+1))`
//! with `e = floor(log2 v)`; windows are half-open so they partition `(0, inf)`.

/// Exponent of the dyadic window containing `v`, or `None` for `v <= 0`
/// and non-finite values.
pub fn window_exponent(v: f64) -> Option<i32> {
    if !(v > 0.0) || !v.is_finite() {
        return None;
    }
    let mut e = v.log2().floor() as i32;
    // log2 can land one off right next to a power of two.
    if 2f64.powi(e) > v {
        e -= 1;
    } else if 2f64.powi(e + 1) <= v {
        e += 1;
    }
    Some(e)
}

/// Exponent `e` with `2^e == v`, if `v` is an exact power of two.
pub fn exact_power_of_two(v: f64) -> Option<i32> {
    let e = window_exponent(v)?;
    (2f64.powi(e) == v).then_some(e)
}

pub fn is_power_of_two(v: u64) -> bool {
    v != 0 && v & (v - 1) == 0
}

/// All dyadic `2^e` with `lo <= 2^e <= hi`, ascending.
pub fn dyadics_in(lo: f64, hi: f64) -> Vec<f64> {
    if !(lo > 0.0) || hi < lo {
        return Vec::new();
    }
    let mut e = window_exponent(lo).unwrap_or(0);
    if 2f64.powi(e) < lo {
        e += 1;
    }
    let mut out = Vec::new();
    while 2f64.powi(e) <= hi {
        out.push(2f64.powi(e));
        e += 1;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn window_edges() {
        assert_eq!(window_exponent(1.0), Some(0));
        assert_eq!(window_exponent(1.999), Some(0));
        assert_eq!(window_exponent(2.0), Some(1));
        assert_eq!(window_exponent(0.75), Some(-1));
        assert_eq!(window_exponent(0.0), None);
        assert_eq!(window_exponent(f64::NAN), None);
        for e in -60..60 {
            assert_eq!(window_exponent(2f64.powi(e)), Some(e));
            assert_eq!(window_exponent(2f64.powi(e) * (1.0 - 1e-15)), Some(e - 1));
        }
    }

    #[test]
    fn dyadic_range() {
        assert_eq!(dyadics_in(32f64.powf(0.25), 32f64.sqrt()), vec![4.0]);
        assert_eq!(dyadics_in(2.0, 16.0), vec![2.0, 4.0, 8.0, 16.0]);
        assert!(dyadics_in(3.0, 3.5).is_empty());
        assert_eq!(exact_power_of_two(8.0), Some(3));
        assert_eq!(exact_power_of_two(6.0), None);
    }
}
