//! Scalar root bracketing used by the calibration routines.

use crate::scalar::{lit, Real};

/// Bisection on a sign-changing bracket. Returns `None` when `f(lo)` and
/// `f(hi)` have the same strict sign.
pub fn bisect<T, F>(mut f: F, mut lo: T, mut hi: T, tol: T, max_iter: usize) -> Option<T>
where
    T: Real,
    F: FnMut(T) -> T,
{
    let mut f_lo = f(lo);
    let f_hi = f(hi);
    if f_lo == T::zero() {
        return Some(lo);
    }
    if f_hi == T::zero() {
        return Some(hi);
    }
    if f_lo.signum() == f_hi.signum() || f_lo.is_nan() || f_hi.is_nan() {
        return None;
    }
    let half = lit::<T>(0.5);
    for _ in 0..max_iter {
        let mid = (lo + hi) * half;
        let f_mid = f(mid);
        if f_mid == T::zero() || (hi - lo).abs() <= tol {
            return Some(mid);
        }
        if f_mid.signum() == f_lo.signum() {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    Some((lo + hi) * half)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_sqrt_two() {
        let r = bisect(|x: f64| x * x - 2.0, 0.0, 2.0, 1e-14, 200).unwrap();
        assert!((r - 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn no_bracket() {
        assert!(bisect(|x: f64| x * x + 1.0, -1.0, 1.0, 1e-12, 100).is_none());
    }
}
