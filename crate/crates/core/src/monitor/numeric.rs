//! Small numerical kernels: bracketed bisection and composite Simpson.

use crate::error::{Error, Result};

/// Root of an increasing function on `[lo, hi]` with `f(lo) <= 0 <= f(hi)`,
/// located to absolute tolerance `tol`.
pub fn bisect_increasing<F>(f: F, mut lo: f64, mut hi: f64, tol: f64) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    let (flo, fhi) = (f(lo), f(hi));
    if !(flo <= 0.0 && fhi >= 0.0) {
        return Err(Error::Numerical(format!(
            "bisection bracket [{lo}, {hi}] does not straddle a root (f(lo)={flo}, f(hi)={fhi})"
        )));
    }
    for _ in 0..2000 {
        let mid = 0.5 * (lo + hi);
        if hi - lo <= tol || mid == lo || mid == hi {
            return Ok(mid);
        }
        let fm = f(mid);
        if fm.is_nan() {
            return Err(Error::Numerical(format!("objective is NaN at {mid}")));
        }
        if fm < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Err(Error::Numerical(format!(
        "bisection did not converge; last bracket [{lo}, {hi}]"
    )))
}

/// Composite Simpson rule with `panels` subintervals (rounded up to even).
pub fn simpson<F>(f: F, a: f64, b: f64, panels: usize) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    let n = (panels.max(2) + 1) & !1;
    let h = (b - a) / n as f64;
    let mut acc = f(a)? + f(b)?;
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * f(a + i as f64 * h)?;
    }
    let value = acc * h / 3.0;
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::Numerical(format!("quadrature on [{a}, {b}] produced {value}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bisection_finds_sqrt2() {
        let r = bisect_increasing(|x| x * x - 2.0, 0.0, 2.0, 1e-12).unwrap();
        assert!((r - 2f64.sqrt()).abs() < 1e-11);
    }

    #[test]
    fn bisection_rejects_bad_bracket() {
        assert!(bisect_increasing(|x| x - 5.0, 0.0, 2.0, 1e-12).is_err());
    }

    #[test]
    fn simpson_is_exact_for_cubics() {
        let v = simpson(|x| Ok(x * x * x - x + 1.0), 0.0, 2.0, 4).unwrap();
        assert!((v - 4.0).abs() < 1e-12);
    }
}
