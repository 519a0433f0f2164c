//! Analytic operating characteristics of the SPRT/SAPT boundaries.
//!
//! For a true exceedance probability `p` the power function is
//! `L_p = (1 − A^k) / (B^k − A^k)` where `k ≠ 0` solves
//! `p (p1/p0)^k + (1 − p) ((1 − p1)/(1 − p0))^k = 1`, and the expected
//! number of permutations is
//! `E_m(p) = (L_p ln B + (1 − L_p) ln A) / (p ln(p1/p0) + (1 − p) ln((1 − p1)/(1 − p0)))`.
//!
//! Both expressions are 0/0 at the singular point `p*` where the root
//! collapses to `k = 0`. `L` is continuous there with limit
//! `−ln A / (ln B − ln A)`; `E_m` is evaluated by averaging the values at
//! `p* ± 1e-6`.

use serde::Serialize;

use super::numeric::{bisect_increasing, simpson};
use super::spec::SequentialSpec;
use crate::error::{Error, Result};

/// Absolute tolerance of the root search for `k`.
pub const K_TOLERANCE: f64 = 1e-10;
/// Half-width of the symmetric offset used for `E_m` at the singular point.
pub const SINGULAR_OFFSET: f64 = 1e-6;
/// Simpson subintervals on `[0, 1]`.
pub const QUADRATURE_PANELS: usize = 20_000;

/// Power and cost of a SPRT/SAPT regime at one exceedance probability.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OperatingCharacteristic {
    pub p: f64,
    pub k: f64,
    /// Probability of accepting H1 (rejecting H0).
    pub power: f64,
    pub expected_m: f64,
}

fn check_hypotheses(p0: f64, p1: f64) -> Result<()> {
    if 0.0 < p1 && p1 < p0 && p0 < 1.0 {
        Ok(())
    } else {
        Err(Error::Config(format!("requires 0 < p1 < p0 < 1, got p0={p0}, p1={p1}")))
    }
}

/// `expm1(x)/x`, continuous at 0.
fn expm1_ratio(x: f64) -> f64 {
    if x == 0.0 {
        1.0
    } else {
        x.exp_m1() / x
    }
}

/// The probability at which the implicit equation for `k` has only the
/// trivial root.
pub fn singular_point(p0: f64, p1: f64) -> Result<f64> {
    check_hypotheses(p0, p1)?;
    let lo = (p1 / p0).ln();
    let hi = ((1.0 - p1) / (1.0 - p0)).ln();
    Ok(hi / (hi - lo))
}

/// Nonzero root `k` of `p (p1/p0)^k + (1 − p) ((1 − p1)/(1 − p0))^k = 1`,
/// or 0 at the singular point.
///
/// Writing the left side minus one as `f(k)`, `f` is convex with `f(0) = 0`,
/// so `f(k)/k` is increasing and its unique zero is the nonzero root. The
/// ratio is computed with `expm1` and stays accurate for tiny `k`.
pub fn solve_k(p: f64, p0: f64, p1: f64) -> Result<f64> {
    check_hypotheses(p0, p1)?;
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::Numerical(format!("solve_k requires 0 < p < 1, got p={p}")));
    }
    let lo_ln = (p1 / p0).ln();
    let hi_ln = ((1.0 - p1) / (1.0 - p0)).ln();
    let slope =
        |k: f64| p * lo_ln * expm1_ratio(k * lo_ln) + (1.0 - p) * hi_ln * expm1_ratio(k * hi_ln);

    let at_zero = slope(0.0);
    if at_zero == 0.0 {
        return Ok(0.0);
    }
    let (mut lo, mut hi) = if at_zero < 0.0 { (0.0, 1.0) } else { (-1.0, 0.0) };
    loop {
        let edge = if at_zero < 0.0 { hi } else { lo };
        let v = slope(edge);
        if (at_zero < 0.0 && v >= 0.0) || (at_zero > 0.0 && v <= 0.0) {
            break;
        }
        if edge.abs() > 1e300 {
            return Err(Error::Numerical(format!(
                "no bracket for k at p={p} (p0={p0}, p1={p1}); last edge {edge}"
            )));
        }
        if at_zero < 0.0 {
            lo = hi;
            hi *= 2.0;
        } else {
            hi = lo;
            lo *= 2.0;
        }
    }
    bisect_increasing(slope, lo, hi, K_TOLERANCE)
        .map_err(|e| Error::Numerical(format!("solve_k at p={p}: {e}")))
}

/// `(1 − A^k)/(B^k − A^k)` evaluated without overflow for large `|k|`.
fn power_from_k(k: f64, ln_a: f64, ln_b: f64) -> f64 {
    if k == 0.0 {
        -ln_a / (ln_b - ln_a)
    } else if k > 0.0 {
        (-k * ln_b).exp() * (-(k * ln_a).exp_m1()) / (-(k * (ln_a - ln_b)).exp_m1())
    } else {
        let k = -k;
        (-(k * ln_a).exp_m1()) / (-(k * (ln_a - ln_b)).exp_m1())
    }
}

fn require_wald(spec: &SequentialSpec) -> Result<()> {
    if spec.method().is_wald() {
        Ok(())
    } else {
        Err(Error::Usage(format!(
            "operating characteristics are defined for SPRT and SAPT, not {}",
            spec.method()
        )))
    }
}

fn check_probability(p: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(Error::Numerical(format!("p must lie in [0, 1], got {p}")))
    }
}

/// Probability that the regime accepts H1 when the true exceedance
/// probability is `p`.
pub fn power_function(p: f64, spec: &SequentialSpec) -> Result<f64> {
    require_wald(spec)?;
    check_probability(p)?;
    if p == 0.0 {
        return Ok(1.0);
    }
    if p == 1.0 {
        return Ok(0.0);
    }
    let k = solve_k(p, spec.p0(), spec.p1())?;
    Ok(power_from_k(k, spec.a().ln(), spec.b().ln()))
}

fn expected_m_direct(p: f64, spec: &SequentialSpec) -> Result<f64> {
    let power = power_function(p, spec)?;
    let (p0, p1) = (spec.p0(), spec.p1());
    let num = power * spec.b().ln() + (1.0 - power) * spec.a().ln();
    let den = p * (p1 / p0).ln() + (1.0 - p) * ((1.0 - p1) / (1.0 - p0)).ln();
    let e = num / den;
    if e.is_finite() && e > 0.0 {
        Ok(e)
    } else {
        Err(Error::Numerical(format!(
            "expected permutations at p={p} evaluated to {e} (num={num}, den={den})"
        )))
    }
}

/// Expected number of permutations until a SPRT/SAPT regime terminates.
pub fn expected_permutations(p: f64, spec: &SequentialSpec) -> Result<f64> {
    require_wald(spec)?;
    check_probability(p)?;
    let star = singular_point(spec.p0(), spec.p1())?;
    if (p - star).abs() < SINGULAR_OFFSET {
        let below = expected_m_direct(star - SINGULAR_OFFSET, spec)?;
        let above = expected_m_direct(star + SINGULAR_OFFSET, spec)?;
        return Ok(0.5 * (below + above));
    }
    expected_m_direct(p, spec)
}

pub fn operating_characteristic(p: f64, spec: &SequentialSpec) -> Result<OperatingCharacteristic> {
    let k = if p > 0.0 && p < 1.0 {
        solve_k(p, spec.p0(), spec.p1())?
    } else if p == 0.0 {
        f64::NEG_INFINITY
    } else {
        f64::INFINITY
    };
    Ok(OperatingCharacteristic {
        p,
        k,
        power: power_function(p, spec)?,
        expected_m: expected_permutations(p, spec)?,
    })
}

/// Effective significance level `∫_0^1 L_p dp`: the rejection rate when the
/// exceedance probability is uniformly distributed, as it is under H0.
pub fn effective_alpha(spec: &SequentialSpec) -> Result<f64> {
    require_wald(spec)?;
    simpson(|p| power_function(p, spec), 0.0, 1.0, QUADRATURE_PANELS)
}

/// Average expected number of permutations `∫_0^1 E_m(p) dp` under H0.
pub fn average_expected_permutations(spec: &SequentialSpec) -> Result<f64> {
    require_wald(spec)?;
    simpson(|p| expected_permutations(p, spec), 0.0, 1.0, QUADRATURE_PANELS)
}

/// Approximate mean number of permutations of the sequential p-value under
/// H0: `h + h ln((M + 1/2)/(h + 1/2))`.
pub fn pval_expected_m(h: usize, max_perms: usize) -> Result<f64> {
    if h == 0 || h > max_perms {
        return Err(Error::Usage(format!("requires 1 <= h <= M, got h={h}, M={max_perms}")));
    }
    let h = h as f64;
    Ok(h + h * ((max_perms as f64 + 0.5) / (h + 0.5)).ln())
}

/// Standard error of the sequential p-value as a fraction of `p`.
pub fn pval_se_fraction(h: usize) -> Result<f64> {
    if h == 0 {
        return Err(Error::Usage("h must be at least 1".into()));
    }
    Ok(1.0 / (h as f64).sqrt())
}
