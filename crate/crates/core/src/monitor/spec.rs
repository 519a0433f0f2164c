use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Stopping regime applied to the exceedance stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    /// Wald's sequential probability ratio test with `A = β/(1−α)`, `B = (1−β)/α`.
    Sprt,
    /// Sequential approximation of a permutation test: SPRT boundaries with `B = 1/A`.
    Sapt,
    /// Sequential Monte Carlo p-value, stopping at the `h`-th exceedance.
    Pval,
    /// Fixed-`M` test terminated as soon as its final decision is determined.
    Certain,
    /// Fixed-`M` test without early stopping.
    Complete,
}

impl Method {
    pub const ALL: [Method; 5] = [
        Method::Sprt,
        Method::Sapt,
        Method::Pval,
        Method::Certain,
        Method::Complete,
    ];

    pub fn label(self) -> &'static str {
        match self {
            Method::Sprt => "SPRT",
            Method::Sapt => "SAPT",
            Method::Pval => "PVAL",
            Method::Certain => "CERTAIN",
            Method::Complete => "COMPLETE",
        }
    }

    /// Whether the regime uses the linear SPRT/SAPT boundaries.
    pub fn is_wald(self) -> bool {
        matches!(self, Method::Sprt | Method::Sapt)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "sprt" => Ok(Method::Sprt),
            "sapt" => Ok(Method::Sapt),
            "pval" => Ok(Method::Pval),
            "certain" => Ok(Method::Certain),
            "complete" => Ok(Method::Complete),
            other => Err(Error::Config(format!("unknown method '{other}'"))),
        }
    }
}

/// User-facing parameters from which a [`SequentialSpec`] is derived.
///
/// Not every field is used by every method: `beta` only matters for SPRT,
/// `sapt_a` only for SAPT and `h` only for PVAL.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpecParams {
    pub p0: f64,
    pub p1: f64,
    pub alpha: f64,
    pub beta: f64,
    /// Lower likelihood-ratio threshold `A` for SAPT; `B` is set to `1/A`.
    pub sapt_a: f64,
    /// Maximum number of permutations `M`.
    pub max_perms: usize,
    pub h: usize,
}

impl Default for SpecParams {
    fn default() -> Self {
        SpecParams {
            p0: 0.06,
            p1: 0.04,
            alpha: 0.05,
            beta: 0.2,
            sapt_a: 0.1,
            max_perms: 500,
            h: 8,
        }
    }
}

/// Full, validated parameterisation of a stopping regime.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SequentialSpec {
    method: Method,
    p0: f64,
    p1: f64,
    alpha: f64,
    beta: f64,
    #[serde(rename = "A")]
    a: f64,
    #[serde(rename = "B")]
    b: f64,
    #[serde(rename = "M")]
    max_perms: usize,
    h: usize,
}

impl SequentialSpec {
    pub fn new(method: Method, params: &SpecParams) -> Result<Self> {
        let SpecParams {
            p0,
            p1,
            alpha,
            beta,
            sapt_a,
            max_perms,
            h,
        } = *params;

        check_open_unit("alpha", alpha)?;
        if max_perms == 0 {
            return Err(Error::Config("M must be at least 1".into()));
        }

        let (a, b) = match method {
            Method::Sapt => {
                if !(sapt_a > 0.0 && sapt_a < 1.0) {
                    return Err(Error::Config(format!("SAPT requires 0 < A < 1, got {sapt_a}")));
                }
                (sapt_a, 1.0 / sapt_a)
            }
            _ => {
                check_open_unit("beta", beta)?;
                (beta / (1.0 - alpha), (1.0 - beta) / alpha)
            }
        };

        if method.is_wald() {
            check_open_unit("p0", p0)?;
            check_open_unit("p1", p1)?;
            if p1 >= p0 {
                return Err(Error::Config(format!(
                    "hypotheses must satisfy 0 < p1 < p0 < 1, got p0={p0}, p1={p1}"
                )));
            }
            if !(a < 1.0 && b > 1.0) {
                return Err(Error::Config(format!(
                    "boundaries require A < 1 < B, got A={a}, B={b}"
                )));
            }
        }

        if method == Method::Pval && !(1..=max_perms).contains(&h) {
            return Err(Error::Config(format!("PVAL requires 1 <= h <= M, got h={h}, M={max_perms}")));
        }

        let spec = SequentialSpec {
            method,
            p0,
            p1,
            alpha,
            beta,
            a,
            b,
            max_perms,
            h,
        };
        if method == Method::Sapt && !spec.sapt_is_centered() {
            log::warn!(
                "SAPT with (p0 + p1)/2 = {} differs from alpha = {alpha}; the effective level will drift",
                (p0 + p1) / 2.0
            );
        }
        Ok(spec)
    }

    /// The regime with the default parameters (`p0=0.06, p1=0.04, α=0.05,
    /// β=0.2, A=0.1, M=500, h=8`).
    pub fn default_for(method: Method) -> Self {
        SequentialSpec::new(method, &SpecParams::default()).expect("default parameters are valid")
    }

    pub fn sprt() -> Self {
        Self::default_for(Method::Sprt)
    }

    pub fn sapt() -> Self {
        Self::default_for(Method::Sapt)
    }

    pub fn pval() -> Self {
        Self::default_for(Method::Pval)
    }

    pub fn certain() -> Self {
        Self::default_for(Method::Certain)
    }

    pub fn complete() -> Self {
        Self::default_for(Method::Complete)
    }

    /// The same regime with a different maximum number of permutations.
    pub fn with_max_perms(&self, max_perms: usize) -> Result<Self> {
        let mut params = self.params();
        params.max_perms = max_perms;
        SequentialSpec::new(self.method, &params)
    }

    /// Parameters that reproduce this spec through [`SequentialSpec::new`].
    pub fn params(&self) -> SpecParams {
        SpecParams {
            p0: self.p0,
            p1: self.p1,
            alpha: self.alpha,
            beta: self.beta,
            sapt_a: if self.method == Method::Sapt { self.a } else { 0.1 },
            max_perms: self.max_perms,
            h: self.h,
        }
    }

    /// Whether `(p0 + p1)/2 = α`, the recommended SAPT configuration.
    pub fn sapt_is_centered(&self) -> bool {
        ((self.p0 + self.p1) / 2.0 - self.alpha).abs() <= 1e-12
    }

    pub fn method(&self) -> Method {
        self.method
    }

    pub fn p0(&self) -> f64 {
        self.p0
    }

    pub fn p1(&self) -> f64 {
        self.p1
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// Lower likelihood-ratio threshold (accept H0 side).
    pub fn a(&self) -> f64 {
        self.a
    }

    /// Upper likelihood-ratio threshold (accept H1 side).
    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn max_perms(&self) -> usize {
        self.max_perms
    }

    pub fn h(&self) -> usize {
        self.h
    }
}

fn check_open_unit(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v < 1.0 {
        Ok(())
    } else {
        Err(Error::Config(format!("{name} must lie in (0, 1), got {v}")))
    }
}
