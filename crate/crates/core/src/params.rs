use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Velocities with norm below this are treated as zero (the cone apex).
pub const DEFAULT_ZERO_EPS: f64 = 1e-12;

/// Elastic metric parameters: `a` weights bending (normal derivative),
/// `b` weights stretching (tangential derivative).
///
/// `lambda = a / (2b)` is the cone parameter of the SRV target metric and is
/// always recomputed from `a` and `b`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MetricParams {
    a: f64,
    b: f64,
    lambda: f64,
}

impl MetricParams {
    /// Both parameters must be finite and strictly positive.
    pub fn new(a: f64, b: f64) -> Result<Self> {
        if !(a.is_finite() && a > 0.0) {
            return Err(Error::InvalidParams(format!("a must be positive and finite, got {a}")));
        }
        if !(b.is_finite() && b > 0.0) {
            return Err(Error::InvalidParams(format!("b must be positive and finite, got {b}")));
        }
        Ok(Self { a, b, lambda: a / (2.0 * b) })
    }

    /// The square-root-velocity metric, `a = 1, b = 1/2`.
    pub fn srv() -> Self {
        Self { a: 1.0, b: 0.5, lambda: 1.0 }
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }
}

impl<'de> Deserialize<'de> for MetricParams {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            a: f64,
            b: f64,
        }
        let raw = Raw::deserialize(d)?;
        MetricParams::new(raw.a, raw.b).map_err(serde::de::Error::custom)
    }
}

/// Checks a bare cone parameter.
pub(crate) fn check_lambda(lambda: f64) -> Result<()> {
    if lambda.is_finite() && lambda > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParams(format!("lambda must be positive and finite, got {lambda}")))
    }
}
