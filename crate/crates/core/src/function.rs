//! Scalar frequency weights `f_i(s)` of the affine pencil `K(s) = Σ f_i(s) A_i`.

use std::fmt;

use faer::c64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Closed set of scalar functions with real parameters.
///
/// Every variant satisfies `f(conj(s)) = conj(f(s))`, which is what lets the
/// reduction work with conjugate-pair representatives only.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ScalarFunction {
    /// `c`
    Constant { c: f64 },
    /// `s^k`
    Power { k: u32 },
    /// `e^{a s}`
    Exponential { a: f64 },
    /// `1 / (s + gamma)`
    ShiftedRational { gamma: f64 },
    /// `c * inner(s)`
    Scaled { c: f64, inner: Box<ScalarFunction> },
}

impl ScalarFunction {
    pub fn constant(c: f64) -> Self {
        ScalarFunction::Constant { c }
    }

    pub fn power(k: u32) -> Self {
        ScalarFunction::Power { k }
    }

    pub fn exponential(a: f64) -> Self {
        ScalarFunction::Exponential { a }
    }

    pub fn shifted_rational(gamma: f64) -> Self {
        ScalarFunction::ShiftedRational { gamma }
    }

    pub fn scaled(c: f64, inner: ScalarFunction) -> Self {
        ScalarFunction::Scaled {
            c,
            inner: Box::new(inner),
        }
    }

    /// Nesting depth of `Scaled` wrappers plus one.
    pub fn depth(&self) -> usize {
        match self {
            ScalarFunction::Scaled { inner, .. } => 1 + inner.depth(),
            _ => 1,
        }
    }

    pub fn has_finite_params(&self) -> bool {
        match self {
            ScalarFunction::Constant { c } => c.is_finite(),
            ScalarFunction::Power { .. } => true,
            ScalarFunction::Exponential { a } => a.is_finite(),
            ScalarFunction::ShiftedRational { gamma } => gamma.is_finite(),
            ScalarFunction::Scaled { c, inner } => c.is_finite() && inner.has_finite_params(),
        }
    }

    pub fn eval(&self, s: c64) -> Result<c64> {
        let value = match self {
            ScalarFunction::Constant { c } => c64::new(*c, 0.0),
            ScalarFunction::Power { k } => pow(s, *k),
            ScalarFunction::Exponential { a } => (s * *a).exp(),
            ScalarFunction::ShiftedRational { gamma } => {
                let d = s + *gamma;
                if d.re == 0.0 && d.im == 0.0 {
                    return Err(self.undefined_at(s));
                }
                d.inv()
            }
            ScalarFunction::Scaled { c, inner } => inner.eval(s)? * *c,
        };
        if value.re.is_finite() && value.im.is_finite() {
            Ok(value)
        } else {
            Err(self.undefined_at(s))
        }
    }

    fn undefined_at(&self, s: c64) -> Error {
        Error::SingularFunction {
            function: self.to_string(),
            s,
        }
    }
}

// Exact for small k: repeated multiplication keeps purely imaginary inputs
// free of the rounding that polar-form powi introduces.
fn pow(s: c64, k: u32) -> c64 {
    let mut acc = c64::new(1.0, 0.0);
    for _ in 0..k {
        acc *= s;
    }
    acc
}

impl fmt::Display for ScalarFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScalarFunction::Constant { c } => write!(f, "{c}"),
            ScalarFunction::Power { k } => write!(f, "s^{k}"),
            ScalarFunction::Exponential { a } => write!(f, "exp({a}*s)"),
            ScalarFunction::ShiftedRational { gamma } => write!(f, "1/(s+{gamma})"),
            ScalarFunction::Scaled { c, inner } => write!(f, "{c}*({inner})"),
        }
    }
}
