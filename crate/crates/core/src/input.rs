//! Input signals on `[0, 1]`.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InputFunction {
    /// `f(y) = y`
    Identity,
    /// `f(x) = x + sin(x)`
    XPlusSin,
    /// `f(x) = v`
    Const(f64),
}

impl InputFunction {
    #[inline]
    pub fn eval(&self, x: f64) -> f64 {
        match *self {
            InputFunction::Identity => x,
            InputFunction::XPlusSin => x + x.sin(),
            InputFunction::Const(v) => v,
        }
    }
}

impl fmt::Display for InputFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InputFunction::Identity => write!(f, "y"),
            InputFunction::XPlusSin => write!(f, "x_plus_sin"),
            InputFunction::Const(v) => write!(f, "const:{v}"),
        }
    }
}

impl FromStr for InputFunction {
    type Err = Error;

    /// `y`, `x_plus_sin` or `const:<v>`.
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "y" => Ok(InputFunction::Identity),
            "x_plus_sin" => Ok(InputFunction::XPlusSin),
            other => {
                let v = other
                    .strip_prefix("const:")
                    .ok_or_else(|| Error::parse("input", format!("unknown input function `{other}`")))?;
                let v = v
                    .trim()
                    .parse::<f64>()
                    .map_err(|e| Error::parse("input", format!("`{v}`: {e}")))?;
                if !v.is_finite() {
                    return Err(Error::parse("input", "constant must be finite"));
                }
                Ok(InputFunction::Const(v))
            }
        }
    }
}
