//! Closed-form scalar functions of `x`, addressed by ids in the same
//! `head:key=value` syntax as fields: `const:c=5`, `x`, `sin:freq=1`,
//! `logabs`, `abs:a=0.5`, `sign`, `sawtooth:period=1`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fields::registry::Params;
use crate::sampled::{SampledFunction, UniformGrid};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Expr {
    Const { c: f64 },
    Identity,
    Sin { freq: f64 },
    LogAbs,
    /// `|x|^a`.
    Abs { a: f64 },
    Sign,
    /// `x/p - round(x/p)`, bounded with unit jumps.
    Sawtooth { period: f64 },
}

impl Expr {
    pub fn eval(&self, x: f64) -> Result<f64> {
        let v = match *self {
            Expr::Const { c } => c,
            Expr::Identity => x,
            Expr::Sin { freq } => (freq * x).sin(),
            Expr::LogAbs => x.abs().ln(),
            Expr::Abs { a } => x.abs().powf(a),
            Expr::Sign => {
                if x == 0.0 {
                    0.0
                } else {
                    x.signum()
                }
            }
            Expr::Sawtooth { period } => {
                let u = x / period;
                u - u.round()
            }
        };
        if v.is_finite() && x.is_finite() {
            Ok(v)
        } else {
            Err(Error::FieldEval {
                t: 0.0,
                x,
                reason: format!("`{self}` is not finite here"),
            })
        }
    }

    pub fn sample(&self, grid: &UniformGrid) -> Result<SampledFunction> {
        SampledFunction::try_from_fn(*grid, |x| self.eval(x))
    }

    /// Strictly increasing on the whole line.
    pub fn is_increasing(&self) -> bool {
        matches!(self, Expr::Identity)
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Const { c } => write!(f, "const:c={c}"),
            Expr::Identity => write!(f, "x"),
            Expr::Sin { freq } => write!(f, "sin:freq={freq}"),
            Expr::LogAbs => write!(f, "logabs"),
            Expr::Abs { a } => write!(f, "abs:a={a}"),
            Expr::Sign => write!(f, "sign"),
            Expr::Sawtooth { period } => write!(f, "sawtooth:period={period}"),
        }
    }
}

impl FromStr for Expr {
    type Err = Error;

    fn from_str(id: &str) -> Result<Self> {
        let mut p = Params::parse(id)?;
        let e = match p.head {
            "const" => Expr::Const {
                c: p.take("c", Some(1.0))?,
            },
            "x" => Expr::Identity,
            "sin" => Expr::Sin {
                freq: p.take("freq", Some(1.0))?,
            },
            "logabs" => Expr::LogAbs,
            "abs" => Expr::Abs {
                a: p.take("a", Some(1.0))?,
            },
            "sign" => Expr::Sign,
            "sawtooth" => {
                let period = p.take("period", Some(1.0))?;
                if !(period > 0.0 && period.is_finite()) {
                    return Err(Error::param("period", "must be positive"));
                }
                Expr::Sawtooth { period }
            }
            _ => return Err(Error::UnknownExpression(id.to_string())),
        };
        p.finish()?;
        Ok(e)
    }
}
