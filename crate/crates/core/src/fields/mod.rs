//! Vector fields `b(t, x) = a(t) B(x)` with exact spatial derivatives, the
//! string registry, and the field-level constructions (truncation of the
//! derivative, mollification) and checks (Zygmund, growth, increments).

mod checks;
mod construct;
mod norms;
pub(crate) mod registry;

pub use checks::{growth_bound_check, reimann_ratio_check, zygmund_seminorm};
pub use construct::{mollifier, mollify, truncate};
pub use norms::FieldNorms;
pub use registry::CATALOG;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quad::{adaptive_simpson, gauss_kronrod_split};
use crate::sampled::{SampledFunction, UniformGrid};

const TRUNCATION_TOL: f64 = 1e-10;
const MOLLIFY_TOL: f64 = 1e-12;

/// `∫_0^x clamp(s (log|y| + 1), -k, k) dy` in closed form. The slope is
/// clamped on `|y| < r` and on `|y| > R`, with `log r + 1 = -k/|s|` and
/// `log R + 1 = k/|s|`; the integral is odd in `x`.
fn truncated_xlog(s: f64, k: f64, x: f64) -> f64 {
    if s == 0.0 || x == 0.0 {
        return 0.0;
    }
    let (sg, y) = (s.signum(), x.abs());
    let r = (-k / s.abs() - 1.0).exp();
    let big = (k / s.abs() - 1.0).exp();
    let xlx = |m: f64| if m > 0.0 { m * m.ln() } else { 0.0 };
    let m = y.min(r);
    let mut v = s * xlx(y) - sg * k * m - s * xlx(m);
    if y > big {
        v += sg * k * (y - big) - s * (xlx(y) - xlx(big));
    }
    x.signum() * v
}

/// Samples of a field and of its derivative on one grid, linearly
/// interpolated between nodes. Evaluation is defined on `[x_0, x_{n-1}]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampledField {
    pub grid: UniformGrid,
    pub values: Vec<f64>,
    pub derivative: Vec<f64>,
}

impl SampledField {
    pub fn new(grid: UniformGrid, values: Vec<f64>, derivative: Vec<f64>) -> Result<Self> {
        SampledFunction::new(grid, values.clone())?;
        SampledFunction::new(grid, derivative.clone())?;
        Ok(Self {
            grid,
            values,
            derivative,
        })
    }

    pub fn from_samples(values: &SampledFunction, derivative: &SampledFunction) -> Result<Self> {
        if values.grid() != derivative.grid() {
            return Err(Error::Mismatch("value and derivative grids differ".into()));
        }
        Self::new(*values.grid(), values.values().to_vec(), derivative.values().to_vec())
    }

    fn range(&self) -> (f64, f64) {
        (self.grid.node(0), self.grid.node(self.grid.len() - 1))
    }

    fn interpolate(&self, data: &[f64], x: f64) -> Option<f64> {
        let (lo, hi) = self.range();
        if !(x >= lo && x <= hi) {
            return None;
        }
        let s = (x - lo) / self.grid.spacing();
        let k = (s.floor() as usize).min(data.len() - 2);
        let w = s - k as f64;
        Some(data[k] * (1.0 - w) + data[k + 1] * w)
    }
}

/// Spatial profile `B`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Spatial {
    /// `sigma x log|x|`, with value 0 at the origin.
    XLogAbs { sigma: f64 },
    /// `a0 + a1 x`.
    Affine { a0: f64, a1: f64 },
    /// `amp sin(freq x)`.
    Sine { amp: f64, freq: f64 },
    /// `x log (x^2 + c^2)^{p/2}`; equals `p x log|x|` when `c = 0`.
    PowerLog { p: f64, c: f64 },
    Sampled(SampledField),
    /// `b(t,0) + ∫_0^x clamp(∂x b(t,y), -k, k) dy`.
    Truncated { base: Box<Spatial>, k: f64 },
    /// Convolution with the bump of radius `eps`.
    Mollified { base: Box<Spatial>, eps: f64 },
}

impl Spatial {
    /// Closed domain on which evaluation is defined.
    pub fn domain(&self) -> (f64, f64) {
        match self {
            Spatial::Sampled(s) => s.range(),
            Spatial::Truncated { base, .. } => base.domain(),
            Spatial::Mollified { base, eps } => {
                let (lo, hi) = base.domain();
                (lo + eps, hi - eps)
            }
            _ => (f64::NEG_INFINITY, f64::INFINITY),
        }
    }

    /// Points where the derivative is singular.
    pub fn singular_points(&self) -> Vec<f64> {
        match self {
            Spatial::XLogAbs { sigma } if *sigma != 0.0 => vec![0.0],
            Spatial::PowerLog { p, c } if *c == 0.0 && *p != 0.0 => vec![0.0],
            _ => Vec::new(),
        }
    }

    fn in_domain(&self, x: f64) -> bool {
        let (lo, hi) = self.domain();
        x >= lo && x <= hi
    }

    /// Value of `a B(x)` (for truncations, of the truncated field of
    /// amplitude `a`, which is not `a` times a fixed profile).
    fn value(&self, a: f64, x: f64) -> Option<f64> {
        if !self.in_domain(x) {
            return None;
        }
        Some(match self {
            Spatial::XLogAbs { sigma } => {
                if x == 0.0 {
                    0.0
                } else {
                    a * sigma * x * x.abs().ln()
                }
            }
            Spatial::Affine { a0, a1 } => a * (a0 + a1 * x),
            Spatial::Sine { amp, freq } => a * amp * (freq * x).sin(),
            Spatial::PowerLog { p, c } => {
                let r2 = x * x + c * c;
                if r2 == 0.0 {
                    0.0
                } else {
                    a * 0.5 * p * x * r2.ln()
                }
            }
            Spatial::Sampled(s) => a * s.interpolate(&s.values, x)?,
            Spatial::Truncated { base, k } => {
                if let Spatial::XLogAbs { sigma } = **base {
                    return Some(truncated_xlog(a * sigma, *k, x));
                }
                let b0 = base.value(a, 0.0)?;
                let clamp = |y: f64| base.slope_extended(a, y).unwrap_or(f64::NAN).clamp(-k, *k);
                b0 + adaptive_simpson(&clamp, 0.0, x, TRUNCATION_TOL)
            }
            Spatial::Mollified { base, eps } => {
                let rho = mollifier();
                if let Spatial::XLogAbs { sigma } = **base {
                    if let Some((v, _)) = rho.xlog_series(*eps, x) {
                        return Some(a * sigma * v);
                    }
                }
                let f = |y: f64| base.value(a, y).unwrap_or(f64::NAN) * rho.scaled(*eps, x - y);
                gauss_kronrod_split(&f, x - eps, x + eps, &base.singular_points(), MOLLIFY_TOL)
            }
        })
    }

    /// Derivative of [`Self::value`], with `±inf` at singular points.
    fn slope_extended(&self, a: f64, x: f64) -> Option<f64> {
        if !self.in_domain(x) {
            return None;
        }
        Some(match self {
            Spatial::XLogAbs { sigma } => {
                let s = a * sigma;
                if s == 0.0 {
                    0.0
                } else {
                    s * (x.abs().ln() + 1.0)
                }
            }
            Spatial::Affine { a1, .. } => a * a1,
            Spatial::Sine { amp, freq } => a * amp * freq * (freq * x).cos(),
            Spatial::PowerLog { p, c } => {
                let (s, r2) = (a * p, x * x + c * c);
                if s == 0.0 {
                    0.0
                } else if r2 == 0.0 {
                    -s.signum() * f64::INFINITY
                } else {
                    s * (0.5 * r2.ln() + x * x / r2)
                }
            }
            Spatial::Sampled(s) => a * s.interpolate(&s.derivative, x)?,
            Spatial::Truncated { base, k } => base.slope_extended(a, x)?.clamp(-k, *k),
            Spatial::Mollified { base, eps } => {
                let rho = mollifier();
                if let Spatial::XLogAbs { sigma } = **base {
                    if let Some((_, d)) = rho.xlog_series(*eps, x) {
                        return Some(a * sigma * d);
                    }
                }
                let f = |y: f64| base.slope_extended(a, y).unwrap_or(f64::NAN) * rho.scaled(*eps, x - y);
                gauss_kronrod_split(&f, x - eps, x + eps, &base.singular_points(), MOLLIFY_TOL)
            }
        })
    }

    /// `sup |B'|` when finite.
    pub fn lipschitz(&self) -> Option<f64> {
        match self {
            Spatial::Affine { a1, .. } => Some(a1.abs()),
            Spatial::Sine { amp, freq } => Some((amp * freq).abs()),
            Spatial::XLogAbs { sigma } if *sigma == 0.0 => Some(0.0),
            Spatial::PowerLog { p, .. } if *p == 0.0 => Some(0.0),
            Spatial::XLogAbs { .. } | Spatial::PowerLog { .. } => None,
            Spatial::Sampled(s) => Some(s.derivative.iter().fold(0.0, |m, v| m.max(v.abs()))),
            Spatial::Truncated { base, k } => Some(base.lipschitz().map_or(*k, |l| l.min(*k))),
            Spatial::Mollified { base, .. } => base.lipschitz(),
        }
    }

    fn validate(&self) -> Result<()> {
        let finite = |name: &str, v: f64| {
            if v.is_finite() {
                Ok(())
            } else {
                Err(Error::param(name, format!("must be finite, got {v}")))
            }
        };
        match self {
            Spatial::XLogAbs { sigma } => finite("sigma", *sigma),
            Spatial::Affine { a0, a1 } => finite("a0", *a0).and(finite("a1", *a1)),
            Spatial::Sine { amp, freq } => finite("amp", *amp).and(finite("freq", *freq)),
            Spatial::PowerLog { p, c } => finite("p", *p).and(finite("c", *c)),
            Spatial::Sampled(_) => Ok(()),
            Spatial::Truncated { base, k } => {
                if !(*k > 0.0) || !k.is_finite() {
                    return Err(Error::param("k", format!("need 0 < k < inf, got {k}")));
                }
                base.validate()
            }
            Spatial::Mollified { base, eps } => {
                if !(*eps > 0.0) || !eps.is_finite() {
                    return Err(Error::param("eps", format!("need 0 < eps < inf, got {eps}")));
                }
                base.validate()
            }
        }
    }
}

/// Time profile `a(t) >= 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum TimeProfile {
    #[default]
    Constant,
    /// `values[m]` on `[breaks[m-1], breaks[m])`, with `breaks` the interior
    /// switch times; `values.len() == breaks.len() + 1`.
    Piecewise { breaks: Vec<f64>, values: Vec<f64> },
    /// `exp(rate t)`.
    Exponential { rate: f64 },
}

impl TimeProfile {
    pub fn eval(&self, t: f64) -> f64 {
        match self {
            TimeProfile::Constant => 1.0,
            TimeProfile::Piecewise { breaks, values } => values[breaks.partition_point(|&b| b <= t)],
            TimeProfile::Exponential { rate } => (rate * t).exp(),
        }
    }

    /// `∫_0^t a`.
    pub fn integral(&self, t: f64) -> f64 {
        match self {
            TimeProfile::Constant => t,
            TimeProfile::Piecewise { breaks, values } => {
                let mut acc = 0.0;
                let mut left = 0.0;
                for (m, &v) in values.iter().enumerate() {
                    let right = breaks.get(m).copied().unwrap_or(f64::INFINITY).min(t);
                    if right > left {
                        acc += v * (right - left);
                        left = right;
                    }
                    if right >= t {
                        break;
                    }
                }
                acc
            }
            TimeProfile::Exponential { rate } => {
                if *rate == 0.0 {
                    t
                } else {
                    (rate * t).exp_m1() / rate
                }
            }
        }
    }

    pub fn is_constant(&self) -> bool {
        matches!(self, TimeProfile::Constant)
    }

    fn validate(&self) -> Result<()> {
        match self {
            TimeProfile::Constant => Ok(()),
            TimeProfile::Exponential { rate } => {
                if rate.is_finite() {
                    Ok(())
                } else {
                    Err(Error::param("rate", "must be finite"))
                }
            }
            TimeProfile::Piecewise { breaks, values } => {
                if values.len() != breaks.len() + 1 {
                    return Err(Error::param(
                        "values",
                        format!("need {} values for {} breaks", breaks.len() + 1, breaks.len()),
                    ));
                }
                if breaks.iter().any(|b| !(*b > 0.0) || !b.is_finite())
                    || breaks.windows(2).any(|w| w[0] >= w[1])
                {
                    return Err(Error::param("breaks", "need increasing positive switch times"));
                }
                if values.iter().any(|v| !(*v >= 0.0) || !v.is_finite()) {
                    return Err(Error::param("values", "profile values must be finite and >= 0"));
                }
                Ok(())
            }
        }
    }
}

/// `b(t, x) = a(t) B(x)`; immutable once built.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldSpec {
    spatial: Spatial,
    profile: TimeProfile,
}

impl FieldSpec {
    pub fn new(spatial: Spatial, profile: TimeProfile) -> Result<Self> {
        spatial.validate()?;
        profile.validate()?;
        Ok(Self { spatial, profile })
    }

    /// Time-independent field; panics on non-finite parameters.
    pub fn autonomous(spatial: Spatial) -> Self {
        Self::new(spatial, TimeProfile::Constant).expect("valid autonomous field")
    }

    pub fn spatial(&self) -> &Spatial {
        &self.spatial
    }

    pub fn profile(&self) -> &TimeProfile {
        &self.profile
    }

    pub fn is_autonomous(&self) -> bool {
        self.profile.is_constant()
    }

    pub fn with_profile(&self, profile: TimeProfile) -> Result<Self> {
        Self::new(self.spatial.clone(), profile)
    }

    /// Canonical registry id; parses back to an equal field (sampled fields
    /// excepted).
    pub fn id(&self) -> String {
        registry::format_id(self)
    }

    /// Whether `φ ≡ 0` is an invariant trajectory at which `∂x b` is
    /// singular, so integrators must pin trajectories that reach it.
    pub fn pins_origin(&self) -> bool {
        self.spatial.singular_points().contains(&0.0)
    }

    fn check_args(&self, t: f64, x: f64) -> Result<()> {
        if !(t >= 0.0) || !t.is_finite() || !x.is_finite() {
            return Err(Error::FieldEval {
                t,
                x,
                reason: "need t >= 0 and finite arguments".into(),
            });
        }
        Ok(())
    }

    fn outside(&self, t: f64, x: f64) -> Error {
        let (lo, hi) = self.spatial.domain();
        Error::FieldEval {
            t,
            x,
            reason: format!("outside the field's domain [{lo}, {hi}]"),
        }
    }

    pub fn eval(&self, t: f64, x: f64) -> Result<f64> {
        self.check_args(t, x)?;
        let v = self
            .spatial
            .value(self.profile.eval(t), x)
            .ok_or_else(|| self.outside(t, x))?;
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::FieldEval {
                t,
                x,
                reason: "non-finite value".into(),
            })
        }
    }

    pub fn eval_dx(&self, t: f64, x: f64) -> Result<f64> {
        self.check_args(t, x)?;
        let v = self
            .spatial
            .slope_extended(self.profile.eval(t), x)
            .ok_or_else(|| self.outside(t, x))?;
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::FieldEval {
                t,
                x,
                reason: "derivative is singular here".into(),
            })
        }
    }

    /// Like [`Self::eval_dx`] but returns `±inf` at singular points.
    pub fn eval_dx_extended(&self, t: f64, x: f64) -> Result<f64> {
        self.check_args(t, x)?;
        self.spatial
            .slope_extended(self.profile.eval(t), x)
            .filter(|v| !v.is_nan())
            .ok_or_else(|| self.outside(t, x))
    }

    /// `∂x b(t, ·)` sampled on the grid.
    pub fn sample_dx(&self, t: f64, grid: &UniformGrid) -> Result<SampledFunction> {
        SampledFunction::try_from_fn(*grid, |x| self.eval_dx(t, x))
    }

    pub fn sample(&self, t: f64, grid: &UniformGrid) -> Result<SampledFunction> {
        SampledFunction::try_from_fn(*grid, |x| self.eval(t, x))
    }
}

impl std::fmt::Display for FieldSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.id())
    }
}

impl std::str::FromStr for FieldSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        registry::parse_id(s)
    }
}
