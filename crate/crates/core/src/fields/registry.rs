//! String ids: `family:key=value,...` optionally followed by `@`-modifiers,
//! e.g. `xlogabs:sigma=1@trunc:k=16` or `sine:amp=1,freq=1@exp:rate=0.5`.
//! Modifiers apply left to right. Profile values in `piecewise` are
//! separated by `/`.

use std::collections::BTreeMap;

use super::{FieldSpec, Spatial, TimeProfile};
use crate::error::{Error, Result};

/// Registry heads and modifiers with their defaults, for listings.
pub const CATALOG: &[(&str, &str)] = &[
    ("xlogabs:sigma=1", "sigma x log|x|; derivative in BMO, not Lipschitz"),
    ("affine:a0=0,a1=0", "a0 + a1 x"),
    ("const:c=1", "the constant c"),
    ("sine:amp=1,freq=1", "amp sin(freq x)"),
    ("powerlog:p=1,c=1", "x log (x^2 + c^2)^(p/2); Lipschitz for c > 0"),
    ("ID@trunc:k=K", "derivative clamped to [-K, K], value kept at 0"),
    ("ID@mollify:eps=E", "convolution with the smooth bump of radius E"),
    ("ID@exp:rate=R", "time amplitude exp(R t)"),
    ("ID@piecewise:breaks=T1/T2,values=V0/V1/V2", "piecewise-constant time amplitude"),
];

pub(crate) struct Params<'a> {
    pub(crate) head: &'a str,
    map: BTreeMap<&'a str, &'a str>,
}

impl<'a> Params<'a> {
    pub(crate) fn parse(token: &'a str) -> Result<Self> {
        let (head, rest) = token.split_once(':').unwrap_or((token, ""));
        let mut map = BTreeMap::new();
        for kv in rest.split(',').filter(|s| !s.is_empty()) {
            let (k, v) = kv
                .split_once('=')
                .ok_or_else(|| Error::param(kv, format!("expected key=value in `{token}`")))?;
            if map.insert(k.trim(), v.trim()).is_some() {
                return Err(Error::param(k, "given twice"));
            }
        }
        Ok(Self {
            head: head.trim(),
            map,
        })
    }

    pub(crate) fn take(&mut self, key: &str, default: Option<f64>) -> Result<f64> {
        match self.map.remove(key) {
            Some(v) => v
                .parse::<f64>()
                .map_err(|_| Error::param(key, format!("not a number: `{v}`"))),
            None => default.ok_or_else(|| Error::param(key, format!("required by `{}`", self.head))),
        }
    }

    pub(crate) fn take_list(&mut self, key: &str) -> Result<Vec<f64>> {
        let raw = self
            .map
            .remove(key)
            .ok_or_else(|| Error::param(key, format!("required by `{}`", self.head)))?;
        if raw.is_empty() {
            return Ok(Vec::new());
        }
        raw.split('/')
            .map(|v| {
                v.parse::<f64>()
                    .map_err(|_| Error::param(key, format!("not a number: `{v}`")))
            })
            .collect()
    }

    pub(crate) fn finish(self) -> Result<()> {
        match self.map.keys().next() {
            Some(k) => Err(Error::param(k, format!("unknown key for `{}`", self.head))),
            None => Ok(()),
        }
    }
}

pub(super) fn parse_id(id: &str) -> Result<FieldSpec> {
    let mut tokens = id.split('@');
    let first = tokens.next().unwrap_or_default();
    let mut p = Params::parse(first)?;
    let mut spatial = match p.head {
        "xlogabs" => Spatial::XLogAbs {
            sigma: p.take("sigma", Some(1.0))?,
        },
        "affine" => Spatial::Affine {
            a0: p.take("a0", Some(0.0))?,
            a1: p.take("a1", Some(0.0))?,
        },
        "const" => Spatial::Affine {
            a0: p.take("c", Some(1.0))?,
            a1: 0.0,
        },
        "sine" => Spatial::Sine {
            amp: p.take("amp", Some(1.0))?,
            freq: p.take("freq", Some(1.0))?,
        },
        "powerlog" => Spatial::PowerLog {
            p: p.take("p", Some(1.0))?,
            c: p.take("c", Some(1.0))?,
        },
        _ => return Err(Error::UnknownField(id.to_string())),
    };
    p.finish()?;
    let mut profile = TimeProfile::Constant;
    for token in tokens {
        let mut m = Params::parse(token)?;
        match m.head {
            "trunc" => {
                spatial = Spatial::Truncated {
                    base: Box::new(spatial),
                    k: m.take("k", None)?,
                }
            }
            "mollify" => {
                spatial = Spatial::Mollified {
                    base: Box::new(spatial),
                    eps: m.take("eps", None)?,
                }
            }
            "exp" => {
                profile = TimeProfile::Exponential {
                    rate: m.take("rate", None)?,
                }
            }
            "piecewise" => {
                profile = TimeProfile::Piecewise {
                    breaks: m.take_list("breaks")?,
                    values: m.take_list("values")?,
                }
            }
            "const" => profile = TimeProfile::Constant,
            _ => return Err(Error::UnknownField(id.to_string())),
        }
        m.finish()?;
    }
    FieldSpec::new(spatial, profile)
}

fn join(v: &[f64]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join("/")
}

fn spatial_id(s: &Spatial) -> String {
    match s {
        Spatial::XLogAbs { sigma } => format!("xlogabs:sigma={sigma}"),
        Spatial::Affine { a0, a1 } => format!("affine:a0={a0},a1={a1}"),
        Spatial::Sine { amp, freq } => format!("sine:amp={amp},freq={freq}"),
        Spatial::PowerLog { p, c } => format!("powerlog:p={p},c={c}"),
        Spatial::Sampled(f) => format!(
            "sampled:L={},n={}",
            f.grid.half_width(),
            f.grid.len()
        ),
        Spatial::Truncated { base, k } => format!("{}@trunc:k={k}", spatial_id(base)),
        Spatial::Mollified { base, eps } => format!("{}@mollify:eps={eps}", spatial_id(base)),
    }
}

pub(super) fn format_id(f: &FieldSpec) -> String {
    let base = spatial_id(&f.spatial);
    match &f.profile {
        TimeProfile::Constant => base,
        TimeProfile::Exponential { rate } => format!("{base}@exp:rate={rate}"),
        TimeProfile::Piecewise { breaks, values } => {
            format!("{base}@piecewise:breaks={},values={}", join(breaks), join(values))
        }
    }
}
