//! Dormand–Prince 5(4) with FSAL and the native 4th-order continuous
//! extension, for the pair `(φ, ℓ)` with `φ' = b(t, φ)`, `ℓ' = ∂x b(t, φ)`.
//!
//! Error control (max norm): `φ` against `atol + rtol max(|φ_old|, |φ_new|)`;
//! `ℓ` against `rtol (1 + max(|ℓ_old|, |ℓ_new|))`, since an absolute error in
//! `ℓ` is a relative error in `∂x φ`.

use super::{SolverConfig, SolverStats};
use crate::error::{Error, Result};
use crate::fields::FieldSpec;

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

type State = [f64; 2];

#[inline]
fn axpy(y: &State, h: f64, terms: &[(f64, &State)]) -> State {
    let mut out = *y;
    for (c, k) in terms {
        out[0] += h * c * k[0];
        out[1] += h * c * k[1];
    }
    out
}

struct System<'a> {
    field: &'a FieldSpec,
    sign: f64,
    evaluations: u64,
}

impl System<'_> {
    fn rhs(&mut self, t: f64, y: &State) -> Result<State> {
        self.evaluations += 1;
        let v = [
            self.sign * self.field.eval(t, y[0])?,
            self.sign * self.field.eval_dx(t, y[0])?,
        ];
        if v.iter().all(|c| c.is_finite()) {
            Ok(v)
        } else {
            Err(Error::FieldEval {
                t,
                x: y[0],
                reason: "non-finite right-hand side".into(),
            })
        }
    }
}

pub(crate) struct Trajectory {
    pub phi: Vec<f64>,
    pub log_d: Vec<f64>,
    pub stats: SolverStats,
}

fn scale(cfg: &SolverConfig, a: &State, b: &State) -> State {
    [
        cfg.atol + cfg.rtol * a[0].abs().max(b[0].abs()),
        cfg.rtol * (1.0 + a[1].abs().max(b[1].abs())),
    ]
}

/// Continuous extension on one accepted step, `θ ∈ [0, 1]`.
struct Dense {
    r1: State,
    r2: State,
    r3: State,
    r4: State,
    r5: State,
}

impl Dense {
    fn at(&self, th: f64) -> State {
        let s = 1.0 - th;
        let c = |i: usize| self.r1[i] + th * (self.r2[i] + s * (self.r3[i] + th * (self.r4[i] + s * self.r5[i])));
        [c(0), c(1)]
    }
}

/// Integrates from `times[0]` through the (strictly monotone) lattice,
/// recording `(φ, ℓ)` at every lattice time.
pub(crate) fn integrate(field: &FieldSpec, times: &[f64], x0: f64, cfg: &SolverConfig) -> Result<Trajectory> {
    integrate_signed(field, 1.0, times, x0, cfg)
}

/// As [`integrate`] for the field `sign · b`.
pub(crate) fn integrate_signed(
    field: &FieldSpec,
    sign: f64,
    times: &[f64],
    x0: f64,
    cfg: &SolverConfig,
) -> Result<Trajectory> {
    let m = times.len();
    let mut phi = Vec::with_capacity(m);
    let mut log_d = Vec::with_capacity(m);
    phi.push(x0);
    log_d.push(0.0);
    let mut stats = SolverStats::default();
    if m == 1 {
        return Ok(Trajectory { phi, log_d, stats });
    }
    let dir = (times[1] - times[0]).signum();
    let t_end = times[m - 1];
    let pins = field.pins_origin();
    let mut sys = System {
        field,
        sign,
        evaluations: 0,
    };

    let mut t = times[0];
    let mut y: State = [x0, 0.0];
    let mut next = 1;

    let pin_rest = |t: f64, y: &State, phi: &mut Vec<f64>, log_d: &mut Vec<f64>| -> Result<()> {
        // φ ≡ 0 solves the equation; ∂x φ degenerates to 0 (forward into an
        // attracting origin) or ∞, both limits of the log-derivative.
        let slope = sign * field.eval_dx_extended(t, 0.0)?;
        let l = if slope * dir < 0.0 {
            f64::NEG_INFINITY
        } else {
            f64::INFINITY
        };
        while phi.len() < m {
            phi.push(0.0f64.copysign(y[0]));
            log_d.push(l);
        }
        Ok(())
    };

    if pins && y[0].abs() < cfg.guard {
        pin_rest(t, &y, &mut phi, &mut log_d)?;
        stats.pinned = 1;
        return Ok(Trajectory { phi, log_d, stats });
    }

    let mut k1 = sys.rhs(t, &y)?;
    let mut h = initial_step(&mut sys, cfg, t, &y, &k1, dir, (t_end - t).abs());
    let mut last_rejected = false;
    let mut last_error: Option<Error> = None;

    while next < m {
        if pins && y[0].abs() < cfg.guard {
            pin_rest(t, &y, &mut phi, &mut log_d)?;
            stats.pinned = 1;
            break;
        }
        let remaining = (t_end - t).abs();
        let mut hh = h.min(cfg.max_step);
        // Stretch by up to 1% rather than leave a sliver at the end.
        let finishing = hh >= remaining * 0.99;
        if finishing {
            hh = remaining;
        }
        if hh < cfg.min_step && !finishing {
            return Err(last_error.unwrap_or(Error::StepUnderflow { t, x: x0 }));
        }
        let hs = dir * hh;

        let attempt = (|| -> Result<(State, State, [State; 7])> {
            let k2 = sys.rhs(t + C2 * hs, &axpy(&y, hs, &[(A21, &k1)]))?;
            let k3 = sys.rhs(t + C3 * hs, &axpy(&y, hs, &[(A31, &k1), (A32, &k2)]))?;
            let k4 = sys.rhs(t + C4 * hs, &axpy(&y, hs, &[(A41, &k1), (A42, &k2), (A43, &k3)]))?;
            let k5 = sys.rhs(
                t + C5 * hs,
                &axpy(&y, hs, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]),
            )?;
            let t6 = if finishing { t_end } else { t + hs };
            let k6 = sys.rhs(
                t6,
                &axpy(&y, hs, &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]),
            )?;
            let y_new = axpy(&y, hs, &[(A71, &k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)]);
            let k7 = sys.rhs(t6, &y_new)?;
            let err = axpy(
                &[0.0, 0.0],
                hs,
                &[(E1, &k1), (E3, &k3), (E4, &k4), (E5, &k5), (E6, &k6), (E7, &k7)],
            );
            Ok((y_new, err, [k1, k2, k3, k4, k5, k6, k7]))
        })();

        let (y_new, err, ks) = match attempt {
            Ok(v) => v,
            Err(e) => {
                last_error = Some(e);
                stats.rejections += 1;
                last_rejected = true;
                h = hh * 0.2;
                continue;
            }
        };
        let sc = scale(cfg, &y, &y_new);
        let en = (err[0] / sc[0]).abs().max((err[1] / sc[1]).abs());
        if !en.is_finite() || !y_new.iter().all(|v| v.is_finite()) {
            stats.rejections += 1;
            last_rejected = true;
            h = hh * 0.2;
            continue;
        }
        if en <= 1.0 {
            let [k1o, _, k3, k4, k5, k6, k7] = ks;
            let ydiff = [y_new[0] - y[0], y_new[1] - y[1]];
            let r3 = [hs * k1o[0] - ydiff[0], hs * k1o[1] - ydiff[1]];
            let dense = Dense {
                r1: y,
                r2: ydiff,
                r3,
                r4: [ydiff[0] - hs * k7[0] - r3[0], ydiff[1] - hs * k7[1] - r3[1]],
                r5: axpy(
                    &[0.0, 0.0],
                    hs,
                    &[(D1, &k1o), (D3, &k3), (D4, &k4), (D5, &k5), (D6, &k6), (D7, &k7)],
                ),
            };
            let t_new = if finishing { t_end } else { t + hs };
            while next < m && (times[next] - t_new) * dir <= 0.0 {
                let v = if times[next] == t_new {
                    y_new
                } else {
                    dense.at((times[next] - t) / (t_new - t))
                };
                phi.push(v[0]);
                log_d.push(v[1]);
                next += 1;
            }
            stats.steps += 1;
            stats.min_step = stats.min_step.min(hh);
            stats.max_step = stats.max_step.max(hh);
            t = t_new;
            y = y_new;
            k1 = k7;
            let mut factor = (0.9 * en.powf(-0.2)).clamp(0.2, 10.0);
            if last_rejected {
                factor = factor.min(1.0);
            }
            last_rejected = false;
            last_error = None;
            h = hh * factor;
        } else {
            stats.rejections += 1;
            last_rejected = true;
            h = hh * (0.9 * en.powf(-0.2)).max(0.2);
        }
    }
    stats.evaluations = sys.evaluations;
    Ok(Trajectory { phi, log_d, stats })
}

/// Starting step from the local Lipschitz estimate (Hairer–Nørsett–Wanner).
fn initial_step(sys: &mut System<'_>, cfg: &SolverConfig, t: f64, y: &State, f0: &State, dir: f64, span: f64) -> f64 {
    let sc = scale(cfg, y, y);
    let d0 = (y[0] / sc[0]).abs().max((y[1] / sc[1]).abs());
    let d1 = (f0[0] / sc[0]).abs().max((f0[1] / sc[1]).abs());
    let mut h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
    h0 = h0.min(cfg.max_step).min(span).max(cfg.min_step);
    let y1 = axpy(y, dir * h0, &[(1.0, f0)]);
    let Ok(f1) = sys.rhs(t + dir * h0, &y1) else {
        return h0;
    };
    let d2 = ((f1[0] - f0[0]) / sc[0]).abs().max(((f1[1] - f0[1]) / sc[1]).abs()) / h0;
    let dm = d1.max(d2);
    let h1 = if dm <= 1e-15 {
        (h0 * 1e-3).max(1e-6)
    } else {
        (0.01 / dm).powf(0.2)
    };
    (100.0 * h0).min(h1).min(cfg.max_step).max(cfg.min_step)
}
