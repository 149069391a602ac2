//! John–Nirenberg tails, reverse Hölder, and the exp/log bridges between
//! weights and BMO.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::rangeq::{RankTree, WindowMax};
use super::{ainfty_constant, ap_constant, bmo_norm, require_positive, ConstantsLedger, WeightEstimate};
use crate::error::{Error, Result};
use crate::report::{BoundReport, IntervalSpan};
use crate::sampled::{FamilyStrategy, IntervalFamily, SampledFunction};

/// Superlevel-set measures of `|f - f_I|` with a fitted exponential rate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JnTail {
    pub interval: IntervalSpan,
    pub mean: f64,
    pub points: Vec<(f64, f64)>,
    /// `-slope` of the least-squares line through `(lambda, log measure)`
    /// over the nonzero part of the tail; `None` with fewer than two points.
    pub rate: Option<f64>,
    pub intercept: Option<f64>,
}

pub fn jn_tail(f: &SampledFunction, interval: (usize, usize), lambdas: &[f64]) -> Result<JnTail> {
    if lambdas.is_empty() {
        return Err(Error::param("lambdas", "empty list"));
    }
    if lambdas.iter().any(|&l| !(l > 0.0)) || lambdas.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::param("lambdas", "need positive, strictly increasing values"));
    }
    let (i, j) = interval;
    let mean = f.interval_mean(i, j)?;
    let h = f.grid().spacing();
    let devs: Vec<f64> = f.values()[i..j].iter().map(|v| (v - mean).abs()).collect();
    let points: Vec<(f64, f64)> = lambdas
        .iter()
        .map(|&lam| (lam, h * devs.iter().filter(|&&d| d > lam).count() as f64))
        .collect();

    let tail: Vec<(f64, f64)> = points
        .iter()
        .filter(|p| p.1 > 0.0)
        .map(|&(l, m)| (l, m.ln()))
        .collect();
    let (rate, intercept) = if tail.len() >= 2 {
        let k = tail.len() as f64;
        let mx = tail.iter().map(|p| p.0).sum::<f64>() / k;
        let my = tail.iter().map(|p| p.1).sum::<f64>() / k;
        let sxy: f64 = tail.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let sxx: f64 = tail.iter().map(|p| (p.0 - mx).powi(2)).sum();
        let slope = sxy / sxx;
        (Some(-slope), Some(my - slope * mx))
    } else {
        (None, None)
    };
    Ok(JnTail {
        interval: IntervalSpan::on(f.grid(), interval),
        mean,
        points,
        rate,
        intercept,
    })
}

/// Members of `family` strictly inside `(i, j)`.
#[cfg(test)]
fn sub_intervals(family: &IntervalFamily, (i, j): (usize, usize)) -> impl Iterator<Item = (usize, usize)> + '_ {
    (i..j).flat_map(move |a| {
        family
            .intervals_from(a)
            .take_while(move |&(_, b)| b <= j)
            .filter(move |&e| e != (i, j))
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct SetRatio {
    ratio: f64,
    outer: (usize, usize),
    inner: (usize, usize),
    quantile: f64,
}

fn pick(a: SetRatio, b: SetRatio) -> SetRatio {
    if b.ratio > a.ratio || (b.ratio == a.ratio && (b.outer, b.inner) < (a.outer, a.inner)) {
        b
    } else {
        a
    }
}

const QUANTILES: [f64; 3] = [0.5, 0.75, 0.9];

/// `max (w(E)/w(I)) / (2 (|E|/|I|)^eps)` over members `I`, with `E` ranging
/// over members strictly inside `I` and the quantile superlevel sets of `w`
/// on `I`. Inner members are found per length by a windowed maximum of the
/// window sums, quantile sets by order statistics.
fn set_ratio_sweep(w: &SampledFunction, family: &IntervalFamily, eps: f64) -> Result<SetRatio> {
    let n = w.len();
    let ratio = |we: f64, len_e: f64, (i, j): (usize, usize)| {
        (we / w.sum_unchecked(i, j)) / (2.0 * (len_e / (j - i) as f64).powf(eps))
    };
    let mut best: Vec<SetRatio> = family
        .iter()
        .map(|outer| SetRatio {
            ratio: f64::NEG_INFINITY,
            outer,
            inner: outer,
            quantile: f64::NAN,
        })
        .collect();
    let lengths: Vec<usize> = match family.strategy() {
        FamilyStrategy::Exhaustive => (family.min_length()..=n).collect(),
        _ => family.dyadic_lengths(),
    };
    let step_for = |len: usize| if family.strategy() == FamilyStrategy::Dyadic { len } else { 1 };
    for &len in &lengths {
        let step = step_for(len);
        let starts: Vec<usize> = (0..=n - len).step_by(step).collect();
        let table = WindowMax::new(starts.iter().map(|&a| w.sum_unchecked(a, a + len)).collect());
        best.par_iter_mut().for_each(|b| {
            let (i, j) = b.outer;
            if j - i <= len {
                return;
            }
            let (lo, hi) = (i.div_ceil(step), (j - len) / step);
            if lo > hi {
                return;
            }
            let (s, p) = table.query(lo, hi);
            let a = starts[p];
            *b = pick(
                *b,
                SetRatio {
                    ratio: ratio(s, len as f64, (i, j)),
                    outer: (i, j),
                    inner: (a, a + len),
                    quantile: f64::NAN,
                },
            );
        });
    }
    let tree = RankTree::new(w.values());
    best.par_iter_mut().for_each(|b| {
        let (i, j) = b.outer;
        let len = j - i;
        for q in QUANTILES {
            let rank = ((q * len as f64).ceil() as usize).clamp(1, len);
            let (_, count, we) = tree.above_kth(i, j, rank as u32);
            if count == 0 {
                continue;
            }
            *b = pick(
                *b,
                SetRatio {
                    ratio: ratio(we, count as f64, (i, j)),
                    outer: (i, j),
                    inner: (0, 0),
                    quantile: q,
                },
            );
        }
    });
    best.into_par_iter().reduce_with(pick).ok_or(Error::EmptyFamily)
}

/// Both halves of the quantitative reverse Hölder inequality.
///
/// (a) `max_I (mean_I w^r)^{1/r} / (2 mean_I w)` with `r = 1 + 1/(tau [w])`;
/// (b) `max (w(E)/w(I)) / (2 (|E|/|I|)^eps)`, `eps = 1/(1 + tau [w])`, over
/// family members `E` inside `I` and the superlevel sets of `w` on `I` above
/// its empirical 50/75/90% quantiles. Passes iff both maxima are `<= 1`.
pub fn reverse_holder_check(w: &SampledFunction, family: &IntervalFamily, ledger: &ConstantsLedger) -> Result<BoundReport> {
    require_positive(w)?;
    let ainf = ainfty_constant(w, family)?;
    let tau_a = ledger.tau * ainf.value;
    let r = 1.0 + 1.0 / tau_a;
    let eps = 1.0 / (1.0 + tau_a);

    let wr = w.map(|v| v.powf(r))?;
    let holder = super::sweep(w, family, |i, j| {
        wr.mean_unchecked(i, j).powf(1.0 / r) / (2.0 * w.mean_unchecked(i, j))
    })?;

    let sets = set_ratio_sweep(w, family, eps)?;
    let value = holder.value.max(sets.ratio);
    let mut report = BoundReport::compare("reverse_holder", value, 1.0, 0.0, 0.0, ledger)
        .with_provenance("reverse Hölder sweep: power means over the family, subinterval and quantile sets")
        .with_grid(w.grid().descriptor())
        .with_family(family.descriptor())
        .with_argmax(holder.argmax)
        .detail("ainfty", ainf.value)
        .detail("r_w", r)
        .detail("eps_w", eps)
        .detail("holder_max", holder.value)
        .detail("set_ratio_max", sets.ratio)
        .bind("I_i", sets.outer.0 as f64)
        .bind("I_j", sets.outer.1 as f64);
    if sets.quantile.is_nan() {
        report = report.bind("E_i", sets.inner.0 as f64).bind("E_j", sets.inner.1 as f64);
    } else {
        report = report.bind("E_quantile", sets.quantile);
    }
    Ok(report)
}

/// `[e^{s f}]_{A_2}` over the family (the weight is normalized by its
/// maximum before exponentiation; `A_2` is scale invariant).
pub fn exp_a2_value(f: &SampledFunction, s: f64, family: &IntervalFamily) -> Result<WeightEstimate> {
    let top = f
        .values()
        .iter()
        .map(|&v| s * v)
        .fold(f64::NEG_INFINITY, f64::max);
    let w = f.map(|v| (s * v - top).exp())?;
    ap_constant(&w, 2.0, family)
}

/// Largest `[e^{s f}]_{A_2}` for `s_count` evenly spaced `|s| <= alpha/||f||`,
/// compared against `beta^2`.
pub fn exp_a2_check(
    f: &SampledFunction,
    s_count: usize,
    family: &IntervalFamily,
    ledger: &ConstantsLedger,
) -> Result<BoundReport> {
    if s_count < 2 {
        return Err(Error::param("s_count", "need at least two s values"));
    }
    let bmo = bmo_norm(f, family)?;
    let bound = ledger.beta * ledger.beta;
    let scale = f.values().iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1.0);
    if bmo.value <= 1e-14 * scale {
        return Ok(BoundReport::skipped("exp_a2", 0.0, bound, "constant input", ledger)
            .with_grid(f.grid().descriptor())
            .with_family(family.descriptor()));
    }
    let s_max = ledger.alpha / bmo.value;
    let mut best: Option<(f64, f64, WeightEstimate)> = None;
    for k in 0..s_count {
        let s = -s_max + 2.0 * s_max * k as f64 / (s_count - 1) as f64;
        let est = exp_a2_value(f, s, family)?;
        if best.as_ref().is_none_or(|b| est.value > b.0) {
            best = Some((est.value, s, est));
        }
    }
    let (value, s, est) = best.expect("s_count >= 2");
    Ok(BoundReport::compare("exp_a2", value, bound, 0.0, 0.0, ledger)
        .with_provenance("A_2 sweep of exp(s f) over s in [-alpha/||f||, alpha/||f||]")
        .with_grid(f.grid().descriptor())
        .with_family(family.descriptor())
        .with_argmax(est.argmax)
        .bind("s", s)
        .detail("bmo", bmo.value)
        .detail("s_max", s_max))
}

/// `||log w||_BMO <= 2 log([w]_{A_inf} + 1)`.
pub fn log_weight_bmo_check(w: &SampledFunction, family: &IntervalFamily) -> Result<BoundReport> {
    require_positive(w)?;
    let ledger = ConstantsLedger::default();
    let logw = w.map(f64::ln)?;
    let bmo = bmo_norm(&logw, family)?;
    let ainf = ainfty_constant(w, family)?;
    let bound = 2.0 * (ainf.value + 1.0).ln();
    Ok(BoundReport::compare("log_weight_bmo", bmo.value, bound, 0.0, 1e-9, &ledger)
        .with_provenance("BMO sweep of log w against the A_inf sweep of w")
        .with_grid(w.grid().descriptor())
        .with_family(family.descriptor())
        .with_argmax(bmo.argmax)
        .detail("ainfty", ainf.value))
}

/// For `||v||_BMO < epsilon0`: `[e^v]_{A_inf} <= 1 + C4 ||v||_BMO`.
pub fn exp_small_bmo_ainfty(v: &SampledFunction, family: &IntervalFamily, ledger: &ConstantsLedger) -> Result<BoundReport> {
    let bmo = bmo_norm(v, family)?;
    let base = |r: BoundReport| {
        r.with_grid(v.grid().descriptor())
            .with_family(family.descriptor())
            .detail("bmo", bmo.value)
    };
    if !(bmo.value < ledger.epsilon0) {
        return Ok(base(BoundReport::skipped(
            "exp_small_bmo_ainfty",
            bmo.value,
            ledger.epsilon0,
            "norm too large",
            ledger,
        )));
    }
    let top = v.values().iter().fold(f64::NEG_INFINITY, |m, &x| m.max(x));
    let w = v.map(|x| (x - top).exp())?;
    let ainf = ainfty_constant(&w, family)?;
    let bound = 1.0 + ledger.c4 * bmo.value;
    Ok(base(
        BoundReport::compare("exp_small_bmo_ainfty", ainf.value, bound, 0.0, 1e-12, ledger)
            .with_provenance("A_inf sweep of exp(v)")
            .with_argmax(ainf.argmax),
    ))
}
