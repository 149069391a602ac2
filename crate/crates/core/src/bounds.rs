//! Right-hand sides of the flow estimates and the reports comparing them
//! with measured quantities.
//!
//! `B(t) = ∫_0^t ‖∂x b(s, ·)‖_BMO ds` comes from [`FieldNorms::integral`].
//! The slab scheme cuts `[0, T]` where `B` advances by `δ₀`; on slab `i`
//! (`(i-1)δ₀ <= B < iδ₀`) the chained short-time bound is `K^i` with
//! `K = C₃(1 + C₄) + 1`, dominated by `K e^{C B}` with `C = ln K / δ₀`,
//! the two agreeing exactly at slab boundaries.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fields::{FieldNorms, FieldSpec, Spatial};
use crate::flow::{forward_flow, FlowResult, SolverConfig};
use crate::ledger::ConstantsLedger;
use crate::report::BoundReport;
use crate::sampled::{IntervalFamily, SampledFunction, UniformGrid};
use crate::weights::bmo_norm;

/// `C₁ B(t) e^{c B(t)}`.
pub fn gronwall_rhs(norms: &FieldNorms, t: f64, ledger: &ConstantsLedger) -> f64 {
    let b = norms.integral(t);
    ledger.c1 * b * (ledger.c * b).exp()
}

fn log_d_samples(fr: &FlowResult, j: usize, grid: &UniformGrid) -> Result<SampledFunction> {
    if fr.x != grid.nodes() {
        return Err(Error::Mismatch("flow was not started from the grid nodes".into()));
    }
    SampledFunction::new(*grid, fr.log_d[j].clone())
}

/// `‖log|∂x φ(t, ·)|‖_BMO <= C₁ B(t) e^{c B(t)}` at every stored time of a
/// forward flow from 0 started on `grid`. Details carry the least `C₁`
/// admissible at the ledger's `c`.
pub fn gronwall_report(
    fr: &FlowResult,
    norms: &FieldNorms,
    grid: &UniformGrid,
    family: &IntervalFamily,
    ledger: &ConstantsLedger,
) -> Result<BoundReport> {
    if fr.start() != 0.0 {
        return Err(Error::param("times", "the estimate is stated from t = 0"));
    }
    let mut value: f64 = 0.0;
    let mut fit: f64 = 0.0;
    let mut bind = 0.0;
    for (j, &t) in fr.times.iter().enumerate().skip(1) {
        let lhs = bmo_norm(&log_d_samples(fr, j, grid)?, family)?.value;
        let rhs = gronwall_rhs(norms, t, ledger);
        let b = norms.integral(t);
        let r = if lhs <= 0.0 { 0.0 } else { lhs / rhs };
        if r > value {
            value = r;
            bind = t;
        }
        if lhs > 0.0 {
            fit = fit.max(lhs / (b * (ledger.c * b).exp()));
        }
    }
    Ok(BoundReport::compare("gronwall", value, 1.0, 1e-9, 0.0, ledger)
        .with_provenance(format!(
            "BMO of the log-derivative of the flow of {} against C1 B e^(c B)",
            fr.field
        ))
        .with_grid(grid.descriptor())
        .with_family(family.descriptor())
        .bind("t", bind)
        .detail("fit_c1", fit))
}

/// The `x log|x|` example: `ℓ(t, x) = t + (e^t - 1) log|x|`, so the measured
/// `‖ℓ(t)‖_BMO` must equal `(e^t - 1) β` (β the estimator's own value on
/// `log|x|`) to 1e-6 relative, and `‖ℓ(t)‖ / (t e^t)` must stay within
/// `[0.4β, β]` for `t ∈ [0.1, 2]`.
pub fn sharpness_report(t_values: &[f64], grid: &UniformGrid, family: &IntervalFamily) -> Result<BoundReport> {
    if t_values.is_empty() || t_values.iter().any(|t| !(t.is_finite() && *t > 0.0)) {
        return Err(Error::param("t_values", "need positive finite times"));
    }
    let mut times: Vec<f64> = t_values.to_vec();
    times.sort_by(f64::total_cmp);
    times.dedup();
    let mut lattice = vec![0.0];
    lattice.extend(&times);

    let b = FieldSpec::autonomous(Spatial::XLogAbs { sigma: 1.0 });
    let log_abs = SampledFunction::from_fn(*grid, |x| x.abs().ln())?;
    let beta = bmo_norm(&log_abs, family)?.value;
    let fr = forward_flow(&b, &lattice, &grid.nodes(), &SolverConfig::relative(1e-10))?;

    let mut dev: f64 = 0.0;
    let mut envelope: f64 = 0.0;
    let mut shape_lo = f64::INFINITY;
    let mut shape_hi: f64 = 0.0;
    let mut bind = f64::NAN;
    let mut report_details = Vec::new();
    for (j, &t) in lattice.iter().enumerate().skip(1) {
        let lhs = bmo_norm(&log_d_samples(&fr, j, grid)?, family)?.value;
        let expected = t.exp_m1() * beta;
        let d = (lhs - expected).abs() / expected;
        if d > dev || bind.is_nan() {
            bind = t;
        }
        dev = dev.max(d);
        let shape = lhs / (t * t.exp());
        envelope = envelope.max(shape);
        if (0.1..=2.0).contains(&t) {
            shape_lo = shape_lo.min(shape);
            shape_hi = shape_hi.max(shape);
        }
        report_details.push((format!("shape_t={t}"), shape / beta));
    }
    let mut r = BoundReport::compare("sharpness", dev, 1e-6, 0.0, 0.0, &ConstantsLedger::default())
        .with_provenance(format!(
            "log-derivative BMO of the x log|x| flow against (e^t - 1) beta at t in {times:?}"
        ))
        .with_grid(grid.descriptor())
        .with_family(family.descriptor())
        .bind("t", bind)
        .detail("beta", beta)
        .detail("fit_envelope_c", envelope);
    for (k, v) in report_details {
        r = r.detail(&k, v);
    }
    if shape_lo.is_finite() {
        r = r.detail("shape_min", shape_lo / beta).detail("shape_max", shape_hi / beta);
        if !(shape_lo >= 0.4 * beta && shape_hi <= beta) {
            r = r.force_fail(format!(
                "normalized shape outside [0.4, 1]: [{}, {}]",
                shape_lo / beta,
                shape_hi / beta
            ));
        }
    }
    Ok(r)
}

fn bisect_level(norms: &FieldNorms, target: f64, mut lo: f64, mut hi: f64) -> f64 {
    loop {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            return hi;
        }
        if norms.integral(mid) >= target {
            hi = mid;
        } else {
            lo = mid;
        }
    }
}

/// `0 = T_1 < ... < T_{k₀} = T` with `B(T_{i+1}) - B(T_i) = δ₀` on every
/// slab but the last, nodes resolved by bisection to machine precision.
pub fn time_partition(norms: &FieldNorms, t_end: f64, ledger: &ConstantsLedger) -> Result<Vec<f64>> {
    if !(t_end.is_finite() && t_end > 0.0) {
        return Err(Error::param("T", "must be positive and finite"));
    }
    let total = norms.integral(t_end);
    if !total.is_finite() || total < 0.0 {
        return Err(Error::param("B(T)", format!("must be finite and >= 0, got {total}")));
    }
    let d = ledger.delta0;
    let q = total / d;
    // A B(T) that is a whole number of slabs up to rounding does not get a
    // sliver slab at the end.
    let slabs = if (q - q.round()).abs() < 1e-9 { q.round() } else { q.ceil() }.max(1.0) as usize;
    let mut nodes = vec![0.0];
    for i in 1..slabs {
        let lo = *nodes.last().unwrap();
        let target = i as f64 * d;
        if norms.integral(lo) > target || total < target {
            return Err(Error::Internal("accumulated norm is not monotone".into()));
        }
        let ti = bisect_level(norms, target, lo, t_end);
        if !(ti > lo && ti < t_end) {
            return Err(Error::Internal(format!("slab node {i} did not separate ({ti})")));
        }
        nodes.push(ti);
    }
    nodes.push(t_end);
    Ok(nodes)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IteratedBound {
    /// 1-based slab containing `t`.
    pub slab: usize,
    pub accumulated: f64,
    /// `K^i`.
    pub power: f64,
    /// `K e^{C B(t)}`.
    pub exponential: f64,
    /// `C₃ B e^{C₃ C₄ B}`, on the first slab only.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub short_time: Option<f64>,
}

pub fn slab_base(ledger: &ConstantsLedger) -> f64 {
    ledger.c3 * (1.0 + ledger.c4) + 1.0
}

/// Slab `i` holds `t` with `T_i <= t < T_{i+1}`; `t = T` belongs to the last.
pub fn iterated_bound(partition: &[f64], norms: &FieldNorms, ledger: &ConstantsLedger, t: f64) -> Result<IteratedBound> {
    let (Some(&first), Some(&last)) = (partition.first(), partition.last()) else {
        return Err(Error::param("partition", "empty"));
    };
    if partition.len() < 2 || first != 0.0 {
        return Err(Error::param("partition", "must start at 0 and hold at least one slab"));
    }
    if !(t >= 0.0 && t <= last) {
        return Err(Error::param("t", format!("{t} outside [0, {last}]")));
    }
    let slabs = partition.len() - 1;
    let slab = partition[1..].partition_point(|&n| n <= t).min(slabs - 1) + 1;
    let k = slab_base(ledger);
    let acc = norms.integral(t);
    let c = k.ln() / ledger.delta0;
    let short_time = (slab == 1).then(|| ledger.c3 * acc * (ledger.c3 * ledger.c4 * acc).exp());
    Ok(IteratedBound {
        slab,
        accumulated: acc,
        power: k.powi(slab as i32),
        exponential: k * (c * acc).exp(),
        short_time,
    })
}

/// Slab increments against `δ₀` (value: the worst deviation, bound 1e-8),
/// failing also if the two forms of the iterated bound disagree at a slab
/// boundary beyond 1e-9 relative or the power form exceeds the exponential
/// one on a scan of `[0, T]`.
pub fn partition_report(norms: &FieldNorms, t_end: f64, ledger: &ConstantsLedger) -> Result<BoundReport> {
    let nodes = time_partition(norms, t_end, ledger)?;
    let d = ledger.delta0;
    let mut dev: f64 = 0.0;
    for w in nodes.windows(2).take(nodes.len().saturating_sub(2)) {
        dev = dev.max((norms.integral(w[1]) - norms.integral(w[0]) - d).abs());
    }
    let mut boundary: f64 = 0.0;
    for &tn in &nodes[..nodes.len() - 1] {
        let ib = iterated_bound(&nodes, norms, ledger, tn)?;
        boundary = boundary.max((ib.power - ib.exponential).abs() / ib.power);
    }
    let mut dominated = true;
    for k in 0..=1000 {
        let t = t_end * k as f64 / 1000.0;
        let ib = iterated_bound(&nodes, norms, ledger, t)?;
        dominated &= ib.power <= ib.exponential * (1.0 + 1e-12);
    }
    let mut r = BoundReport::compare("time_partition", dev, 1e-8, 0.0, 0.0, ledger)
        .with_provenance(format!(
            "slabs of [0, {t_end}] for {} with B(T) = {}",
            norms.field,
            norms.integral(t_end)
        ))
        .detail("slabs", (nodes.len() - 1) as f64)
        .detail("delta0", d)
        .detail("boundary_rel_gap", boundary);
    if boundary > 1e-9 {
        r = r.force_fail(format!("power and exponential forms differ by {boundary:e} at a boundary"));
    }
    if !dominated {
        r = r.force_fail("power form exceeds the exponential form inside a slab");
    }
    Ok(r)
}
