//! Named verification suites: fixed fixtures and grids, each producing a
//! list of [`BoundReport`]s. A suite passes iff every report passes.
//!
//! Suites are deterministic: grids, seeds and the pseudo-random fixtures
//! (a seeded `StdRng`) are fixed, so reruns reproduce reports bit for bit.

use std::fmt;
use std::str::FromStr;

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use crate::bounds::{gronwall_report, partition_report, sharpness_report};
use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::fields::{growth_bound_check, mollify, reimann_ratio_check, truncate, zygmund_seminorm};
use crate::fields::{FieldNorms, FieldSpec, Spatial};
use crate::flow::{
    check_monotone, check_semigroup, density_formula_check, derivative_bound_check, forward_flow,
    inverse_roundtrip, lattice, SolverConfig,
};
use crate::ledger::ConstantsLedger;
use crate::report::BoundReport;
use crate::sampled::{FamilyStrategy, IntervalFamily, SampledFunction, UniformGrid};
use crate::transport::{characteristic_residual, solution_bmo_growth, transport_solve, InitialDatum};
use crate::weights::{
    ainfty_constant, ap_constant, bmo_norm, exp_a2_check, exp_small_bmo_ainfty, jn_tail, log_weight_bmo_check,
    orlicz_exp_norm, reverse_holder_check,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    SharpExample,
    WeightsLemmas,
    Zygmund,
    Flow,
    Transport,
    Partition,
    All,
}

impl Suite {
    pub const NAMES: [&'static str; 7] = [
        "sharp-example",
        "weights-lemmas",
        "zygmund",
        "flow",
        "transport",
        "partition",
        "all",
    ];

    fn parts(self) -> Vec<Suite> {
        match self {
            Suite::All => vec![
                Suite::SharpExample,
                Suite::WeightsLemmas,
                Suite::Zygmund,
                Suite::Flow,
                Suite::Transport,
                Suite::Partition,
            ],
            s => vec![s],
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let i = match self {
            Suite::SharpExample => 0,
            Suite::WeightsLemmas => 1,
            Suite::Zygmund => 2,
            Suite::Flow => 3,
            Suite::Transport => 4,
            Suite::Partition => 5,
            Suite::All => 6,
        };
        f.write_str(Self::NAMES[i])
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "sharp-example" => Suite::SharpExample,
            "weights-lemmas" => Suite::WeightsLemmas,
            "zygmund" => Suite::Zygmund,
            "flow" => Suite::Flow,
            "transport" => Suite::Transport,
            "partition" => Suite::Partition,
            "all" => Suite::All,
            other => return Err(Error::UnknownSuite(other.to_string())),
        })
    }
}

pub fn run_suite(suite: Suite, ledger: &ConstantsLedger) -> Result<Vec<BoundReport>> {
    let mut out = Vec::new();
    for s in suite.parts() {
        out.extend(match s {
            Suite::SharpExample => sharp_example(ledger)?,
            Suite::WeightsLemmas => weights_lemmas(ledger)?,
            Suite::Zygmund => zygmund(ledger)?,
            Suite::Flow => flow(ledger)?,
            Suite::Transport => transport(ledger)?,
            Suite::Partition => partition(ledger)?,
            Suite::All => unreachable!("expanded by parts"),
        });
    }
    Ok(out)
}

fn grid_family(half_width: f64, n: usize) -> Result<(UniformGrid, IntervalFamily)> {
    let g = UniformGrid::new(half_width, n)?;
    let f = IntervalFamily::default_for(&g)?;
    Ok((g, f))
}

fn xlogabs() -> FieldSpec {
    FieldSpec::autonomous(Spatial::XLogAbs { sigma: 1.0 })
}

/// `±` log-spaced points on `[lo, hi]`, sorted increasingly.
pub fn symmetric_logspace(lo: f64, hi: f64, per_side: usize) -> Vec<f64> {
    let (a, b) = (lo.ln(), hi.ln());
    let pos: Vec<f64> = (0..per_side)
        .map(|k| (a + (b - a) * k as f64 / (per_side - 1) as f64).exp())
        .collect();
    pos.iter().rev().map(|x| -x).chain(pos.iter().copied()).collect()
}

/// Largest relative deviation `|v - ref| / |ref|` with its argument.
fn worst_relative(pairs: impl Iterator<Item = (f64, f64, f64)>) -> (f64, f64) {
    pairs.fold((0.0, f64::NAN), |best, (arg, v, r)| {
        let d = (v - r).abs() / r.abs();
        if d > best.0 || best.1.is_nan() {
            (d.max(best.0), arg)
        } else {
            best
        }
    })
}

/// Fails unless `values` strictly increase (or, with `strict = false`,
/// never decrease); the value is the largest step down.
fn monotone_report(name: &str, keys: &[f64], values: &[f64], increasing: bool, strict: bool, ledger: &ConstantsLedger) -> BoundReport {
    let sign = if increasing { 1.0 } else { -1.0 };
    let drop = values
        .windows(2)
        .map(|w| sign * (w[0] - w[1]))
        .fold(f64::NEG_INFINITY, f64::max);
    let mut r = BoundReport::compare(name, drop.max(0.0), 0.0, 0.0, 0.0, ledger);
    for (k, v) in keys.iter().zip(values) {
        r = r.detail(&format!("at_{k}"), *v);
    }
    if strict && drop >= 0.0 {
        r = r.force_fail("sequence is not strictly monotone");
    }
    r
}

fn sharp_example(ledger: &ConstantsLedger) -> Result<Vec<BoundReport>> {
    let b = xlogabs();
    let seeds = symmetric_logspace(1e-3, 10.0, 256);
    let cfg = SolverConfig::relative(1e-10);
    let mut out = Vec::new();
    for t in [0.25, 0.5, 1.0, 2.0] {
        let fr = forward_flow(&b, &lattice(0.0, t, 128), &seeds, &cfg)?;
        let g = t.exp();
        let (dev, at) = worst_relative(
            seeds
                .iter()
                .zip(fr.final_phi())
                .map(|(&x, &p)| (x, p, x.signum() * x.abs().powf(g))),
        );
        out.push(
            BoundReport::compare("sharp_flow_relative_error", dev, 1e-4, 0.0, 0.0, ledger)
                .with_provenance(format!("{} seeds of x log|x| against sign(x)|x|^(e^t)", seeds.len()))
                .bind("t", t)
                .bind("x", at),
        );
        let (mut ld, mut ld_at) = (0.0f64, f64::NAN);
        for (&x, &l) in seeds.iter().zip(fr.final_log_d()) {
            let d = (l - (t + t.exp_m1() * x.abs().ln())).abs();
            if d > ld || ld_at.is_nan() {
                ld = ld.max(d);
                ld_at = x;
            }
        }
        out.push(
            BoundReport::compare("sharp_log_derivative", ld, 1e-3, 0.0, 0.0, ledger)
                .with_provenance("integrated log-derivative against t + (e^t - 1) log|x|")
                .bind("t", t)
                .bind("x", ld_at),
        );
        out.push(density_formula_check(&fr, &b)?.bind("t", t));
    }
    out.push(equivariance_report(ledger)?);
    let (g, fam) = grid_family(16.0, 1 << 14)?;
    out.push(sharpness_report(&lattice(0.1, 2.0, 19)[..], &g, &fam)?);
    let (g, fam) = grid_family(8.0, 1024)?;
    let norms = FieldNorms::compute(&b, &g, &fam)?;
    let fr = forward_flow(&b, &lattice(0.0, 1.0, 8), &g.nodes(), &cfg)?;
    out.push(gronwall_report(&fr, &norms, &g, &fam, ledger)?);
    Ok(out)
}

/// `bmo(a + c f) = |c| bmo(f)` on 20 seeded random fixtures.
pub fn equivariance_report(ledger: &ConstantsLedger) -> Result<BoundReport> {
    let (g, fam) = grid_family(4.0, 1024)?;
    let mut rng = StdRng::seed_from_u64(0x005e_edb0);
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let (p, q, w) = (rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0), rng.gen_range(0.5..6.0));
        let noise: Vec<f64> = (0..g.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let vals: Vec<f64> = g
            .nodes()
            .iter()
            .zip(&noise)
            .map(|(&x, &e)| p * x.abs().ln() + q * (w * x).sin() + 0.1 * e)
            .collect();
        let f = SampledFunction::new(g, vals)?;
        let a = rng.gen_range(-10.0..10.0);
        let c = rng.gen_range(0.1..5.0) * if rng.gen_bool(0.5) { -1.0 } else { 1.0 };
        let base = bmo_norm(&f, &fam)?.value;
        let moved = bmo_norm(&f.map(|v| a + c * v)?, &fam)?.value;
        worst = worst.max((moved - c.abs() * base).abs() / (c.abs() * base));
    }
    Ok(BoundReport::compare("bmo_affine_equivariance", worst, 1e-12, 0.0, 0.0, ledger)
        .with_provenance("20 seeded fixtures: log, sine and uniform noise components")
        .with_grid(g.descriptor())
        .with_family(fam.descriptor()))
}

fn power(g: &UniformGrid, a: f64) -> Result<SampledFunction> {
    SampledFunction::from_fn(*g, |x| x.abs().powf(a))
}

fn weights_lemmas(ledger: &ConstantsLedger) -> Result<Vec<BoundReport>> {
    let mut out = Vec::new();

    // A_inf of power weights.
    let (g14, s14) = grid_family(8.0, 1 << 14)?;
    let g12 = UniformGrid::new(8.0, 1 << 12)?;
    let s12 = IntervalFamily::default_for(&g12)?;
    let e12 = IntervalFamily::new(&g12, FamilyStrategy::Exhaustive, s12.min_length())?;
    for a in [0.25, 0.5, 1.0] {
        let est = ainfty_constant(&power(&g14, a)?, &s14)?;
        let reference = a.exp() / (a + 1.0);
        out.push(
            BoundReport::compare("ainfty_power_weight", (est.value / reference - 1.0).abs(), 0.02, 0.0, 0.0, ledger)
                .with_provenance("sliding-family A_inf of |x|^a against e^a/(a+1)")
                .with_grid(g14.descriptor())
                .with_family(s14.descriptor())
                .with_argmax(est.argmax)
                .bind("a", a)
                .detail("estimate", est.value)
                .detail("reference", reference),
        );
        let w = power(&g12, a)?;
        let (s, e) = (ainfty_constant(&w, &s12)?.value, ainfty_constant(&w, &e12)?.value);
        out.push(
            BoundReport::compare("ainfty_family_agreement", (s / e - 1.0).abs(), 0.01, 0.0, 0.0, ledger)
                .with_provenance("sliding against exhaustive family")
                .with_grid(g12.descriptor())
                .bind("a", a)
                .detail("sliding", s)
                .detail("exhaustive", e),
        );
    }

    // BMO of log|x|.
    let log_on = |n: usize| -> Result<(UniformGrid, f64)> {
        let (g, f) = grid_family(16.0, n)?;
        Ok((g, bmo_norm(&SampledFunction::from_fn(g, |x| x.abs().ln())?, &f)?.value))
    };
    let (g, beta) = log_on(1 << 14)?;
    let (lo, hi) = (0.69, 0.736);
    out.push(
        BoundReport::compare("bmo_log_abs_range", (lo - beta).max(beta - hi).max(0.0), 0.0, 0.0, 0.0, ledger)
            .with_provenance(format!("sliding-family BMO of log|x| against [{lo}, {hi}]"))
            .with_grid(g.descriptor())
            .detail("estimate", beta)
            .detail("origin_centered", 2.0 / std::f64::consts::E),
    );
    let sizes = [1usize << 10, 1 << 11, 1 << 12, 1 << 13, 1 << 14];
    let seq = sizes.iter().map(|&n| log_on(n).map(|p| p.1)).collect::<Result<Vec<_>>>()?;
    let keys: Vec<f64> = sizes.iter().map(|&n| n as f64).collect();
    out.push(
        monotone_report("bmo_log_abs_doubling", &keys, &seq, true, false, ledger)
            .with_provenance("BMO of log|x| on L = 16 as n doubles"),
    );
    let (g, _) = grid_family(16.0, 1 << 12)?;
    let f = SampledFunction::from_fn(g, |x| x.abs().ln())?;
    let s = bmo_norm(&f, &IntervalFamily::default_for(&g)?)?.value;
    let e = bmo_norm(&f, &IntervalFamily::new(&g, FamilyStrategy::Exhaustive, 4)?)?.value;
    out.push(
        BoundReport::compare("bmo_family_agreement", (s / e - 1.0).abs(), 0.01, 0.0, 0.0, ledger)
            .with_provenance("BMO of log|x|, sliding against exhaustive family")
            .with_grid(g.descriptor())
            .detail("sliding", s)
            .detail("exhaustive", e),
    );

    // John-Nirenberg tail on (-1, 1).
    let g = UniformGrid::new(1.0, 1 << 16)?;
    let f = SampledFunction::from_fn(g, |x| x.abs().ln())?;
    let tail = jn_tail(&f, (0, g.len()), &[1.0, 1.5, 2.0, 3.0, 4.0])?;
    let (dev, at) = worst_relative(tail.points.iter().map(|&(l, m)| (l, m, 2.0 * (-1.0 - l).exp())));
    out.push(
        BoundReport::compare("jn_tail_measure", dev, 0.03, 0.0, 0.0, ledger)
            .with_provenance("superlevel measures of |log|x| - mean| on (-1, 1) against 2 e^(-1-lambda)")
            .with_grid(g.descriptor())
            .bind("lambda", at)
            .detail("mean", tail.mean),
    );

    // Lemma fixtures.
    let (g, fam) = grid_family(8.0, 1 << 12)?;
    let logx = SampledFunction::from_fn(g, |x| x.abs().ln())?;
    let beta = bmo_norm(&logx, &fam)?.value;
    let mut fixtures: Vec<(String, SampledFunction)> = vec![("const:c=3".into(), SampledFunction::from_fn(g, |_| 3.0)?)];
    for a in [0.25, 0.5, 1.0, 3.0] {
        fixtures.push((format!("abs:a={a}"), power(&g, a)?));
    }
    for m in [-0.3, -0.15, 0.15, 0.3] {
        let s = m / beta;
        fixtures.push((format!("exp(s log|x|), s = {m}/beta"), logx.map(|v| (s * v).exp())?));
    }
    for (name, w) in &fixtures {
        let logw = w.map(f64::ln)?;
        for r in [
            log_weight_bmo_check(w, &fam)?,
            reverse_holder_check(w, &fam, ledger)?,
            exp_a2_check(&logw, 9, &fam, ledger)?,
            exp_small_bmo_ainfty(&logw, &fam, ledger)?,
        ] {
            out.push(r.with_note(name.clone()));
        }
    }

    // A_2 of |x|^{-1} grows with resolution.
    let sizes = [1usize << 10, 1 << 12, 1 << 14];
    let mut seq = Vec::new();
    for &n in &sizes {
        let (g, f) = grid_family(8.0, n)?;
        seq.push(ap_constant(&power(&g, -1.0)?, 2.0, &f)?.value);
    }
    let keys: Vec<f64> = sizes.iter().map(|&n| n as f64).collect();
    out.push(
        monotone_report("a2_inverse_abs_divergence", &keys, &seq, true, true, ledger)
            .with_provenance("A_2 of |x|^-1 on L = 8 as n grows"),
    );

    out.extend(orlicz_reports(ledger)?);
    Ok(out)
}

type Sample = fn(f64) -> f64;

fn orlicz_reports(ledger: &ConstantsLedger) -> Result<Vec<BoundReport>> {
    let mut out = Vec::new();
    let g = UniformGrid::new(8.0, 1 << 12)?;
    let two_ln2 = 2.0 * std::f64::consts::LN_2;
    let (dev, at) = [0.1, 1.0, 10.0]
        .iter()
        .map(|&c| Ok((c, orlicz_exp_norm(&SampledFunction::from_fn(g, |_| c)?)?, c / two_ln2)))
        .collect::<Result<Vec<_>>>()
        .map(|v| worst_relative(v.into_iter()))?;
    out.push(
        BoundReport::compare("orlicz_constant", dev, 1e-6, 0.0, 0.0, ledger)
            .with_provenance("Gaussian exp-Orlicz norm of constants against c/(2 log 2)")
            .with_grid(g.descriptor())
            .bind("c", at),
    );
    let fields: [(&str, Sample); 2] = [("abs", |x: f64| x.abs()), ("logabs+1", |x: f64| x.abs().ln() + 1.0)];
    for (name, f) in fields {
        let coarse = orlicz_exp_norm(&SampledFunction::from_fn(g, f)?)?;
        let fine_grid = UniformGrid::new(8.0, 1 << 13)?;
        let fine = orlicz_exp_norm(&SampledFunction::from_fn(fine_grid, f)?)?;
        out.push(
            BoundReport::compare("orlicz_doubling", (fine - coarse).abs() / fine, 1e-6, 0.0, 0.0, ledger)
                .with_provenance(format!("exp-Orlicz norm of {name} at n = 2^12 and 2^13"))
                .with_grid(g.descriptor())
                .with_note(name)
                .detail("coarse", coarse)
                .detail("fine", fine),
        );
    }
    Ok(out)
}

fn registry_fields() -> Result<Vec<(FieldSpec, f64)>> {
    let ids = [
        ("xlogabs:sigma=1", 0.0),
        ("xlogabs:sigma=-0.5", 0.0),
        ("affine:a0=1,a1=2", 0.0),
        ("const:c=3", 0.0),
        ("sine:amp=1,freq=1", 0.0),
        ("sine:amp=0.5,freq=3", 0.0),
        ("powerlog:p=2,c=0.5", 0.0),
        ("powerlog:p=1,c=0", 0.0),
        ("xlogabs:sigma=1@trunc:k=4", 0.0),
        ("xlogabs:sigma=1@mollify:eps=0.05", 0.0),
        ("sine:amp=1,freq=1@exp:rate=0.5", 0.5),
    ];
    ids.iter().map(|&(id, t)| Ok((id.parse::<FieldSpec>()?, t))).collect()
}

fn zygmund(ledger: &ConstantsLedger) -> Result<Vec<BoundReport>> {
    let mut out = Vec::new();
    let (g, fam) = grid_family(8.0, 1 << 12)?;
    let ys: Vec<f64> = (-10..=2).map(|k| 2f64.powi(k)).collect();
    let r = zygmund_seminorm(&xlogabs(), 0.0, &g, &ys, &fam)?;
    let ray = r.details["ray_x_eq_y"];
    out.push(r);
    out.push(
        BoundReport::compare("zygmund_diagonal_ray", 2.0 * std::f64::consts::LN_2 - ray, 1e-3, 0.0, 0.0, ledger)
            .with_provenance("shortfall of the x = y second difference of x log|x| below 2 log 2")
            .detail("ray", ray),
    );

    let xs: Vec<f64> = [1e-3, 0.01, 0.1, 0.5, 1.0, 2.0, 5.0]
        .iter()
        .flat_map(|&x| [-x, x])
        .collect();
    let hs: Vec<f64> = [1e-3, 1e-2, 0.1, 0.5, 1.0].iter().flat_map(|&h| [-h, h]).collect();
    let mut triples = Vec::new();
    for k in 0..=30 {
        let y = 1e-3 * 10f64.powf(k as f64 / 10.0);
        triples.extend([(0.0, y, 1.0), (0.7, -y, 0.3), (-1.1, y, y), (3.0, y, -2.0 * y)]);
    }
    for (b, t) in registry_fields()? {
        let norms = FieldNorms::compute(&b, &g, &fam)?;
        out.push(growth_bound_check(&b, t, &xs, &hs, &norms, ledger)?);
        out.push(reimann_ratio_check(&b, t, &triples, &norms, ledger)?);
    }
    Ok(out)
}

fn flow(ledger: &ConstantsLedger) -> Result<Vec<BoundReport>> {
    let mut out = Vec::new();
    let cfg = SolverConfig {
        rtol: 1e-10,
        atol: 1e-12,
        ..SolverConfig::default()
    };
    let seeds: Vec<f64> = (0..64).map(|k| -4.0 + (k as f64 + 0.5) * 0.125).collect();
    let fields = [
        FieldSpec::autonomous(Spatial::Affine { a0: 0.5, a1: 0.7 }),
        FieldSpec::autonomous(Spatial::Sine { amp: 1.0, freq: 1.0 }),
        xlogabs(),
        truncate(&xlogabs(), 16.0)?,
    ];
    for b in &fields {
        out.push(inverse_roundtrip(b, 0.0, 1.0, &seeds, &cfg)?);
        out.push(check_semigroup(b, 0.0, 0.4, 1.0, &seeds, &cfg)?);
        let fr = forward_flow(b, &lattice(0.0, 1.0, 16), &seeds, &cfg)?;
        let mono = match check_monotone(&fr) {
            Ok(()) => BoundReport::compare("flow_monotone", 0.0, 0.0, 0.0, 0.0, ledger),
            Err(Error::NotMonotone { t, index }) => BoundReport::compare("flow_monotone", 1.0, 0.0, 0.0, 0.0, ledger)
                .bind("t", t)
                .bind("index", index as f64),
            Err(e) => return Err(e),
        };
        out.push(mono.with_provenance(format!("strict order of {} seeds of {b} at 17 times", seeds.len())));
        out.push(derivative_bound_check(&fr, b)?);
    }
    out.extend(approximation_reports(ledger)?);
    Ok(out)
}

/// Distances `max_i |φ_approx(1, x_i) - φ(1, x_i)|` on `L = 10, n = 256`.
pub fn approximation_distances(ks: &[f64], epss: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    let g = UniformGrid::new(10.0, 256)?;
    let cfg = SolverConfig::relative(1e-10);
    let times = [0.0, 1.0];
    let base = forward_flow(&xlogabs(), &times, &g.nodes(), &cfg)?;
    let dist = |b: &FieldSpec| -> Result<f64> {
        let fr = forward_flow(b, &times, &g.nodes(), &cfg)?;
        Ok(fr
            .final_phi()
            .iter()
            .zip(base.final_phi())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max))
    };
    let dk = ks.iter().map(|&k| dist(&truncate(&xlogabs(), k)?)).collect::<Result<Vec<_>>>()?;
    let de = epss.iter().map(|&e| dist(&mollify(&xlogabs(), e)?)).collect::<Result<Vec<_>>>()?;
    Ok((dk, de))
}

fn approximation_reports(ledger: &ConstantsLedger) -> Result<Vec<BoundReport>> {
    let ks = [4.0, 8.0, 16.0, 32.0];
    let epss = [0.1, 0.02, 0.004];
    let (dk, de) = approximation_distances(&ks, &epss)?;
    let mut trunc = BoundReport::compare("truncation_convergence", dk[dk.len() - 1], 1e-5, 0.0, 0.0, ledger)
        .with_provenance("grid distance of truncated x log|x| flows at t = 1, L = 10, n = 256")
        .bind("k", ks[ks.len() - 1]);
    for (k, d) in ks.iter().zip(&dk) {
        trunc = trunc.detail(&format!("distance_k={k}"), *d);
    }
    if dk.windows(2).any(|w| w[1] >= w[0]) {
        trunc = trunc.force_fail("distances do not decrease in k");
    }
    let ratio = de.windows(2).map(|w| w[1] / w[0]).fold(0.0, f64::max);
    let mut moll = BoundReport::compare("mollification_convergence", ratio, 1.0, 0.0, 0.0, ledger)
        .with_provenance("grid distance of mollified x log|x| flows at t = 1; value is the worst successive ratio");
    for (e, d) in epss.iter().zip(&de) {
        moll = moll.detail(&format!("distance_eps={e}"), *d);
    }
    if ratio >= 1.0 {
        moll = moll.force_fail("distances do not decrease as eps shrinks");
    }
    Ok(vec![trunc, moll])
}

fn transport(ledger: &ConstantsLedger) -> Result<Vec<BoundReport>> {
    let mut out = Vec::new();
    let (g, fam) = grid_family(10.0, 4096)?;
    let cfg = SolverConfig::relative(1e-10);
    let times = lattice(0.0, 1.0, 4);
    let seeds = [-2.0, -0.5, 0.5, 2.0];
    let fields = [
        FieldSpec::autonomous(Spatial::Affine { a0: 1.0, a1: 0.0 }),
        FieldSpec::autonomous(Spatial::Sine { amp: 1.0, freq: 1.0 }),
        xlogabs(),
    ];
    let data = [Expr::Const { c: 5.0 }, Expr::Sin { freq: 1.0 }, Expr::LogAbs];
    let beta = bmo_norm(&Expr::LogAbs.sample(&g)?, &fam)?.value;
    for b in &fields {
        let norms = FieldNorms::compute(b, &g, &fam)?;
        for e in data {
            let u0 = InitialDatum::from(e);
            let tr = transport_solve(b, &u0, &times, &g, &fam, &cfg)?;
            let r = characteristic_residual(&tr, b, &u0, &seeds, &cfg)?;
            let mut strict = BoundReport::compare("characteristic_residual", r.value, 1e-5, 0.0, 0.0, ledger)
                .with_provenance(r.provenance.clone())
                .with_grid(g.descriptor())
                .with_family(fam.descriptor());
            strict.binding = r.binding.clone();
            strict.details = r.details.clone();
            out.push(strict);
            if matches!(b.spatial(), Spatial::XLogAbs { .. }) && e == Expr::LogAbs {
                let (dev, at) = worst_relative(
                    tr.times.iter().zip(&tr.bmo).map(|(&t, &m)| (t, m, t.exp() * beta)),
                );
                out.push(
                    BoundReport::compare("transport_log_scaling", dev, 1e-6, 0.0, 0.0, ledger)
                        .with_provenance("BMO of log|x| transported by x log|x| against e^t beta")
                        .with_grid(g.descriptor())
                        .with_family(fam.descriptor())
                        .bind("t", at)
                        .detail("beta", beta),
                );
            }
            out.push(solution_bmo_growth(&tr, &norms, ledger)?);
        }
    }
    Ok(out)
}

fn partition(ledger: &ConstantsLedger) -> Result<Vec<BoundReport>> {
    let (g, fam) = grid_family(8.0, 1 << 12)?;
    let mut out = Vec::new();
    for (id, t_end) in [
        ("xlogabs:sigma=1", 2.0),
        ("xlogabs:sigma=1@piecewise:breaks=0.5/1,values=2/0/2", 1.5),
        ("sine:amp=1,freq=1@exp:rate=0.5", 1.0),
    ] {
        let b: FieldSpec = id.parse()?;
        let norms = FieldNorms::compute(&b, &g, &fam)?;
        out.push(partition_report(&norms, t_end, ledger)?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_names_round_trip() {
        for name in Suite::NAMES {
            assert_eq!(name.parse::<Suite>().unwrap().to_string(), name);
        }
        assert!(matches!("nosuch".parse::<Suite>(), Err(Error::UnknownSuite(_))));
    }

    #[test]
    fn logspace_is_sorted_and_symmetric() {
        let s = symmetric_logspace(1e-3, 10.0, 256);
        assert_eq!(s.len(), 512);
        assert!(s.windows(2).all(|w| w[0] < w[1]));
        assert!((s[256] - 1e-3).abs() < 1e-18 && (s[511] - 10.0).abs() < 1e-12);
        assert_eq!(s[0], -s[511]);
    }

    #[test]
    fn monotone_report_detects_drops() {
        let l = ConstantsLedger::default();
        assert!(monotone_report("m", &[1.0, 2.0], &[1.0, 2.0], true, true, &l).pass);
        assert!(!monotone_report("m", &[1.0, 2.0], &[1.0, 1.0], true, true, &l).pass);
        assert!(monotone_report("m", &[1.0, 2.0], &[1.0, 1.0], true, false, &l).pass);
        assert!(!monotone_report("m", &[1.0, 2.0], &[2.0, 1.0], true, false, &l).pass);
        assert!(monotone_report("m", &[1.0, 2.0], &[2.0, 1.0], false, true, &l).pass);
    }

    #[test]
    fn partition_suite_passes() {
        let r = run_suite(Suite::Partition, &ConstantsLedger::default()).unwrap();
        assert!(r.iter().all(|r| r.pass), "{:?}", r.iter().map(|r| r.one_line()).collect::<Vec<_>>());
    }
}
