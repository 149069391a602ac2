use super::{backward_flow, forward_flow, Direction, FlowResult, SolverConfig};
use crate::error::{Error, Result};
use crate::fields::FieldSpec;
use crate::ledger::ConstantsLedger;
use crate::report::BoundReport;

/// Strictly increasing rows; adjacent trajectories both pinned at the
/// origin are the only admitted ties.
pub fn check_monotone(fr: &FlowResult) -> Result<()> {
    for (j, row) in fr.phi.iter().enumerate() {
        for i in 0..row.len().saturating_sub(1) {
            if !(row[i] < row[i + 1]) && !(fr.is_pinned(j, i) && fr.is_pinned(j, i + 1)) {
                return Err(Error::NotMonotone {
                    t: fr.times[j],
                    index: i,
                });
            }
        }
    }
    Ok(())
}

fn threshold(cfg: &SolverConfig, magnitude: f64) -> f64 {
    10.0 * (cfg.atol + cfg.rtol * magnitude)
}

struct Worst {
    ratio: f64,
    abs: f64,
    x: f64,
}

impl Worst {
    fn new() -> Self {
        Self {
            ratio: 0.0,
            abs: 0.0,
            x: f64::NAN,
        }
    }

    fn push(&mut self, err: f64, thr: f64, x: f64) {
        self.abs = self.abs.max(err);
        if err / thr > self.ratio {
            self.ratio = err / thr;
            self.x = x;
        }
    }
}

/// `max |φ̃_t(s, φ_s(t, x)) - x|` against `10 (atol + rtol |x|)`. The
/// backward run must start from the unpinned final row of `fwd`.
pub fn check_inverse(fwd: &FlowResult, bwd: &FlowResult) -> Result<BoundReport> {
    if fwd.direction != Direction::Forward || bwd.direction != Direction::Backward {
        return Err(Error::Mismatch("need a forward and a backward flow".into()));
    }
    if fwd.field != bwd.field || fwd.start() != bwd.end() || fwd.end() != bwd.start() {
        return Err(Error::Mismatch("flows differ in field or time span".into()));
    }
    let last = fwd.times.len() - 1;
    let kept: Vec<usize> = (0..fwd.x.len()).filter(|&i| !fwd.is_pinned(last, i)).collect();
    if kept.len() != bwd.x.len() || kept.iter().zip(&bwd.x).any(|(&i, &y)| fwd.final_phi()[i] != y) {
        return Err(Error::Mismatch(
            "backward flow must start from the final forward positions".into(),
        ));
    }
    let cfg = fwd.config;
    let mut w = Worst::new();
    for (k, &i) in kept.iter().enumerate() {
        let x = fwd.x[i];
        w.push((bwd.final_phi()[k] - x).abs(), threshold(&cfg, x.abs()), x);
    }
    Ok(BoundReport::compare("check_inverse", w.ratio, 1.0, 0.0, 0.0, &ConstantsLedger::default())
        .with_provenance(format!(
            "forward {} -> {} then backward for {}; error over 10 (atol + rtol |x|)",
            fwd.start(),
            fwd.end(),
            fwd.field
        ))
        .bind("x", w.x)
        .detail("max_abs_error", w.abs)
        .detail("pinned_skipped", (fwd.x.len() - kept.len()) as f64))
}

/// Runs both flows over `[s, t]` and compares.
pub fn inverse_roundtrip(b: &FieldSpec, s: f64, t: f64, x: &[f64], cfg: &SolverConfig) -> Result<BoundReport> {
    let fwd = forward_flow(b, &[s, t], x, cfg)?;
    let last = fwd.times.len() - 1;
    let y: Vec<f64> = (0..x.len())
        .filter(|&i| !fwd.is_pinned(last, i))
        .map(|i| fwd.final_phi()[i])
        .collect();
    let bwd = backward_flow(b, &[t, s], &y, cfg)?;
    check_inverse(&fwd, &bwd)
}

/// `max |φ_r(t, φ_s(r, x)) - φ_s(t, x)|` against `10 (atol + rtol |φ_s(t, x)|)`.
pub fn check_semigroup(b: &FieldSpec, s: f64, r: f64, t: f64, x: &[f64], cfg: &SolverConfig) -> Result<BoundReport> {
    if !(s <= r && r <= t && s < t) {
        return Err(Error::param(
            "times",
            format!("need s <= r <= t with s < t, got ({s}, {r}, {t})"),
        ));
    }
    let direct = forward_flow(b, &[s, t], x, cfg)?;
    let (y, idx): (Vec<f64>, Vec<usize>) = if r > s {
        let first = forward_flow(b, &[s, r], x, cfg)?;
        (0..x.len())
            .filter(|&i| !first.is_pinned(1, i))
            .map(|i| (first.final_phi()[i], i))
            .unzip()
    } else {
        (x.to_vec(), (0..x.len()).collect())
    };
    let composed = if t > r {
        forward_flow(b, &[r, t], &y, cfg)?.final_phi().to_vec()
    } else {
        y
    };
    let mut w = Worst::new();
    let mut skipped = x.len() - idx.len();
    for (k, &i) in idx.iter().enumerate() {
        if direct.is_pinned(1, i) {
            skipped += 1;
            continue;
        }
        let d = direct.final_phi()[i];
        w.push((composed[k] - d).abs(), threshold(cfg, d.abs()), x[i]);
    }
    Ok(BoundReport::compare("check_semigroup", w.ratio, 1.0, 0.0, 0.0, &ConstantsLedger::default())
        .with_provenance(format!("composition through r = {r} against one run {s} -> {t} for {b}"))
        .bind("x", w.x)
        .detail("max_abs_error", w.abs)
        .detail("pinned_skipped", skipped as f64))
}

fn trapezoid(t: &[f64], g: &[f64], idx: &[usize]) -> f64 {
    idx.windows(2)
        .map(|w| 0.5 * (t[w[1]] - t[w[0]]) * (g[w[0]] + g[w[1]]))
        .sum()
}

fn is_geometric(x: &[f64]) -> bool {
    x.len() >= 3 && {
        let q = x[1] / x[0];
        x.windows(2).all(|w| ((w[1] / w[0]) / q - 1.0).abs() < 1e-9)
    }
}

fn is_uniform(x: &[f64]) -> bool {
    x.len() >= 3 && {
        let h = x[1] - x[0];
        x.windows(2).all(|w| ((w[1] - w[0]) / h - 1.0).abs() < 1e-9)
    }
}

/// Final-time `ℓ` against (a) the trapezoid integral of `∂x b(s, φ(s, x))`
/// along the stored lattice and (b) centered differences of `φ` in `x`.
///
/// (a) is judged against `max(1e-4, |T_h - T_2h|)`. For (b) each sign
/// branch is differenced in `log|x|` when its nodes are geometric and in `x`
/// otherwise, Richardson-extrapolated on uniform spacing; the tolerance is
/// `max(1e-4, 3h)` with `h` the spacing in the differenced coordinate.
pub fn density_formula_check(fr: &FlowResult, b: &FieldSpec) -> Result<BoundReport> {
    let m = fr.times.len();
    if m < 8 {
        return Err(Error::param(
            "times",
            format!("density check needs >= 8 lattice times, got {m}"),
        ));
    }
    let last = m - 1;
    let fine: Vec<usize> = (0..m).collect();
    let mut coarse: Vec<usize> = (0..m).step_by(2).collect();
    if *coarse.last().unwrap() != last {
        coarse.push(last);
    }

    let mut ratio: f64 = 0.0;
    let mut dev_a: f64 = 0.0;
    let mut tol_a_max: f64 = 0.0;
    let mut nodes_a = 0usize;
    let mut bind_a = f64::NAN;
    for i in 0..fr.x.len() {
        if fr.is_pinned(last, i) {
            continue;
        }
        let g = (0..m)
            .map(|j| b.eval_dx(fr.times[j], fr.phi[j][i]))
            .collect::<Result<Vec<_>>>()?;
        let th = trapezoid(&fr.times, &g, &fine);
        let t2 = trapezoid(&fr.times, &g, &coarse);
        let tol = f64::max(1e-4, (th - t2).abs());
        let dev = (fr.log_d[last][i] - th).abs();
        dev_a = dev_a.max(dev);
        tol_a_max = tol_a_max.max(tol);
        nodes_a += 1;
        if dev / tol > ratio {
            ratio = dev / tol;
            bind_a = fr.x[i];
        }
    }

    let phi = fr.final_phi();
    let mut dev_b: f64 = 0.0;
    let mut tol_b_max: f64 = 0.0;
    let mut nodes_b = 0usize;
    let mut bind_b = f64::NAN;
    for branch in [
        (0..fr.x.len()).filter(|&i| fr.x[i] < 0.0).collect::<Vec<_>>(),
        (0..fr.x.len()).filter(|&i| fr.x[i] > 0.0).collect::<Vec<_>>(),
    ] {
        if branch.len() < 3 {
            continue;
        }
        let xs: Vec<f64> = branch.iter().map(|&i| fr.x[i]).collect();
        let log_coord = is_geometric(&xs);
        let u: Vec<f64> = if log_coord {
            xs.iter().map(|v| v.abs().ln()).collect()
        } else {
            xs.clone()
        };
        let uniform = log_coord || is_uniform(&xs);
        let spacing = u.windows(2).map(|w| (w[1] - w[0]).abs()).fold(0.0, f64::max);
        let tol = f64::max(1e-4, 3.0 * spacing);
        let p: Vec<f64> = branch.iter().map(|&i| phi[i]).collect();
        let pinned = |k: usize| fr.is_pinned(last, branch[k]);
        let range = if uniform { 2..xs.len().saturating_sub(2) } else { 1..xs.len() - 1 };
        for k in range {
            let reach = if uniform { 2 } else { 1 };
            if (k - reach..=k + reach).any(pinned) {
                continue;
            }
            let du = if uniform {
                let h = u[k + 1] - u[k];
                let d1 = (p[k + 1] - p[k - 1]) / (2.0 * h);
                let d2 = (p[k + 2] - p[k - 2]) / (4.0 * h);
                (4.0 * d1 - d2) / 3.0
            } else {
                let h1 = u[k] - u[k - 1];
                let h2 = u[k + 1] - u[k];
                -h2 / (h1 * (h1 + h2)) * p[k - 1] + (h2 - h1) / (h1 * h2) * p[k] + h1 / (h2 * (h1 + h2)) * p[k + 1]
            };
            // dφ/dx = (dφ/du) (du/dx), with du/dx = 1/x in log coordinates.
            let dx = if log_coord { du / xs[k] } else { du };
            let dev = (dx.abs().ln() - fr.log_d[last][branch[k]]).abs();
            dev_b = dev_b.max(dev);
            tol_b_max = tol_b_max.max(tol);
            nodes_b += 1;
            if dev / tol > ratio {
                ratio = dev / tol;
                bind_b = xs[k];
            }
        }
    }
    if nodes_a == 0 {
        return Err(Error::param("x_grid", "no unpinned trajectories to check"));
    }
    let mut report = BoundReport::compare("density_formula_check", ratio, 1.0, 0.0, 0.0, &ConstantsLedger::default())
        .with_provenance(format!(
            "integrated log-derivative of {} at t = {} vs trapezoid over {m} lattice times and differences of phi",
            fr.field,
            fr.end()
        ))
        .detail("dev_quadrature", dev_a)
        .detail("tol_quadrature", tol_a_max)
        .detail("dev_difference", dev_b)
        .detail("tol_difference", tol_b_max)
        .detail("nodes_quadrature", nodes_a as f64)
        .detail("nodes_difference", nodes_b as f64);
    if !bind_b.is_nan() {
        report = report.bind("x_difference", bind_b);
    }
    if !bind_a.is_nan() {
        report = report.bind("x_quadrature", bind_a);
    }
    Ok(report)
}

/// `|ℓ(t, x)| <= ∫ A` node-wise with `A(r) = ‖∂x b(r, ·)‖_∞`, for fields
/// with a finite Lipschitz constant; skipped otherwise.
pub fn derivative_bound_check(fr: &FlowResult, b: &FieldSpec) -> Result<BoundReport> {
    let ledger = ConstantsLedger::default();
    let Some(lip) = b.spatial().lipschitz() else {
        return Ok(BoundReport::skipped(
            "derivative_bound_check",
            f64::NAN,
            f64::NAN,
            "field is not Lipschitz",
            &ledger,
        ));
    };
    let p = b.profile();
    let s = fr.start();
    let mut excess = f64::NEG_INFINITY;
    let mut bind = (f64::NAN, f64::NAN);
    let mut total: f64 = 0.0;
    for (j, &t) in fr.times.iter().enumerate() {
        let bound = lip * (p.integral(t) - p.integral(s)).abs();
        total = total.max(bound);
        for (i, &l) in fr.log_d[j].iter().enumerate() {
            let e = l.abs() - bound;
            if e > excess {
                excess = e;
                bind = (t, fr.x[i]);
            }
        }
    }
    let slack = 10.0 * fr.config.rtol * (1.0 + total);
    Ok(BoundReport::compare("derivative_bound_check", excess, 0.0, 0.0, slack, &ledger)
        .with_provenance(format!("|log D| minus the Lipschitz integral for {}", fr.field))
        .bind("t", bind.0)
        .bind("x", bind.1)
        .detail("lipschitz", lip)
        .detail("integral_max", total))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::{truncate, Spatial};
    use crate::flow::lattice;

    fn xl() -> FieldSpec {
        FieldSpec::autonomous(Spatial::XLogAbs { sigma: 1.0 })
    }

    fn sweep() -> Vec<f64> {
        let mut x: Vec<f64> = (0..40)
            .map(|k| 0.01 * 1000f64.powf(k as f64 / 39.0))
            .flat_map(|v| [v, -v])
            .collect();
        x.sort_by(f64::total_cmp);
        x
    }

    #[test]
    fn constant_field_is_exactly_invertible() {
        let b = FieldSpec::autonomous(Spatial::Affine { a0: 1.0, a1: 0.0 });
        let r = inverse_roundtrip(&b, 0.0, 1.0, &sweep(), &SolverConfig::default()).unwrap();
        assert!(r.details["max_abs_error"] < 1e-14 && r.pass);
        let r = check_semigroup(&b, 0.0, 0.4, 1.0, &sweep(), &SolverConfig::default()).unwrap();
        assert!(r.details["max_abs_error"] < 1e-14);
    }

    #[test]
    fn xlogabs_roundtrip_and_composition() {
        let cfg = SolverConfig::relative(1e-10);
        let r = inverse_roundtrip(&xl(), 0.0, 1.0, &sweep(), &cfg).unwrap();
        assert!(r.details["max_abs_error"] < 1e-6, "{}", r.one_line());
        let r = check_semigroup(&xl(), 0.0, 0.4, 1.0, &sweep(), &cfg).unwrap();
        assert!(r.details["max_abs_error"] < 1e-6, "{}", r.one_line());
        for rr in [0.0, 1.0] {
            let r = check_semigroup(&xl(), 0.0, rr, 1.0, &sweep(), &cfg).unwrap();
            assert_eq!(r.details["max_abs_error"], 0.0);
        }
        assert!(check_semigroup(&xl(), 0.5, 0.2, 1.0, &sweep(), &cfg).is_err());
    }

    #[test]
    fn inverse_rejects_mismatched_runs() {
        let cfg = SolverConfig::default();
        let x = sweep();
        let fwd = forward_flow(&xl(), &[0.0, 1.0], &x, &cfg).unwrap();
        let bwd = backward_flow(&xl(), &[1.0, 0.0], &x, &cfg).unwrap();
        assert!(matches!(check_inverse(&fwd, &bwd), Err(Error::Mismatch(_))));
        assert!(check_inverse(&fwd, &fwd).is_err());
    }

    #[test]
    fn density_formula_on_sharp_example() {
        let cfg = SolverConfig::relative(1e-11);
        let x = sweep();
        let fr = forward_flow(&xl(), &lattice(0.0, 1.0, 200), &x, &cfg).unwrap();
        let r = density_formula_check(&fr, &xl()).unwrap();
        assert!(r.pass, "{} {:?}", r.one_line(), r.details);
        for (i, &x0) in x.iter().enumerate() {
            let exact = 1.0 + 1f64.exp_m1() * x0.abs().ln();
            assert!((fr.final_log_d()[i] - exact).abs() < 1e-6);
        }
        let short = forward_flow(&xl(), &lattice(0.0, 1.0, 4), &x, &cfg).unwrap();
        assert!(density_formula_check(&short, &xl()).is_err());
    }

    #[test]
    fn density_formula_on_sine_uniform_grid() {
        let b = FieldSpec::autonomous(Spatial::Sine { amp: 1.0, freq: 1.0 });
        let x: Vec<f64> = (0..160).map(|k| -4.0 + 0.05 * k as f64 + 0.025).collect();
        let fr = forward_flow(&b, &lattice(0.0, 1.0, 100), &x, &SolverConfig::relative(1e-11)).unwrap();
        let r = density_formula_check(&fr, &b).unwrap();
        assert!(r.pass, "{} {:?}", r.one_line(), r.details);
        assert!(r.details["dev_difference"] <= r.details["tol_difference"]);
    }

    #[test]
    fn lipschitz_bounds_hold() {
        let x = sweep();
        let cfg = SolverConfig::default();
        for b in [
            FieldSpec::autonomous(Spatial::Sine { amp: 1.0, freq: 2.0 }),
            FieldSpec::autonomous(Spatial::Affine { a0: 0.0, a1: -1.5 }),
            truncate(&xl(), 4.0).unwrap(),
        ] {
            let fr = forward_flow(&b, &lattice(0.0, 1.0, 10), &x, &cfg).unwrap();
            let r = derivative_bound_check(&fr, &b).unwrap();
            assert!(r.pass, "{b}: {}", r.one_line());
        }
        let fr = forward_flow(&xl(), &[0.0, 1.0], &x, &cfg).unwrap();
        assert!(derivative_bound_check(&fr, &xl()).unwrap().is_skipped());
    }

    #[test]
    fn monotone_rows_detected() {
        let b = FieldSpec::autonomous(Spatial::Affine { a0: 0.0, a1: 1.0 });
        let mut fr = forward_flow(&b, &[0.0, 1.0], &[-1.0, 0.5, 2.0], &SolverConfig::default()).unwrap();
        check_monotone(&fr).unwrap();
        fr.phi[1][1] = 10.0;
        assert!(matches!(check_monotone(&fr), Err(Error::NotMonotone { index: 1, .. })));
    }
}
