use rayon::prelude::*;

use super::{FieldNorms, FieldSpec};
use crate::error::{Error, Result};
use crate::ledger::ConstantsLedger;
use crate::report::BoundReport;
use crate::sampled::{IntervalFamily, UniformGrid};
use crate::weights::bmo_norm;
use crate::weights::orlicz::log_plus;

fn max_by_first(a: (f64, f64, f64), b: (f64, f64, f64)) -> (f64, f64, f64) {
    if b.0 > a.0 || (b.0 == a.0 && (b.1, b.2) < (a.1, a.2)) {
        b
    } else {
        a
    }
}

/// `sup |b(x+y) + b(x-y) - 2 b(x)| / y` over grid nodes `x` and the given
/// `y`, with `x ± y` inside `[-L, L]` and the field's domain, against `2 ‖∂x b(t, ·)‖_BMO`.
pub fn zygmund_seminorm(
    b: &FieldSpec,
    t: f64,
    grid: &UniformGrid,
    y_values: &[f64],
    family: &IntervalFamily,
) -> Result<BoundReport> {
    if y_values.is_empty() {
        return Err(Error::param("y_values", "need at least one increment"));
    }
    if let Some(y) = y_values.iter().find(|y| !(**y > 0.0) || !y.is_finite()) {
        return Err(Error::param("y_values", format!("increments must be positive, got {y}")));
    }
    let (dlo, dhi) = b.spatial().domain();
    let (lo, hi) = (dlo.max(-grid.half_width()), dhi.min(grid.half_width()));
    let bmo = bmo_norm(&b.sample_dx(t, grid)?, family)?;
    let second = |x: f64, y: f64| -> Result<f64> {
        Ok((b.eval(t, x + y)? + b.eval(t, x - y)? - 2.0 * b.eval(t, x)?).abs() / y)
    };
    let best = (0..grid.len())
        .into_par_iter()
        .map(|i| -> Result<(f64, f64, f64)> {
            let x = grid.node(i);
            let mut best = (0.0, f64::NAN, f64::NAN);
            for &y in y_values {
                if x - y >= lo && x + y <= hi {
                    best = max_by_first(best, (second(x, y)?, x, y));
                }
            }
            Ok(best)
        })
        .try_reduce(|| (0.0, f64::NAN, f64::NAN), |a, c| Ok(max_by_first(a, c)))?;
    let mut ray = 0.0f64;
    for &y in y_values.iter().filter(|&&y| 2.0 * y <= hi && lo <= 0.0) {
        ray = ray.max(second(y, y)?);
    }
    Ok(BoundReport::compare("zygmund_seminorm", best.0, 2.0 * bmo.value, 1e-6, 0.0, &ConstantsLedger::default())
        .with_provenance(format!("grid second differences of {b} at t = {t}; bound from bmo_norm of the derivative"))
        .with_grid(grid.descriptor())
        .with_family(family.descriptor())
        .with_argmax(bmo.argmax)
        .bind("x", best.1)
        .bind("y", best.2)
        .detail("bmo", bmo.value)
        .detail("ray_x_eq_y", ray))
}

/// `max (|Δ_y - Δ_z| - 5β - β |log(|y|/|z|)| / log 2)` over the samples,
/// with `Δ_y = (b(x+y) - b(x))/y` and `β = ‖∂x b(t, ·)‖_BMO`.
pub fn reimann_ratio_check(
    b: &FieldSpec,
    t: f64,
    samples: &[(f64, f64, f64)],
    norms: &FieldNorms,
    ledger: &ConstantsLedger,
) -> Result<BoundReport> {
    if samples.is_empty() {
        return Err(Error::param("samples", "need at least one (x, y, z)"));
    }
    let beta = norms.bmo_at(t);
    let mut worst = (f64::NEG_INFINITY, 0.0, 0.0, 0.0);
    // Smallest multiplier m with |Δ_y - Δ_z| <= m (5 + |log(|y|/|z|)| / log 2).
    let mut fitted = 0.0f64;
    for &(x, y, z) in samples {
        if y == 0.0 || z == 0.0 {
            return Err(Error::param("samples", format!("increments must be nonzero at x = {x}")));
        }
        let bx = b.eval(t, x)?;
        let dy = (b.eval(t, x + y)? - bx) / y;
        let dz = (b.eval(t, x + z)? - bx) / z;
        let lhs = (dy - dz).abs();
        let shape = 5.0 + (y.abs() / z.abs()).ln().abs() / std::f64::consts::LN_2;
        let excess = lhs - beta * shape;
        fitted = fitted.max(lhs / shape);
        if excess > worst.0 {
            worst = (excess, x, y, z);
        }
    }
    Ok(BoundReport::compare("reimann_ratio_check", worst.0, 0.0, 0.0, 1e-9, ledger)
        .with_provenance(format!("{} sampled (x, y, z) for {b} at t = {t}", samples.len()))
        .with_grid(norms.grid)
        .with_family(norms.family)
        .bind("x", worst.1)
        .bind("y", worst.2)
        .bind("z", worst.3)
        .detail("bmo", beta)
        .detail("fitted_bmo", fitted))
}

/// Both growth estimates as ratios to their right-hand sides:
/// `|b(x) - b(0)| <= C5 ‖b'‖_* |x| (1 + |log|x||)` and
/// `|b(x+h) - b(x)| <= C5 ‖b'‖_* log+|x| |h| (1 + |log|h||)`.
pub fn growth_bound_check(
    b: &FieldSpec,
    t: f64,
    x_values: &[f64],
    h_values: &[f64],
    norms: &FieldNorms,
    ledger: &ConstantsLedger,
) -> Result<BoundReport> {
    if x_values.is_empty() || h_values.is_empty() {
        return Err(Error::param("x_values", "need sample points and increments"));
    }
    if x_values.iter().chain(h_values).any(|v| *v == 0.0 || !v.is_finite()) {
        return Err(Error::param("x_values", "sample points and increments must be nonzero"));
    }
    let star = norms
        .star_at(t)
        .ok_or_else(|| Error::param("grid.L", "starred norm needs the grid to cover [-1, 1]"))?;
    let ratio = |lhs: f64, shape: f64| -> f64 {
        let rhs = ledger.c5 * star * shape;
        if rhs > 0.0 {
            lhs / rhs
        } else if lhs == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    };
    let b0 = b.eval(t, 0.0)?;
    let mut growth = (0.0f64, f64::NAN);
    for &x in x_values {
        let r = ratio((b.eval(t, x)? - b0).abs(), x.abs() * (1.0 + x.abs().ln().abs()));
        if r > growth.0 {
            growth = (r, x);
        }
    }
    let mut increment = (0.0f64, f64::NAN, f64::NAN);
    for &x in x_values {
        let bx = b.eval(t, x)?;
        for &h in h_values {
            let shape = log_plus(x.abs()) * h.abs() * (1.0 + h.abs().ln().abs());
            let r = ratio((b.eval(t, x + h)? - bx).abs(), shape);
            if r > increment.0 {
                increment = (r, x, h);
            }
        }
    }
    let value = growth.0.max(increment.0);
    let mut report = BoundReport::compare("growth_bound_check", value, 1.0, 0.0, 0.0, ledger)
        .with_provenance(format!(
            "{} points x {} increments for {b} at t = {t}; ratios to the C5 right-hand sides",
            x_values.len(),
            h_values.len()
        ))
        .with_grid(norms.grid)
        .with_family(norms.family)
        .detail("ratio_growth", growth.0)
        .detail("ratio_increment", increment.0)
        .detail("star_norm", star)
        .detail("fitted_c5", value * ledger.c5);
    report = if growth.0 >= increment.0 {
        report.bind("x", growth.1)
    } else {
        report.bind("x", increment.1).bind("h", increment.2)
    };
    Ok(report)
}
