//! Gaussian-measure quantities: the `Exp(L / log L)` Orlicz norm and the
//! divergence of a field with respect to the standard Gaussian.

use crate::error::{Error, Result};
use crate::fields::FieldSpec;
use crate::sampled::{SampledFunction, UniformGrid};

/// `log+ C = max{1, log C}`.
#[inline]
pub(crate) fn log_plus(c: f64) -> f64 {
    if c > 0.0 {
        c.ln().max(1.0)
    } else {
        1.0
    }
}

/// `inf { lambda > 0 : ∫ [exp((|f|/λ) / (1 + log+(|f|/λ))) - 1] dμ <= 1 }`
/// with `μ` the standard Gaussian, integrated by the midpoint rule on the
/// grid of `f`. The grid must reach `|x| >= 6` so the neglected Gaussian
/// mass stays below `1e-8`.
pub fn orlicz_exp_norm(f: &SampledFunction) -> Result<f64> {
    let grid = f.grid();
    if grid.half_width() < 6.0 {
        return Err(Error::param(
            "grid.L",
            format!("need L >= 6 for the Gaussian tail, got {}", grid.half_width()),
        ));
    }
    let top = f.values().iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if top == 0.0 {
        return Ok(0.0);
    }
    let h = grid.spacing();
    let weights: Vec<f64> = (0..grid.len())
        .map(|i| {
            let x = grid.node(i);
            h * (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt()
        })
        .collect();
    let modular = |lambda: f64| -> f64 {
        f.values()
            .iter()
            .zip(&weights)
            .map(|(v, w)| {
                let z = v.abs() / lambda;
                w * ((z / (1.0 + log_plus(z))).exp() - 1.0)
            })
            .sum()
    };

    // modular(top) <= e^{1/2} - 1 < 1, so `top` is an upper end of the bracket.
    let mut hi = top;
    let mut lo = top / 2.0;
    let mut halvings = 0;
    while modular(lo) <= 1.0 {
        hi = lo;
        lo /= 2.0;
        halvings += 1;
        if halvings > 1100 || lo == 0.0 {
            return Err(Error::Bracket(
                "Orlicz modular stays below 1 for every lambda > 0".into(),
            ));
        }
    }
    while hi - lo > 1e-12 * hi {
        let mid = 0.5 * (lo + hi);
        if modular(mid) > 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Samples of `∂x b(t, x) - x b(t, x)`, the divergence with respect to the
/// standard Gaussian measure.
pub fn gaussian_divergence(b: &FieldSpec, t: f64, grid: &UniformGrid) -> Result<SampledFunction> {
    SampledFunction::try_from_fn(*grid, |x| Ok(b.eval_dx(t, x)? - x * b.eval(t, x)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::{FieldSpec, Spatial};

    #[test]
    fn log_plus_floor() {
        assert_eq!(log_plus(0.5), 1.0);
        assert_eq!(log_plus(std::f64::consts::E), 1.0);
        assert!((log_plus(100.0) - 100f64.ln()).abs() < 1e-15);
        assert_eq!(log_plus(0.0), 1.0);
    }

    #[test]
    fn constants_solve_in_closed_form() {
        let g = UniformGrid::new(8.0, 1 << 12).unwrap();
        assert_eq!(orlicz_exp_norm(&SampledFunction::from_fn(g, |_| 0.0).unwrap()).unwrap(), 0.0);
        for c in [0.1, 1.0, 10.0] {
            let f = SampledFunction::from_fn(g, |_| c).unwrap();
            let v = orlicz_exp_norm(&f).unwrap();
            let exact = c / (2.0 * std::f64::consts::LN_2);
            assert!(((v - exact) / exact).abs() < 1e-6, "{c}: {v} vs {exact}");
        }
    }

    #[test]
    fn needs_wide_grid() {
        let g = UniformGrid::new(5.0, 64).unwrap();
        let f = SampledFunction::from_fn(g, |x| x).unwrap();
        assert!(orlicz_exp_norm(&f).is_err());
    }

    #[test]
    fn divergence_formulas() {
        let g = UniformGrid::new(3.0, 64).unwrap();
        let zero = FieldSpec::autonomous(Spatial::Affine { a0: 0.0, a1: 0.0 });
        let d = gaussian_divergence(&zero, 0.0, &g).unwrap();
        assert!(d.values().iter().all(|&v| v == 0.0));
        let id = FieldSpec::autonomous(Spatial::Affine { a0: 0.0, a1: 1.0 });
        let d = gaussian_divergence(&id, 0.0, &g).unwrap();
        for (i, v) in d.values().iter().enumerate() {
            let x = g.node(i);
            assert!((v - (1.0 - x * x)).abs() < 1e-12);
        }
        let xl = FieldSpec::autonomous(Spatial::XLogAbs { sigma: 1.0 });
        let d = gaussian_divergence(&xl, 0.0, &g).unwrap();
        for (i, v) in d.values().iter().enumerate() {
            let x: f64 = g.node(i);
            let l = x.abs().ln();
            assert!((v - (l + 1.0 - x * x * l)).abs() < 1e-12);
        }
    }
}
