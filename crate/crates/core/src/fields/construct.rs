use std::sync::OnceLock;

use super::{FieldSpec, SampledField, Spatial};
use crate::error::{Error, Result};
use crate::quad::gauss_kronrod;

/// The bump `ρ(x) = exp(-1/(1-x^2)) / Z` on `(-1, 1)`.
#[derive(Debug, Clone, Copy)]
pub struct Mollifier {
    z: f64,
    /// `even[j] = ∫ u^{2j+2} ρ(u) du`.
    even: [f64; MOMENTS],
}

const MOMENTS: usize = 24;

impl Mollifier {
    pub fn normalization(&self) -> f64 {
        self.z
    }

    #[inline]
    pub fn density(&self, u: f64) -> f64 {
        let q = 1.0 - u * u;
        if q <= 0.0 {
            0.0
        } else {
            (-1.0 / q).exp() / self.z
        }
    }

    /// `(ρ_ε * y log|y|)(x)` and `(ρ_ε * (log|y| + 1))(x)` for `|x| >= 2ε`,
    /// from `log|x - εu| = log|x| - Σ (εu/x)^m / m` integrated termwise.
    pub(crate) fn xlog_series(&self, eps: f64, x: f64) -> Option<(f64, f64)> {
        if !(x.abs() >= 2.0 * eps) {
            return None;
        }
        let r2 = (eps / x).powi(2);
        let (mut value, mut slope, mut p) = (0.0, 0.0, 1.0);
        for (j, mu) in self.even.iter().enumerate() {
            let m = 2.0 * (j + 1) as f64;
            p *= r2;
            value += mu * p / (m * (m - 1.0));
            slope += mu * p / m;
        }
        let lx = x.abs().ln();
        Some((x * lx + x * value, lx + 1.0 - slope))
    }

    /// `ρ_ε(x) = ρ(x/ε)/ε`.
    pub fn scaled(&self, eps: f64, x: f64) -> f64 {
        self.density(x / eps) / eps
    }
}

fn bump(u: f64) -> f64 {
    (-1.0 / (1.0 - u * u)).exp()
}

/// Shared bump; `Z` is computed once.
pub fn mollifier() -> &'static Mollifier {
    static CELL: OnceLock<Mollifier> = OnceLock::new();
    CELL.get_or_init(|| {
        let z = gauss_kronrod(&bump, -1.0, 1.0, 1e-15);
        let even = std::array::from_fn(|j| gauss_kronrod(&|u: f64| u.powi(2 * j as i32 + 2) * bump(u), -1.0, 1.0, 1e-16) / z);
        Mollifier { z, even }
    })
}

/// Field whose derivative is `clamp(∂x b, -k, k)` and whose value at the
/// origin is `b(t, 0)`.
pub fn truncate(b: &FieldSpec, k: f64) -> Result<FieldSpec> {
    if !(k > 0.0) || !k.is_finite() {
        return Err(Error::param("k", format!("need 0 < k < inf, got {k}")));
    }
    let spatial = match (&b.spatial, b.is_autonomous()) {
        (Spatial::Sampled(s), true) => Spatial::Sampled(truncate_samples(s, k)?),
        _ => Spatial::Truncated {
            base: Box::new(b.spatial.clone()),
            k,
        },
    };
    FieldSpec::new(spatial, b.profile.clone())
}

/// Trapezoid integration of the clamped derivative outward from the
/// origin; `b(0)` and `∂x b(0)` are linear interpolants of the two central
/// nodes.
fn truncate_samples(s: &SampledField, k: f64) -> Result<SampledField> {
    let n = s.grid.len();
    let m = n / 2;
    let h = s.grid.spacing();
    let c: Vec<f64> = s.derivative.iter().map(|d| d.clamp(-k, k)).collect();
    let c0 = 0.5 * (c[m - 1] + c[m]);
    let mut v = vec![0.0; n];
    v[m] = 0.5 * (s.values[m - 1] + s.values[m]) + 0.25 * h * (c0 + c[m]);
    v[m - 1] = 0.5 * (s.values[m - 1] + s.values[m]) - 0.25 * h * (c0 + c[m - 1]);
    for i in m + 1..n {
        v[i] = v[i - 1] + 0.5 * h * (c[i - 1] + c[i]);
    }
    for i in (0..m - 1).rev() {
        v[i] = v[i + 1] - 0.5 * h * (c[i] + c[i + 1]);
    }
    SampledField::new(s.grid, v, c)
}

/// `b * ρ_ε` in space; the derivative is the mollified derivative.
pub fn mollify(b: &FieldSpec, eps: f64) -> Result<FieldSpec> {
    if !(eps > 0.0) || !eps.is_finite() {
        return Err(Error::param("eps", format!("need 0 < eps < inf, got {eps}")));
    }
    FieldSpec::new(
        Spatial::Mollified {
            base: Box::new(b.spatial.clone()),
            eps,
        },
        b.profile.clone(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::adaptive_simpson;
    use crate::sampled::{IntervalFamily, UniformGrid};
    use crate::weights::bmo_norm;

    fn xl() -> FieldSpec {
        FieldSpec::autonomous(Spatial::XLogAbs { sigma: 1.0 })
    }

    #[test]
    fn bump_has_unit_mass() {
        let rho = mollifier();
        assert!((rho.normalization() - 0.443_993_816_168_079_4).abs() < 1e-12);
        for eps in [1.0, 0.1, 0.004] {
            let mass = gauss_kronrod(&|x| rho.scaled(eps, x), -eps, eps, 1e-14);
            assert!((mass - 1.0).abs() < 1e-10, "{eps}: {mass}");
        }
    }

    #[test]
    fn saturated_clamp_gives_linear_field() {
        let k = 1.5;
        let b = FieldSpec::autonomous(Spatial::Affine { a0: 0.7, a1: 2.0 * k });
        let bk = truncate(&b, k).unwrap();
        for x in [-3.0, -0.2, 0.0, 1.0, 5.0] {
            assert!((bk.eval(0.0, x).unwrap() - (0.7 + k * x)).abs() < 1e-10);
            assert_eq!(bk.eval_dx(0.0, x).unwrap(), k);
        }
    }

    #[test]
    fn truncated_xlogabs_differs_by_core_mass() {
        // Outside the core the clamp is inactive and the deficit is ∫_0^δ (−k − log y − 1) dy = δ.
        for k in [4.0, 16.0] {
            let bk = truncate(&xl(), k).unwrap();
            let delta = (-k - 1.0f64).exp();
            for x in [0.5f64, 2.0, 10.0] {
                if x.ln() + 1.0 > k {
                    continue;
                }
                let d = bk.eval(0.0, x).unwrap() - xl().eval(0.0, x).unwrap();
                assert!((d - delta).abs() < 1e-9, "k={k} x={x}: {d} vs {delta}");
                let d = bk.eval(0.0, -x).unwrap() - xl().eval(0.0, -x).unwrap();
                assert!((d + delta).abs() < 1e-9);
            }
            assert_eq!(bk.eval_dx(0.0, 0.0).unwrap(), -k);
        }
    }

    #[test]
    fn truncation_brings_derivative_bmo_down_at_most_twice() {
        let g = UniformGrid::new(8.0, 1024).unwrap();
        let fam = IntervalFamily::default_for(&g).unwrap();
        let fields = [xl(), FieldSpec::autonomous(Spatial::Sine { amp: 2.0, freq: 3.0 })];
        for b in &fields {
            let raw = bmo_norm(&b.sample_dx(0.0, &g).unwrap(), &fam).unwrap().value;
            for k in [0.5, 1.0, 2.0, 4.0] {
                let bk = truncate(b, k).unwrap();
                let tr = bmo_norm(&bk.sample_dx(0.0, &g).unwrap(), &fam).unwrap().value;
                assert!(tr <= 2.0 * raw + 1e-12, "{b} k={k}: {tr} vs {raw}");
            }
        }
    }

    #[test]
    fn sampled_truncation_uses_trapezoid() {
        let g = UniformGrid::new(4.0, 256).unwrap();
        let b = xl();
        let vals = b.sample(0.0, &g).unwrap();
        let der = b.sample_dx(0.0, &g).unwrap();
        let s = FieldSpec::autonomous(Spatial::Sampled(SampledField::from_samples(&vals, &der).unwrap()));
        let sk = truncate(&s, 2.0).unwrap();
        let ak = truncate(&b, 2.0).unwrap();
        for i in [0, 50, 127, 128, 200, 255] {
            let x = g.node(i);
            let d = (sk.eval(0.0, x).unwrap() - ak.eval(0.0, x).unwrap()).abs();
            assert!(d < 2e-3, "{x}: {d}");
            assert!(sk.eval_dx(0.0, x).unwrap().abs() <= 2.0);
        }
    }

    #[test]
    fn mollification_is_exact_on_affine() {
        let b = FieldSpec::autonomous(Spatial::Affine { a0: -1.0, a1: 3.0 });
        for eps in [0.5, 0.01] {
            let be = mollify(&b, eps).unwrap();
            for x in [-2.0, 0.0, 0.3, 7.0] {
                assert!((be.eval(0.0, x).unwrap() - b.eval(0.0, x).unwrap()).abs() < 1e-12);
                assert!((be.eval_dx(0.0, x).unwrap() - 3.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn xlog_series_matches_quadrature() {
        let rho = mollifier();
        for eps in [0.3, 0.01] {
            for x in [-50.0 * eps, -2.0 * eps, 2.0 * eps, 3.7 * eps, 1e3 * eps] {
                let (v, d) = rho.xlog_series(eps, x).unwrap();
                let qv = gauss_kronrod(&|u: f64| (x - eps * u) * (x - eps * u).abs().ln() * rho.density(u), -1.0, 1.0, 1e-15);
                let qd = gauss_kronrod(&|u: f64| ((x - eps * u).abs().ln() + 1.0) * rho.density(u), -1.0, 1.0, 1e-15);
                assert!((v - qv).abs() < 1e-13 * (1.0 + qv.abs()), "{eps} {x} {v} {qv}");
                assert!((d - qd).abs() < 1e-13 * (1.0 + qd.abs()), "{eps} {x} {d} {qd}");
            }
        }
        assert!(rho.xlog_series(0.1, 0.19).is_none());
    }

    #[test]
    fn mollified_xlogabs_converges() {
        let b = xl();
        let mut prev = f64::INFINITY;
        for eps in [0.1, 0.05, 0.025, 0.0125] {
            let be = mollify(&b, eps).unwrap();
            let d = (0..40)
                .map(|k| 1.0 + 0.2 * k as f64)
                .flat_map(|x| [x, -x])
                .map(|x| (be.eval(0.0, x).unwrap() - b.eval(0.0, x).unwrap()).abs())
                .fold(0.0, f64::max);
            // |b(x - u) - b(x)| <= eps sup|b'| near x, so the mollified error is O(eps).
            assert!(d <= eps * (9f64.ln() + 1.0), "{eps}: {d}");
            assert!(d <= prev, "{eps}: {d} > {prev}");
            prev = d;
        }
        // Derivative at the origin: log ε + 1 + 2∫_0^1 log u ρ(u) du, with u = v^2
        // removing the singularity.
        let be = mollify(&b, 0.1).unwrap();
        let rho = mollifier();
        let core = |v: f64| if v == 0.0 { 0.0 } else { 4.0 * v * v.ln() * rho.density(v * v) };
        let oracle = 0.1f64.ln() + 1.0 + 2.0 * adaptive_simpson(&core, 0.0, 1.0, 1e-12);
        assert!((be.eval_dx(0.0, 0.0).unwrap() - oracle).abs() < 1e-9);
    }

    #[test]
    fn mollified_derivative_bmo_not_larger() {
        // The raw derivative is singular at a point the coarse grid cannot
        // resolve, so its norm is taken on a grid 64 times finer.
        let g = UniformGrid::new(6.0, 1024).unwrap();
        let fam = IntervalFamily::default_for(&g).unwrap();
        let fine = UniformGrid::new(6.0, 1 << 16).unwrap();
        let b = xl();
        let raw = bmo_norm(&b.sample_dx(0.0, &fine).unwrap(), &IntervalFamily::default_for(&fine).unwrap())
            .unwrap()
            .value;
        for eps in [0.1, 0.02] {
            let be = mollify(&b, eps).unwrap();
            let m = bmo_norm(&be.sample_dx(0.0, &g).unwrap(), &fam).unwrap().value;
            assert!(m <= raw + 1e-6, "{eps}: {m} vs {raw}");
        }
    }
}
