//! Sup-over-intervals functionals on sampled functions (BMO, starred norm,
//! `A_p`, `A_inf`) and the checks built on them.
//!
//! Every estimate is the maximum of a per-interval functional over an
//! [`IntervalFamily`]; it is therefore a lower bound for the supremum over
//! all intervals of the line and is always reported with the grid and
//! family that produced it.

mod lemmas;
pub(crate) mod orlicz;
mod oscillation;
mod rangeq;

pub use lemmas::{
    exp_a2_check, exp_a2_value, exp_small_bmo_ainfty, jn_tail, log_weight_bmo_check,
    reverse_holder_check, JnTail,
};
pub use orlicz::{gaussian_divergence, orlicz_exp_norm};

pub use crate::ledger::ConstantsLedger;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::report::IntervalSpan;
use crate::sampled::{FamilyDescriptor, GridDescriptor, IntervalFamily, SampledFunction};

use oscillation::{better, QuantizedSamples};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightEstimate {
    pub value: f64,
    pub argmax: IntervalSpan,
    pub family: FamilyDescriptor,
    pub grid: GridDescriptor,
}

impl WeightEstimate {
    pub fn argmax_indices(&self) -> (usize, usize) {
        (self.argmax.i, self.argmax.j)
    }
}

fn check_family(f: &SampledFunction, family: &IntervalFamily) -> Result<()> {
    if family.grid_len() != f.len() {
        return Err(Error::Mismatch(format!(
            "family built for {} nodes, function has {}",
            family.grid_len(),
            f.len()
        )));
    }
    if family.is_empty() {
        return Err(Error::EmptyFamily);
    }
    Ok(())
}

fn estimate(
    f: &SampledFunction,
    family: &IntervalFamily,
    best: Option<(f64, (usize, usize))>,
) -> Result<WeightEstimate> {
    let (value, arg) = best.ok_or(Error::EmptyFamily)?;
    Ok(WeightEstimate {
        value,
        argmax: IntervalSpan::on(f.grid(), arg),
        family: family.descriptor(),
        grid: f.grid().descriptor(),
    })
}

/// Maximizes an `O(1)` per-interval functional over the family.
pub(crate) fn sweep<F>(f: &SampledFunction, family: &IntervalFamily, functional: F) -> Result<WeightEstimate>
where
    F: Fn(usize, usize) -> f64 + Sync,
{
    check_family(f, family)?;
    let best = (0..family.grid_len())
        .into_par_iter()
        .filter_map(|i| {
            family
                .intervals_from(i)
                .map(|(i, j)| (functional(i, j), (i, j)))
                .reduce(better)
        })
        .reduce_with(better);
    estimate(f, family, best)
}

pub(crate) fn require_positive(w: &SampledFunction) -> Result<()> {
    match w.values().iter().position(|&v| v <= 0.0) {
        Some(index) => Err(Error::NonPositiveWeight {
            index,
            value: w.values()[index],
        }),
        None => Ok(()),
    }
}

/// Mean of `|f - f_I|` over nodes `i..j`.
pub fn mean_oscillation(f: &SampledFunction, i: usize, j: usize) -> Result<f64> {
    f.check_range(i, j)?;
    // Quantize the interval alone: the value depends only on the samples in it.
    Ok(QuantizedSamples::new(&f.values()[i..j]).mean_oscillation(0, j - i))
}

pub fn bmo_norm(f: &SampledFunction, family: &IntervalFamily) -> Result<WeightEstimate> {
    check_family(f, family)?;
    let qs = QuantizedSamples::new(f.values());
    estimate(f, family, qs.sweep(family))
}

/// BMO norm plus the midpoint integral of `|f|` over the nodes in `(-1, 1)`.
pub fn star_norm(f: &SampledFunction, family: &IntervalFamily) -> Result<f64> {
    if f.grid().half_width() < 1.0 {
        return Err(Error::param(
            "grid.L",
            "starred norm needs the grid to cover [-1, 1]",
        ));
    }
    let bmo = bmo_norm(f, family)?.value;
    let g = f.grid();
    let local: f64 = (0..f.len())
        .filter(|&i| g.node(i).abs() < 1.0)
        .map(|i| f.values()[i].abs())
        .sum::<f64>()
        * g.spacing();
    Ok(bmo + local)
}

/// `(mean w) * (mean w^{1/(1-p)})^{p-1}` on nodes `i..j`, given the prefix
/// sums of `w` and of `w^{1/(1-p)}`.
#[inline]
fn ap_on(w: &SampledFunction, dual: &SampledFunction, p: f64, i: usize, j: usize) -> f64 {
    w.mean_unchecked(i, j) * dual.mean_unchecked(i, j).powf(p - 1.0)
}

pub fn ap_constant(w: &SampledFunction, p: f64, family: &IntervalFamily) -> Result<WeightEstimate> {
    if !(p > 1.0) || !p.is_finite() {
        return Err(Error::param("p", format!("need 1 < p < inf, got {p}")));
    }
    require_positive(w)?;
    let e = 1.0 / (1.0 - p);
    let dual = w.map(|v| v.powf(e))?;
    sweep(w, family, |i, j| ap_on(w, &dual, p, i, j))
}

/// `A_p` functional of one interval.
pub fn ap_interval(w: &SampledFunction, p: f64, i: usize, j: usize) -> Result<f64> {
    require_positive(w)?;
    w.check_range(i, j)?;
    let e = 1.0 / (1.0 - p);
    let dual = w.map(|v| v.powf(e))?;
    Ok(ap_on(w, &dual, p, i, j))
}

pub fn ainfty_constant(w: &SampledFunction, family: &IntervalFamily) -> Result<WeightEstimate> {
    require_positive(w)?;
    let logw = w.map(f64::ln)?;
    sweep(w, family, |i, j| {
        w.mean_unchecked(i, j) * (-logw.mean_unchecked(i, j)).exp()
    })
}

/// `A_inf` functional `(mean w) exp(-mean log w)` of one interval.
pub fn ainfty_interval(w: &SampledFunction, i: usize, j: usize) -> Result<f64> {
    require_positive(w)?;
    w.check_range(i, j)?;
    let logw = w.map(f64::ln)?;
    Ok(w.mean_unchecked(i, j) * (-logw.mean_unchecked(i, j)).exp())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampled::{FamilyStrategy, UniformGrid};

    fn grid(l: f64, n: usize) -> UniformGrid {
        UniformGrid::new(l, n).unwrap()
    }

    #[test]
    fn constants_have_trivial_functionals() {
        let g = grid(4.0, 256);
        let fam = IntervalFamily::default_for(&g).unwrap();
        let c = SampledFunction::from_fn(g, |_| 7.0).unwrap();
        assert_eq!(bmo_norm(&c, &fam).unwrap().value, 0.0);
        assert!((ainfty_constant(&c, &fam).unwrap().value - 1.0).abs() < 1e-14);
        assert!((ap_constant(&c, 2.0, &fam).unwrap().value - 1.0).abs() < 1e-14);
        let one = SampledFunction::from_fn(g, |_| 1.0).unwrap();
        assert!((star_norm(&one, &fam).unwrap() - 2.0).abs() < 1e-12);
        let zero = SampledFunction::from_fn(g, |_| 0.0).unwrap();
        assert_eq!(star_norm(&zero, &fam).unwrap(), 0.0);
    }

    #[test]
    fn star_norm_needs_unit_ball() {
        let g = grid(0.5, 64);
        let fam = IntervalFamily::default_for(&g).unwrap();
        let f = SampledFunction::from_fn(g, |x| x).unwrap();
        assert!(star_norm(&f, &fam).is_err());
    }

    #[test]
    fn weights_must_be_positive() {
        let g = grid(1.0, 16);
        let fam = IntervalFamily::default_for(&g).unwrap();
        let w = SampledFunction::from_fn(g, |x| x).unwrap();
        assert!(matches!(ainfty_constant(&w, &fam), Err(Error::NonPositiveWeight { .. })));
        assert!(matches!(ap_constant(&w, 2.0, &fam), Err(Error::NonPositiveWeight { .. })));
        let w = SampledFunction::from_fn(g, |x| x.abs()).unwrap();
        assert!(ap_constant(&w, 1.0, &fam).is_err());
    }

    #[test]
    fn argmax_reevaluates_to_value() {
        let g = grid(4.0, 512);
        let fam = IntervalFamily::default_for(&g).unwrap();
        let f = SampledFunction::from_fn(g, |x| x.abs().ln()).unwrap();
        let est = bmo_norm(&f, &fam).unwrap();
        let (i, j) = est.argmax_indices();
        let direct = mean_oscillation(&f, i, j).unwrap();
        assert!((est.value - direct).abs() <= 1e-14 * est.value);
        let w = SampledFunction::from_fn(g, |x| x.abs().sqrt()).unwrap();
        let est = ainfty_constant(&w, &fam).unwrap();
        let (i, j) = est.argmax_indices();
        assert_eq!(est.value, ainfty_interval(&w, i, j).unwrap());
        let est = ap_constant(&w, 3.0, &fam).unwrap();
        let (i, j) = est.argmax_indices();
        assert_eq!(est.value, ap_interval(&w, 3.0, i, j).unwrap());
    }

    #[test]
    fn family_ordering_of_estimates() {
        let g = grid(2.0, 128);
        let f = SampledFunction::from_fn(g, |x| x.abs().ln() + (3.0 * x).sin()).unwrap();
        let w = f.map(|v| (0.4 * v).exp()).unwrap();
        let fam = |s| IntervalFamily::new(&g, s, 2).unwrap();
        let b: Vec<f64> = [FamilyStrategy::Dyadic, FamilyStrategy::Sliding, FamilyStrategy::Exhaustive]
            .iter()
            .map(|&s| bmo_norm(&f, &fam(s)).unwrap().value)
            .collect();
        assert!(b[0] <= b[1] && b[1] <= b[2], "{b:?}");
        let a: Vec<f64> = [FamilyStrategy::Dyadic, FamilyStrategy::Sliding, FamilyStrategy::Exhaustive]
            .iter()
            .map(|&s| ainfty_constant(&w, &fam(s)).unwrap().value)
            .collect();
        assert!(a[0] <= a[1] && a[1] <= a[2], "{a:?}");
    }

    #[test]
    fn ap_dominates_ainfty_and_decreases_in_p() {
        let g = grid(4.0, 512);
        let fam = IntervalFamily::default_for(&g).unwrap();
        for a in [0.25, 0.5, 0.9] {
            let w = SampledFunction::from_fn(g, |x| x.abs().powf(a)).unwrap();
            let ainf = ainfty_constant(&w, &fam).unwrap().value;
            let mut prev = f64::INFINITY;
            for p in [1.5, 2.0, 3.0, 5.0, 10.0] {
                let ap = ap_constant(&w, p, &fam).unwrap().value;
                assert!(ap <= prev * (1.0 + 1e-12));
                assert!(ap >= ainf - 1e-9);
                prev = ap;
            }
            assert!(ainf >= 1.0 - 1e-9);
        }
    }

    #[test]
    fn power_weight_a2_on_centered_intervals() {
        // (mean |x|^a)(mean |x|^-a) = 1/(1 - a^2) on (-r, r)
        let g = grid(1.0, 1 << 14);
        let w = SampledFunction::from_fn(g, |x| x.abs().sqrt()).unwrap();
        let v = ap_interval(&w, 2.0, 0, g.len()).unwrap();
        let n = g.len() as f64;
        let direct = w.values().iter().sum::<f64>() / n * w.values().iter().map(|v| 1.0 / v).sum::<f64>() / n;
        assert!((v - direct).abs() < 1e-12 * direct);
        // The midpoint sum of |x|^{-1/2} converges like h^{1/2}.
        assert!((v - 4.0 / 3.0).abs() < 1e-2, "{v}");
    }
}
