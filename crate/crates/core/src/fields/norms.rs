use serde::{Deserialize, Serialize};

use super::{FieldSpec, Spatial, TimeProfile};
use crate::error::{Error, Result};
use crate::report::IntervalSpan;
use crate::sampled::{FamilyDescriptor, GridDescriptor, IntervalFamily, UniformGrid};
use crate::weights::{bmo_norm, star_norm};

/// Norms of `∂x b(t, ·)` for a separable field: the spatial norms are
/// estimated once and scaled by `a(t)`, so `B(t) = bmo ∫_0^t a` exactly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldNorms {
    pub field: String,
    /// `‖B'‖_BMO` on the grid and family below.
    pub bmo: f64,
    pub bmo_argmax: IntervalSpan,
    /// `‖B'‖_*`, when the grid covers `[-1, 1]`.
    pub star: Option<f64>,
    /// `sup |B'|` for Lipschitz families.
    pub sup: Option<f64>,
    pub profile: TimeProfile,
    pub grid: GridDescriptor,
    pub family: FamilyDescriptor,
}

impl FieldNorms {
    pub fn compute(b: &FieldSpec, grid: &UniformGrid, family: &IntervalFamily) -> Result<Self> {
        if matches!(b.spatial(), Spatial::Truncated { .. }) && !b.is_autonomous() {
            return Err(Error::param(
                "field",
                "a truncated field with a time profile is not separable in t and x",
            ));
        }
        let spatial = FieldSpec::autonomous(b.spatial().clone());
        let d = spatial.sample_dx(0.0, grid)?;
        let est = bmo_norm(&d, family)?;
        let star = if grid.half_width() >= 1.0 {
            Some(star_norm(&d, family)?)
        } else {
            None
        };
        Ok(Self {
            field: b.id(),
            bmo: est.value,
            bmo_argmax: est.argmax,
            star,
            sup: b.spatial().lipschitz(),
            profile: b.profile().clone(),
            grid: grid.descriptor(),
            family: family.descriptor(),
        })
    }

    /// Norms with a known spatial BMO value (and no starred or sup norm).
    pub fn from_bmo(bmo: f64, profile: TimeProfile, grid: GridDescriptor, family: FamilyDescriptor) -> Self {
        Self {
            field: String::new(),
            bmo,
            bmo_argmax: IntervalSpan {
                i: 0,
                j: 0,
                x_left: 0.0,
                x_right: 0.0,
            },
            star: None,
            sup: None,
            profile,
            grid,
            family,
        }
    }

    pub fn bmo_at(&self, t: f64) -> f64 {
        self.bmo * self.profile.eval(t)
    }

    pub fn star_at(&self, t: f64) -> Option<f64> {
        self.star.map(|s| s * self.profile.eval(t))
    }

    pub fn sup_at(&self, t: f64) -> Option<f64> {
        self.sup.map(|s| s * self.profile.eval(t))
    }

    /// `B(t) = ∫_0^t ‖∂x b(s, ·)‖_BMO ds`.
    pub fn integral(&self, t: f64) -> f64 {
        self.bmo * self.profile.integral(t)
    }

    /// `∫_s^t ‖∂x b(r, ·)‖_∞ dr`.
    pub fn sup_integral(&self, s: f64, t: f64) -> Option<f64> {
        self.sup
            .map(|a| a * (self.profile.integral(t) - self.profile.integral(s)))
    }
}
