//! Flow maps `φ_s(t, x)` and log-derivatives `ℓ = log|∂x φ|`, integrated
//! per initial condition, and the structural checks on them.
//!
//! `ℓ` is always integrated along the trajectory (`ℓ' = ∂x b(t, φ)`), never
//! recovered by differencing `φ`; differencing appears only as the
//! cross-check in [`density_formula_check`].

mod checks;
mod dopri;

pub use checks::{
    check_inverse, check_monotone, check_semigroup, density_formula_check, derivative_bound_check,
    inverse_roundtrip,
};

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fields::FieldSpec;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub rtol: f64,
    pub atol: f64,
    pub max_step: f64,
    pub min_step: f64,
    /// Trajectories of origin-pinning fields closer than this to 0 are
    /// set to the invariant solution `φ ≡ 0`.
    pub guard: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            rtol: 1e-8,
            atol: 1e-10,
            max_step: 1.0,
            min_step: 1e-12,
            guard: 1e-14,
        }
    }
}

impl SolverConfig {
    /// Essentially pure relative control on `φ`, for trajectories that
    /// approach an attracting origin and must keep relative accuracy there.
    pub fn relative(rtol: f64) -> Self {
        Self {
            rtol,
            atol: 1e-40,
            guard: 1e-250,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("solver.rtol", self.rtol),
            ("solver.atol", self.atol),
            ("solver.max_step", self.max_step),
            ("solver.min_step", self.min_step),
            ("solver.guard", self.guard),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::param(name, format!("must be positive and finite, got {v}")));
            }
        }
        if self.min_step >= self.max_step {
            return Err(Error::param("solver.min_step", "must be below solver.max_step"));
        }
        Ok(())
    }
}

/// Aggregated over trajectories by [`SolverStats::merge`] (associative).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverStats {
    pub steps: u64,
    pub rejections: u64,
    pub evaluations: u64,
    pub min_step: f64,
    pub max_step: f64,
    /// Trajectories set to the invariant solution at the origin.
    pub pinned: u64,
}

impl Default for SolverStats {
    fn default() -> Self {
        Self {
            steps: 0,
            rejections: 0,
            evaluations: 0,
            min_step: f64::INFINITY,
            max_step: 0.0,
            pinned: 0,
        }
    }
}

impl SolverStats {
    pub fn merge(self, o: Self) -> Self {
        Self {
            steps: self.steps + o.steps,
            rejections: self.rejections + o.rejections,
            evaluations: self.evaluations + o.evaluations,
            min_step: self.min_step.min(o.min_step),
            max_step: self.max_step.max(o.max_step),
            pinned: self.pinned + o.pinned,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Forward,
    Backward,
}

/// `phi[j][i] = φ(times[j], x[i])` with `times[0]` the start time, and
/// `log_d` likewise. Backward flows store their lattice in integration
/// (decreasing) order.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowResult {
    pub field: String,
    pub direction: Direction,
    pub times: Vec<f64>,
    pub x: Vec<f64>,
    pub phi: Vec<Vec<f64>>,
    pub log_d: Vec<Vec<f64>>,
    pub stats: SolverStats,
    pub config: SolverConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlowSummary {
    pub field: String,
    pub direction: Direction,
    pub s: f64,
    pub times: Vec<f64>,
    pub grid: PointSet,
    pub stats: SolverStats,
    pub solver: SolverConfig,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PointSet {
    pub n: usize,
    pub x_min: f64,
    pub x_max: f64,
}

impl FlowResult {
    pub fn start(&self) -> f64 {
        self.times[0]
    }

    pub fn end(&self) -> f64 {
        self.times[self.times.len() - 1]
    }

    pub fn final_phi(&self) -> &[f64] {
        &self.phi[self.phi.len() - 1]
    }

    pub fn final_log_d(&self) -> &[f64] {
        &self.log_d[self.log_d.len() - 1]
    }

    /// Whether trajectory `i` was pinned at the origin by time index `j`.
    pub fn is_pinned(&self, j: usize, i: usize) -> bool {
        self.log_d[j][i].is_infinite()
    }

    pub fn summary(&self) -> FlowSummary {
        FlowSummary {
            field: self.field.clone(),
            direction: self.direction,
            s: self.start(),
            times: self.times.clone(),
            grid: PointSet {
                n: self.x.len(),
                x_min: self.x[0],
                x_max: self.x[self.x.len() - 1],
            },
            stats: self.stats,
            solver: self.config,
        }
    }

    /// Long format `t,x,phi,logD`, one row per (time, node).
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,x,phi,logD\n");
        for (j, &t) in self.times.iter().enumerate() {
            for (i, &x) in self.x.iter().enumerate() {
                let _ = writeln!(
                    out,
                    "{:.17e},{:.17e},{:.17e},{:.17e}",
                    t, x, self.phi[j][i], self.log_d[j][i]
                );
            }
        }
        out
    }
}

fn validate_inputs(times: &[f64], x: &[f64], cfg: &SolverConfig, dir: f64) -> Result<()> {
    cfg.validate()?;
    if times.is_empty() {
        return Err(Error::param("times", "need at least the start time"));
    }
    if times.iter().any(|t| !t.is_finite() || *t < 0.0) {
        return Err(Error::param("times", "times must be finite and >= 0"));
    }
    if times.windows(2).any(|w| (w[1] - w[0]) * dir <= 0.0) {
        let order = if dir > 0.0 { "increasing" } else { "decreasing" };
        return Err(Error::param("times", format!("times must be strictly {order}")));
    }
    if x.is_empty() || x.iter().any(|v| !v.is_finite()) {
        return Err(Error::param("x_grid", "need finite initial points"));
    }
    if x.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::param("x_grid", "initial points must be strictly increasing"));
    }
    Ok(())
}

fn run(b: &FieldSpec, times: &[f64], x: &[f64], cfg: &SolverConfig, direction: Direction) -> Result<FlowResult> {
    let trajectories = x
        .par_iter()
        .map(|&x0| dopri::integrate(b, times, x0, cfg))
        .collect::<Result<Vec<_>>>()?;
    let m = times.len();
    let mut phi = vec![Vec::with_capacity(x.len()); m];
    let mut log_d = vec![Vec::with_capacity(x.len()); m];
    let mut stats = SolverStats::default();
    for tr in trajectories {
        for j in 0..m {
            phi[j].push(tr.phi[j]);
            log_d[j].push(tr.log_d[j]);
        }
        stats = stats.merge(tr.stats);
    }
    let fr = FlowResult {
        field: b.id(),
        direction,
        times: times.to_vec(),
        x: x.to_vec(),
        phi,
        log_d,
        stats,
        config: *cfg,
    };
    check_monotone(&fr)?;
    Ok(fr)
}

/// `φ_s(t, x)` for `t` in the increasing lattice `times` (`times[0] = s`).
pub fn forward_flow(b: &FieldSpec, times: &[f64], x: &[f64], cfg: &SolverConfig) -> Result<FlowResult> {
    validate_inputs(times, x, cfg, 1.0)?;
    run(b, times, x, cfg, Direction::Forward)
}

/// `φ̃_t(s, x)` for `s` in the decreasing lattice `times` (`times[0] = t`).
pub fn backward_flow(b: &FieldSpec, times: &[f64], x: &[f64], cfg: &SolverConfig) -> Result<FlowResult> {
    validate_inputs(times, x, cfg, -1.0)?;
    run(b, times, x, cfg, Direction::Backward)
}

/// `X' = -b(t, X)` forward in time from `X(times[0]) = x0`: the curves
/// along which transported data stay constant.
pub(crate) fn reverse_characteristic(b: &FieldSpec, times: &[f64], x0: f64, cfg: &SolverConfig) -> Result<Vec<f64>> {
    validate_inputs(times, &[x0], cfg, 1.0)?;
    Ok(dopri::integrate_signed(b, -1.0, times, x0, cfg)?.phi)
}

/// `count + 1` equispaced times from `a` to `b` with exact endpoints.
pub fn lattice(a: f64, b: f64, count: usize) -> Vec<f64> {
    let count = count.max(1);
    (0..=count)
        .map(|k| {
            if k == count {
                b
            } else {
                a + (b - a) * k as f64 / count as f64
            }
        })
        .collect()
}
