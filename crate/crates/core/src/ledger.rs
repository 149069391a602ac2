//! The constants ledger: every unnamed constant of the estimates, with
//! configurable defaults. Reports embed the ledger they were checked against.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConstantsLedger {
    #[serde(rename = "C1")]
    pub c1: f64,
    #[serde(rename = "C2")]
    pub c2: f64,
    #[serde(rename = "C3")]
    pub c3: f64,
    #[serde(rename = "C4")]
    pub c4: f64,
    #[serde(rename = "C5")]
    pub c5: f64,
    #[serde(rename = "C6")]
    pub c6: f64,
    #[serde(rename = "C7")]
    pub c7: f64,
    /// Exponential rate constant of the flow and transport estimates.
    pub c: f64,
    /// Reverse Hölder scale: `r_w = 1 + 1/(tau [w])`, `eps_w = 1/(1 + tau [w])`.
    pub tau: f64,
    pub epsilon0: f64,
    /// Per-slab increment solving `C3 d exp(C3 C4 d) = epsilon0 / 2`.
    pub delta0: f64,
    pub alpha: f64,
    pub beta: f64,
    pub jn_c1: f64,
    pub jn_c2: f64,
}

impl Default for ConstantsLedger {
    fn default() -> Self {
        let c3 = 8.0;
        let c4 = 4.0;
        let jn_c2 = 0.5;
        let mut ledger = Self {
            c1: 2.0 * c3,
            c2: 2.0 * c3,
            c3,
            c4,
            // 5 + 1/log 2 from the increment comparison, plus 2 for |b(x+1) - b(x)|.
            c5: 7.0 + 1.0 / std::f64::consts::LN_2,
            c6: 2.0 * c3,
            c7: c3 * c4,
            c: c3 * c4,
            tau: 1.0,
            epsilon0: f64::min(1.0, jn_c2 / 2.0),
            delta0: 0.0,
            alpha: 0.3,
            beta: 4.0,
            jn_c1: std::f64::consts::SQRT_2,
            jn_c2,
        };
        ledger.delta0 = solve_delta0(ledger.c3, ledger.c4, ledger.epsilon0)
            .expect("default constants admit a slab increment");
        ledger
    }
}

impl ConstantsLedger {
    /// Recomputes `delta0` after `C3`, `C4` or `epsilon0` changed.
    pub fn resolved(mut self) -> Result<Self> {
        self.delta0 = solve_delta0(self.c3, self.c4, self.epsilon0)?;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        let entries = [
            ("C1", self.c1),
            ("C2", self.c2),
            ("C3", self.c3),
            ("C4", self.c4),
            ("C5", self.c5),
            ("C6", self.c6),
            ("C7", self.c7),
            ("c", self.c),
            ("tau", self.tau),
            ("epsilon0", self.epsilon0),
            ("delta0", self.delta0),
            ("alpha", self.alpha),
            ("beta", self.beta),
            ("jn_c1", self.jn_c1),
            ("jn_c2", self.jn_c2),
        ];
        for (name, v) in entries {
            if !v.is_finite() || v <= 0.0 {
                return Err(Error::param(name, format!("must be positive and finite, got {v}")));
            }
        }
        if self.epsilon0 > 1.0 {
            return Err(Error::param("epsilon0", "must not exceed 1"));
        }
        if !(self.alpha < 1.0 && 1.0 < self.beta) {
            return Err(Error::param("alpha/beta", "need alpha < 1 < beta"));
        }
        let residual = delta0_residual(self.c3, self.c4, self.epsilon0, self.delta0);
        if residual.abs() > 1e-10 {
            return Err(Error::param(
                "delta0",
                format!("does not solve C3 d exp(C3 C4 d) = epsilon0/2 (residual {residual:e})"),
            ));
        }
        Ok(())
    }

    /// Sets one entry by its config key (`C1`..`C7`, `c`, `tau`, ...).
    pub fn set(&mut self, key: &str, value: f64) -> Result<()> {
        let slot = match key {
            "C1" => &mut self.c1,
            "C2" => &mut self.c2,
            "C3" => &mut self.c3,
            "C4" => &mut self.c4,
            "C5" => &mut self.c5,
            "C6" => &mut self.c6,
            "C7" => &mut self.c7,
            "c" => &mut self.c,
            "tau" => &mut self.tau,
            "epsilon0" => &mut self.epsilon0,
            "alpha" => &mut self.alpha,
            "beta" => &mut self.beta,
            "jn_c1" => &mut self.jn_c1,
            "jn_c2" => &mut self.jn_c2,
            "delta0" => {
                return Err(Error::param("ledger.delta0", "derived from C3, C4 and epsilon0"))
            }
            other => return Err(Error::param(&format!("ledger.{other}"), "unknown ledger key")),
        };
        *slot = value;
        Ok(())
    }
}

fn delta0_residual(c3: f64, c4: f64, eps0: f64, d: f64) -> f64 {
    c3 * d * (c3 * c4 * d).exp() - eps0 / 2.0
}

/// Bisection for `C3 d exp(C3 C4 d) = epsilon0 / 2` on `[1e-12, 10]`.
pub fn solve_delta0(c3: f64, c4: f64, epsilon0: f64) -> Result<f64> {
    let g = |d: f64| delta0_residual(c3, c4, epsilon0, d);
    let (mut lo, mut hi) = (1e-12, 10.0);
    if !(g(lo) < 0.0 && g(hi) > 0.0) {
        return Err(Error::Bracket(format!(
            "no slab increment in [1e-12, 10] for C3 = {c3}, C4 = {c4}, epsilon0 = {epsilon0}"
        )));
    }
    while hi - lo > 1e-15 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if g(mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}
