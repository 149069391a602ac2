//! Run configuration: flat `key = value` files, `--set` overrides and the
//! dedicated flags, applied in that order.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::flow::SolverConfig;
use crate::ledger::ConstantsLedger;
use crate::sampled::{FamilyStrategy, IntervalFamily, UniformGrid};

pub const KEYS_HELP: &str = "\
Config keys (file lines `key = value`, `#` comments; or --set key=value):
  grid.L, grid.n                 half width and node count of the grid
  family.strategy, family.min_len  dyadic | sliding | exhaustive; shortest interval
  solver.rtol, solver.atol, solver.max_step, solver.min_step, solver.guard
  ledger.C1 .. ledger.C7, ledger.c, ledger.tau, ledger.epsilon0,
  ledger.alpha, ledger.beta, ledger.jn_c1, ledger.jn_c2
Environment: ZYGFLOW_THREADS caps worker threads (0 = all cores).";

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridConfig {
    #[serde(rename = "L")]
    pub half_width: f64,
    pub n: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FamilyConfig {
    pub strategy: FamilyStrategy,
    pub min_len: usize,
}

/// The effective configuration, embedded in every manifest.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RunConfig {
    pub grid: GridConfig,
    pub family: FamilyConfig,
    pub solver: SolverConfig,
    pub ledger: ConstantsLedger,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            grid: GridConfig {
                half_width: 10.0,
                n: 1024,
            },
            family: FamilyConfig {
                strategy: FamilyStrategy::Sliding,
                min_len: 4,
            },
            solver: SolverConfig::default(),
            ledger: ConstantsLedger::default(),
        }
    }
}

fn number<T: std::str::FromStr>(key: &str, raw: &str) -> Result<T> {
    raw.parse()
        .map_err(|_| Error::param(key, format!("cannot parse `{raw}`")))
}

impl RunConfig {
    pub fn set(&mut self, key: &str, raw: &str) -> Result<()> {
        let raw = raw.trim();
        match key {
            "grid.L" => self.grid.half_width = number(key, raw)?,
            "grid.n" => self.grid.n = number(key, raw)?,
            "family.strategy" => self.family.strategy = raw.parse()?,
            "family.min_len" => self.family.min_len = number(key, raw)?,
            "solver.rtol" => self.solver.rtol = number(key, raw)?,
            "solver.atol" => self.solver.atol = number(key, raw)?,
            "solver.max_step" => self.solver.max_step = number(key, raw)?,
            "solver.min_step" => self.solver.min_step = number(key, raw)?,
            "solver.guard" => self.solver.guard = number(key, raw)?,
            _ => match key.strip_prefix("ledger.") {
                Some(entry) => self.ledger.set(entry, number(key, raw)?)?,
                None => return Err(Error::param(key, "unknown config key")),
            },
        }
        Ok(())
    }

    /// Applies a `key = value` file; blank lines and `#` comments are ignored.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (k, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or_default().trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("config line {}: expected `key = value`", k + 1)))?;
            self.set(key.trim(), value)?;
        }
        Ok(())
    }

    pub fn apply_pair(&mut self, pair: &str) -> Result<()> {
        let (key, value) = pair
            .split_once('=')
            .ok_or_else(|| Error::param("--set", format!("expected KEY=VALUE, got `{pair}`")))?;
        self.set(key.trim(), value)
    }

    /// Recomputes derived ledger entries and validates everything.
    pub fn finish(mut self) -> Result<Self> {
        self.ledger = self.ledger.resolved()?;
        self.solver.validate()?;
        self.grid()?;
        Ok(self)
    }

    pub fn grid(&self) -> Result<UniformGrid> {
        UniformGrid::new(self.grid.half_width, self.grid.n)
    }

    pub fn family(&self, grid: &UniformGrid) -> Result<IntervalFamily> {
        IntervalFamily::new(grid, self.family.strategy, self.family.min_len)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn file_then_overrides() {
        let mut c = RunConfig::default();
        c.apply_text("# grid\ngrid.L = 8\ngrid.n=2048  # nodes\n\nfamily.strategy = dyadic\nledger.C3 = 6\n")
            .unwrap();
        c.apply_pair("solver.rtol=1e-9").unwrap();
        let c = c.finish().unwrap();
        assert_eq!((c.grid.half_width, c.grid.n), (8.0, 2048));
        assert_eq!(c.family.strategy, FamilyStrategy::Dyadic);
        assert_eq!(c.solver.rtol, 1e-9);
        assert_eq!(c.ledger.c3, 6.0);
        assert_ne!(c.ledger.delta0, ConstantsLedger::default().delta0);
    }

    #[test]
    fn rejects_bad_entries() {
        let mut c = RunConfig::default();
        assert!(c.apply_text("grid.L 8").is_err());
        assert!(c.set("grid.m", "3").is_err());
        assert!(c.set("grid.n", "many").is_err());
        assert!(c.set("ledger.delta0", "0.1").is_err());
        assert!(c.set("ledger.nosuch", "0.1").is_err());
        assert!(c.apply_pair("grid.n").is_err());
        c.set("grid.n", "3").unwrap();
        assert!(c.finish().is_err());
    }
}
