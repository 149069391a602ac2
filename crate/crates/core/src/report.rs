//! The shared comparison record (measured left-hand side against a bound)
//! and the JSON encoding used for every report and summary.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::Result;
use crate::ledger::ConstantsLedger;
use crate::sampled::{FamilyDescriptor, GridDescriptor, UniformGrid};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Outcome {
    /// The comparison was carried out; `pass` reflects it.
    Checked,
    /// A precondition did not hold; `note` says which. Counts as passing.
    Skipped,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntervalSpan {
    pub i: usize,
    pub j: usize,
    pub x_left: f64,
    pub x_right: f64,
}

impl IntervalSpan {
    pub fn on(grid: &UniformGrid, (i, j): (usize, usize)) -> Self {
        Self {
            i,
            j,
            x_left: grid.edge(i),
            x_right: grid.edge(j),
        }
    }
}

/// Measured value against a theorem bound.
///
/// For checked reports `pass` holds iff
/// `value <= bound * (1 + rel_tol) + abs_tol`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub functional: String,
    pub value: f64,
    pub bound: f64,
    pub ratio: f64,
    pub pass: bool,
    pub outcome: Outcome,
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Which estimator and discretization produced `value`.
    pub provenance: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub argmax: Option<IntervalSpan>,
    /// Coordinates of the sample that attains the reported maximum.
    #[serde(skip_serializing_if = "BTreeMap::is_empty", default)]
    pub binding: BTreeMap<String, f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridDescriptor>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub family: Option<FamilyDescriptor>,
    pub ledger: ConstantsLedger,
    #[serde(skip_serializing_if = "BTreeMap::is_empty", default)]
    pub details: BTreeMap<String, f64>,
}

impl BoundReport {
    pub fn compare(
        functional: impl Into<String>,
        value: f64,
        bound: f64,
        rel_tol: f64,
        abs_tol: f64,
        ledger: &ConstantsLedger,
    ) -> Self {
        let pass = value <= bound * (1.0 + rel_tol) + abs_tol;
        let ratio = if bound > 0.0 {
            value / bound
        } else if value <= 0.0 {
            0.0
        } else {
            f64::INFINITY
        };
        Self {
            functional: functional.into(),
            value,
            bound,
            ratio,
            pass,
            outcome: Outcome::Checked,
            rel_tol,
            abs_tol,
            provenance: String::new(),
            note: None,
            argmax: None,
            binding: BTreeMap::new(),
            grid: None,
            family: None,
            ledger: *ledger,
            details: BTreeMap::new(),
        }
    }

    pub fn skipped(
        functional: impl Into<String>,
        value: f64,
        bound: f64,
        reason: impl Into<String>,
        ledger: &ConstantsLedger,
    ) -> Self {
        let mut r = Self::compare(functional, value, bound, 0.0, 0.0, ledger);
        r.pass = true;
        r.outcome = Outcome::Skipped;
        r.note = Some(reason.into());
        r
    }

    pub fn is_skipped(&self) -> bool {
        self.outcome == Outcome::Skipped
    }

    pub fn with_provenance(mut self, p: impl Into<String>) -> Self {
        self.provenance = p.into();
        self
    }

    pub fn with_grid(mut self, g: GridDescriptor) -> Self {
        self.grid = Some(g);
        self
    }

    pub fn with_family(mut self, f: FamilyDescriptor) -> Self {
        self.family = Some(f);
        self
    }

    pub fn with_argmax(mut self, a: IntervalSpan) -> Self {
        self.argmax = Some(a);
        self
    }

    pub fn with_note(mut self, n: impl Into<String>) -> Self {
        self.note = Some(n.into());
        self
    }

    pub fn bind(mut self, key: &str, v: f64) -> Self {
        self.binding.insert(key.to_string(), v);
        self
    }

    pub fn detail(mut self, key: &str, v: f64) -> Self {
        self.details.insert(key.to_string(), v);
        self
    }

    /// Fails the report regardless of the numeric comparison (used when a
    /// structural invariant broke alongside the measured quantity).
    pub fn force_fail(mut self, why: impl Into<String>) -> Self {
        self.pass = false;
        self.outcome = Outcome::Checked;
        self.note = Some(why.into());
        self
    }

    pub fn one_line(&self) -> String {
        let status = match (self.outcome, self.pass) {
            (Outcome::Skipped, _) => "SKIP",
            (_, true) => "PASS",
            (_, false) => "FAIL",
        };
        format!(
            "{status} {:<32} value={:.6e} bound={:.6e}",
            self.functional, self.value, self.bound
        )
    }
}

/// Rounds `x` to `digits` significant decimal digits.
pub fn round_sig(x: f64, digits: usize) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    format!("{:.*e}", digits.saturating_sub(1), x)
        .parse()
        .unwrap_or(x)
}

fn round_value(v: &mut Value) {
    match v {
        Value::Number(num) => {
            if num.is_f64() {
                if let Some(x) = num.as_f64() {
                    if let Some(r) = serde_json::Number::from_f64(round_sig(x, 12)) {
                        *num = r;
                    }
                }
            }
        }
        Value::Array(items) => items.iter_mut().for_each(round_value),
        Value::Object(map) => map.values_mut().for_each(round_value),
        _ => {}
    }
}

/// Serializes with every real rounded to 12 significant digits.
pub fn to_json_value<T: Serialize>(t: &T) -> Result<Value> {
    let mut v = serde_json::to_value(t)?;
    round_value(&mut v);
    Ok(v)
}

pub fn to_json_string<T: Serialize>(t: &T) -> Result<String> {
    let v = to_json_value(t)?;
    let mut s = serde_json::to_string_pretty(&v)?;
    s.push('\n');
    Ok(s)
}
