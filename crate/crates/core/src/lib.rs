//! Numerical verification toolkit for one-dimensional flows of vector
//! fields whose spatial derivative has bounded mean oscillation.
//!
//! The crate samples functions on origin-staggered uniform grids and
//! estimates sup-over-intervals functionals (BMO, `A_p`, `A_inf`), integrates
//! flow maps together with their logarithmic derivatives, solves the
//! transport equation by characteristics, and compares measured quantities
//! against the right-hand sides of the corresponding estimates in
//! [`BoundReport`]s.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod cli;
pub mod error;
pub mod expr;
pub mod fields;
pub mod flow;
pub mod interp;
pub mod ledger;
pub mod quad;
pub mod report;
pub mod sampled;
pub mod transport;
pub mod verify;
pub mod weights;

pub use error::{Error, Result};
pub use expr::Expr;
pub use fields::{FieldNorms, FieldSpec, Spatial, TimeProfile};
pub use flow::{Direction, FlowResult, SolverConfig, SolverStats};
pub use ledger::ConstantsLedger;
pub use report::{BoundReport, Outcome};
pub use sampled::{FamilyStrategy, IntervalFamily, SampledFunction, UniformGrid};
pub use transport::{InitialDatum, TransportResult};
pub use weights::WeightEstimate;
