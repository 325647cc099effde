//! Dirac-Kähler calculus for Killing fields, Komar energies and their
//! fluid-dynamical reading.

// Tensor code indexes several arrays per loop; negated comparisons keep NaN residuals failing.
#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord)]

pub mod algebra;
pub mod bimetric;
pub mod calculus;
pub mod curvature;
pub mod error;
pub mod fluid;
pub mod expr;
pub mod geometry;
pub mod jet;
pub mod killing;
pub mod komar;
pub mod report;
pub mod runner;
pub mod sampling;
pub mod scenarios;

pub use algebra::{Multivector, MetricAtPoint, Scalar};
pub use error::{Error, Result};
pub use geometry::{Chart, ChartKind, MetricField, Point};
pub use jet::Jet;
pub use report::{ResidualReport, Status};
pub use runner::{run_checks, Check, RunConfig, RunOutcome};
pub use scenarios::{load_scenario, KillingField, Scenario};
