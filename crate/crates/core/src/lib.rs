//! Finds the k most probable (Bayesian) or most plausible (belief-function)
//! explanations of observed evidence in a discrete model whose joint
//! distribution is given as a product of local valuations.
//!
//! The search is a genetic algorithm whose operators preserve evidence
//! clamps by construction and whose objective punishes already-returned
//! configurations down to zero, so repeated runs peel off the 1st, 2nd, …,
//! k-th best explanation. An exact enumeration oracle with capacity guards
//! provides ground truth at verification scale.
//!
//! Module map:
//! - [`model`]: variables, configurations, evidence, the model container,
//!   and whole-model validation.
//! - [`prob`]: conditional probability tables with the fixed flat layout
//!   and the product-of-lookups objective.
//! - [`dst`]: Dempster-Shafer calculus on focal elements and the
//!   singleton-commonality objective.
//! - [`ga`]: the genetic search and the outer blocking loop.
//! - [`oracle`]: brute-force top-k, exact joint commonality, joint tables.
//! - [`gen`]: seed-deterministic random models for testing.
//! - [`format`]: model / evidence / result file schemas.

pub mod dst;
pub mod error;
pub mod format;
pub mod ga;
pub mod gen;
pub mod model;
pub mod oracle;
pub mod prob;
pub mod score;

pub use error::{Error, Result};
pub use ga::{k_mpe, run_ga, BlockedSet, GaParams, RankedExplanation, Selection};
pub use model::{Configuration, Evidence, Model, ModelKind, Variable};
pub use oracle::{enumerate_top_k, OracleResult};
pub use score::Score;
