//! Exact-arithmetic engine for cake-cutting protocols in the Robertson-Webb
//! query model and its two variants.
//!
//! Module map:
//! - [`valuation`]: piecewise-constant densities and the exact Cut/Eval answers.
//! - [`query`]: the referee that routes queries, enforces the query model and logs transcripts.
//! - [`fairness`]: allocations, fairness gaps and brute-force connected search.
//! - [`protocols`]: upper-bound protocols.
//! - [`adversary`]: adaptive lower-bound adversaries.
//! - [`movingknife`]: moving-knife steps and their bisection simulation.
//! - [`cli`]: command-line front end.

pub mod adversary;
pub mod cli;
pub mod error;
pub mod fairness;
pub mod gen;
pub mod movingknife;
pub mod protocols;
pub mod query;
pub mod rational;
pub mod valuation;

pub use error::{Error, Result};
pub use rational::Q;
