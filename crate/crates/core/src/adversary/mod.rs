//! Adaptive lower-bound adversaries.
//!
//! Each adversary answers Cut and Eval queries for all players at once, keeps
//! hidden windows free of known points, and shrinks them whenever an answer
//! would land inside. `finalize` returns piecewise-constant densities that
//! reproduce every answer; `certify` brute-forces the best allocation the
//! known points allow.
//!
//! Extension point: for `n >= 4` players, a grouped construction scales the
//! three-player system by assigning groups of players to each type. It is not
//! implemented here.

mod equitable;
mod perfect;
mod prms;
mod segments;

pub use equitable::EquitableAdversary;
pub use perfect::PerfectAdversary;
pub use prms::{layout, Layout, PrmsAdversary};
pub use segments::Segments;

use crate::error::{Error, Result};
use crate::query::Adversary;

/// Builds an adversary by CLI name: `prms`, `perfect` or `equitable`.
pub fn by_name(name: &str) -> Result<Box<dyn Adversary>> {
    match name {
        "prms" => Ok(Box::new(PrmsAdversary::new())),
        "perfect" => Ok(Box::new(PerfectAdversary::new())),
        "equitable" => Ok(Box::new(EquitableAdversary::new())),
        other => Err(Error::Parse(format!("unknown adversary {other:?} (prms, perfect, equitable)"))),
    }
}
