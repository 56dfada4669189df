//! Upper-bound protocols. Each one drives a [`Referee`], builds a
//! model-legal output and finalizes the transcript.
//!
//! Protocols talk to the referee through [`Ctx`], which remembers every
//! answer already known (including the prefix value implied by a Cut
//! answer), so no fact is paid for twice.

mod austin;
mod cut_choose;
mod discretize;
mod ef3;
mod equitable;
mod extension;
mod rms;
mod rwminus;

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use itertools::Itertools;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::fairness::{gap, measure_splitting_gap, Allocation, Notion, Partition};
use crate::query::Referee;
use crate::rational::{fmt_q, one, zero, Q};

pub use austin::austin_perfect_2;
pub use cut_choose::cut_and_choose;
pub use discretize::{discretize_and_assemble, AssemblyResult, AssemblyTarget};
pub use ef3::ef3_barbanel_brams;
pub use equitable::equitable_2;
pub use extension::austin_extension_k;
pub use rms::rms_envy_free;
pub use rwminus::{rwminus_answer_cut, rwminus_budget};

/// Hard cap on bisection rounds; hitting it means a precondition failed.
pub(crate) const MAX_ROUNDS: usize = 400;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProtocolResult {
    pub allocation: Allocation,
    pub queries_used: usize,
    pub epsilon: Q,
    pub notion: Notion,
    /// Set when a protocol left its primary search path (the RMS grid scan).
    pub fallback: bool,
}

impl ProtocolResult {
    pub fn to_json(&self, gap: Option<&Q>) -> serde_json::Value {
        let mut v = serde_json::json!({
            "allocation": self.allocation.to_json(),
            "queries": self.queries_used,
            "epsilon": fmt_q(&self.epsilon),
            "notion": self.notion.to_string(),
            "fallback": self.fallback,
        });
        if let Some(g) = gap {
            v["gap"] = serde_json::Value::String(fmt_q(g));
        }
        v
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SplitResult {
    pub partition: Partition,
    pub queries_used: usize,
    pub epsilon: Q,
}

impl SplitResult {
    pub fn to_json(&self, gap: Option<&Q>) -> serde_json::Value {
        let mut v = serde_json::json!({
            "partition": self.partition.to_json(),
            "queries": self.queries_used,
            "epsilon": fmt_q(&self.epsilon),
            "notion": format!("splitting:{}", self.partition.len()),
        });
        if let Some(g) = gap {
            v["gap"] = serde_json::Value::String(fmt_q(g));
        }
        v
    }
}

/// Query front end with memoized knowledge of prefix values and cut answers.
pub struct Ctx<'r> {
    referee: &'r mut Referee,
    prefix: HashMap<(usize, Q), Q>,
    cuts: HashMap<(usize, Q), Q>,
}

impl<'r> Ctx<'r> {
    pub fn new(referee: &'r mut Referee) -> Self {
        let mut prefix = HashMap::new();
        for i in 0..referee.n_players() {
            prefix.insert((i, zero()), zero());
            prefix.insert((i, one()), one());
        }
        Ctx { referee, prefix, cuts: HashMap::new() }
    }

    pub fn n(&self) -> usize {
        self.referee.n_players()
    }

    pub fn queries(&self) -> usize {
        self.referee.query_count()
    }

    pub fn referee(&mut self) -> &mut Referee {
        self.referee
    }

    /// `Cut_i(alpha)`. A zero target is answered by the cake's left end for free.
    pub fn cut(&mut self, i: usize, alpha: &Q) -> Result<Q> {
        if alpha.is_zero() {
            return Ok(zero());
        }
        if let Some(y) = self.cuts.get(&(i, alpha.clone())) {
            return Ok(y.clone());
        }
        let y = self.referee.cut(i, alpha)?;
        self.cuts.insert((i, alpha.clone()), y.clone());
        self.prefix.insert((i, y.clone()), alpha.clone());
        Ok(y)
    }

    /// `V_i([0, y])`, asking only if not already known.
    pub fn eval(&mut self, i: usize, y: &Q) -> Result<Q> {
        if let Some(v) = self.prefix.get(&(i, y.clone())) {
            return Ok(v.clone());
        }
        let v = self.referee.eval(i, y)?;
        self.prefix.insert((i, y.clone()), v.clone());
        Ok(v)
    }

    pub fn value(&mut self, i: usize, l: &Q, r: &Q) -> Result<Q> {
        Ok(self.eval(i, r)? - self.eval(i, l)?)
    }

    /// Player `i`'s values of the consecutive segments delimited by sorted `cuts`.
    pub fn segment_values(&mut self, i: usize, cuts: &[Q]) -> Result<Vec<Q>> {
        let mut out = Vec::with_capacity(cuts.len() + 1);
        let mut prev = zero();
        for c in cuts.iter().chain(std::iter::once(&one())) {
            let v = self.eval(i, c)?;
            out.push(&v - &prev);
            prev = v;
        }
        Ok(out)
    }

    /// Values of every player for the segments of `cuts`.
    pub fn segment_matrix(&mut self, cuts: &[Q]) -> Result<Vec<Vec<Q>>> {
        (0..self.n()).map(|i| self.segment_values(i, cuts)).collect()
    }

    pub fn finish(self, allocation: Allocation, epsilon: &Q, notion: Notion, fallback: bool) -> Result<ProtocolResult> {
        let queries_used = self.referee.finalize(&allocation)?;
        Ok(ProtocolResult { allocation, queries_used, epsilon: epsilon.clone(), notion, fallback })
    }

    pub fn finish_partition(self, partition: Partition, epsilon: &Q) -> Result<SplitResult> {
        let queries_used = self.referee.finalize_partition(&partition)?;
        Ok(SplitResult { partition, queries_used, epsilon: epsilon.clone() })
    }
}

/// A segment-to-player order whose envy is at most `eps`, if any.
/// `seg[i][s]` is player `i`'s value of segment `s`.
pub fn envy_free_order(seg: &[Vec<Q>], eps: &Q) -> Option<Vec<usize>> {
    let n = seg.len();
    (0..n).permutations(n).find(|order| {
        // order[s] = owner of segment s; own[i] = segment owned by i.
        let mut own = vec![0; n];
        for (s, &p) in order.iter().enumerate() {
            own[p] = s;
        }
        (0..n).all(|i| seg[i].iter().all(|v| v - &seg[i][own[i]] <= *eps))
    })
}

pub(crate) fn require_players(referee: &Referee, n: usize, what: &str) -> Result<()> {
    if referee.n_players() != n {
        return Err(Error::Precondition(format!("{what} needs exactly {n} players, got {}", referee.n_players())));
    }
    Ok(())
}

pub(crate) fn require_positive(eps: &Q) -> Result<()> {
    if eps <= &zero() {
        return Err(Error::Precondition("epsilon must be positive".into()));
    }
    Ok(())
}

/// Named protocol selection for the command line and the FFI layer.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ProtocolKind {
    CutAndChoose,
    Equitable2,
    AustinPerfect2,
    AustinExtension { pieces: usize },
    Discretize { max_cuts: usize, notion: Notion },
    Ef3,
    Rms,
}

impl FromStr for ProtocolKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let s = s.to_ascii_lowercase().replace('_', "-");
        let (head, arg) = match s.split_once(':') {
            Some((h, a)) => (h.to_string(), Some(a.to_string())),
            None => (s.clone(), None),
        };
        let num = |a: &Option<String>, default: usize| -> Result<usize> {
            match a {
                None => Ok(default),
                Some(t) => t.parse().map_err(|_| Error::Parse(format!("bad protocol argument '{t}'"))),
            }
        };
        match head.as_str() {
            "cut-and-choose" => Ok(ProtocolKind::CutAndChoose),
            "equitable-2" | "equitable" => Ok(ProtocolKind::Equitable2),
            "austin-perfect-2" | "austin" | "perfect" => Ok(ProtocolKind::AustinPerfect2),
            "austin-extension" | "austin-extension-k" => Ok(ProtocolKind::AustinExtension { pieces: num(&arg, 3)? }),
            "discretize" | "discretize-and-assemble" => {
                Ok(ProtocolKind::Discretize { max_cuts: num(&arg, 2)?, notion: Notion::Envy })
            }
            "ef3" | "ef3-barbanel-brams" | "barbanel-brams" => Ok(ProtocolKind::Ef3),
            "rms" | "rms-envy-free" => Ok(ProtocolKind::Rms),
            _ => Err(Error::Parse(format!("unknown protocol '{s}'"))),
        }
    }
}

impl fmt::Display for ProtocolKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ProtocolKind::CutAndChoose => f.write_str("cut-and-choose"),
            ProtocolKind::Equitable2 => f.write_str("equitable-2"),
            ProtocolKind::AustinPerfect2 => f.write_str("austin-perfect-2"),
            ProtocolKind::AustinExtension { pieces } => write!(f, "austin-extension:{pieces}"),
            ProtocolKind::Discretize { max_cuts, .. } => write!(f, "discretize:{max_cuts}"),
            ProtocolKind::Ef3 => f.write_str("ef3"),
            ProtocolKind::Rms => f.write_str("rms"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ProtocolOutput {
    Allocation(ProtocolResult),
    Partition(SplitResult),
}

impl ProtocolOutput {
    pub fn queries_used(&self) -> usize {
        match self {
            ProtocolOutput::Allocation(r) => r.queries_used,
            ProtocolOutput::Partition(r) => r.queries_used,
        }
    }

    /// Recomputes the targeted gap from concrete valuations.
    pub fn gap(&self, vals: &[crate::valuation::PiecewiseDensity]) -> Result<Q> {
        match self {
            ProtocolOutput::Allocation(r) => gap(r.notion, &r.allocation, vals),
            ProtocolOutput::Partition(r) => measure_splitting_gap(&r.partition, vals, r.partition.len()),
        }
    }

    pub fn to_json(&self, gap: Option<&Q>) -> serde_json::Value {
        match self {
            ProtocolOutput::Allocation(r) => r.to_json(gap),
            ProtocolOutput::Partition(r) => r.to_json(gap),
        }
    }
}

/// Runs `kind` against `referee` with tolerance `eps`.
pub fn run_protocol(kind: &ProtocolKind, referee: &mut Referee, eps: &Q) -> Result<ProtocolOutput> {
    Ok(match kind {
        ProtocolKind::CutAndChoose => ProtocolOutput::Allocation(cut_and_choose(referee)?),
        ProtocolKind::Equitable2 => ProtocolOutput::Allocation(equitable_2(referee, eps)?),
        ProtocolKind::AustinPerfect2 => ProtocolOutput::Allocation(austin_perfect_2(referee, eps)?),
        ProtocolKind::AustinExtension { pieces } => {
            ProtocolOutput::Partition(austin_extension_k(referee, *pieces, eps)?)
        }
        ProtocolKind::Discretize { max_cuts, notion } => {
            let n = referee.n_players();
            ProtocolOutput::Allocation(
                discretize_and_assemble(referee, n, eps, *max_cuts, &AssemblyTarget::Notion(*notion))?.result,
            )
        }
        ProtocolKind::Ef3 => ProtocolOutput::Allocation(ef3_barbanel_brams(referee, eps)?),
        ProtocolKind::Rms => {
            let n = referee.n_players();
            ProtocolOutput::Allocation(rms_envy_free(referee, n, eps)?)
        }
    })
}
