//! The referee. Routes Cut and Eval queries to concrete densities or to an
//! adaptive adversary, enforces the RW / RW+ / RW- legality rules, and keeps
//! the transcript.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fairness::{Allocation, Partition};
use crate::rational::{fmt_q, one, parse_q, zero, Q};
use crate::valuation::PiecewiseDensity;
use num_traits::Signed;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum QueryModel {
    #[serde(rename = "rw")]
    Rw,
    #[serde(rename = "rw+")]
    RwPlus,
    #[serde(rename = "rw-")]
    RwMinus,
}

impl FromStr for QueryModel {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "rw" => Ok(QueryModel::Rw),
            "rw+" | "rw-plus" | "rwplus" => Ok(QueryModel::RwPlus),
            "rw-" | "rw-minus" | "rwminus" => Ok(QueryModel::RwMinus),
            other => Err(Error::Parse(format!("unknown query model '{other}'"))),
        }
    }
}

impl fmt::Display for QueryModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            QueryModel::Rw => "rw",
            QueryModel::RwPlus => "rw+",
            QueryModel::RwMinus => "rw-",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum QueryKind {
    Cut,
    Eval,
}

/// One logged query. `player` is zero-based in memory and one-based on export.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Entry {
    pub player: usize,
    pub kind: QueryKind,
    pub arg: Q,
    pub ans: Q,
}

#[derive(Serialize, Deserialize)]
struct EntryLine {
    player: usize,
    kind: QueryKind,
    arg: String,
    ans: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Transcript {
    entries: Vec<Entry>,
    cut_points: BTreeSet<Q>,
}

impl Default for Transcript {
    fn default() -> Self {
        Transcript { entries: Vec::new(), cut_points: [zero(), one()].into_iter().collect() }
    }
}

impl Transcript {
    pub fn entries(&self) -> &[Entry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Discovered cut points, always including 0 and 1.
    pub fn cut_points(&self) -> &BTreeSet<Q> {
        &self.cut_points
    }

    pub fn cut_count(&self) -> usize {
        self.entries.iter().filter(|e| e.kind == QueryKind::Cut).count()
    }

    pub fn eval_count(&self) -> usize {
        self.entries.iter().filter(|e| e.kind == QueryKind::Eval).count()
    }

    fn push(&mut self, e: Entry) {
        if e.kind == QueryKind::Cut {
            self.cut_points.insert(e.ans.clone());
        }
        self.entries.push(e);
    }

    /// One JSON object per line.
    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for e in &self.entries {
            let line = EntryLine { player: e.player + 1, kind: e.kind, arg: fmt_q(&e.arg), ans: fmt_q(&e.ans) };
            out.push_str(&serde_json::to_string(&line).expect("entry serializes"));
            out.push('\n');
        }
        out
    }

    pub fn from_jsonl(text: &str) -> Result<Self> {
        let mut t = Transcript::default();
        for line in text.lines().filter(|l| !l.trim().is_empty()) {
            let raw: EntryLine = serde_json::from_str(line)?;
            if raw.player == 0 {
                return Err(Error::Parse("players are numbered from 1".into()));
            }
            t.push(Entry { player: raw.player - 1, kind: raw.kind, arg: parse_q(&raw.arg)?, ans: parse_q(&raw.ans)? });
        }
        Ok(t)
    }

    /// Re-asks every query against `vals`; errors on the first differing answer.
    pub fn replay(&self, vals: &[PiecewiseDensity]) -> Result<()> {
        for (idx, e) in self.entries.iter().enumerate() {
            let d = vals.get(e.player).ok_or(Error::Arity { expected: e.player + 1, got: vals.len() })?;
            let got = match e.kind {
                QueryKind::Cut => d.cut_at(&e.arg)?,
                QueryKind::Eval => d.eval_prefix(&e.arg)?,
            };
            if got != e.ans {
                return Err(Error::Certification(format!(
                    "replay mismatch at query {}: recorded {}, recomputed {}",
                    idx + 1,
                    fmt_q(&e.ans),
                    fmt_q(&got)
                )));
            }
        }
        Ok(())
    }
}

/// An adaptive oracle answering for all players jointly.
pub trait Adversary: Send {
    fn name(&self) -> &'static str;
    fn n_players(&self) -> usize;
    fn answer_cut(&mut self, player: usize, alpha: &Q) -> Result<Q>;
    fn answer_eval(&mut self, player: usize, y: &Q) -> Result<Q>;
    /// A concrete instance consistent with every answer given so far.
    fn finalize(&self) -> Result<Vec<PiecewiseDensity>>;
    /// Brute-force residual gap lower bound for the current state.
    fn certify(&self, vals: &[PiecewiseDensity], eps: &Q) -> Result<Q>;
    /// Machine-readable snapshot of the hidden state.
    fn snapshot(&self) -> serde_json::Value;
    /// Number of queries that shrank the hidden intervals.
    fn rounds(&self) -> usize;
}

pub enum Oracle {
    Concrete(Vec<PiecewiseDensity>),
    Adaptive(Box<dyn Adversary>),
}

impl Oracle {
    pub fn n_players(&self) -> usize {
        match self {
            Oracle::Concrete(v) => v.len(),
            Oracle::Adaptive(a) => a.n_players(),
        }
    }
}

pub struct Referee {
    model: QueryModel,
    oracle: Oracle,
    transcript: Transcript,
    budget: Option<usize>,
    frozen: bool,
}

impl Referee {
    pub fn new(model: QueryModel, oracle: Oracle) -> Self {
        Referee { model, oracle, transcript: Transcript::default(), budget: None, frozen: false }
    }

    pub fn concrete(model: QueryModel, vals: Vec<PiecewiseDensity>) -> Self {
        Self::new(model, Oracle::Concrete(vals))
    }

    pub fn adaptive(model: QueryModel, adv: Box<dyn Adversary>) -> Self {
        Self::new(model, Oracle::Adaptive(adv))
    }

    /// Further queries fail with `BudgetExhausted` once `max` have been asked.
    pub fn with_budget(mut self, max: usize) -> Self {
        self.budget = Some(max);
        self
    }

    pub fn model(&self) -> QueryModel {
        self.model
    }

    pub fn n_players(&self) -> usize {
        self.oracle.n_players()
    }

    pub fn transcript(&self) -> &Transcript {
        &self.transcript
    }

    pub fn query_count(&self) -> usize {
        self.transcript.len()
    }

    pub fn cut_points(&self) -> &BTreeSet<Q> {
        self.transcript.cut_points()
    }

    pub fn is_frozen(&self) -> bool {
        self.frozen
    }

    pub fn oracle(&self) -> &Oracle {
        &self.oracle
    }

    pub fn adversary(&self) -> Option<&dyn Adversary> {
        match &self.oracle {
            Oracle::Adaptive(a) => Some(a.as_ref()),
            Oracle::Concrete(_) => None,
        }
    }

    pub fn concrete_valuations(&self) -> Option<&[PiecewiseDensity]> {
        match &self.oracle {
            Oracle::Concrete(v) => Some(v),
            Oracle::Adaptive(_) => None,
        }
    }

    fn admit(&self, player: usize) -> Result<()> {
        if self.frozen {
            return Err(Error::ModelViolation("transcript is frozen after finalize".into()));
        }
        let n = self.n_players();
        if player >= n {
            return Err(Error::Domain(format!("player {} out of range 1..={n}", player + 1)));
        }
        if let Some(max) = self.budget {
            if self.transcript.len() >= max {
                return Err(Error::BudgetExhausted(max));
            }
        }
        Ok(())
    }

    fn unit(v: &Q, what: &str) -> Result<()> {
        if v.is_negative() || v > &one() {
            return Err(Error::Domain(format!("{what} {} outside [0,1]", fmt_q(v))));
        }
        Ok(())
    }

    /// `Cut_i(alpha)`: the leftmost point where player `i`'s prefix reaches `alpha`.
    pub fn cut(&mut self, player: usize, alpha: &Q) -> Result<Q> {
        if self.model == QueryModel::RwMinus {
            return Err(Error::ModelViolation("cut queries are not available under RW-".into()));
        }
        self.admit(player)?;
        Self::unit(alpha, "cut value")?;
        let ans = match &mut self.oracle {
            Oracle::Concrete(v) => v[player].cut_at(alpha)?,
            Oracle::Adaptive(a) => a.answer_cut(player, alpha)?,
        };
        self.transcript.push(Entry { player, kind: QueryKind::Cut, arg: alpha.clone(), ans: ans.clone() });
        Ok(ans)
    }

    /// `Eval_i(y)`: player `i`'s value of `[0, y]`. Under RW, `y` must be a cut point.
    pub fn eval(&mut self, player: usize, y: &Q) -> Result<Q> {
        self.admit(player)?;
        Self::unit(y, "eval point")?;
        if self.model == QueryModel::Rw && !self.transcript.cut_points.contains(y) {
            return Err(Error::ModelViolation(format!("eval at {} which is not a discovered cut point", fmt_q(y))));
        }
        let ans = match &mut self.oracle {
            Oracle::Concrete(v) => v[player].eval_prefix(y)?,
            Oracle::Adaptive(a) => a.answer_eval(player, y)?,
        };
        self.transcript.push(Entry { player, kind: QueryKind::Eval, arg: y.clone(), ans: ans.clone() });
        Ok(ans)
    }

    /// `V_i([l, r])` through two Eval queries.
    pub fn value(&mut self, player: usize, l: &Q, r: &Q) -> Result<Q> {
        let right = self.eval(player, r)?;
        let left = self.eval(player, l)?;
        Ok(right - left)
    }

    fn check_points(&self, points: impl IntoIterator<Item = Q>) -> Result<()> {
        if self.model != QueryModel::Rw {
            return Ok(());
        }
        for p in points {
            if !self.transcript.cut_points.contains(&p) {
                return Err(Error::IllegalOutput(format!(
                    "demarcation point {} was never returned by a cut query",
                    fmt_q(&p)
                )));
            }
        }
        Ok(())
    }

    /// Validates the output against the model and freezes the transcript.
    pub fn finalize(&mut self, alloc: &Allocation) -> Result<usize> {
        if alloc.len() != self.n_players() {
            return Err(Error::Arity { expected: self.n_players(), got: alloc.len() });
        }
        self.check_points(alloc.demarcation_points())?;
        self.frozen = true;
        Ok(self.query_count())
    }

    pub fn finalize_partition(&mut self, part: &Partition) -> Result<usize> {
        self.check_points(part.demarcation_points())?;
        self.frozen = true;
        Ok(self.query_count())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::q;
    use crate::valuation::Piece;

    fn uniform_pair(model: QueryModel) -> Referee {
        Referee::concrete(model, vec![PiecewiseDensity::uniform(), PiecewiseDensity::uniform()])
    }

    fn halves(cut: Q) -> Allocation {
        Allocation::new(vec![Piece::interval(zero(), cut.clone()).unwrap(), Piece::interval(cut, one()).unwrap()])
            .unwrap()
    }

    #[test]
    fn cut_records_cut_point() {
        let mut r = uniform_pair(QueryModel::Rw);
        assert_eq!(r.cut(0, &q(1, 2)).unwrap(), q(1, 2));
        assert!(r.cut_points().contains(&q(1, 2)));
        assert_eq!(r.cut(1, &zero()).unwrap(), zero());
        assert_eq!(r.query_count(), 2);
    }

    #[test]
    fn eval_endpoints_are_free_cut_points() {
        let mut r = uniform_pair(QueryModel::Rw);
        assert_eq!(r.eval(0, &one()).unwrap(), one());
        assert_eq!(r.eval(1, &zero()).unwrap(), zero());
    }

    #[test]
    fn table_row_eval() {
        let b = vec![zero(), q(34, 100), q(35, 100), q(67, 100), q(68, 100), one()];
        let m = [q(35, 100), q(1, 100), q(28, 100), q(1, 100), q(35, 100)];
        let v3 = PiecewiseDensity::from_masses(b, m.to_vec()).unwrap();
        let mut r = Referee::concrete(QueryModel::RwPlus, vec![v3]);
        assert_eq!(r.eval(0, &q(67, 100)).unwrap(), q(64, 100));
    }

    #[test]
    fn rw_rejects_eval_off_cut_points() {
        let mut r = uniform_pair(QueryModel::Rw);
        assert!(matches!(r.eval(0, &q(1, 3)), Err(Error::ModelViolation(_))));
        assert_eq!(r.query_count(), 0);
        let mut r = uniform_pair(QueryModel::RwPlus);
        assert_eq!(r.eval(0, &q(1, 3)).unwrap(), q(1, 3));
    }

    #[test]
    fn rw_minus_rejects_cut() {
        let mut r = uniform_pair(QueryModel::RwMinus);
        assert!(matches!(r.cut(0, &q(1, 2)), Err(Error::ModelViolation(_))));
        assert!(r.transcript().cut_count() == 0);
    }

    #[test]
    fn finalize_enforces_demarcations() {
        let mut r = uniform_pair(QueryModel::Rw);
        assert!(matches!(r.finalize(&halves(q(1, 3))), Err(Error::IllegalOutput(_))));
        let mut r = uniform_pair(QueryModel::RwPlus);
        assert_eq!(r.finalize(&halves(q(1, 3))).unwrap(), 0);
        assert!(r.cut(0, &q(1, 2)).is_err());
    }

    #[test]
    fn budget_is_enforced() {
        let mut r = uniform_pair(QueryModel::Rw).with_budget(1);
        r.cut(0, &q(1, 2)).unwrap();
        assert_eq!(r.cut(0, &q(1, 4)), Err(Error::BudgetExhausted(1)));
    }

    #[test]
    fn jsonl_round_trip_and_replay() {
        let d = PiecewiseDensity::new(vec![zero(), q(1, 2), one()], vec![q(6, 5), q(4, 5)]).unwrap();
        let vals = vec![d, PiecewiseDensity::uniform()];
        let mut r = Referee::concrete(QueryModel::Rw, vals.clone());
        let y = r.cut(0, &q(3, 10)).unwrap();
        r.eval(1, &y).unwrap();
        let text = r.transcript().to_jsonl();
        assert!(text.lines().next().unwrap().contains("\"player\":1"));
        let back = Transcript::from_jsonl(&text).unwrap();
        assert_eq!(&back, r.transcript());
        back.replay(&vals).unwrap();
        let swapped = vec![vals[1].clone(), vals[0].clone()];
        assert!(back.replay(&swapped).is_err());
    }
}
