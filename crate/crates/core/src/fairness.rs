//! Allocations, partitions, exact fairness gaps, and the exhaustive search
//! over connected allocations used to certify lower bounds.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use itertools::Itertools;
use num_traits::{Signed, Zero};

use crate::error::{Error, Result};
use crate::rational::{abs, fmt_q, one, zero, Q};
use crate::valuation::{Piece, PiecewiseDensity};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Notion {
    Envy,
    Proportionality,
    Equitability,
    Perfection,
    MeasureSplitting(usize),
}

impl FromStr for Notion {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let s = s.to_ascii_lowercase();
        match s.as_str() {
            "envy" | "ef" | "envy-free" => Ok(Notion::Envy),
            "proportionality" | "proportional" => Ok(Notion::Proportionality),
            "equitability" | "equitable" => Ok(Notion::Equitability),
            "perfection" | "perfect" => Ok(Notion::Perfection),
            _ => {
                let k = s
                    .strip_prefix("splitting:")
                    .or_else(|| s.strip_prefix("measure_splitting:"))
                    .ok_or_else(|| Error::Parse(format!("unknown fairness notion '{s}'")))?;
                let k: usize = k.parse().map_err(|_| Error::Parse(format!("bad piece count '{k}'")))?;
                if k == 0 {
                    return Err(Error::Parse("piece count must be positive".into()));
                }
                Ok(Notion::MeasureSplitting(k))
            }
        }
    }
}

impl fmt::Display for Notion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Notion::Envy => f.write_str("envy"),
            Notion::Proportionality => f.write_str("proportionality"),
            Notion::Equitability => f.write_str("equitability"),
            Notion::Perfection => f.write_str("perfection"),
            Notion::MeasureSplitting(k) => write!(f, "splitting:{k}"),
        }
    }
}

/// Pieces that are pairwise disjoint and cover `[0,1]` exactly.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    pieces: Vec<Piece>,
}

fn check_cover(pieces: &[Piece]) -> Result<()> {
    let mut all: Vec<(Q, Q)> =
        pieces.iter().flat_map(|p| p.intervals().iter().map(|iv| (iv.left.clone(), iv.right.clone()))).collect();
    all.sort();
    let mut reach = zero();
    for (l, r) in all {
        if l < reach {
            return Err(Error::Structural(format!("pieces overlap near {}", fmt_q(&l))));
        }
        if l > reach {
            return Err(Error::Structural(format!("gap [{}, {}] is not covered", fmt_q(&reach), fmt_q(&l))));
        }
        reach = r;
    }
    if reach != one() {
        return Err(Error::Structural(format!("cover stops at {}", fmt_q(&reach))));
    }
    Ok(())
}

impl Partition {
    pub fn new(pieces: Vec<Piece>) -> Result<Self> {
        check_cover(&pieces)?;
        Ok(Partition { pieces })
    }

    /// Consecutive intervals between sorted cut positions.
    pub fn from_cuts(cuts: &[Q]) -> Result<Self> {
        Self::new(connected_pieces(cuts)?)
    }

    pub fn pieces(&self) -> &[Piece] {
        &self.pieces
    }

    pub fn len(&self) -> usize {
        self.pieces.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pieces.is_empty()
    }

    pub fn demarcation_points(&self) -> BTreeSet<Q> {
        self.pieces.iter().flat_map(|p| p.demarcation_points()).collect()
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({ "pieces": self.pieces.iter().map(Piece::to_json).collect::<Vec<_>>() })
    }
}

/// One piece per player, covering the cake. Piece `i` belongs to player `i`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Allocation {
    pieces: Vec<Piece>,
}

fn connected_pieces(cuts: &[Q]) -> Result<Vec<Piece>> {
    if cuts.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::Structural("cut positions must be nondecreasing".into()));
    }
    let mut bounds = Vec::with_capacity(cuts.len() + 2);
    bounds.push(zero());
    bounds.extend(cuts.iter().cloned());
    bounds.push(one());
    bounds.windows(2).map(|w| Piece::interval(w[0].clone(), w[1].clone())).collect()
}

impl Allocation {
    pub fn new(pieces: Vec<Piece>) -> Result<Self> {
        check_cover(&pieces)?;
        Ok(Allocation { pieces })
    }

    /// Connected allocation: the `s`-th interval between `cuts` goes to player `order[s]`.
    pub fn from_cuts(cuts: &[Q], order: &[usize]) -> Result<Self> {
        let segs = connected_pieces(cuts)?;
        if order.len() != segs.len() || !order.iter().copied().sorted().eq(0..segs.len()) {
            return Err(Error::Structural("order must be a permutation of the players".into()));
        }
        let mut pieces = vec![Piece::empty(); segs.len()];
        for (seg, &owner) in segs.into_iter().zip(order) {
            pieces[owner] = seg;
        }
        Ok(Allocation { pieces })
    }

    pub fn pieces(&self) -> &[Piece] {
        &self.pieces
    }

    pub fn piece(&self, player: usize) -> &Piece {
        &self.pieces[player]
    }

    pub fn len(&self) -> usize {
        self.pieces.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pieces.is_empty()
    }

    pub fn is_connected(&self) -> bool {
        self.pieces.iter().all(Piece::is_connected)
    }

    pub fn demarcation_points(&self) -> BTreeSet<Q> {
        self.pieces.iter().flat_map(|p| p.demarcation_points()).collect()
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({ "pieces": self.pieces.iter().map(Piece::to_json).collect::<Vec<_>>() })
    }

    pub fn from_json(v: &serde_json::Value) -> Result<Self> {
        Self::new(pieces_from_json(v)?)
    }
}

pub fn pieces_from_json(v: &serde_json::Value) -> Result<Vec<Piece>> {
    let arr = v
        .get("pieces")
        .and_then(|p| p.as_array())
        .ok_or_else(|| Error::Parse("expected {\"pieces\": [...]}".into()))?;
    arr.iter().map(Piece::from_json).collect()
}

/// `matrix[i][j]` = player `i`'s value of piece `j`.
pub fn value_matrix(pieces: &[Piece], vals: &[PiecewiseDensity]) -> Vec<Vec<Q>> {
    vals.iter().map(|d| pieces.iter().map(|p| d.piece_value(p)).collect()).collect()
}

fn check_arity(alloc: &Allocation, vals: &[PiecewiseDensity]) -> Result<()> {
    if alloc.len() != vals.len() {
        return Err(Error::Arity { expected: alloc.len(), got: vals.len() });
    }
    Ok(())
}

fn max_of(it: impl Iterator<Item = Q>) -> Q {
    it.fold(zero(), |a, b| if b > a { b } else { a })
}

/// Gap of the allocation whose value matrix is `m` (piece `i` owned by player `i`).
pub fn gap_from_matrix(notion: Notion, m: &[Vec<Q>]) -> Q {
    let n = m.len();
    match notion {
        Notion::Envy => max_of((0..n).flat_map(|i| (0..n).map(move |j| &m[i][j] - &m[i][i]))),
        Notion::Proportionality => {
            let share = Q::new(1.into(), (n as i64).into());
            max_of((0..n).map(|i| &share - &m[i][i]))
        }
        Notion::Equitability => {
            let own: Vec<&Q> = (0..n).map(|i| &m[i][i]).collect();
            match (own.iter().max(), own.iter().min()) {
                (Some(hi), Some(lo)) => *hi - *lo,
                _ => zero(),
            }
        }
        Notion::Perfection => splitting(m, n),
        Notion::MeasureSplitting(k) => splitting(m, k),
    }
}

fn splitting(m: &[Vec<Q>], k: usize) -> Q {
    let share = Q::new(1.into(), (k as i64).into());
    max_of(m.iter().flat_map(|row| row.iter().map(|v| abs(&(v - &share)))))
}

pub fn envy_gap(a: &Allocation, vals: &[PiecewiseDensity]) -> Result<Q> {
    check_arity(a, vals)?;
    Ok(gap_from_matrix(Notion::Envy, &value_matrix(a.pieces(), vals)))
}

pub fn equitability_gap(a: &Allocation, vals: &[PiecewiseDensity]) -> Result<Q> {
    check_arity(a, vals)?;
    Ok(gap_from_matrix(Notion::Equitability, &value_matrix(a.pieces(), vals)))
}

pub fn perfection_gap(a: &Allocation, vals: &[PiecewiseDensity]) -> Result<Q> {
    check_arity(a, vals)?;
    Ok(gap_from_matrix(Notion::Perfection, &value_matrix(a.pieces(), vals)))
}

pub fn proportionality_gap(a: &Allocation, vals: &[PiecewiseDensity]) -> Result<Q> {
    check_arity(a, vals)?;
    Ok(gap_from_matrix(Notion::Proportionality, &value_matrix(a.pieces(), vals)))
}

pub fn measure_splitting_gap(p: &Partition, vals: &[PiecewiseDensity], k: usize) -> Result<Q> {
    if p.len() != k {
        return Err(Error::Arity { expected: k, got: p.len() });
    }
    Ok(gap_from_matrix(Notion::MeasureSplitting(k), &value_matrix(p.pieces(), vals)))
}

/// Gap of `a` under `notion`. Measure splitting reads the allocation's pieces as a partition.
pub fn gap(notion: Notion, a: &Allocation, vals: &[PiecewiseDensity]) -> Result<Q> {
    match notion {
        Notion::MeasureSplitting(k) => measure_splitting_gap(&Partition { pieces: a.pieces().to_vec() }, vals, k),
        _ => {
            check_arity(a, vals)?;
            Ok(gap_from_matrix(notion, &value_matrix(a.pieces(), vals)))
        }
    }
}

/// Minimum-gap connected allocation whose cuts all come from `candidate_cuts`.
///
/// Cuts are chosen with repetition, so empty pieces are allowed; all `n!`
/// owner orders are tried. Supported for at most four players.
pub fn best_connected_allocation(
    vals: &[PiecewiseDensity],
    candidate_cuts: &BTreeSet<Q>,
    notion: Notion,
) -> Result<(Allocation, Q)> {
    let n = vals.len();
    if n == 0 || n > 4 {
        return Err(Error::Precondition(format!("exhaustive search supports 1..=4 players, got {n}")));
    }
    let points: Vec<Q> = candidate_cuts.iter().filter(|c| !c.is_negative() && *c <= &one()).cloned().collect();
    if points.len() < n - 1 {
        return Err(Error::Infeasible(format!("{} candidate points cannot demarcate {n} pieces", points.len())));
    }
    // prefix[i][c] = V_i([0, points[c]])
    let prefix: Vec<Vec<Q>> = vals
        .iter()
        .map(|d| points.iter().map(|p| d.eval_prefix(p)).collect::<Result<Vec<_>>>())
        .collect::<Result<_>>()?;
    let orders: Vec<Vec<usize>> = (0..n).permutations(n).collect();
    let mut best: Option<(Vec<usize>, Vec<usize>, Q)> = None;
    for combo in (0..points.len()).combinations_with_replacement(n - 1) {
        // Segment values per player.
        let seg: Vec<Vec<Q>> = (0..n)
            .map(|i| {
                let mut out = Vec::with_capacity(n);
                let mut prev = zero();
                for &c in &combo {
                    out.push(&prefix[i][c] - &prev);
                    prev = prefix[i][c].clone();
                }
                out.push(one() - prev);
                out
            })
            .collect();
        for order in &orders {
            // m[i][j]: player i's value of player j's piece.
            let mut m = vec![vec![zero(); n]; n];
            for (s, &owner) in order.iter().enumerate() {
                for i in 0..n {
                    m[i][owner] = seg[i][s].clone();
                }
            }
            let g = gap_from_matrix(notion, &m);
            if best.as_ref().is_none_or(|(_, _, b)| &g < b) {
                let done = g.is_zero();
                best = Some((combo.clone(), order.clone(), g));
                if done {
                    break;
                }
            }
        }
        if best.as_ref().is_some_and(|(_, _, b)| b.is_zero()) {
            break;
        }
    }
    let (combo, order, g) = best.expect("at least one candidate allocation");
    let cuts: Vec<Q> = combo.iter().map(|&c| points[c].clone()).collect();
    Ok((Allocation::from_cuts(&cuts, &order)?, g))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::q;

    fn uniform(n: usize) -> Vec<PiecewiseDensity> {
        vec![PiecewiseDensity::uniform(); n]
    }

    fn table_two() -> Vec<PiecewiseDensity> {
        let b = vec![zero(), q(34, 100), q(35, 100), q(67, 100), q(68, 100), one()];
        let rows = [[35, 1, 35, 1, 28], [28, 1, 35, 1, 35], [35, 1, 28, 1, 35]];
        rows.iter()
            .map(|r| PiecewiseDensity::from_masses(b.clone(), r.iter().map(|&m| q(m, 100)).collect()).unwrap())
            .collect()
    }

    #[test]
    fn gaps_on_simple_allocations() {
        let a = Allocation::from_cuts(&[q(1, 2)], &[0, 1]).unwrap();
        assert_eq!(envy_gap(&a, &uniform(2)).unwrap(), zero());
        assert_eq!(perfection_gap(&a, &uniform(2)).unwrap(), zero());
        let all = Allocation::from_cuts(&[one()], &[0, 1]).unwrap();
        assert_eq!(envy_gap(&all, &uniform(2)).unwrap(), one());
        assert_eq!(perfection_gap(&all, &uniform(2)).unwrap(), q(1, 2));
        assert_eq!(proportionality_gap(&all, &uniform(2)).unwrap(), q(1, 2));
    }

    #[test]
    fn equitability_subtraction() {
        let b = vec![zero(), q(1, 2), one()];
        let p1 = PiecewiseDensity::from_masses(b.clone(), vec![q(55, 100), q(45, 100)]).unwrap();
        let p2 = PiecewiseDensity::from_masses(b, vec![q(56, 100), q(44, 100)]).unwrap();
        let a = Allocation::from_cuts(&[q(1, 2)], &[0, 1]).unwrap();
        assert_eq!(equitability_gap(&a, &[p1, p2]).unwrap(), q(11, 100));
    }

    #[test]
    fn perfect_adversary_initial_row() {
        let b = vec![zero(), q(2, 10), q(3, 10), q(7, 10), q(8, 10), one()];
        let masses = [15, 10, 30, 30, 15].iter().map(|&m| q(m, 100)).collect();
        let v2 = PiecewiseDensity::from_masses(b, masses).unwrap();
        let mid = Piece::interval(q(2, 10), q(7, 10)).unwrap();
        let outer = Piece::from_pairs(&[(zero(), q(2, 10)), (q(7, 10), one())]).unwrap();
        let a = Allocation::new(vec![mid, outer]).unwrap();
        assert_eq!(perfection_gap(&a, &[PiecewiseDensity::uniform(), v2]).unwrap(), q(1, 10));
    }

    #[test]
    fn table_two_envy_lower_bound() {
        let cuts: BTreeSet<Q> = [zero(), q(34, 100), q(35, 100), q(67, 100), q(68, 100), one()].into_iter().collect();
        let (_, g) = best_connected_allocation(&table_two(), &cuts, Notion::Envy).unwrap();
        assert!(g >= q(1, 10000));
    }

    #[test]
    fn uniform_search_hits_exact_split() {
        let cuts: BTreeSet<Q> = [zero(), q(1, 2), one()].into_iter().collect();
        let (a, g) = best_connected_allocation(&uniform(2), &cuts, Notion::Envy).unwrap();
        assert_eq!(g, zero());
        assert!(a.demarcation_points().contains(&q(1, 2)));
    }

    #[test]
    fn search_rejects_tiny_candidate_sets() {
        let cuts: BTreeSet<Q> = [zero()].into_iter().collect();
        assert!(matches!(best_connected_allocation(&uniform(3), &cuts, Notion::Envy), Err(Error::Infeasible(_))));
    }

    #[test]
    fn cover_is_enforced() {
        let gap = vec![Piece::interval(zero(), q(1, 3)).unwrap(), Piece::interval(q(1, 2), one()).unwrap()];
        assert!(matches!(Allocation::new(gap), Err(Error::Structural(_))));
        let overlap = vec![Piece::interval(zero(), q(2, 3)).unwrap(), Piece::interval(q(1, 2), one()).unwrap()];
        assert!(matches!(Allocation::new(overlap), Err(Error::Structural(_))));
    }

    #[test]
    fn notion_parsing() {
        assert_eq!("envy".parse::<Notion>().unwrap(), Notion::Envy);
        assert_eq!("splitting:3".parse::<Notion>().unwrap(), Notion::MeasureSplitting(3));
        assert!("splitting:0".parse::<Notion>().is_err());
        assert_eq!(Notion::MeasureSplitting(4).to_string(), "splitting:4");
    }

    #[test]
    fn arity_mismatch() {
        let a = Allocation::from_cuts(&[q(1, 2)], &[0, 1]).unwrap();
        assert!(matches!(envy_gap(&a, &uniform(3)), Err(Error::Arity { .. })));
    }
}
