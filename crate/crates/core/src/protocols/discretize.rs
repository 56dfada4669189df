use itertools::Itertools;
use num_integer::Integer;

use crate::error::{Error, Result};
use crate::fairness::{Allocation, Notion};
use crate::query::Referee;
use crate::rational::{fmt_q, q, zero, Q};
use crate::valuation::Piece;

use super::{require_positive, Ctx, ProtocolResult};

/// Score, chosen grid-point indices, run owners, grid units per (player, piece), max runs per piece.
type Candidate = (i64, Vec<usize>, Vec<usize>, Vec<Vec<i64>>, usize);

/// What the offline assembly searches for.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AssemblyTarget {
    /// Minimize the gap of a fairness notion.
    Notion(Notion),
    /// Per-piece targets: `weights[i][j]` is player `i`'s target for player `j`'s piece.
    Weights(Vec<Vec<Q>>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AssemblyResult {
    pub result: ProtocolResult,
    /// Cut queries per player.
    pub grid: usize,
    /// `estimates[i][j]`: the rounded value of player `j`'s piece used for player `i`.
    pub estimates: Vec<Vec<Q>>,
    /// Largest number of maximal intervals in one piece.
    pub max_runs: usize,
}

/// Upper limit on (cut choices x label patterns) examined by the search.
const SEARCH_LIMIT: u128 = 40_000_000;

/// Grid discretization followed by offline assembly.
///
/// Every player answers `B = ceil(4K/eps)` Cut queries at `j/B`. From these
/// alone, each player's value of a grid-aligned piece is known to within one
/// grid step per maximal interval. The search runs over allocations whose
/// boundaries are grid points: connected ones first (all cut choices times
/// all owner orders), then, for targets that may need disconnected pieces,
/// label patterns with one extra interval. A candidate is accepted when its
/// estimated gap plus the worst-case rounding error is within `eps` (for
/// explicit weights: every estimate within `eps/2` of its target).
pub fn discretize_and_assemble(
    referee: &mut Referee,
    n: usize,
    eps: &Q,
    max_cuts: usize,
    target: &AssemblyTarget,
) -> Result<AssemblyResult> {
    if referee.n_players() != n {
        return Err(Error::Arity { expected: n, got: referee.n_players() });
    }
    require_positive(eps)?;
    if max_cuts == 0 || n == 0 {
        return Err(Error::Precondition("need at least one player and one cut per piece".into()));
    }
    let notion = match target {
        AssemblyTarget::Notion(Notion::MeasureSplitting(k)) if *k != n => {
            return Err(Error::Precondition("measure splitting here uses one piece per player".into()))
        }
        AssemblyTarget::Notion(nt) => *nt,
        AssemblyTarget::Weights(w) => {
            if w.len() != n || w.iter().any(|row| row.len() != n) {
                return Err(Error::Arity { expected: n, got: w.len() });
            }
            Notion::MeasureSplitting(n)
        }
    };
    let grid_q = (Q::from_integer((4 * max_cuts as i64).into()) / eps).ceil();
    let grid: usize = grid_q
        .to_integer()
        .try_into()
        .ok()
        .filter(|&b: &usize| b <= 1_000_000)
        .ok_or_else(|| Error::Precondition("grid too fine for offline search".into()))?;

    let mut ctx = Ctx::new(referee);
    let mut cuts: Vec<Vec<Q>> = Vec::with_capacity(n);
    for i in 0..n {
        let mut row = Vec::with_capacity(grid);
        for j in 1..=grid {
            row.push(ctx.cut(i, &q(j as i64, grid as i64))?);
        }
        cuts.push(row);
    }

    let mut points: Vec<Q> = cuts.iter().flatten().cloned().chain([zero(), Q::from_integer(1.into())]).collect();
    points.sort();
    points.dedup();
    // est[i][p]: grid steps of player i certainly covered by [0, points[p]].
    let est: Vec<Vec<i64>> =
        cuts.iter().map(|row| points.iter().map(|p| row.partition_point(|c| c <= p) as i64).collect()).collect();

    let b = grid as i64;
    let ni = n as i64;
    // Everything is compared in units of 1/(n*B).
    let budget = eps * Q::from_integer((ni * b).into());
    let weight_bounds: Option<Vec<Vec<(i64, i64)>>> = match target {
        AssemblyTarget::Weights(w) => {
            let half = eps * Q::from_integer(b.into()) / Q::from_integer(2.into());
            Some(
                w.iter()
                    .map(|row| {
                        row.iter()
                            .map(|wij| {
                                let centre = wij * Q::from_integer(b.into());
                                let lo = (&centre - &half).ceil().to_integer();
                                let hi = (&centre + &half).floor().to_integer();
                                (lo.try_into().unwrap_or(i64::MIN), hi.try_into().unwrap_or(i64::MAX))
                            })
                            .collect()
                    })
                    .collect(),
            )
        }
        AssemblyTarget::Notion(_) => None,
    };

    let allow_extra_run = matches!(notion, Notion::Perfection | Notion::MeasureSplitting(_));
    let mut best: Option<Candidate> = None;

    for runs in [n, n + 1] {
        if runs > n && (!allow_extra_run || n < 2) {
            break;
        }
        let patterns = label_patterns(n, runs);
        let combos = binomial_with_repetition(points.len() as u128, (runs - 1) as u128);
        if combos.saturating_mul(patterns.len() as u128) > SEARCH_LIMIT {
            break;
        }
        let piece_runs: Vec<Vec<usize>> =
            patterns.iter().map(|p| (0..n).map(|j| p.iter().filter(|&&l| l == j).count()).collect()).collect();
        let mut u = vec![vec![0i64; n]; n];
        for combo in (0..points.len()).combinations_with_replacement(runs - 1) {
            for (pat, pr) in patterns.iter().zip(&piece_runs) {
                for (i, ei) in est.iter().enumerate() {
                    u[i].iter_mut().for_each(|x| *x = 0);
                    let mut prev = 0i64;
                    for (s, &label) in pat.iter().enumerate() {
                        let at = if s + 1 < runs { ei[combo[s]] } else { b };
                        u[i][label] += at - prev;
                        prev = at;
                    }
                }
                let max_r = *pr.iter().max().unwrap_or(&1) as i64;
                let total = match &weight_bounds {
                    Some(bounds) => {
                        let ok = (0..n).all(|i| (0..n).all(|j| u[i][j] >= bounds[i][j].0 && u[i][j] <= bounds[i][j].1));
                        if ok {
                            0
                        } else {
                            continue;
                        }
                    }
                    None => score(notion, &u, b) + error_units(notion, ni, max_r),
                };
                if best.as_ref().is_none_or(|(t, ..)| total < *t) {
                    best = Some((total, combo.clone(), pat.clone(), u.clone(), max_r as usize));
                    if weight_bounds.is_some() {
                        break;
                    }
                }
            }
            if weight_bounds.is_some() && best.is_some() {
                break;
            }
        }
        if let Some((total, ..)) = &best {
            if Q::from_integer((*total).into()) <= budget {
                break;
            }
        }
    }

    let (total, combo, pattern, u, max_runs) =
        best.filter(|(t, ..)| Q::from_integer((*t).into()) <= budget).ok_or_else(|| {
            Error::Infeasible(format!(
                "no grid-aligned allocation meets the target at eps {}; the per-piece cut bound does not hold",
                fmt_q(eps)
            ))
        })?;
    let _ = total;

    let mut bounds = vec![zero()];
    bounds.extend(combo.iter().map(|&c| points[c].clone()));
    bounds.push(Q::from_integer(1.into()));
    let mut parts: Vec<Vec<(Q, Q)>> = vec![Vec::new(); n];
    for (s, &label) in pattern.iter().enumerate() {
        parts[label].push((bounds[s].clone(), bounds[s + 1].clone()));
    }
    let pieces = parts.iter().map(|p| Piece::from_pairs(p)).collect::<Result<Vec<_>>>()?;
    let estimates = u.iter().map(|row| row.iter().map(|&x| q(x, b)).collect()).collect();
    let result = ctx.finish(Allocation::new(pieces)?, eps, notion, false)?;
    Ok(AssemblyResult { result, grid, estimates, max_runs })
}

/// Estimated gap in units of `1/(nB)`.
fn score(notion: Notion, u: &[Vec<i64>], b: i64) -> i64 {
    let n = u.len() as i64;
    let idx = 0..u.len();
    match notion {
        Notion::Envy => n * idx.flat_map(|i| u[i].iter().map(move |v| v - u[i][i])).max().unwrap_or(0).max(0),
        Notion::Equitability => {
            let own: Vec<i64> = idx.map(|i| u[i][i]).collect();
            n * (own.iter().max().unwrap_or(&0) - own.iter().min().unwrap_or(&0))
        }
        Notion::Proportionality => idx.map(|i| b - n * u[i][i]).max().unwrap_or(0).max(0),
        Notion::Perfection | Notion::MeasureSplitting(_) => {
            u.iter().flatten().map(|v| (n * v - b).abs()).max().unwrap_or(0)
        }
    }
}

/// Worst-case rounding error in units of `1/(nB)`.
fn error_units(notion: Notion, n: i64, max_runs: i64) -> i64 {
    match notion {
        Notion::Envy | Notion::Equitability => 2 * n * max_runs,
        _ => n * max_runs,
    }
}

/// Label sequences of length `runs` over `n` players, every player present,
/// adjacent labels distinct.
fn label_patterns(n: usize, runs: usize) -> Vec<Vec<usize>> {
    if runs == n {
        return (0..n).permutations(n).collect();
    }
    (0..runs)
        .map(|_| 0..n)
        .multi_cartesian_product()
        .filter(|p| p.windows(2).all(|w| w[0] != w[1]) && (0..n).all(|j| p.contains(&j)))
        .collect()
}

fn binomial_with_repetition(items: u128, choose: u128) -> u128 {
    // C(items + choose - 1, choose)
    let top = items + choose - 1;
    (0..choose).fold(1u128, |acc, i| {
        let num = acc.saturating_mul(top - i);
        let den = i + 1;
        let g = num.gcd(&den);
        num / g / (den / g)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fairness::{envy_gap, perfection_gap};
    use crate::gen::{default_band, random_profile};
    use crate::query::QueryModel;
    use crate::valuation::PiecewiseDensity;

    #[test]
    fn uniform_three_players_split_evenly() {
        let vals = vec![PiecewiseDensity::uniform(); 3];
        let mut r = Referee::concrete(QueryModel::Rw, vals.clone());
        let res = discretize_and_assemble(&mut r, 3, &q(2, 15), 1, &AssemblyTarget::Notion(Notion::Envy)).unwrap();
        assert_eq!(res.grid, 30);
        assert_eq!(res.result.queries_used, 90);
        assert_eq!(envy_gap(&res.result.allocation, &vals).unwrap(), zero());
    }

    #[test]
    fn perfect_pair_with_weights() {
        let (lo, hi) = default_band();
        let vals = random_profile(2, 5, &lo, &hi, 11).unwrap();
        let eps = q(1, 10);
        let w = vec![vec![q(1, 2); 2]; 2];
        let mut r = Referee::concrete(QueryModel::Rw, vals.clone());
        let res = discretize_and_assemble(&mut r, 2, &eps, 4, &AssemblyTarget::Weights(w)).unwrap();
        assert_eq!(res.result.queries_used, 2 * 160);
        assert!(perfection_gap(&res.result.allocation, &vals).unwrap() <= eps);
    }

    #[test]
    fn patterns_and_counts() {
        assert_eq!(label_patterns(2, 3), vec![vec![0, 1, 0], vec![1, 0, 1]]);
        assert_eq!(label_patterns(3, 3).len(), 6);
        assert_eq!(binomial_with_repetition(6, 2), 21);
    }
}
