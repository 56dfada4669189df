use crate::error::{Error, Result};
use crate::fairness::Partition;
use crate::query::Referee;
use crate::rational::{abs, mid, one, q, zero, Q};
use crate::valuation::{Interval, Piece};

use super::{require_players, require_positive, Ctx, SplitResult, MAX_ROUNDS};

const KNIFE_HOLDER: usize = 0;
const CALLER: usize = 1;

/// A removed stretch of cake with both players' exact values.
#[derive(Clone)]
struct Removed {
    left: Q,
    right: Q,
    holder_prefix_at_left: Q,
    holder_value: Q,
    caller_value: Q,
}

/// The cake minus the pieces already handed out, addressed by the knife
/// holder's value of the remaining prefix.
struct Remainder {
    removed: Vec<Removed>,
    pieces_left: usize,
}

impl Remainder {
    /// Real position whose remaining prefix is worth `s` to the knife holder.
    fn locate(&self, ctx: &mut Ctx, s: &Q) -> Result<Q> {
        let mut target = s.clone();
        for w in &self.removed {
            if target > w.holder_prefix_at_left {
                target += &w.holder_value;
            } else {
                break;
            }
        }
        if target >= one() {
            return Ok(one());
        }
        ctx.cut(KNIFE_HOLDER, &target)
    }

    fn inside<'a>(&'a self, l: &'a Q, r: &'a Q) -> impl Iterator<Item = &'a Removed> + 'a {
        self.removed.iter().filter(move |w| &w.left >= l && &w.right <= r)
    }

    /// Caller's value of the remaining cake between real points `l <= r`.
    fn caller_value(&self, ctx: &mut Ctx, l: &Q, r: &Q) -> Result<Q> {
        let gross = ctx.value(CALLER, l, r)?;
        Ok(self.inside(l, r).fold(gross, |acc, w| acc - &w.caller_value))
    }

    fn caller_total(&self) -> Q {
        self.removed.iter().fold(one(), |acc, w| acc - &w.caller_value)
    }

    /// The remaining cake inside `[l, r]` as a piece.
    fn piece(&self, l: &Q, r: &Q) -> Result<Piece> {
        let mut parts = Vec::new();
        let mut at = l.clone();
        for w in self.inside(l, r) {
            parts.push(Interval::new(at.clone(), w.left.clone())?);
            at = w.right.clone();
        }
        parts.push(Interval::new(at, r.clone())?);
        Piece::new(parts)
    }

    fn remove(&mut self, ctx: &mut Ctx, l: Q, r: Q, holder_value: Q, caller_value: Q) -> Result<()> {
        let (mut hv, mut cv) = (holder_value, caller_value);
        for w in self.inside(&l, &r) {
            hv += &w.holder_value;
            cv += &w.caller_value;
        }
        self.removed.retain(|w| !(w.left >= l && w.right <= r));
        let holder_prefix_at_left = ctx.eval(KNIFE_HOLDER, &l)?;
        let pos = self.removed.partition_point(|w| w.left < l);
        self.removed
            .insert(pos, Removed { left: l, right: r, holder_prefix_at_left, holder_value: hv, caller_value: cv });
        self.pieces_left -= 1;
        Ok(())
    }
}

/// Splits the cake into `k` pieces each worth `1/k` to both players within `eps`.
///
/// Each round the knife holder slides a window worth exactly `1/k` of its
/// value across the remaining cake, and the window is cut when the caller
/// values it at its renormalized fair share of the remainder within `eps/k`.
/// Probing the `m` tiles of the remainder brackets a sign change of the
/// caller's excess; bisection on the window's left edge closes it. Windows
/// may straddle earlier pieces, so later pieces need not be connected.
pub fn austin_extension_k(referee: &mut Referee, k: usize, eps: &Q) -> Result<SplitResult> {
    require_players(referee, 2, "austin-extension")?;
    require_positive(eps)?;
    if k == 0 {
        return Err(Error::Precondition("piece count must be positive".into()));
    }
    let share = q(1, k as i64);
    let tol = eps * &share;
    let mut ctx = Ctx::new(referee);
    let mut rem = Remainder { removed: Vec::new(), pieces_left: k };
    let mut pieces = Vec::with_capacity(k);

    while rem.pieces_left > 1 {
        let m = rem.pieces_left;
        let target = rem.caller_total() / Q::from_integer((m as i64).into());
        let probe = |ctx: &mut Ctx, s: &Q| -> Result<(Q, Q, Q)> {
            let l = rem.locate(ctx, s)?;
            let r = rem.locate(ctx, &(s + &share))?;
            let excess = rem.caller_value(ctx, &l, &r)? - &target;
            Ok((l, r, excess))
        };

        let mut found = None;
        let (mut pos, mut neg) = (None, None);
        for j in 0..m {
            let s = &share * Q::from_integer((j as i64).into());
            let (l, r, excess) = probe(&mut ctx, &s)?;
            if abs(&excess) <= tol {
                found = Some((l, r, excess));
                break;
            }
            if excess > zero() {
                pos.get_or_insert(s);
            } else {
                neg.get_or_insert(s);
            }
        }
        if found.is_none() {
            let (mut pos, mut neg) = match (pos, neg) {
                (Some(p), Some(n)) => (p, n),
                _ => return Err(Error::Precondition("tile probes found no sign change".into())),
            };
            for _ in 0..MAX_ROUNDS {
                let s = mid(&pos, &neg);
                let (l, r, excess) = probe(&mut ctx, &s)?;
                if abs(&excess) <= tol {
                    found = Some((l, r, excess));
                    break;
                }
                if excess > zero() {
                    pos = s;
                } else {
                    neg = s;
                }
            }
        }
        let (l, r, excess) =
            found.ok_or_else(|| Error::Precondition("window bisection stalled; a player is not hungry".into()))?;
        pieces.push(rem.piece(&l, &r)?);
        rem.remove(&mut ctx, l, r, share.clone(), &target + excess)?;
    }
    pieces.push(rem.piece(&zero(), &one())?);
    ctx.finish_partition(Partition::new(pieces)?, eps)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fairness::measure_splitting_gap;
    use crate::gen::{default_band, random_profile};
    use crate::query::QueryModel;
    use crate::valuation::PiecewiseDensity;

    #[test]
    fn uniform_quarters() {
        let vals = vec![PiecewiseDensity::uniform(); 2];
        let mut r = Referee::concrete(QueryModel::Rw, vals.clone());
        let res = austin_extension_k(&mut r, 4, &q(1, 100)).unwrap();
        assert_eq!(measure_splitting_gap(&res.partition, &vals, 4).unwrap(), zero());
    }

    #[test]
    fn random_pairs_three_pieces() {
        let (lo, hi) = default_band();
        let eps = q(1, 10_000);
        for seed in 0..8 {
            let vals = random_profile(2, 6, &lo, &hi, 200 + seed).unwrap();
            let mut r = Referee::concrete(QueryModel::Rw, vals.clone());
            let res = austin_extension_k(&mut r, 3, &eps).unwrap();
            assert_eq!(res.partition.len(), 3);
            assert!(measure_splitting_gap(&res.partition, &vals, 3).unwrap() <= eps);
        }
    }

    #[test]
    fn single_piece_is_whole_cake() {
        let mut r = Referee::concrete(QueryModel::Rw, vec![PiecewiseDensity::uniform(); 2]);
        let res = austin_extension_k(&mut r, 1, &q(1, 10)).unwrap();
        assert_eq!(res.queries_used, 0);
    }
}
