use crate::error::{Error, Result};
use crate::fairness::{Allocation, Notion};
use crate::query::Referee;
use crate::rational::{ceil_log2, mid, one, q, zero, Q};

use super::{envy_free_order, require_positive, Ctx, ProtocolResult, MAX_ROUNDS};

struct Probe {
    balance: Q,
    found: Option<Allocation>,
}

/// Player 1 places its first two knives at prefix values `t1` and `2 t1`;
/// each later knife is placed by the previous player so that its two
/// neighbouring pieces are equal for it. All orders are then tested.
fn probe(ctx: &mut Ctx, n: usize, t1: &Q, eps: &Q) -> Result<Probe> {
    let mut cuts = vec![ctx.cut(0, t1)?];
    if n >= 3 {
        let t2 = (t1 * Q::from_integer(2.into())).min(one());
        cuts.push(ctx.cut(0, &t2)?);
    }
    for j in 2..n.saturating_sub(1) {
        let owner = j - 1;
        let target = ctx.eval(owner, &cuts[j - 1])? * Q::from_integer(2.into()) - ctx.eval(owner, &cuts[j - 2])?;
        let next = if target >= one() { one() } else { ctx.cut(owner, &target)? };
        cuts.push(next.max(cuts[j - 1].clone()));
    }
    let seg = ctx.segment_matrix(&cuts)?;
    let last = &seg[n - 1];
    let balance = &last[n - 1] - &last[0];
    let found = match envy_free_order(&seg, eps) {
        Some(order) => Some(Allocation::from_cuts(&cuts, &order)?),
        None => None,
    };
    Ok(Probe { balance, found })
}

/// Connected eps-envy-free allocation for a rigid measure system.
///
/// Bisects player 1's first-piece value `t1` over `[1/n, 1/2]` on the sign
/// of the last player's balance between the final and the first piece,
/// testing each tentative allocation. Since the balance is not known to be
/// monotone, an unsuccessful bisection falls back to a uniform scan of `t1`
/// and flags the result.
pub fn rms_envy_free(referee: &mut Referee, n: usize, eps: &Q) -> Result<ProtocolResult> {
    if referee.n_players() != n {
        return Err(Error::Arity { expected: n, got: referee.n_players() });
    }
    if n < 2 {
        return Err(Error::Precondition("need at least two players".into()));
    }
    require_positive(eps)?;
    let mut ctx = Ctx::new(referee);
    let mut lo = q(1, n as i64);
    let mut hi = q(1, 2);
    let at_lo = probe(&mut ctx, n, &lo, eps)?;
    if let Some(a) = at_lo.found {
        return ctx.finish(a, eps, Notion::Envy, false);
    }
    let at_hi = probe(&mut ctx, n, &hi, eps)?;
    if let Some(a) = at_hi.found {
        return ctx.finish(a, eps, Notion::Envy, false);
    }
    let lo_positive = at_lo.balance > zero();
    let width_floor = eps / Q::from_integer(64.into());
    if lo_positive != (at_hi.balance > zero()) {
        for _ in 0..MAX_ROUNDS {
            if &hi - &lo < width_floor {
                break;
            }
            let t1 = mid(&lo, &hi);
            let p = probe(&mut ctx, n, &t1, eps)?;
            if let Some(a) = p.found {
                return ctx.finish(a, eps, Notion::Envy, false);
            }
            if (p.balance > zero()) == lo_positive {
                lo = t1;
            } else {
                hi = t1;
            }
        }
    }

    let steps = 8 * (ceil_log2(&(one() / eps)) as i64 + 1);
    let (start, span) = (q(1, n as i64), q(1, 2) - q(1, n as i64));
    for s in 1..steps {
        let t1 = &start + &span * q(s, steps);
        let p = probe(&mut ctx, n, &t1, eps)?;
        if let Some(a) = p.found {
            return ctx.finish(a, eps, Notion::Envy, true);
        }
    }
    Err(Error::Precondition("no eps-envy-free probe; the input is not a rigid measure system".into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fairness::envy_gap;
    use crate::query::QueryModel;
    use crate::valuation::PiecewiseDensity;

    fn rms3(t: [(i64, i64); 3]) -> Vec<PiecewiseDensity> {
        // Break points 0.34 and 0.68; masses follow the rigid pattern.
        let b = vec![zero(), q(34, 100), q(68, 100), one()];
        let tq: Vec<Q> = t.iter().map(|&(a, d)| q(a, d)).collect();
        let s: Vec<Q> = tq.iter().map(|x| one() - x * Q::from_integer(2.into())).collect();
        let rows = [
            vec![tq[0].clone(), tq[0].clone(), s[0].clone()],
            vec![s[1].clone(), tq[1].clone(), tq[1].clone()],
            vec![tq[2].clone(), s[2].clone(), tq[2].clone()],
        ];
        rows.into_iter().map(|m| PiecewiseDensity::from_masses(b.clone(), m).unwrap()).collect()
    }

    #[test]
    fn symmetric_rms() {
        let vals = rms3([(35, 100); 3]);
        for v in &vals {
            assert!(v.density_bounds_check(&q(1, 2), &q(2, 1)));
        }
        let eps = q(1, 1_000_000);
        let mut r = Referee::concrete(QueryModel::Rw, vals.clone());
        let res = rms_envy_free(&mut r, 3, &eps).unwrap();
        assert!(envy_gap(&res.allocation, &vals).unwrap() <= eps);
        assert!(!res.fallback);
    }

    #[test]
    fn asymmetric_rms() {
        let vals = rms3([(35, 100), (36, 100), (34, 100)]);
        let eps = q(1, 100_000);
        let mut r = Referee::concrete(QueryModel::Rw, vals.clone());
        let res = rms_envy_free(&mut r, 3, &eps).unwrap();
        assert!(envy_gap(&res.allocation, &vals).unwrap() <= eps);
    }

    #[test]
    fn coarse_tolerance_succeeds_immediately() {
        let vals = rms3([(35, 100); 3]);
        let mut r = Referee::concrete(QueryModel::Rw, vals.clone());
        let res = rms_envy_free(&mut r, 3, &q(1, 2)).unwrap();
        assert!(envy_gap(&res.allocation, &vals).unwrap() <= q(1, 2));
        assert!(res.queries_used <= 6);
    }
}
