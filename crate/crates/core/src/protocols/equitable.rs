use crate::error::{Error, Result};
use crate::fairness::{Allocation, Notion};
use crate::query::Referee;
use crate::rational::{abs, mid, one, q, zero, Q};

use super::{require_players, require_positive, Ctx, ProtocolResult, MAX_ROUNDS};

/// Two-player equitable cut by bisection on player 1's prefix value `w`.
///
/// With `z = Cut_1(w)`, the balance `w - V_2(z, 1)` is strictly increasing
/// for hungry players, so its unique zero is bracketed by `w = 0` and `w = 1`.
/// At a cut where the balance is within `eps`, both orders are equitable to
/// within `eps`; the order giving each player at least about one half is returned.
pub fn equitable_2(referee: &mut Referee, eps: &Q) -> Result<ProtocolResult> {
    require_players(referee, 2, "equitable-2")?;
    require_positive(eps)?;
    let mut ctx = Ctx::new(referee);
    let (mut lo, mut hi) = (zero(), one());
    for _ in 0..MAX_ROUNDS {
        let w = mid(&lo, &hi);
        let z = ctx.cut(0, &w)?;
        let v2 = ctx.eval(1, &z)?;
        let balance = &w + &v2 - one();
        if abs(&balance) <= *eps {
            let order = if w >= q(1, 2) { [0, 1] } else { [1, 0] };
            let alloc = Allocation::from_cuts(&[z], &order)?;
            return ctx.finish(alloc, eps, Notion::Equitability, false);
        }
        if balance < zero() {
            lo = w;
        } else {
            hi = w;
        }
    }
    Err(Error::Precondition("equitable bisection stalled; a player is not hungry".into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fairness::{equitability_gap, proportionality_gap};
    use crate::gen::{default_band, random_profile};
    use crate::query::QueryModel;
    use crate::rational::pow2_neg;
    use crate::valuation::PiecewiseDensity;

    #[test]
    fn uniform_pair_cuts_at_half() {
        let vals = vec![PiecewiseDensity::uniform(); 2];
        let mut r = Referee::concrete(QueryModel::Rw, vals.clone());
        let res = equitable_2(&mut r, &q(1, 100)).unwrap();
        assert_eq!(res.allocation.demarcation_points().into_iter().nth(1).unwrap(), q(1, 2));
        assert_eq!(equitability_gap(&res.allocation, &vals).unwrap(), zero());
        assert_eq!(res.queries_used, 2);
    }

    #[test]
    fn random_pairs_meet_tolerance() {
        let (lo, hi) = default_band();
        let eps = pow2_neg(27);
        for seed in 0..10 {
            let vals = random_profile(2, 6, &lo, &hi, seed).unwrap();
            let mut r = Referee::concrete(QueryModel::Rw, vals.clone());
            let res = equitable_2(&mut r, &eps).unwrap();
            assert!(equitability_gap(&res.allocation, &vals).unwrap() <= eps);
            assert_eq!(proportionality_gap(&res.allocation, &vals).unwrap(), zero());
            assert!(res.queries_used <= 2 * 30);
        }
    }
}
