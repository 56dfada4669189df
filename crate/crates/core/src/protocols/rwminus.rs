use num_traits::Zero;

use crate::error::{Error, Result};
use crate::query::{QueryModel, Referee};
use crate::rational::{abs, ceil_log2, mid, one, zero, Q};

/// Eval budget for answering one Cut under RW-: `ceil(log2(D / eps)) + 1`.
pub fn rwminus_budget(eps: &Q, density_bound: &Q) -> usize {
    ceil_log2(&(density_bound / eps)) as usize + 1
}

/// Approximates `Cut_i(alpha)` with Eval queries only.
///
/// Bisects `[0, 1]` on the player's prefix value. Once the bracket is no
/// wider than `eps / D` it is worth at most `eps`, so the midpoint answers
/// within `eps`. Returns the point and the number of Eval queries spent.
pub fn rwminus_answer_cut(
    referee: &mut Referee,
    player: usize,
    alpha: &Q,
    eps: &Q,
    density_bound: &Q,
) -> Result<(Q, usize)> {
    if referee.model() != QueryModel::RwMinus {
        return Err(Error::Precondition("Eval-only cut simulation runs under RW-".into()));
    }
    if eps <= &zero() || density_bound <= &zero() {
        return Err(Error::Precondition("epsilon and density bound must be positive".into()));
    }
    if alpha.is_zero() {
        return Ok((zero(), 0));
    }
    if alpha == &one() {
        return Ok((one(), 0));
    }
    let budget = rwminus_budget(eps, density_bound);
    let (mut lo, mut hi) = (zero(), one());
    for used in 1..=budget {
        let m = mid(&lo, &hi);
        let w = referee.eval(player, &m)?;
        if abs(&(&w - alpha)) <= *eps {
            return Ok((m, used));
        }
        if w < *alpha {
            lo = m;
        } else {
            hi = m;
        }
    }
    Err(Error::Precondition(format!("no answer within {budget} evals; the density exceeds the declared bound")))
}
