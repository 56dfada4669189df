use crate::error::Result;
use crate::fairness::{Allocation, Notion};
use crate::query::Referee;
use crate::rational::{q, zero};

use super::{require_players, Ctx, ProtocolResult};

/// Player 1 halves the cake; player 2 takes the half it values more.
/// Two queries: the cut and player 2's evaluation of the left half.
pub fn cut_and_choose(referee: &mut Referee) -> Result<ProtocolResult> {
    require_players(referee, 2, "cut-and-choose")?;
    let half = q(1, 2);
    let mut ctx = Ctx::new(referee);
    let z = ctx.cut(0, &half)?;
    let chooser_left = ctx.eval(1, &z)?;
    let order = if chooser_left >= half { [1, 0] } else { [0, 1] };
    let alloc = Allocation::from_cuts(&[z], &order)?;
    ctx.finish(alloc, &zero(), Notion::Envy, false)
}
