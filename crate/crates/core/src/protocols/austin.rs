use crate::error::{Error, Result};
use crate::fairness::{Allocation, Notion};
use crate::query::Referee;
use crate::rational::{abs, mid, one, q, zero, Q};
use crate::valuation::Piece;

use super::{require_players, require_positive, Ctx, ProtocolResult, MAX_ROUNDS};

/// Two-cut perfect allocation for two players.
///
/// Player `a` (owner of the rightmost midpoint) keeps a window worth exactly
/// one half to it. The window is slid right by bisection on `a`'s value of
/// its right end until player `b` also values it at one half within `eps`.
/// When `a`'s bracket is narrower than `eps` the search continues on `b`'s
/// value of the right end. The window goes to player 1, the two outer
/// pieces to player 2.
pub fn austin_perfect_2(referee: &mut Referee, eps: &Q) -> Result<ProtocolResult> {
    require_players(referee, 2, "austin-perfect-2")?;
    require_positive(eps)?;
    let half = q(1, 2);
    let mut ctx = Ctx::new(referee);
    let z0 = ctx.cut(0, &half)?;
    let z1 = ctx.cut(1, &half)?;
    if z0 == z1 {
        return finish(ctx, zero(), z0, eps);
    }
    let (a, b) = if z0 > z1 { (0, 1) } else { (1, 0) };

    // Bracket on a's value of the window's right end: excess(lo) > 0 > excess(hi).
    let (mut lo, mut hi) = (half.clone(), one());
    let mut rounds = 0;
    while &hi - &lo >= *eps {
        rounds += 1;
        if rounds > MAX_ROUNDS {
            return Err(stall());
        }
        let u = mid(&lo, &hi);
        let r = ctx.cut(a, &u)?;
        let l = ctx.cut(a, &(&u - &half))?;
        let excess = ctx.value(b, &l, &r)? - &half;
        if abs(&excess) <= *eps {
            return finish(ctx, l, r, eps);
        }
        if excess > zero() {
            lo = u;
        } else {
            hi = u;
        }
    }

    let right_end = |ctx: &mut Ctx, u: &Q| -> Result<Q> {
        if u == &one() {
            Ok(one())
        } else {
            ctx.cut(a, u)
        }
    };
    let mut r_lo = right_end(&mut ctx, &lo)?;
    let mut r_hi = right_end(&mut ctx, &hi)?;
    for _ in 0..MAX_ROUNDS {
        let v = mid(&ctx.eval(b, &r_lo)?, &ctx.eval(b, &r_hi)?);
        let r = ctx.cut(b, &v)?;
        let u = ctx.eval(a, &r)?;
        let l = ctx.cut(a, &(&u - &half))?;
        let excess = &v - ctx.eval(b, &l)? - &half;
        if abs(&excess) <= *eps {
            return finish(ctx, l, r, eps);
        }
        if excess > zero() {
            r_lo = r;
        } else {
            r_hi = r;
        }
    }
    Err(stall())
}

fn stall() -> Error {
    Error::Precondition("perfect-allocation bisection stalled; a player is not hungry".into())
}

fn finish(ctx: Ctx, l: Q, r: Q, eps: &Q) -> Result<ProtocolResult> {
    let middle = Piece::interval(l.clone(), r.clone())?;
    let outer = Piece::from_pairs(&[(zero(), l), (r, one())])?;
    ctx.finish(Allocation::new(vec![middle, outer])?, eps, Notion::Perfection, false)
}
