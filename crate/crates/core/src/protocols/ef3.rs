use crate::error::{Error, Result};
use crate::fairness::{Allocation, Notion};
use crate::query::Referee;
use crate::rational::{abs, mid, one, q, zero, Q};

use super::{envy_free_order, require_players, require_positive, Ctx, ProtocolResult, MAX_ROUNDS};

/// Which segment player 2 is steered toward in the two search cases.
#[derive(Clone, Copy)]
enum Case {
    /// Both others like the middle of the rightmost marker's thirds.
    Middle,
    /// Both others like the left third.
    Left,
}

impl Case {
    fn segment(self) -> usize {
        match self {
            Case::Middle => 1,
            Case::Left => 0,
        }
    }
}

struct Search<'c, 'r> {
    ctx: &'c mut Ctx<'r>,
    eps: Q,
    /// Player roles: the rightmost marker, then the other two.
    p1: usize,
    p2: usize,
}

impl Search<'_, '_> {
    /// An eps-envy-free order for cuts `c`, if one exists.
    fn try_cuts(&mut self, c: &[Q; 2]) -> Result<Option<Allocation>> {
        let seg = self.ctx.segment_matrix(c)?;
        Ok(match envy_free_order(&seg, &self.eps) {
            Some(order) => Some(Allocation::from_cuts(c, &order)?),
            None => None,
        })
    }

    /// Player 2 weakly prefers the case's segment at cuts `c`.
    fn leans(&mut self, case: Case, c: &[Q; 2]) -> Result<bool> {
        let seg = self.ctx.segment_values(self.p2, c)?;
        let target = &seg[case.segment()];
        Ok(seg.iter().all(|v| target >= v))
    }

    fn config(&mut self, case: Case, param: &Q) -> Result<[Q; 2]> {
        let (a, b) = match case {
            Case::Middle => (param.clone(), one() - param),
            Case::Left => (param.clone(), (one() + param) / Q::from_integer(2.into())),
        };
        Ok([self.ctx.cut(self.p1, &a)?, self.ctx.cut(self.p1, &b)?])
    }
}

/// Connected eps-envy-free allocation for three hungry players.
///
/// The rightmost of the three two-thirds marks fixes player 1. If its
/// thirds admit no eps-envy-free order, the others agree on a favourite
/// (middle or left) and a one-parameter family of player-1-balanced cuts is
/// bisected on player 1's values until player 1 barely cares where the
/// cuts land. A final bisection on player 2's values along one coordinate
/// finds the point where player 2 is indifferent, which admits an
/// eps-envy-free order. Every probe tests all six orders.
pub fn ef3_barbanel_brams(referee: &mut Referee, eps: &Q) -> Result<ProtocolResult> {
    require_players(referee, 3, "ef3")?;
    require_positive(eps)?;
    let mut ctx = Ctx::new(referee);
    let two_thirds = q(2, 3);
    let marks = (0..3).map(|i| ctx.cut(i, &two_thirds)).collect::<Result<Vec<_>>>()?;
    let p1 = (0..3).fold(0, |best, i| if marks[i] > marks[best] { i } else { best });
    let p2 = (0..3).find(|&i| i != p1).expect("three players");
    let left = ctx.cut(p1, &q(1, 3))?;
    let start = [left, marks[p1].clone()];
    let mut s = Search { ctx: &mut ctx, eps: eps.clone(), p1, p2 };
    if let Some(a) = s.try_cuts(&start)? {
        return ctx.finish(a, eps, Notion::Envy, false);
    }

    let case = if s.leans(Case::Middle, &start)? {
        Case::Middle
    } else if s.leans(Case::Left, &start)? {
        Case::Left
    } else {
        return Err(Error::Precondition("players 2 and 3 favour the right third; not hungry".into()));
    };
    // Parameters: the lean holds at `yes`, fails at `no`.
    let (mut yes, mut no) = match case {
        Case::Middle => (q(1, 3), q(1, 2)),
        Case::Left => (q(1, 3), zero()),
    };
    let mut cfg_yes = start;
    let mut cfg_no = s.config(case, &no)?;
    let half_eps = eps / Q::from_integer(2.into());
    let mut rounds = 0;
    while abs(&(&yes - &no)) >= half_eps {
        rounds += 1;
        if rounds > MAX_ROUNDS {
            return Err(stall());
        }
        let param = mid(&yes, &no);
        let c = s.config(case, &param)?;
        if let Some(a) = s.try_cuts(&c)? {
            return ctx.finish(a, eps, Notion::Envy, false);
        }
        if s.leans(case, &c)? {
            yes = param;
            cfg_yes = c;
        } else {
            no = param;
            cfg_no = c;
        }
    }

    // Corner: one coordinate from each configuration. It shares one coordinate with
    // each, so a single-coordinate search always connects it to the opposite verdict.
    let corner = match case {
        Case::Middle => [cfg_no[0].clone(), cfg_yes[1].clone()],
        Case::Left => [cfg_yes[0].clone(), cfg_no[1].clone()],
    };
    if let Some(a) = s.try_cuts(&corner)? {
        return ctx.finish(a, eps, Notion::Envy, false);
    }
    let (mut at_yes, mut at_no) = if s.leans(case, &corner)? { (corner, cfg_no) } else { (cfg_yes, corner) };
    let k = if at_yes[0] != at_no[0] { 0 } else { 1 };
    let quarter_eps = eps / Q::from_integer(4.into());
    for _ in 0..MAX_ROUNDS {
        let v_yes = s.ctx.eval(p2, &at_yes[k])?;
        let v_no = s.ctx.eval(p2, &at_no[k])?;
        if abs(&(&v_yes - &v_no)) < quarter_eps {
            break;
        }
        let x = s.ctx.cut(p2, &mid(&v_yes, &v_no))?;
        let mut c = at_yes.clone();
        c[k] = x;
        if let Some(a) = s.try_cuts(&c)? {
            return ctx.finish(a, eps, Notion::Envy, false);
        }
        if s.leans(case, &c)? {
            at_yes = c;
        } else {
            at_no = c;
        }
    }
    for c in [&at_yes, &at_no] {
        if let Some(a) = s.try_cuts(c)? {
            return ctx.finish(a, eps, Notion::Envy, false);
        }
    }
    Err(stall())
}

fn stall() -> Error {
    Error::Precondition("three-player search stalled; a player is not hungry".into())
}
