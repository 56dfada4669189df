use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use itertools::Itertools;
use num_traits::Signed;
use serde_json::json;

use super::{simulate_step, DensityBounds, Device, EpsOutcome, MovingKnifeStep};
use crate::error::{Error, Result};
use crate::fairness::{Allocation, Notion};
use crate::protocols::{austin_extension_k, envy_free_order, Ctx, ProtocolOutput};
use crate::query::Referee;
use crate::rational::{fmt_q, one, q, zero, Q};
use crate::valuation::Piece;

fn int(n: usize) -> Q {
    Q::from_integer(n.into())
}

fn median3(a: &Q, b: &Q, c: &Q) -> Q {
    let mut v = [a, b, c];
    v.sort();
    v[1].clone()
}

/// Austin's step for two players once `z` halves the cake for player 1:
/// knife 1 runs to `z`, knife 2 keeps half of player 1's value between the
/// knives, and the trigger is player 2's value between them minus one half.
pub fn build_austin_step(z: &Q, bounds: &DensityBounds) -> MovingKnifeStep {
    let (lo, hi) = (&bounds.lo, &bounds.hi);
    let zc = z.clone();
    MovingKnifeStep {
        name: "austin".into(),
        first_knife: Arc::new(move |t: &Q| std::cmp::min(t, &zc).clone()),
        devices: vec![
            Device::knife(
                Some(0),
                "player 1 half-value knife",
                2,
                Arc::new(|v: &[Q], ctx: &mut Ctx| {
                    let a = ctx.eval(0, &v[0])?;
                    ctx.cut(0, &(a + q(1, 2)))
                }),
            ),
            Device::trigger(
                Some(1),
                "player 2 value between knives minus 1/2",
                2,
                Arc::new(|v: &[Q], ctx: &mut Ctx| Ok(ctx.value(1, &v[0], &v[1])? - q(1, 2))),
            ),
        ],
        alpha: zero(),
        omega: one(),
        zeta: hi * (one() + hi / lo) + one(),
        bounds: bounds.clone(),
        trigger: 3,
    }
}

/// Trigger 8 of Stromquist's step from the three stop triggers.
fn stromquist_composite(g: &[Q]) -> Q {
    if g.iter().all(|x| x.is_negative()) {
        // The largest keeps the value continuous where one trigger turns non-negative.
        return g.iter().max().expect("three triggers").clone();
    }
    if g.iter().all(|x| x.is_positive()) {
        let mut s: Vec<&Q> = g.iter().collect();
        s.sort();
        return s[0] + s[1];
    }
    for i in 0..g.len() {
        let rest: Vec<&Q> = (0..g.len()).filter(|&j| j != i).map(|j| &g[j]).collect();
        if !g[i].is_positive() && rest.iter().all(|x| !x.is_negative()) {
            return (*rest.iter().min().expect("two triggers")).clone();
        }
    }
    zero()
}

/// Stromquist's step: the referee knife at time `t`, each player's midpoint of
/// `[t,1]`, one stop trigger per player and the composite trigger 8.
pub fn build_stromquist_step(bounds: &DensityBounds) -> MovingKnifeStep {
    let (lo, hi) = (&bounds.lo, &bounds.hi);
    let mut devices = Vec::new();
    for k in 0..3 {
        devices.push(Device::knife(
            Some(k),
            &format!("player {} midpoint of the rest", k + 1),
            2,
            Arc::new(move |v: &[Q], ctx: &mut Ctx| {
                let a = ctx.eval(k, &v[0])?;
                ctx.cut(k, &((one() + a) / int(2)))
            }),
        ));
    }
    for k in 0..3 {
        devices.push(Device::trigger(
            Some(k),
            &format!("player {} stop trigger", k + 1),
            1,
            Arc::new(move |v: &[Q], ctx: &mut Ctx| {
                let y = median3(&v[1], &v[2], &v[3]);
                let left = ctx.eval(k, &v[0])?;
                let middle = ctx.value(k, &v[0], &y)?;
                let right = ctx.value(k, &y, &one())?;
                Ok(left - std::cmp::max(middle, right))
            }),
        ));
    }
    devices.push(Device::trigger(
        None,
        "composite stop trigger",
        0,
        Arc::new(|v: &[Q], _: &mut Ctx| Ok(stromquist_composite(&v[4..7]))),
    ));
    MovingKnifeStep {
        name: "stromquist".into(),
        first_knife: Arc::new(|t: &Q| t.clone()),
        devices,
        alpha: zero(),
        omega: one(),
        zeta: int(4) * hi + hi * hi / lo + one(),
        bounds: bounds.clone(),
        trigger: 8,
    }
}

/// Allocation read off a Stromquist outcome: the player with the largest stop
/// trigger takes `[0,x]`; of the other two, the lower midpoint takes `[x,y]`.
pub fn stromquist_allocation(device_values: &[Q]) -> Result<Allocation> {
    let x = &device_values[0];
    let marks = &device_values[1..4];
    let g = &device_values[4..7];
    let y = median3(&marks[0], &marks[1], &marks[2]);
    let first = (0..3).fold(0, |b, i| if g[i] > g[b] { i } else { b });
    let mut rest: Vec<usize> = (0..3).filter(|&i| i != first).collect();
    rest.sort_by(|&a, &b| marks[a].cmp(&marks[b]).then(a.cmp(&b)));
    Allocation::from_cuts(&[x.clone(), y], &[first, rest[0], rest[1]])
}

/// The equitable step for players in `order`: knife `j` gives player `order[j]`
/// the same value as player `order[0]` has for `[0, x1]`, on a cake extended
/// by uniform value beyond 1. The trigger is the last player's extended
/// prefix value at its knife, minus 1.
pub fn build_equitable_step(order: &[usize], bounds: &DensityBounds) -> Result<MovingKnifeStep> {
    let n = order.len();
    if n < 2 {
        return Err(Error::Precondition("the equitable step needs at least two players".into()));
    }
    let lo = std::cmp::min(bounds.lo.clone(), one());
    let hi = std::cmp::max(bounds.hi.clone(), one());
    let ratio = &hi / &lo;
    let mut slope = one();
    let mut prev_slope = one();
    for _ in 1..n {
        prev_slope = slope.clone();
        slope = &ratio * (one() + &slope);
    }
    let zeta = std::cmp::max(slope, &hi * (one() + prev_slope)) + one();
    let lead = order[0];
    let mut devices = Vec::new();
    for j in 1..n {
        let player = order[j];
        devices.push(Device::knife(
            Some(player),
            &format!("player {} equal-value knife", player + 1),
            if j == 1 { 3 } else { 2 },
            Arc::new(move |v: &[Q], ctx: &mut Ctx| {
                let target = ctx.eval(lead, &v[0])? + extended_prefix(ctx, player, &v[j - 1])?;
                if target <= one() {
                    ctx.cut(player, &target)
                } else {
                    Ok(target)
                }
            }),
        ));
    }
    let last = order[n - 1];
    devices.push(Device::trigger(
        Some(last),
        "last player's extended value minus 1",
        0,
        Arc::new(move |v: &[Q], ctx: &mut Ctx| {
            Ok(ctx.eval(lead, &v[0])? + extended_prefix(ctx, last, &v[n - 2])? - one())
        }),
    ));
    Ok(MovingKnifeStep {
        name: "equitable".into(),
        first_knife: Arc::new(|t: &Q| t.clone()),
        devices,
        alpha: zero(),
        omega: one(),
        zeta,
        bounds: bounds.clone(),
        trigger: n + 1,
    })
}

/// Value of `[0, y]` on the extended cake, where each unit beyond 1 is worth 1.
fn extended_prefix(ctx: &mut Ctx, player: usize, y: &Q) -> Result<Q> {
    if y <= &one() {
        ctx.eval(player, y)
    } else {
        Ok(y.clone())
    }
}

fn equitable_allocation(device_values: &[Q], order: &[usize]) -> Result<Allocation> {
    let cuts: Vec<Q> = device_values[..order.len() - 1].iter().map(|y| std::cmp::min(y, &one()).clone()).collect();
    Allocation::from_cuts(&cuts, order)
}

/// Runs the equitable step for every order of the players and keeps the one
/// giving the largest common value.
pub fn equitable_all_orders(ctx: &mut Ctx, eps: &Q, bounds: &DensityBounds) -> Result<(Allocation, Vec<EpsOutcome>)> {
    let n = ctx.n();
    let mut outcomes = Vec::new();
    let mut best: Option<(Q, Allocation)> = None;
    for order in (0..n).permutations(n) {
        let step = build_equitable_step(&order, bounds)?;
        let out = simulate_step(&step, eps, ctx)?;
        let common = ctx.eval(order[0], &out.device_values[0])?;
        let alloc = equitable_allocation(&out.device_values, &order)?;
        if best.as_ref().is_none_or(|(c, _)| &common > c) {
            best = Some((common, alloc));
        }
        outcomes.push(out);
    }
    Ok((best.expect("at least one order").1, outcomes))
}

/// Which piece both non-marking players prefer in the Barbanel-Brams preamble.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BbCase {
    /// Both prefer the middle third; the knives close in from the outside.
    Middle,
    /// Both prefer the left third; the left knife moves toward 0.
    Left,
}

/// Barbanel-Brams step: the referee knife, player `p1`'s balancing knife,
/// two difference triggers for each other player, and a referee trigger
/// that turns zero when one of them becomes indifferent.
pub fn build_barbanel_brams_step(
    case: BbCase,
    p1: usize,
    left_third: &Q,
    p1_half: &Q,
    bounds: &DensityBounds,
) -> MovingKnifeStep {
    let (lo, hi) = (&bounds.lo, &bounds.hi);
    let others: Vec<usize> = (0..3).filter(|&i| i != p1).collect();
    let mut devices = vec![Device::knife(
        Some(p1),
        "balancing knife",
        2,
        Arc::new(move |v: &[Q], ctx: &mut Ctx| {
            let a = ctx.eval(p1, &v[0])?;
            match case {
                BbCase::Middle => ctx.cut(p1, &(one() - a)),
                BbCase::Left => ctx.cut(p1, &((one() + a) / int(2))),
            }
        }),
    )];
    for &j in &others {
        devices.push(Device::trigger(
            Some(j),
            &format!("player {} left minus middle", j + 1),
            2,
            Arc::new(move |v: &[Q], ctx: &mut Ctx| Ok(ctx.eval(j, &v[0])? - ctx.value(j, &v[0], &v[1])?)),
        ));
        devices.push(Device::trigger(
            Some(j),
            &format!("player {} middle minus right", j + 1),
            0,
            Arc::new(move |v: &[Q], ctx: &mut Ctx| Ok(ctx.value(j, &v[0], &v[1])? - ctx.value(j, &v[1], &one())?)),
        ));
    }
    devices.push(Device::trigger(
        None,
        "indifference trigger",
        0,
        Arc::new(move |v: &[Q], _: &mut Ctx| {
            let per_player = [(&v[2], &v[3]), (&v[4], &v[5])].map(|(d3, d4)| match case {
                BbCase::Middle => std::cmp::min(-d3.clone(), d4.clone()),
                BbCase::Left => std::cmp::min(d3.clone(), d3 + d4),
            });
            Ok(std::cmp::min(per_player[0].clone(), per_player[1].clone()))
        }),
    ));
    let (alpha, omega) = match case {
        BbCase::Middle => (left_third.clone(), p1_half.clone()),
        BbCase::Left => (zero(), left_third.clone()),
    };
    MovingKnifeStep {
        name: "barbanel-brams".into(),
        first_knife: Arc::new(|t: &Q| t.clone()),
        devices,
        alpha,
        omega,
        zeta: int(3) * hi * (one() + hi / lo) + one(),
        bounds: bounds.clone(),
        trigger: 7,
    }
}

/// Result of the discrete Barbanel-Brams preamble.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BbStart {
    /// The thirds of the player with the rightmost 2/3 mark already admit an eps-envy-free order.
    Settled { cuts: [Q; 2], order: Vec<usize> },
    /// Both other players prefer the same third; run the step from here.
    Knife { case: BbCase, p1: usize, left: Q, half: Q },
}

/// Player `p1` with the rightmost 2/3 mark cuts thirds; if no order is
/// eps-envy-free, the other two players' common favourite picks the case.
pub fn bb_preamble(ctx: &mut Ctx, eps: &Q) -> Result<BbStart> {
    let marks = (0..3).map(|i| ctx.cut(i, &q(2, 3))).collect::<Result<Vec<_>>>()?;
    let p1 = (0..3).fold(0, |b, i| if marks[i] > marks[b] { i } else { b });
    let left = ctx.cut(p1, &q(1, 3))?;
    let cuts = [left.clone(), marks[p1].clone()];
    let seg = ctx.segment_matrix(&cuts)?;
    if let Some(order) = envy_free_order(&seg, eps) {
        return Ok(BbStart::Settled { cuts, order });
    }
    let favourite = |row: &[Q]| (0..3).fold(0, |b, s| if row[s] > row[b] { s } else { b });
    let others: Vec<usize> = (0..3).filter(|&i| i != p1).collect();
    let case = match (favourite(&seg[others[0]]), favourite(&seg[others[1]])) {
        (1, 1) => BbCase::Middle,
        (0, 0) => BbCase::Left,
        _ => return Err(Error::Precondition("preamble found no common favourite".into())),
    };
    let half = ctx.cut(p1, &q(1, 2))?;
    Ok(BbStart::Knife { case, p1, left, half })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Procedure {
    Austin,
    Stromquist,
    Equitable,
    BarbanelBrams,
    AustinExtension { pieces: usize },
}

impl FromStr for Procedure {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let s = s.to_ascii_lowercase().replace('_', "-");
        let (head, arg) = s.split_once(':').map_or((s.as_str(), None), |(h, a)| (h, Some(a)));
        match head {
            "austin" => Ok(Procedure::Austin),
            "stromquist" => Ok(Procedure::Stromquist),
            "equitable" => Ok(Procedure::Equitable),
            "barbanel-brams" | "bb" => Ok(Procedure::BarbanelBrams),
            "austin-extension" => {
                let pieces = match arg {
                    None => 3,
                    Some(a) => a.parse().map_err(|_| Error::Parse(format!("bad piece count '{a}'")))?,
                };
                Ok(Procedure::AustinExtension { pieces })
            }
            _ => Err(Error::Parse(format!("unknown procedure '{s}'"))),
        }
    }
}

impl fmt::Display for Procedure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Procedure::Austin => f.write_str("austin"),
            Procedure::Stromquist => f.write_str("stromquist"),
            Procedure::Equitable => f.write_str("equitable"),
            Procedure::BarbanelBrams => f.write_str("barbanel-brams"),
            Procedure::AustinExtension { pieces } => write!(f, "austin-extension:{pieces}"),
        }
    }
}

/// A finished moving-knife procedure.
#[derive(Debug, Clone)]
pub struct KnifeRun {
    pub procedure: Procedure,
    pub output: ProtocolOutput,
    /// `None` when a discrete preamble already settled the instance.
    pub outcome: Option<EpsOutcome>,
    pub budget: Option<usize>,
}

impl KnifeRun {
    pub fn to_json(&self, gap: Option<&Q>) -> serde_json::Value {
        let mut v = self.output.to_json(gap);
        v["procedure"] = json!(self.procedure.to_string());
        v["outcome"] = self.outcome.as_ref().map_or(serde_json::Value::Null, |o| o.to_json());
        v["budget"] = json!(self.budget);
        v
    }
}

fn require(referee: &Referee, n: usize, what: &Procedure) -> Result<()> {
    if referee.n_players() != n {
        return Err(Error::Precondition(format!("{what} needs {n} players, got {}", referee.n_players())));
    }
    Ok(())
}

/// Runs a named procedure end to end: discrete preamble, simulated step and
/// allocation. Density bounds default to those of concrete valuations.
pub fn run_procedure(
    procedure: Procedure,
    referee: &mut Referee,
    eps: &Q,
    bounds: Option<DensityBounds>,
) -> Result<KnifeRun> {
    if let Procedure::AustinExtension { pieces } = procedure {
        let split = austin_extension_k(referee, pieces, eps)?;
        return Ok(KnifeRun { procedure, output: ProtocolOutput::Partition(split), outcome: None, budget: None });
    }
    let bounds = match bounds {
        Some(b) => b,
        None => match referee.concrete_valuations() {
            Some(v) => DensityBounds::of(v)?,
            None => return Err(Error::Precondition("density bounds are required for adaptive oracles".into())),
        },
    };
    let mut ctx = Ctx::new(referee);
    let (allocation, notion, outcome, budget) = match procedure {
        Procedure::Austin => {
            require(ctx.referee(), 2, &procedure)?;
            let z = ctx.cut(0, &q(1, 2))?;
            if ctx.eval(1, &z)? == q(1, 2) {
                (Allocation::from_cuts(&[z], &[0, 1])?, Notion::Perfection, None, None)
            } else {
                let step = build_austin_step(&z, &bounds);
                let out = simulate_step(&step, eps, &mut ctx)?;
                let (x, p) = (&out.device_values[0], &out.device_values[1]);
                let inner = Piece::interval(x.clone(), p.clone())?;
                let outer = Piece::from_pairs(&[(zero(), x.clone()), (p.clone(), one())])?;
                let budget = step.query_budget(eps);
                (Allocation::new(vec![inner, outer])?, Notion::Perfection, Some(out), Some(budget))
            }
        }
        Procedure::Stromquist => {
            require(ctx.referee(), 3, &procedure)?;
            let step = build_stromquist_step(&bounds);
            let out = simulate_step(&step, eps, &mut ctx)?;
            let alloc = stromquist_allocation(&out.device_values)?;
            (alloc, Notion::Envy, Some(out), Some(step.query_budget(eps)))
        }
        Procedure::Equitable => {
            let order: Vec<usize> = (0..ctx.n()).collect();
            let step = build_equitable_step(&order, &bounds)?;
            let out = simulate_step(&step, eps, &mut ctx)?;
            let alloc = equitable_allocation(&out.device_values, &order)?;
            (alloc, Notion::Equitability, Some(out), Some(step.query_budget(eps)))
        }
        Procedure::BarbanelBrams => {
            require(ctx.referee(), 3, &procedure)?;
            match bb_preamble(&mut ctx, eps)? {
                BbStart::Settled { cuts, order } => (Allocation::from_cuts(&cuts, &order)?, Notion::Envy, None, None),
                BbStart::Knife { case, p1, left, half } => {
                    let step = build_barbanel_brams_step(case, p1, &left, &half, &bounds);
                    let out = simulate_step(&step, eps, &mut ctx)?;
                    let mut cuts = [out.device_values[0].clone(), out.device_values[1].clone()];
                    cuts.sort();
                    let seg = ctx.segment_matrix(&cuts)?;
                    let order = envy_free_order(&seg, eps).ok_or_else(|| {
                        Error::Precondition(format!(
                            "no eps-envy-free order at cuts {} and {}",
                            fmt_q(&cuts[0]),
                            fmt_q(&cuts[1])
                        ))
                    })?;
                    (Allocation::from_cuts(&cuts, &order)?, Notion::Envy, Some(out), Some(step.query_budget(eps)))
                }
            }
        }
        Procedure::AustinExtension { .. } => unreachable!("handled above"),
    };
    let result = ctx.finish(allocation, eps, notion, false)?;
    Ok(KnifeRun { procedure, output: ProtocolOutput::Allocation(result), outcome, budget })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fairness::{envy_gap, equitability_gap, gap, perfection_gap, proportionality_gap};
    use crate::gen::random_profile;
    use crate::movingknife::{trigger_slope, verify_outcome};
    use crate::query::QueryModel;
    use crate::valuation::PiecewiseDensity;

    fn uniform(n: usize) -> Vec<PiecewiseDensity> {
        vec![PiecewiseDensity::uniform(); n]
    }

    fn bounds_of(v: &[PiecewiseDensity]) -> DensityBounds {
        DensityBounds::of(v).unwrap()
    }

    fn band() -> (Q, Q) {
        (q(1, 2), int(2))
    }

    #[test]
    fn stromquist_endpoints_on_uniform_triple() {
        let v = uniform(3);
        let step = build_stromquist_step(&bounds_of(&v));
        let mut r = Referee::concrete(QueryModel::RwPlus, v);
        let mut ctx = Ctx::new(&mut r);
        assert_eq!(step.evaluate(&zero(), &mut ctx).unwrap()[7], q(-1, 2));
        assert_eq!(step.evaluate(&one(), &mut ctx).unwrap()[7], int(2));
    }

    #[test]
    fn composite_is_continuous_at_case_switches() {
        let tiny = q(1, 1_000_000);
        // All negative, one about to cross zero: case (a) value equals the crossing trigger.
        let before = stromquist_composite(&[q(-3, 10), q(-1, 5), -tiny.clone()]);
        let after = stromquist_composite(&[q(-3, 10), q(-1, 5), tiny.clone()]);
        assert!((&after - &before).abs() <= &tiny * int(2));
        let c = stromquist_composite(&[-tiny.clone(), q(1, 5), q(3, 10)]);
        let b = stromquist_composite(&[tiny.clone(), q(1, 5), q(3, 10)]);
        assert!((&c - &b).abs() <= &tiny * int(2));
    }

    #[test]
    fn stromquist_uniform_fires_at_a_third() {
        let v = uniform(3);
        let mut r = Referee::concrete(QueryModel::Rw, v.clone());
        let run = run_procedure(Procedure::Stromquist, &mut r, &q(1, 1000), None).unwrap();
        let out = run.outcome.unwrap();
        assert!((&out.time - q(1, 3)).abs() <= q(1, 1000));
        let ProtocolOutput::Allocation(res) = run.output else { panic!("allocation expected") };
        assert!(envy_gap(&res.allocation, &v).unwrap() <= q(1, 1000));
    }

    #[test]
    fn austin_uniform_is_exact() {
        let v = uniform(2);
        let mut r = Referee::concrete(QueryModel::Rw, v.clone());
        let run = run_procedure(Procedure::Austin, &mut r, &q(1, 100), None).unwrap();
        assert!(run.outcome.is_none());
        assert_eq!(run.output.gap(&v).unwrap(), zero());
        let step = build_austin_step(&q(1, 2), &bounds_of(&v));
        let mut r = Referee::concrete(QueryModel::Rw, v);
        let mut ctx = Ctx::new(&mut r);
        let out = simulate_step(&step, &q(1, 100), &mut ctx).unwrap();
        assert_eq!(out.rounds, 0);
        assert_eq!(out.trigger_value(), &zero());
    }

    #[test]
    fn random_instances_meet_outcome_contract() {
        let (lo, hi) = band();
        let eps = q(1, 1 << 12);
        for seed in 0..6u64 {
            for proc in [Procedure::Austin, Procedure::Stromquist, Procedure::Equitable, Procedure::BarbanelBrams] {
                let n = match proc {
                    Procedure::Austin => 2,
                    Procedure::Equitable => 4,
                    _ => 3,
                };
                let v = random_profile(n, 4, &lo, &hi, seed).unwrap();
                let mut r = Referee::concrete(QueryModel::Rw, v.clone());
                let run = run_procedure(proc, &mut r, &eps, None).unwrap();
                let ProtocolOutput::Allocation(res) = &run.output else { panic!("allocation expected") };
                let g = gap(res.notion, &res.allocation, &v).unwrap();
                assert!(g <= eps, "{proc} seed {seed}: gap {}", fmt_q(&g));
                if let (Some(out), Some(budget)) = (&run.outcome, run.budget) {
                    assert!(out.queries <= budget, "{proc}: {} queries over budget {budget}", out.queries);
                }
            }
        }
    }

    #[test]
    fn austin_outcome_verifies_against_concrete_oracle() {
        let (lo, hi) = band();
        let eps = q(1, 1 << 10);
        let v = random_profile(2, 5, &lo, &hi, 7).unwrap();
        let mut r = Referee::concrete(QueryModel::Rw, v.clone());
        let mut ctx = Ctx::new(&mut r);
        let z = ctx.cut(0, &q(1, 2)).unwrap();
        let step = build_austin_step(&z, &bounds_of(&v));
        let out = simulate_step(&step, &eps, &mut ctx).unwrap();
        assert_eq!(verify_outcome(&step, &out, &v, &eps).unwrap(), zero());
        assert!(
            perfection_gap(
                &Allocation::new(vec![
                    Piece::interval(out.device_values[0].clone(), out.device_values[1].clone()).unwrap(),
                    Piece::from_pairs(&[(zero(), out.device_values[0].clone()), (out.device_values[1].clone(), one())])
                        .unwrap(),
                ])
                .unwrap(),
                &v
            )
            .unwrap()
                <= eps
        );
    }

    #[test]
    fn equitable_endpoints_and_orders() {
        let v = uniform(4);
        let b = bounds_of(&v);
        let step = build_equitable_step(&[0, 1, 2, 3], &b).unwrap();
        let mut r = Referee::concrete(QueryModel::RwPlus, v.clone());
        let mut ctx = Ctx::new(&mut r);
        assert_eq!(step.evaluate(&zero(), &mut ctx).unwrap()[4], -one());
        assert_eq!(step.evaluate(&one(), &mut ctx).unwrap()[4], int(3));
        let (alloc, outs) = equitable_all_orders(&mut ctx, &q(1, 1000), &b).unwrap();
        assert_eq!(outs.len(), 24);
        assert_eq!(proportionality_gap(&alloc, &v).unwrap(), zero());
        assert_eq!(equitability_gap(&alloc, &v).unwrap(), zero());
    }

    #[test]
    fn rw_plus_bisects_time() {
        let (lo, hi) = band();
        let v = random_profile(3, 3, &lo, &hi, 3).unwrap();
        let mut r = Referee::concrete(QueryModel::RwPlus, v.clone());
        let run = run_procedure(Procedure::Stromquist, &mut r, &q(1, 512), None).unwrap();
        assert!(run.output.gap(&v).unwrap() <= q(1, 512));
    }

    #[test]
    fn stromquist_slope_stays_under_zeta() {
        let (lo, hi) = band();
        for seed in 0..3u64 {
            let v = random_profile(3, 3, &lo, &hi, seed).unwrap();
            let step = build_stromquist_step(&bounds_of(&v));
            let slope = trigger_slope(&step, &v, 400).unwrap();
            assert!(slope <= step.zeta, "seed {seed}: slope {}", fmt_q(&slope));
        }
    }

    #[test]
    fn procedure_names_round_trip() {
        for p in ["austin", "stromquist", "equitable", "barbanel-brams", "austin-extension:4"] {
            assert_eq!(p.parse::<Procedure>().unwrap().to_string(), p);
        }
        assert!("webb".parse::<Procedure>().is_err());
    }
}
