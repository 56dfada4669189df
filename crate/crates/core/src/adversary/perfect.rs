//! Two-player adversary against perfect allocations.
//!
//! Player 1 is uniform. Player 2's row over `[0,x] | I | [x+a,y] | J | [y+a,1]`
//! is `c, d, 1/2-2d, 3d, e` with `I = [x,x+a]`, `J = [y,y+a]` and `y = x+1/2`.
//! A query landing strictly inside `I` or `J` hides windows of width `a/100`
//! worth `d/8` and `3d/8` to player 2.

use std::collections::BTreeSet;

use serde_json::json;

use super::segments::Segments;
use crate::error::{Error, Result};
use crate::query::Adversary;
use crate::rational::{abs, fmt_q, one, q, zero, Q};
use crate::valuation::PiecewiseDensity;

#[derive(Debug, Clone)]
pub struct PerfectAdversary {
    segs: Segments,
    x: Q,
    a: Q,
    d: Q,
    points: BTreeSet<Q>,
    rounds: usize,
}

impl Default for PerfectAdversary {
    fn default() -> Self {
        Self::new()
    }
}

/// Player 2's values of `([x,m], I', [n,x+a])` and `([y,p], J', [q,y+a])` in units of `d/8`.
fn case_values(case: &str) -> ([i64; 3], [i64; 3]) {
    match case {
        "1a" => ([4, 1, 3], [11, 3, 10]),
        "1b" => ([3, 1, 4], [10, 3, 11]),
        "2a" => ([5, 1, 2], [12, 3, 9]),
        _ => ([2, 1, 5], [9, 3, 12]),
    }
}

impl PerfectAdversary {
    /// `a = d = 1/10`, `x = 1/5`, `y = 7/10`.
    pub fn new() -> Self {
        let bounds = vec![zero(), q(1, 5), q(3, 10), q(7, 10), q(4, 5), one()];
        let uniform: Vec<Q> = bounds.windows(2).map(|w| &w[1] - &w[0]).collect();
        let second = vec![q(3, 20), q(1, 10), q(3, 10), q(3, 10), q(3, 20)];
        let segs = Segments::new(bounds.clone(), vec![uniform, second]).expect("initial state is a valid profile");
        PerfectAdversary { segs, x: q(1, 5), a: q(1, 10), d: q(1, 10), points: bounds.into_iter().collect(), rounds: 0 }
    }

    pub fn a(&self) -> &Q {
        &self.a
    }

    pub fn d(&self) -> &Q {
        &self.d
    }

    pub fn x(&self) -> &Q {
        &self.x
    }

    pub fn y(&self) -> Q {
        &self.x + q(1, 2)
    }

    pub fn points(&self) -> &BTreeSet<Q> {
        &self.points
    }

    fn inside(&self, s: &Q) -> Option<(bool, Q)> {
        let y = self.y();
        if s > &self.x && s < &(&self.x + &self.a) {
            Some((false, s - &self.x))
        } else if s > &y && s < &(&y + &self.a) {
            Some((true, s - &y))
        } else {
            None
        }
    }

    fn hide(&mut self, in_j: bool, offset: &Q) -> Result<()> {
        let a = self.a.clone();
        let y = self.y();
        let left_half = offset <= &(&a / Q::from_integer(2.into()));
        let case = match (in_j, left_half) {
            (false, true) => "1a",
            (false, false) => "1b",
            (true, true) => "2a",
            (true, false) => "2b",
        };
        let (lo, hi) = if left_half { (q(50, 100), q(51, 100)) } else { (q(49, 100), q(50, 100)) };
        let i_inner = vec![&self.x + &lo * &a, &self.x + &hi * &a];
        let j_inner = vec![&y + &lo * &a, &y + &hi * &a];
        let (iv, jv) = case_values(case);
        let unit = &self.d / Q::from_integer(8.into());
        let lens = |l: &Q, inner: &[Q]| vec![&inner[0] - l, &inner[1] - &inner[0], l + &a - &inner[1]];
        let i_mass = vec![lens(&self.x, &i_inner), iv.iter().map(|&c| &unit * Q::from_integer(c.into())).collect()];
        let j_mass = vec![lens(&y, &j_inner), jv.iter().map(|&c| &unit * Q::from_integer(c.into())).collect()];
        let lost = || Error::Certification("hidden window is no longer a single segment".into());
        let j_idx = self.segs.find(&y, &(&y + &a)).ok_or_else(lost)?;
        let i_idx = self.segs.find(&self.x, &(&self.x + &a)).ok_or_else(lost)?;
        self.segs.split(j_idx, &j_inner, &j_mass)?;
        self.segs.split(i_idx, &i_inner, &i_mass)?;
        self.x = i_inner[0].clone();
        self.points.extend(i_inner.into_iter().chain(j_inner));
        self.a = a / Q::from_integer(100.into());
        self.d = unit;
        self.rounds += 1;
        Ok(())
    }

    fn record(&mut self, s: &Q) -> Result<()> {
        if self.inside(s).is_some() {
            return Err(Error::Certification(format!("answer {} fell inside a hidden window", fmt_q(s))));
        }
        self.points.insert(s.clone());
        Ok(())
    }
}

impl Adversary for PerfectAdversary {
    fn name(&self) -> &'static str {
        "perfect"
    }

    fn n_players(&self) -> usize {
        2
    }

    fn answer_cut(&mut self, player: usize, alpha: &Q) -> Result<Q> {
        let s = self.segs.cut(player, alpha)?;
        if let Some((in_j, off)) = self.inside(&s) {
            self.hide(in_j, &off)?;
        }
        let ans = self.segs.cut(player, alpha)?;
        self.record(&ans)?;
        Ok(ans)
    }

    fn answer_eval(&mut self, player: usize, y: &Q) -> Result<Q> {
        if !self.points.contains(y) {
            if let Some((in_j, off)) = self.inside(y) {
                self.hide(in_j, &off)?;
            }
            self.record(y)?;
        }
        self.segs.prefix(player, y)
    }

    fn finalize(&self) -> Result<Vec<PiecewiseDensity>> {
        self.segs.densities()
    }

    /// Scans every window `[k, l]` between known points. Uses the tolerance
    /// `min(eps, min(a,d)/1001)`, below the hidden resolution, checks that every
    /// window player 1 sees as perfect is off by more than `d/100 + eps` for
    /// player 2, and returns the smallest perfection gap over all windows.
    fn certify(&self, vals: &[PiecewiseDensity], eps: &Q) -> Result<Q> {
        if vals != self.finalize()?.as_slice() {
            return Err(Error::Precondition("instance is not the adversary's finalized profile".into()));
        }
        let tol = {
            let lim = std::cmp::min(&self.a, &self.d) / Q::from_integer(1001.into());
            if eps > &zero() && eps < &lim {
                eps.clone()
            } else {
                lim
            }
        };
        let half = q(1, 2);
        let pts: Vec<Q> =
            self.points.iter().chain(self.segs.bounds()).cloned().collect::<BTreeSet<_>>().into_iter().collect();
        let pre: Vec<Vec<Q>> = vals
            .iter()
            .map(|v| pts.iter().map(|p| v.eval_prefix(p)).collect::<Result<Vec<_>>>())
            .collect::<Result<_>>()?;
        let need = &self.d / Q::from_integer(100.into()) + &tol;
        let mut best: Option<Q> = None;
        for l in 0..pts.len() {
            for r in l + 1..pts.len() {
                let g1 = abs(&(&pre[0][r] - &pre[0][l] - &half));
                let g2 = abs(&(&pre[1][r] - &pre[1][l] - &half));
                if g1 <= tol && self.inside(&pts[l]).is_none() && g2 <= need {
                    return Err(Error::Certification(format!(
                        "window [{}, {}] is within {} of perfect",
                        fmt_q(&pts[l]),
                        fmt_q(&pts[r]),
                        fmt_q(&need)
                    )));
                }
                let g = std::cmp::max(g1, g2);
                if best.as_ref().is_none_or(|b| &g < b) {
                    best = Some(g);
                }
            }
        }
        let best = best.expect("at least two points");
        if best <= tol {
            return Err(Error::Certification(format!("a window reaches perfection gap {}", fmt_q(&best))));
        }
        Ok(best)
    }

    fn snapshot(&self) -> serde_json::Value {
        json!({
            "adversary": "perfect",
            "rounds": self.rounds,
            "x": fmt_q(&self.x),
            "y": fmt_q(&self.y()),
            "a": fmt_q(&self.a),
            "d": fmt_q(&self.d),
            "c": self.segs.prefix(1, &self.x).map(|v| fmt_q(&v)).unwrap_or_default(),
        })
    }

    fn rounds(&self) -> usize {
        self.rounds
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::query::{QueryModel, Referee};

    #[test]
    fn initial_state() {
        let adv = PerfectAdversary::new();
        let v = adv.finalize().unwrap();
        assert_eq!(v[1].value(&q(3, 10), &q(7, 10)).unwrap(), q(3, 10));
        assert!(v[0].values().iter().all(|d| d == &one()));
        let g = adv.certify(&v, &q(1, 100000)).unwrap();
        assert!(g > q(1, 1000));
    }

    #[test]
    fn case_1a_values() {
        let mut adv = PerfectAdversary::new();
        // c = 0.15; alpha in (c, c + d/2].
        let ans = adv.answer_cut(1, &q(17, 100)).unwrap();
        let v = adv.finalize().unwrap();
        assert_eq!(v[1].value(&q(2, 10), &q(25, 100)).unwrap(), q(1, 20));
        assert_eq!(v[1].value(&q(25, 100), &q(251, 1000)).unwrap(), q(1, 80));
        assert_eq!(v[1].value(&q(7, 10), &q(75, 100)).unwrap(), q(11, 80));
        assert_eq!(v[1].eval_prefix(&ans).unwrap(), q(17, 100));
        assert_eq!(adv.a(), &q(1, 1000));
        assert_eq!(adv.d(), &q(1, 80));
    }

    #[test]
    fn miss_keeps_state() {
        let mut adv = PerfectAdversary::new();
        adv.answer_cut(1, &q(1, 10)).unwrap();
        adv.answer_cut(1, &q(9, 10)).unwrap();
        assert_eq!(adv.rounds(), 0);
    }

    #[test]
    fn five_rounds_certify() {
        let mut r = Referee::adaptive(QueryModel::RwPlus, Box::new(PerfectAdversary::new()));
        let picks = [q(1, 3), q(4, 5), q(1, 10), q(99, 100), q(1, 2)];
        for (step, f) in picks.iter().enumerate() {
            let snap = r.adversary().unwrap().snapshot();
            let left = crate::rational::parse_q(snap[if step % 2 == 0 { "x" } else { "y" }].as_str().unwrap()).unwrap();
            let a = crate::rational::parse_q(snap["a"].as_str().unwrap()).unwrap();
            let point = left + a * f;
            if step == 2 {
                r.eval(1, &point).unwrap();
            } else {
                r.cut(0, &point).unwrap();
            }
        }
        let adv = r.adversary().unwrap();
        assert_eq!(adv.rounds(), 5);
        let vals = adv.finalize().unwrap();
        r.transcript().replay(&vals).unwrap();
        let d5 = q(1, 10) / Q::from_integer(32768.into());
        let g = adv.certify(&vals, &q(1, 100000)).unwrap();
        assert!(g > d5 / Q::from_integer(100.into()));
    }

    #[test]
    fn rejects_foreign_instance() {
        let adv = PerfectAdversary::new();
        let u = vec![PiecewiseDensity::uniform(), PiecewiseDensity::uniform()];
        assert!(matches!(adv.certify(&u, &q(1, 1000)), Err(Error::Precondition(_))));
    }
}
