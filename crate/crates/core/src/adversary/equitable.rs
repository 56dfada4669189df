//! Two-player adversary against equitable allocations.
//!
//! Keeps `V1(0,x) = 1/2+a = V2(y,1)` and `V2(x,1) = 1/2+b = V1(0,y)`: no cut
//! outside `(x,y)` gets closer than `b-a` to equitability. A query landing
//! strictly inside `(x,y)` narrows the window and divides `b-a` by 100.

use std::collections::BTreeSet;

use serde_json::json;

use super::segments::Segments;
use crate::error::{Error, Result};
use crate::fairness::{best_connected_allocation, Notion};
use crate::query::Adversary;
use crate::rational::{fmt_q, mid, one, q, zero, Q};
use crate::valuation::PiecewiseDensity;

#[derive(Debug, Clone)]
pub struct EquitableAdversary {
    segs: Segments,
    x: Q,
    y: Q,
    a: Q,
    b: Q,
    points: BTreeSet<Q>,
    rounds: usize,
}

impl Default for EquitableAdversary {
    fn default() -> Self {
        Self::new()
    }
}

impl EquitableAdversary {
    /// `x = 2/5`, `y = 3/5`, `a = 1/20`, `b = 3/50`.
    pub fn new() -> Self {
        let bounds = vec![zero(), q(2, 5), q(3, 5), one()];
        let mass = vec![vec![q(55, 100), q(1, 100), q(44, 100)], vec![q(44, 100), q(1, 100), q(55, 100)]];
        let segs = Segments::new(bounds.clone(), mass).expect("initial instance is a valid profile");
        EquitableAdversary {
            segs,
            x: q(2, 5),
            y: q(3, 5),
            a: q(1, 20),
            b: q(3, 50),
            points: bounds.into_iter().collect(),
            rounds: 0,
        }
    }

    pub fn window(&self) -> (&Q, &Q) {
        (&self.x, &self.y)
    }

    /// `(a, b)`; the certified distance is `b - a`.
    pub fn params(&self) -> (&Q, &Q) {
        (&self.a, &self.b)
    }

    fn inside(&self, s: &Q) -> bool {
        s > &self.x && s < &self.y
    }

    /// Splits `(x,y)` around the point `s` that a query resolved to.
    fn narrow(&mut self, player: usize, s: &Q) -> Result<()> {
        let delta = &self.b - &self.a;
        let centre = mid(&self.a, &self.b);
        let small = &delta / Q::from_integer(100.into());
        let large = &delta / Q::from_integer(50.into());
        let left = s <= &mid(&self.x, &self.y);
        // Player 1 landing left, or player 2 landing right, pushes the pair up.
        let up = left == (player == 0);
        let (na, nb) = if up { (&centre + &small, &centre + &large) } else { (&centre - &large, &centre - &small) };
        let (z, t) = if left {
            let span = &self.y - s;
            (s + &span / Q::from_integer(3.into()), s + &span * q(2, 3))
        } else {
            let span = s - &self.x;
            (s - &span * q(2, 3), s - &span / Q::from_integer(3.into()))
        };
        let idx = self
            .segs
            .find(&self.x, &self.y)
            .ok_or_else(|| Error::Certification("window is no longer a single segment".into()))?;
        let masses = vec![vec![&na - &self.a, &nb - &na, &self.b - &nb], vec![&self.b - &nb, &nb - &na, &na - &self.a]];
        self.segs.split(idx, &[z.clone(), t.clone()], &masses)?;
        self.points.insert(z.clone());
        self.points.insert(t.clone());
        self.x = z;
        self.y = t;
        self.a = na;
        self.b = nb;
        self.rounds += 1;
        Ok(())
    }

    fn record(&mut self, s: &Q) -> Result<()> {
        if self.inside(s) {
            return Err(Error::Certification(format!("answer {} fell inside the hidden window", fmt_q(s))));
        }
        self.points.insert(s.clone());
        Ok(())
    }
}

impl Adversary for EquitableAdversary {
    fn name(&self) -> &'static str {
        "equitable"
    }

    fn n_players(&self) -> usize {
        2
    }

    fn answer_cut(&mut self, player: usize, alpha: &Q) -> Result<Q> {
        let s = self.segs.cut(player, alpha)?;
        if self.inside(&s) {
            self.narrow(player, &s)?;
        }
        let ans = self.segs.cut(player, alpha)?;
        self.record(&ans)?;
        Ok(ans)
    }

    fn answer_eval(&mut self, player: usize, y: &Q) -> Result<Q> {
        if !self.points.contains(y) {
            if self.inside(y) {
                self.narrow(player, y)?;
            }
            self.record(y)?;
        }
        self.segs.prefix(player, y)
    }

    fn finalize(&self) -> Result<Vec<PiecewiseDensity>> {
        self.segs.densities()
    }

    /// Best equitability gap over single cuts outside `(x,y)`, both orders;
    /// fails unless it is at least `b - a`.
    fn certify(&self, vals: &[PiecewiseDensity], _eps: &Q) -> Result<Q> {
        if vals != self.finalize()?.as_slice() {
            return Err(Error::Precondition("instance is not the adversary's finalized profile".into()));
        }
        let cuts: BTreeSet<Q> =
            self.points.iter().chain(self.segs.bounds()).filter(|p| !self.inside(p)).cloned().collect();
        let (_, g) = best_connected_allocation(vals, &cuts, Notion::Equitability)?;
        let bound = &self.b - &self.a;
        if g < bound {
            return Err(Error::Certification(format!(
                "equitability gap {} below the window bound {}",
                fmt_q(&g),
                fmt_q(&bound)
            )));
        }
        Ok(g)
    }

    fn snapshot(&self) -> serde_json::Value {
        json!({
            "adversary": "equitable",
            "rounds": self.rounds,
            "x": fmt_q(&self.x),
            "y": fmt_q(&self.y),
            "a": fmt_q(&self.a),
            "b": fmt_q(&self.b),
        })
    }

    fn rounds(&self) -> usize {
        self.rounds
    }
}
