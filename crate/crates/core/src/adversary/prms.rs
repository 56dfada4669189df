//! Three-player adversary over a partial rigid measure system.
//!
//! Players 1, 2, 3 have types 1, 2, 3. The cake is cut into
//! `[0,x] | I | [x+k,y] | J | [y+k,1]` with `I = [x,x+k]`, `J = [y,y+k]` worth `k`
//! to everyone; type rows are `(l,k,l,k,m)`, `(m,k,l,k,l)` and `(l,k,m,k,l)`.
//! A query whose answer falls strictly inside `I` or `J` refines that window
//! and hides new windows of width `k/100`. `J` hits reuse the `I` layouts on
//! the reflected cake, which swaps types 1 and 2.

use std::collections::BTreeSet;

use num_traits::Zero;
use serde_json::json;

use super::segments::Segments;
use crate::error::{Error, Result};
use crate::fairness::{best_connected_allocation, Notion};
use crate::query::Adversary;
use crate::rational::{fmt_q, one, q, zero, Q};
use crate::valuation::PiecewiseDensity;

/// Break offsets `(m, n, p, q)` in units of `k`, and per-type values
/// `(u1, u2, v1, v2)` of `[x,m]`, `[n,x+k]`, `[y,p]`, `[q,y+k]` in units of `k`.
#[derive(Debug, Clone)]
pub struct Layout {
    pub offsets: [Q; 4],
    pub rows: [[Q; 4]; 3],
}

fn h(n: i64) -> Q {
    q(n, 100)
}

fn t(n: i64) -> Q {
    q(n, 300)
}

/// Layout used when a player of `kind` (1..=3) hits `I`; `case` 1 hides `I'`
/// to the right of `2k/3`, case 2 to the left.
pub fn layout(kind: usize, case: usize) -> Layout {
    let two_thirds = q(2, 3);
    let third = q(1, 3);
    let plain2 = [h(74), h(25), h(37), h(62)];
    let plain3 = [h(74), h(25), h(25), h(74)];
    match (kind, case) {
        (1, 1) => Layout {
            offsets: [two_thirds.clone(), t(203), t(103), t(106)],
            rows: [[two_thirds, t(97), t(103), t(194)], plain2, plain3],
        },
        (1, _) => Layout {
            offsets: [t(197), two_thirds.clone(), t(97), third.clone()],
            rows: [[t(197), third, t(97), two_thirds], plain2, plain3],
        },
        (2, 1) => Layout {
            offsets: [two_thirds.clone(), t(203), third.clone(), t(103)],
            rows: [[h(73), h(26), h(47), h(52)], [two_thirds, t(97), third, t(197)], plain3],
        },
        (2, _) => Layout {
            offsets: [t(197), two_thirds.clone(), q(197, 600), q(203, 600)],
            rows: [[q(725, 1000), q(265, 1000), h(46), h(53)], [t(197), third, q(197, 600), q(397, 600)], plain3],
        },
        (3, 1) => Layout {
            offsets: [two_thirds.clone(), t(203), t(97), third],
            rows: [
                [q(723, 1000), q(267, 1000), q(456, 1000), q(534, 1000)],
                plain2,
                [two_thirds.clone(), t(97), t(97), two_thirds],
            ],
        },
        (_, _) => Layout {
            offsets: [t(197), two_thirds.clone(), third.clone(), t(103)],
            rows: [[h(73), h(26), h(47), h(52)], plain2, [t(197), third.clone(), third, t(197)]],
        },
    }
}

fn mirror_kind(kind: usize) -> usize {
    match kind {
        1 => 2,
        2 => 1,
        other => other,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Window {
    I,
    J,
}

#[derive(Debug, Clone)]
pub struct PrmsAdversary {
    segs: Segments,
    x: Q,
    y: Q,
    k: Q,
    points: BTreeSet<Q>,
    rounds: usize,
}

impl Default for PrmsAdversary {
    fn default() -> Self {
        Self::new()
    }
}

impl PrmsAdversary {
    /// The initial system with `k = 1/100`, `I = [.34,.35]`, `J = [.67,.68]`.
    pub fn new() -> Self {
        let bounds = vec![zero(), h(34), h(35), h(67), h(68), one()];
        let mass = vec![
            vec![h(35), h(1), h(35), h(1), h(28)],
            vec![h(28), h(1), h(35), h(1), h(35)],
            vec![h(35), h(1), h(28), h(1), h(35)],
        ];
        let segs = Segments::new(bounds.clone(), mass).expect("initial system is a valid profile");
        PrmsAdversary { segs, x: h(34), y: h(67), k: h(1), points: bounds.into_iter().collect(), rounds: 0 }
    }

    pub fn k(&self) -> &Q {
        &self.k
    }

    /// Left ends of the hidden windows `I` and `J`.
    pub fn windows(&self) -> (&Q, &Q) {
        (&self.x, &self.y)
    }

    pub fn points(&self) -> &BTreeSet<Q> {
        &self.points
    }

    /// `V_i(0,x)` for every player: the value needed to land inside `I`.
    pub fn values_before(&self, left: &Q) -> Result<Vec<Q>> {
        (0..3).map(|i| self.segs.prefix(i, left)).collect()
    }

    fn window_of(&self, s: &Q) -> Option<(Window, Q)> {
        let xk = &self.x + &self.k;
        let yk = &self.y + &self.k;
        if s > &self.x && s < &xk {
            Some((Window::I, (s - &self.x) / &self.k))
        } else if s > &self.y && s < &yk {
            Some((Window::J, (s - &self.y) / &self.k))
        } else {
            None
        }
    }

    fn hide(&mut self, player: usize, window: Window, offset: &Q) -> Result<()> {
        let k = self.k.clone();
        let tiny = &k / Q::from_integer(100.into());
        let mirrored = window == Window::J;
        let kind = if mirrored { mirror_kind(player + 1) } else { player + 1 };
        let off = if mirrored { one() - offset } else { offset.clone() };
        let case = if off <= q(2, 3) { 1 } else { 2 };
        let lay = layout(kind, case);
        let [m, n, p, qq] = lay.offsets.clone();
        let row = |i: usize| -> &[Q; 4] {
            let kind_i = if mirrored { mirror_kind(i + 1) } else { i + 1 };
            &lay.rows[kind_i - 1]
        };
        let i_idx = self.segs.find(&self.x, &(&self.x + &k)).ok_or_else(|| lost("I"))?;
        let j_idx = self.segs.find(&self.y, &(&self.y + &k)).ok_or_else(|| lost("J"))?;
        let (i_inner, i_mass, j_inner, j_mass, nx, ny);
        if !mirrored {
            i_inner = vec![&self.x + &m * &k, &self.x + &n * &k];
            j_inner = vec![&self.y + &p * &k, &self.y + &qq * &k];
            i_mass = (0..3).map(|i| vec![&row(i)[0] * &k, tiny.clone(), &row(i)[1] * &k]).collect::<Vec<_>>();
            j_mass = (0..3).map(|i| vec![&row(i)[2] * &k, tiny.clone(), &row(i)[3] * &k]).collect::<Vec<_>>();
            nx = i_inner[0].clone();
            ny = j_inner[0].clone();
        } else {
            // Reflection maps offset o in the reflected I onto 1 - o in J, and vice versa.
            j_inner = vec![&self.y + (one() - &n) * &k, &self.y + (one() - &m) * &k];
            i_inner = vec![&self.x + (one() - &qq) * &k, &self.x + (one() - &p) * &k];
            j_mass = (0..3).map(|i| vec![&row(i)[1] * &k, tiny.clone(), &row(i)[0] * &k]).collect::<Vec<_>>();
            i_mass = (0..3).map(|i| vec![&row(i)[3] * &k, tiny.clone(), &row(i)[2] * &k]).collect::<Vec<_>>();
            nx = i_inner[0].clone();
            ny = j_inner[0].clone();
        }
        // Split J first so the index of I stays valid.
        self.segs.split(j_idx, &j_inner, &j_mass)?;
        self.segs.split(i_idx, &i_inner, &i_mass)?;
        self.points.extend(i_inner.into_iter().chain(j_inner));
        self.x = nx;
        self.y = ny;
        self.k = tiny;
        self.rounds += 1;
        Ok(())
    }

    fn check_outside(&self, s: &Q) -> Result<()> {
        match self.window_of(s) {
            Some(_) => Err(Error::Certification(format!("answer {} fell inside a hidden window", fmt_q(s)))),
            None => Ok(()),
        }
    }
}

fn lost(which: &str) -> Error {
    Error::Certification(format!("hidden window {which} is no longer a single segment"))
}

impl Adversary for PrmsAdversary {
    fn name(&self) -> &'static str {
        "prms"
    }

    fn n_players(&self) -> usize {
        3
    }

    fn answer_cut(&mut self, player: usize, alpha: &Q) -> Result<Q> {
        let s = self.segs.cut(player, alpha)?;
        let ans = match self.window_of(&s) {
            Some((w, off)) => {
                self.hide(player, w, &off)?;
                self.segs.cut(player, alpha)?
            }
            None => s,
        };
        self.check_outside(&ans)?;
        self.points.insert(ans.clone());
        Ok(ans)
    }

    fn answer_eval(&mut self, player: usize, y: &Q) -> Result<Q> {
        if !self.points.contains(y) {
            if let Some((w, off)) = self.window_of(y) {
                self.hide(player, w, &off)?;
            }
            self.check_outside(y)?;
            self.points.insert(y.clone());
        }
        self.segs.prefix(player, y)
    }

    fn finalize(&self) -> Result<Vec<PiecewiseDensity>> {
        self.segs.densities()
    }

    /// Best envy over connected allocations demarcated by the adversary's
    /// points; fails unless it is at least `k/100`.
    fn certify(&self, vals: &[PiecewiseDensity], _eps: &Q) -> Result<Q> {
        if vals != self.finalize()?.as_slice() {
            return Err(Error::Precondition("instance is not the adversary's finalized profile".into()));
        }
        let (_, g) = best_connected_allocation(vals, &self.points, Notion::Envy)?;
        let bound = &self.k / Q::from_integer(100.into());
        if g < bound || g.is_zero() {
            return Err(Error::Certification(format!(
                "connected envy {} below the hidden-window bound {}",
                fmt_q(&g),
                fmt_q(&bound)
            )));
        }
        Ok(g)
    }

    fn snapshot(&self) -> serde_json::Value {
        let xk = &self.x + &self.k;
        let yk = &self.y + &self.k;
        let first: Vec<String> =
            (0..3).map(|i| self.segs.prefix(i, &self.x).map(|v| fmt_q(&v)).unwrap_or_default()).collect();
        let middle: Vec<String> =
            (0..3).map(|i| self.segs.value(i, &xk, &self.y).map(|v| fmt_q(&v)).unwrap_or_default()).collect();
        let last: Vec<String> =
            (0..3).map(|i| self.segs.value(i, &yk, &one()).map(|v| fmt_q(&v)).unwrap_or_default()).collect();
        json!({
            "adversary": "prms",
            "rounds": self.rounds,
            "k": fmt_q(&self.k),
            "x": fmt_q(&self.x),
            "y": fmt_q(&self.y),
            "before_i": first,
            "between": middle,
            "after_j": last,
        })
    }

    fn rounds(&self) -> usize {
        self.rounds
    }
}
