//! Shared segment table: common breakpoints with per-player segment masses.

use num_traits::Signed;

use crate::error::{Error, Result};
use crate::rational::{fmt_q, Q};
use crate::valuation::PiecewiseDensity;

#[derive(Debug, Clone)]
pub struct Segments {
    bounds: Vec<Q>,
    /// `mass[i][s]`: player `i`'s value of segment `s`.
    mass: Vec<Vec<Q>>,
}

impl Segments {
    pub fn new(bounds: Vec<Q>, mass: Vec<Vec<Q>>) -> Result<Self> {
        let segs = Segments { bounds, mass };
        segs.densities()?;
        Ok(segs)
    }

    pub fn bounds(&self) -> &[Q] {
        &self.bounds
    }

    pub fn n_players(&self) -> usize {
        self.mass.len()
    }

    pub fn density(&self, player: usize) -> Result<PiecewiseDensity> {
        PiecewiseDensity::from_masses(self.bounds.clone(), self.mass[player].clone())
    }

    pub fn densities(&self) -> Result<Vec<PiecewiseDensity>> {
        (0..self.mass.len()).map(|i| self.density(i)).collect()
    }

    pub fn prefix(&self, player: usize, y: &Q) -> Result<Q> {
        self.density(player)?.eval_prefix(y)
    }

    pub fn cut(&self, player: usize, alpha: &Q) -> Result<Q> {
        self.density(player)?.cut_at(alpha)
    }

    pub fn value(&self, player: usize, l: &Q, r: &Q) -> Result<Q> {
        self.density(player)?.value(l, r)
    }

    /// Index of the segment `[left, right]`, if it is exactly one segment.
    pub fn find(&self, left: &Q, right: &Q) -> Option<usize> {
        let s = self.bounds.iter().position(|b| b == left)?;
        (self.bounds.get(s + 1) == Some(right)).then_some(s)
    }

    /// Replaces segment `idx` by sub-segments split at `inner`; `masses[i]` lists
    /// player `i`'s value of each sub-segment and must sum to the old mass.
    pub fn split(&mut self, idx: usize, inner: &[Q], masses: &[Vec<Q>]) -> Result<()> {
        let (l, r) = (&self.bounds[idx], &self.bounds[idx + 1]);
        if inner.windows(2).any(|w| w[0] >= w[1]) || inner.iter().any(|p| p <= l || p >= r) {
            return Err(Error::Certification(format!(
                "split points must lie strictly inside [{}, {}] in order",
                fmt_q(l),
                fmt_q(r)
            )));
        }
        if masses.len() != self.mass.len() {
            return Err(Error::Arity { expected: self.mass.len(), got: masses.len() });
        }
        for (i, row) in masses.iter().enumerate() {
            let total: Q = row.iter().sum();
            if row.len() != inner.len() + 1 || total != self.mass[i][idx] || row.iter().any(|m| !m.is_positive()) {
                return Err(Error::Certification(format!(
                    "player {} sub-segment masses do not refine segment {idx}",
                    i + 1
                )));
            }
        }
        self.bounds.splice(idx + 1..idx + 1, inner.iter().cloned());
        for (i, row) in masses.iter().enumerate() {
            self.mass[i].splice(idx..idx + 1, row.iter().cloned());
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{one, q, zero};

    #[test]
    fn split_refines_and_keeps_totals() {
        let mut s = Segments::new(vec![zero(), q(1, 2), one()], vec![vec![q(1, 2), q(1, 2)]]).unwrap();
        s.split(0, &[q(1, 4)], &[vec![q(1, 8), q(3, 8)]]).unwrap();
        assert_eq!(s.bounds().len(), 4);
        assert_eq!(s.prefix(0, &q(1, 4)).unwrap(), q(1, 8));
        assert_eq!(s.cut(0, &q(1, 2)).unwrap(), q(1, 2));
        assert_eq!(s.find(&q(1, 4), &q(1, 2)), Some(1));
    }

    #[test]
    fn split_rejects_mass_mismatch() {
        let mut s = Segments::new(vec![zero(), one()], vec![vec![one()]]).unwrap();
        assert!(s.split(0, &[q(1, 2)], &[vec![q(1, 2), q(1, 3)]]).is_err());
        assert!(s.split(0, &[one()], &[vec![q(1, 2), q(1, 2)]]).is_err());
    }
}
