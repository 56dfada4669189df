//! Piecewise-constant value densities with exact Cut and Eval answers.

use crate::error::{Error, Result};
use crate::rational::{fmt_q, one, parse_q, zero, Q};
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

/// A closed interval `[left, right]` inside `[0, 1]`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Interval {
    pub left: Q,
    pub right: Q,
}

impl Interval {
    pub fn new(left: Q, right: Q) -> Result<Self> {
        if left.is_negative() || right > one() || left > right {
            return Err(Error::Domain(format!(
                "interval [{}, {}] not inside [0,1] or reversed",
                fmt_q(&left),
                fmt_q(&right)
            )));
        }
        Ok(Interval { left, right })
    }

    pub fn len(&self) -> Q {
        &self.right - &self.left
    }

    pub fn is_empty(&self) -> bool {
        self.left == self.right
    }
}

/// A finite union of disjoint intervals, kept sorted with touching intervals merged.
#[derive(Debug, Clone, PartialEq, Eq, Default, Hash)]
pub struct Piece {
    intervals: Vec<Interval>,
}

impl Piece {
    pub fn empty() -> Self {
        Piece { intervals: Vec::new() }
    }

    /// Normalizes the list: sorts, drops zero-length parts, merges shared endpoints.
    /// Positive-length overlap is a structural error.
    pub fn new(mut parts: Vec<Interval>) -> Result<Self> {
        parts.retain(|iv| !iv.is_empty());
        parts.sort_by(|a, b| a.left.cmp(&b.left).then(a.right.cmp(&b.right)));
        let mut merged: Vec<Interval> = Vec::with_capacity(parts.len());
        for iv in parts {
            if let Some(last) = merged.last_mut() {
                if iv.left < last.right {
                    return Err(Error::Structural(format!(
                        "intervals overlap at [{}, {}]",
                        fmt_q(&iv.left),
                        fmt_q(&last.right)
                    )));
                }
                if iv.left == last.right {
                    last.right = iv.right;
                    continue;
                }
            }
            merged.push(iv);
        }
        Ok(Piece { intervals: merged })
    }

    pub fn interval(left: Q, right: Q) -> Result<Self> {
        Piece::new(vec![Interval::new(left, right)?])
    }

    pub fn from_pairs(pairs: &[(Q, Q)]) -> Result<Self> {
        let parts = pairs.iter().map(|(l, r)| Interval::new(l.clone(), r.clone())).collect::<Result<Vec<_>>>()?;
        Piece::new(parts)
    }

    pub fn intervals(&self) -> &[Interval] {
        &self.intervals
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    pub fn is_connected(&self) -> bool {
        self.intervals.len() <= 1
    }

    /// Two cuts per maximal interval.
    pub fn demarcation_count(&self) -> usize {
        2 * self.intervals.len()
    }

    pub fn demarcation_points(&self) -> Vec<Q> {
        self.intervals.iter().flat_map(|iv| [iv.left.clone(), iv.right.clone()]).collect()
    }

    pub fn total_length(&self) -> Q {
        self.intervals.iter().fold(zero(), |acc, iv| acc + iv.len())
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::Value::Array(
            self.intervals.iter().map(|iv| serde_json::json!([fmt_q(&iv.left), fmt_q(&iv.right)])).collect(),
        )
    }

    pub fn from_json(v: &serde_json::Value) -> Result<Self> {
        let arr = v.as_array().ok_or_else(|| Error::Parse("piece must be an array".into()))?;
        let mut parts = Vec::with_capacity(arr.len());
        for pair in arr {
            let p = pair
                .as_array()
                .filter(|p| p.len() == 2)
                .ok_or_else(|| Error::Parse("interval must be a [left, right] pair".into()))?;
            let l = parse_q(p[0].as_str().ok_or_else(|| Error::Parse("endpoint must be a string".into()))?)?;
            let r = parse_q(p[1].as_str().ok_or_else(|| Error::Parse("endpoint must be a string".into()))?)?;
            parts.push(Interval::new(l, r)?);
        }
        Piece::new(parts)
    }
}

/// Exact piecewise-constant density on `[0,1]` with total mass one.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PiecewiseDensity {
    breakpoints: Vec<Q>,
    values: Vec<Q>,
    /// Mass of `[0, breakpoints[j]]`.
    prefix: Vec<Q>,
}

impl PiecewiseDensity {
    /// Validates shape and requires the integral to be exactly one.
    pub fn new(breakpoints: Vec<Q>, values: Vec<Q>) -> Result<Self> {
        let d = Self::unchecked(breakpoints, values)?;
        let total = d.prefix.last().cloned().unwrap_or_else(zero);
        if total != one() {
            return Err(Error::Domain(format!("density integrates to {}, not 1", fmt_q(&total))));
        }
        Ok(d)
    }

    /// Same shape checks, then rescales the values so the integral is one.
    pub fn normalized(breakpoints: Vec<Q>, values: Vec<Q>) -> Result<Self> {
        let d = Self::unchecked(breakpoints, values)?;
        let total = d.prefix.last().cloned().unwrap_or_else(zero);
        if total.is_zero() {
            return Err(Error::Domain("density has zero total mass".into()));
        }
        let values = d.values.iter().map(|v| v / &total).collect();
        Self::new(d.breakpoints, values)
    }

    /// Builds a density from per-segment masses (value = mass / length).
    pub fn from_masses(breakpoints: Vec<Q>, masses: Vec<Q>) -> Result<Self> {
        if breakpoints.len() != masses.len() + 1 {
            return Err(Error::Domain("need one mass per segment".into()));
        }
        let mut values = Vec::with_capacity(masses.len());
        for (j, m) in masses.iter().enumerate() {
            let len = &breakpoints[j + 1] - &breakpoints[j];
            if !len.is_positive() {
                return Err(Error::Domain("breakpoints must be strictly increasing".into()));
            }
            values.push(m / len);
        }
        Self::new(breakpoints, values)
    }

    pub fn uniform() -> Self {
        Self::new(vec![zero(), one()], vec![one()]).expect("uniform density is valid")
    }

    fn unchecked(breakpoints: Vec<Q>, values: Vec<Q>) -> Result<Self> {
        if breakpoints.len() < 2 || values.len() + 1 != breakpoints.len() {
            return Err(Error::Domain("need at least one segment and one value per segment".into()));
        }
        if !breakpoints[0].is_zero() || breakpoints[breakpoints.len() - 1] != one() {
            return Err(Error::Domain("breakpoints must start at 0 and end at 1".into()));
        }
        if breakpoints.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Domain("breakpoints must be strictly increasing".into()));
        }
        if values.iter().any(|v| v.is_negative()) {
            return Err(Error::Domain("density values must be nonnegative".into()));
        }
        let mut prefix = Vec::with_capacity(breakpoints.len());
        prefix.push(zero());
        for j in 0..values.len() {
            let mass = &values[j] * (&breakpoints[j + 1] - &breakpoints[j]);
            let next = &prefix[j] + mass;
            prefix.push(next);
        }
        Ok(PiecewiseDensity { breakpoints, values, prefix })
    }

    pub fn breakpoints(&self) -> &[Q] {
        &self.breakpoints
    }

    pub fn values(&self) -> &[Q] {
        &self.values
    }

    pub fn segment_count(&self) -> usize {
        self.values.len()
    }

    /// Mass carried by each segment.
    pub fn segment_masses(&self) -> Vec<Q> {
        self.prefix.windows(2).map(|w| &w[1] - &w[0]).collect()
    }

    fn segment_of(&self, y: &Q) -> usize {
        // Index j with breakpoints[j] <= y < breakpoints[j+1]; the last segment also owns y = 1.
        let pos = self.breakpoints.partition_point(|b| b <= y);
        pos.saturating_sub(1).min(self.values.len() - 1)
    }

    /// `V([0, y])`.
    pub fn eval_prefix(&self, y: &Q) -> Result<Q> {
        if y.is_negative() || y > &one() {
            return Err(Error::Domain(format!("eval point {} outside [0,1]", fmt_q(y))));
        }
        let j = self.segment_of(y);
        Ok(&self.prefix[j] + &self.values[j] * (y - &self.breakpoints[j]))
    }

    /// Leftmost `y` with `V([0, y]) = alpha`.
    pub fn cut_at(&self, alpha: &Q) -> Result<Q> {
        if alpha.is_negative() || alpha > &one() {
            return Err(Error::Domain(format!("cut value {} outside [0,1]", fmt_q(alpha))));
        }
        if alpha.is_zero() {
            return Ok(zero());
        }
        // First segment whose right-end prefix reaches alpha; its value is positive.
        let j = self.prefix[1..].partition_point(|p| p < alpha);
        Ok(&self.breakpoints[j] + (alpha - &self.prefix[j]) / &self.values[j])
    }

    /// `V([l, r])`.
    pub fn value(&self, l: &Q, r: &Q) -> Result<Q> {
        Ok(self.eval_prefix(r)? - self.eval_prefix(l)?)
    }

    pub fn piece_value(&self, p: &Piece) -> Q {
        p.intervals()
            .iter()
            .map(|iv| self.value(&iv.left, &iv.right).expect("piece intervals lie in [0,1]"))
            .fold(zero(), |a, b| a + b)
    }

    pub fn is_hungry(&self) -> bool {
        self.values.iter().all(|v| v.is_positive())
    }

    /// Strict bounds `lo < v < hi` on every segment.
    pub fn is_bounded(&self, lo: &Q, hi: &Q) -> bool {
        self.values.iter().all(|v| lo < v && v < hi)
    }

    /// True iff `lo_sq < v^2 < hi_sq` on every segment.
    pub fn density_bounds_check(&self, lo_sq: &Q, hi_sq: &Q) -> bool {
        self.values.iter().all(|v| {
            let sq = v * v;
            lo_sq < &sq && &sq < hi_sq
        })
    }

    pub fn min_density(&self) -> Q {
        self.values.iter().min().cloned().unwrap_or_else(zero)
    }

    pub fn max_density(&self) -> Q {
        self.values.iter().max().cloned().unwrap_or_else(zero)
    }

    pub fn to_file(&self) -> DensityFile {
        DensityFile {
            breakpoints: self.breakpoints.iter().map(fmt_q).collect(),
            values: self.values.iter().map(fmt_q).collect(),
            normalize: None,
        }
    }
}

/// JSON shape of one density: `{"breakpoints": [...], "values": [...], "normalize": bool?}`.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub struct DensityFile {
    pub breakpoints: Vec<String>,
    pub values: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub normalize: Option<bool>,
}

impl DensityFile {
    pub fn to_density(&self) -> Result<PiecewiseDensity> {
        let b = self.breakpoints.iter().map(|s| parse_q(s)).collect::<Result<Vec<_>>>()?;
        let v = self.values.iter().map(|s| parse_q(s)).collect::<Result<Vec<_>>>()?;
        if self.normalize.unwrap_or(false) {
            PiecewiseDensity::normalized(b, v)
        } else {
            PiecewiseDensity::new(b, v)
        }
    }
}

/// Parses a single density object.
pub fn parse_density(text: &str) -> Result<PiecewiseDensity> {
    let f: DensityFile = serde_json::from_str(text)?;
    f.to_density()
}

/// Parses a valuation profile: either a JSON array of densities or `{"players": [...]}`.
pub fn parse_profile(text: &str) -> Result<Vec<PiecewiseDensity>> {
    let v: serde_json::Value = serde_json::from_str(text)?;
    let arr = match &v {
        serde_json::Value::Array(a) => a.clone(),
        serde_json::Value::Object(o) => match o.get("players") {
            Some(serde_json::Value::Array(a)) => a.clone(),
            _ => return Err(Error::Parse("expected an array or an object with \"players\"".into())),
        },
        _ => return Err(Error::Parse("expected an array of densities".into())),
    };
    arr.into_iter().map(|item| serde_json::from_value::<DensityFile>(item)?.to_density()).collect()
}

pub fn profile_to_json(vals: &[PiecewiseDensity]) -> serde_json::Value {
    serde_json::json!({ "players": vals.iter().map(|d| d.to_file()).collect::<Vec<_>>() })
}
