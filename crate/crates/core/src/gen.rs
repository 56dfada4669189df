//! Seeded random instances: hungry piecewise-constant densities whose squared
//! segment values sit strictly inside a requested band.

use rand::seq::index::sample;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::rational::{one, q, to_f64, zero, Q};
use crate::valuation::PiecewiseDensity;

/// Grid for breakpoints and raw density values.
const GRID: i64 = 1000;
const MAX_TRIES: usize = 10_000;

pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A random density with `segments` pieces and `lo_sq < value^2 < hi_sq` everywhere.
pub fn random_density<R: Rng>(rng: &mut R, segments: usize, lo_sq: &Q, hi_sq: &Q) -> Result<PiecewiseDensity> {
    if segments == 0 || segments as i64 >= GRID {
        return Err(Error::Precondition(format!("segment count must be in 1..{GRID}")));
    }
    // The average density is 1, so the band must contain 1.
    if !(lo_sq < &one() && &one() < hi_sq) {
        return Err(Error::Infeasible("density band must contain 1".into()));
    }
    if segments == 1 {
        return Ok(PiecewiseDensity::uniform());
    }
    let lo = to_f64(lo_sq).max(0.0).sqrt();
    let hi = to_f64(hi_sq).sqrt();
    // Draw raw values from the band shrunk toward 1 so normalization rarely pushes them out.
    let lo_raw = ((1.0 - (1.0 - lo) * 0.9) * GRID as f64).ceil() as i64;
    let hi_raw = ((1.0 + (hi - 1.0) * 0.9) * GRID as f64).floor() as i64;
    if lo_raw > hi_raw {
        return Err(Error::Infeasible("density band too narrow for the value grid".into()));
    }
    for _ in 0..MAX_TRIES {
        let mut inner: Vec<usize> = sample(rng, (GRID - 1) as usize, segments - 1).into_vec();
        inner.sort_unstable();
        let mut breakpoints = Vec::with_capacity(segments + 1);
        breakpoints.push(zero());
        breakpoints.extend(inner.iter().map(|&b| q(b as i64 + 1, GRID)));
        breakpoints.push(one());
        let values: Vec<Q> = (0..segments).map(|_| q(rng.gen_range(lo_raw..=hi_raw), GRID)).collect();
        let d = PiecewiseDensity::normalized(breakpoints, values)?;
        if d.density_bounds_check(lo_sq, hi_sq) {
            return Ok(d);
        }
    }
    Err(Error::Infeasible("could not sample a density inside the band".into()))
}

/// `n` independent densities from one seed.
pub fn random_profile(n: usize, segments: usize, lo_sq: &Q, hi_sq: &Q, seed: u64) -> Result<Vec<PiecewiseDensity>> {
    let mut rng = rng_from_seed(seed);
    (0..n).map(|_| random_density(&mut rng, segments, lo_sq, hi_sq)).collect()
}

/// The default band `(1/2, 2)` on squared values.
pub fn default_band() -> (Q, Q) {
    (q(1, 2), q(2, 1))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn respects_band_and_normalizes() {
        let (lo, hi) = default_band();
        let vals = random_profile(5, 8, &lo, &hi, 7).unwrap();
        for d in &vals {
            assert!(d.density_bounds_check(&lo, &hi));
            assert!(d.is_hungry());
            assert_eq!(d.eval_prefix(&one()).unwrap(), one());
            assert_eq!(d.segment_count(), 8);
        }
    }

    #[test]
    fn deterministic_under_seed() {
        let (lo, hi) = default_band();
        assert_eq!(random_profile(3, 6, &lo, &hi, 42).unwrap(), random_profile(3, 6, &lo, &hi, 42).unwrap());
        assert_ne!(random_profile(3, 6, &lo, &hi, 42).unwrap(), random_profile(3, 6, &lo, &hi, 43).unwrap());
    }

    #[test]
    fn single_segment_is_uniform() {
        let (lo, hi) = default_band();
        assert_eq!(random_profile(1, 1, &lo, &hi, 1).unwrap()[0], PiecewiseDensity::uniform());
    }

    #[test]
    fn band_without_one_is_infeasible() {
        assert!(matches!(random_profile(1, 4, &q(2, 1), &q(3, 1), 1), Err(Error::Infeasible(_))));
    }
}
