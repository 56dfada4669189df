//! Exact rationals and their `"p/q"` text form.

use crate::error::{Error, Result};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// The exact number type used everywhere.
pub type Q = BigRational;

pub fn q(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

pub fn qi(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

pub fn zero() -> Q {
    Q::zero()
}

pub fn one() -> Q {
    Q::one()
}

pub fn mid(a: &Q, b: &Q) -> Q {
    (a + b) / qi(2)
}

/// `2^-k` exactly.
pub fn pow2_neg(k: u32) -> Q {
    Q::new(BigInt::one(), BigInt::one() << k)
}

/// Parses `"p/q"`, an integer, or a finite decimal such as `"0.35"` or `"1e-6"`.
pub fn parse_q(s: &str) -> Result<Q> {
    let t = s.trim();
    let bad = || Error::Parse(format!("not an exact rational: {s:?}"));
    if t.is_empty() {
        return Err(bad());
    }
    if let Some((num, den)) = t.split_once('/') {
        let n: BigInt = num.trim().parse().map_err(|_| bad())?;
        let d: BigInt = den.trim().parse().map_err(|_| bad())?;
        if d.is_zero() {
            return Err(Error::Parse(format!("zero denominator in {s:?}")));
        }
        return Ok(Q::new(n, d));
    }
    let (mantissa, exp) = match t.find(['e', 'E']) {
        Some(pos) => {
            let e: i32 = t[pos + 1..].parse().map_err(|_| bad())?;
            (&t[..pos], e)
        }
        None => (t, 0),
    };
    let (neg, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(bad());
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let all = format!("{int_part}{frac_part}");
    let n: BigInt = if all.is_empty() { BigInt::zero() } else { all.parse().map_err(|_| bad())? };
    let scale = exp - frac_part.len() as i32;
    let ten = BigInt::from(10);
    let mut v = if scale >= 0 {
        Q::from_integer(n * num_traits::pow(ten, scale as usize))
    } else {
        Q::new(n, num_traits::pow(ten, (-scale) as usize))
    };
    if neg {
        v = -v;
    }
    Ok(v)
}

/// Canonical `"p/q"` form (denominator always present).
pub fn fmt_q(v: &Q) -> String {
    format!("{}/{}", v.numer(), v.denom())
}

pub fn to_f64(v: &Q) -> f64 {
    v.to_f64().unwrap_or_else(|| {
        // Huge numerators and denominators: scale down via bit lengths.
        let nb = v.numer().bits() as i64;
        let db = v.denom().bits() as i64;
        let shift = (nb.max(db) - 1000).max(0) as usize;
        let n = (v.numer() >> shift).to_f64().unwrap_or(f64::NAN);
        let d = (v.denom() >> shift).to_f64().unwrap_or(f64::NAN);
        n / d
    })
}

/// Rational approximation of a float with denominator `den` (rounded to nearest).
pub fn from_f64_den(x: f64, den: i64) -> Q {
    q((x * den as f64).round() as i64, den)
}

/// Smallest `m >= 0` with `2^m >= x`; `x` must be positive.
pub fn ceil_log2(x: &Q) -> u32 {
    assert!(x.is_positive(), "ceil_log2 of non-positive value");
    let mut m = 0u32;
    let mut p = one();
    while &p < x {
        p *= qi(2);
        m += 1;
    }
    m
}

pub fn abs(v: &Q) -> Q {
    v.abs()
}

/// Serde adapters that encode [`Q`] as `"p/q"` strings.
pub mod serde_q {
    use super::*;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &Q, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&fmt_q(v))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Q, D::Error> {
        let raw = String::deserialize(d)?;
        parse_q(&raw).map_err(serde::de::Error::custom)
    }

    pub mod vec {
        use super::*;
        use serde::ser::SerializeSeq;

        pub fn serialize<S: Serializer>(v: &[Q], s: S) -> std::result::Result<S::Ok, S::Error> {
            let mut seq = s.serialize_seq(Some(v.len()))?;
            for x in v {
                seq.serialize_element(&fmt_q(x))?;
            }
            seq.end()
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Vec<Q>, D::Error> {
            let raw = Vec::<String>::deserialize(d)?;
            raw.iter().map(|r| parse_q(r).map_err(serde::de::Error::custom)).collect()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_fraction_decimal_and_exponent() {
        assert_eq!(parse_q("3/10").unwrap(), q(3, 10));
        assert_eq!(parse_q("0.35").unwrap(), q(35, 100));
        assert_eq!(parse_q("-1.5").unwrap(), q(-3, 2));
        assert_eq!(parse_q("1e-6").unwrap(), q(1, 1_000_000));
        assert_eq!(parse_q("2.5E1").unwrap(), qi(25));
        assert_eq!(parse_q(" 7 ").unwrap(), qi(7));
        assert!(parse_q("1/0").is_err());
        assert!(parse_q("abc").is_err());
        assert!(parse_q("").is_err());
    }

    #[test]
    fn formats_with_denominator() {
        assert_eq!(fmt_q(&q(6, 8)), "3/4");
        assert_eq!(fmt_q(&qi(1)), "1/1");
        assert_eq!(parse_q(&fmt_q(&q(-5, 7))).unwrap(), q(-5, 7));
    }

    #[test]
    fn ceil_log2_matches_powers() {
        assert_eq!(ceil_log2(&qi(1)), 0);
        assert_eq!(ceil_log2(&qi(2)), 1);
        assert_eq!(ceil_log2(&qi(3)), 2);
        assert_eq!(ceil_log2(&q(2_000_000, 1)), 21);
        assert_eq!(ceil_log2(&q(1, 2)), 0);
    }

    #[test]
    fn float_conversion_of_huge_values() {
        let big = Q::new(BigInt::one() << 3000usize, (BigInt::one() << 3000usize) * BigInt::from(4));
        assert!((to_f64(&big) - 0.25).abs() < 1e-12);
    }
}
