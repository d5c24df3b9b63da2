//! Lebesgue exponents in [1, inf] as exact rationals.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use num_rational::Rational64;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// An exponent p in [1, inf]. Ordered by value, with `Infinity` largest.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum Exponent {
    Finite(Rational64),
    Infinity,
}

impl Exponent {
    pub fn new(p: Rational64) -> Result<Self> {
        if p < Rational64::one() {
            return Err(Error::Domain(format!("exponent must be at least 1, got {p}")));
        }
        Ok(Exponent::Finite(p))
    }

    pub fn ratio(num: i64, den: i64) -> Result<Self> {
        if den == 0 {
            return if num > 0 {
                Ok(Exponent::Infinity)
            } else {
                Err(Error::Domain(format!("{num}/0 is not an exponent")))
            };
        }
        Self::new(Rational64::new(num, den))
    }

    pub fn int(n: i64) -> Self {
        Self::ratio(n, 1).expect("integer exponent must be >= 1")
    }

    /// Builds p from 1/p in [0, 1].
    pub fn from_reciprocal(inv: Rational64) -> Result<Self> {
        if inv < Rational64::zero() || inv > Rational64::one() {
            return Err(Error::Domain(format!("1/p must lie in [0, 1], got {inv}")));
        }
        if inv.is_zero() {
            Ok(Exponent::Infinity)
        } else {
            Ok(Exponent::Finite(inv.recip()))
        }
    }

    /// 1/p, with 1/inf = 0.
    pub fn reciprocal(&self) -> Rational64 {
        match self {
            Exponent::Finite(p) => p.recip(),
            Exponent::Infinity => Rational64::zero(),
        }
    }

    /// The Hoelder conjugate p' with 1/p + 1/p' = 1.
    pub fn conjugate(&self) -> Self {
        Self::from_reciprocal(Rational64::one() - self.reciprocal()).expect("1 - 1/p lies in [0, 1]")
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, Exponent::Infinity)
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Exponent::Finite(p) => *p.numer() as f64 / *p.denom() as f64,
            Exponent::Infinity => f64::INFINITY,
        }
    }

    /// (numerator, denominator), with infinity encoded as (1, 0).
    pub fn num_den(&self) -> (i64, i64) {
        match self {
            Exponent::Finite(p) => (*p.numer(), *p.denom()),
            Exponent::Infinity => (1, 0),
        }
    }
}

impl PartialOrd for Exponent {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Exponent {
    fn cmp(&self, other: &Self) -> Ordering {
        other.reciprocal().cmp(&self.reciprocal())
    }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Exponent::Finite(p) => write!(f, "{p}"),
            Exponent::Infinity => write!(f, "inf"),
        }
    }
}

impl FromStr for Exponent {
    type Err = Error;

    /// Accepts `inf`, integers, `a/b` and finite decimals such as `2.25`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::Format(format!("cannot parse exponent {s:?}"));
        if matches!(s.to_ascii_lowercase().as_str(), "inf" | "infinity" | "∞") {
            return Ok(Exponent::Infinity);
        }
        if let Some((n, d)) = s.split_once('/') {
            let n: i64 = n.trim().parse().map_err(|_| bad())?;
            let d: i64 = d.trim().parse().map_err(|_| bad())?;
            return Self::ratio(n, d);
        }
        if let Some((int, frac)) = s.split_once('.') {
            if frac.is_empty() || frac.len() > 12 || !frac.bytes().all(|b| b.is_ascii_digit()) {
                return Err(bad());
            }
            let den = 10i64.pow(frac.len() as u32);
            let int: i64 = int.parse().map_err(|_| bad())?;
            let frac: i64 = frac.parse().map_err(|_| bad())?;
            return Self::new(Rational64::new(int * den + frac, den));
        }
        Self::ratio(s.parse().map_err(|_| bad())?, 1)
    }
}

impl From<Exponent> for String {
    fn from(e: Exponent) -> String {
        e.to_string()
    }
}

impl TryFrom<String> for Exponent {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}
