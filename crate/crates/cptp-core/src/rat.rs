//! Exact rational scalars and small helpers used throughout the crate.
//!
//! All construction-layer arithmetic is exact; floating point only ever
//! appears in oracle margins and report fields derived from them.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Exact rational scalar.
pub type Rat = BigRational;

pub fn rat_int(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

pub fn rat(num: i64, den: i64) -> Rat {
    Rat::new(BigInt::from(num), BigInt::from(den))
}

pub fn rat_zero() -> Rat {
    Rat::zero()
}

/// Canonical `p/q` rendering with a positive denominator, `q = 1` included.
/// Keeps serialized rationals unambiguous and byte-stable.
pub fn format_rat(value: &Rat) -> String {
    format!("{}/{}", value.numer(), value.denom())
}

/// Accepts `p` or `p/q` with optional sign.
pub fn parse_rat(text: &str) -> Result<Rat> {
    let trimmed = text.trim();
    trimmed
        .parse::<Rat>()
        .map_err(|e| Error::parse(format!("bad rational {trimmed:?}: {e}")))
}

pub fn parse_rat_vec(parts: &[&str]) -> Result<Vec<Rat>> {
    parts.iter().map(|p| parse_rat(p)).collect()
}

pub fn format_rat_vec(values: &[Rat]) -> Vec<String> {
    values.iter().map(format_rat).collect()
}

/// Nearest-f64 view of an exact value, for margins and report fields.
pub fn rat_to_f64(value: &Rat) -> f64 {
    value.to_f64().unwrap_or_else(|| {
        if value.is_negative() {
            f64::NEG_INFINITY
        } else {
            f64::INFINITY
        }
    })
}

/// Exact rational equal to the decimal expansion of an `f64` tolerance.
pub fn rat_from_f64(value: f64) -> Result<Rat> {
    Rat::from_float(value).ok_or_else(|| Error::invalid(format!("non-finite float {value}")))
}

/// Floats in reports are serialized with 17 significant digits so the exact
/// bit pattern survives a round trip through text.
pub fn format_f64(value: f64) -> String {
    format!("{value:.16e}")
}

/// Deterministic 64-bit generator (splitmix64). Used wherever the crate
/// needs reproducible pseudo-random samples.
#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        SplitMix64 { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9e3779b97f4a7c15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
        z ^ (z >> 31)
    }

    /// Uniform value in `0..bound`.
    pub fn below(&mut self, bound: u64) -> u64 {
        debug_assert!(bound > 0);
        self.next_u64() % bound
    }

    /// Small random rational with numerator in `[-max_num, max_num]` and
    /// denominator in `{1, 2, 3, 4}`.
    pub fn small_rat(&mut self, max_num: i64) -> Rat {
        let span = (2 * max_num + 1) as u64;
        let num = self.below(span) as i64 - max_num;
        let den = 1 + self.below(4) as i64;
        rat(num, den)
    }

    /// Small random nonnegative rational in `[0, max_num]`.
    pub fn small_nonneg_rat(&mut self, max_num: i64) -> Rat {
        let num = self.below((max_num + 1) as u64) as i64;
        let den = 1 + self.below(4) as i64;
        rat(num, den)
    }
}
