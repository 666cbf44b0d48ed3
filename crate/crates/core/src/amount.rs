//! Fixed-point credit amounts.
//!
//! Every balance, reserve and supply in the ledger is an exact count of
//! micro-units. One whole credit is [`MICROS_PER_CREDIT`] micro-units.

use std::fmt;
use std::iter::Sum;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

pub const MICROS_PER_CREDIT: u128 = 1_000_000;

/// A nonnegative quantity of some credit, in micro-units.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Amount(u128);

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AmountParseError {
    #[error("empty amount")]
    Empty,
    #[error("invalid amount `{0}`")]
    Invalid(String),
    #[error("amount `{0}` has more than 6 fractional digits")]
    TooPrecise(String),
    #[error("amount `{0}` overflows")]
    Overflow(String),
}

impl Amount {
    pub const ZERO: Amount = Amount(0);

    pub const fn from_micros(micros: u128) -> Self {
        Amount(micros)
    }

    pub const fn from_credits(credits: u64) -> Self {
        Amount(credits as u128 * MICROS_PER_CREDIT)
    }

    pub const fn micros(self) -> u128 {
        self.0
    }

    pub fn is_zero(self) -> bool {
        self.0 == 0
    }

    /// Lossy view in whole credits, for reporting and curve evaluation.
    pub fn as_credits_f64(self) -> f64 {
        self.0 as f64 / MICROS_PER_CREDIT as f64
    }

    pub fn checked_add(self, rhs: Amount) -> Option<Amount> {
        self.0.checked_add(rhs.0).map(Amount)
    }

    pub fn checked_sub(self, rhs: Amount) -> Option<Amount> {
        self.0.checked_sub(rhs.0).map(Amount)
    }

    pub fn saturating_sub(self, rhs: Amount) -> Amount {
        Amount(self.0.saturating_sub(rhs.0))
    }

    /// Parses a plain integer count of micro-units, as used on the wire.
    pub fn parse_micros(s: &str) -> Result<Amount, AmountParseError> {
        if s.is_empty() {
            return Err(AmountParseError::Empty);
        }
        if !s.bytes().all(|b| b.is_ascii_digit()) {
            return Err(AmountParseError::Invalid(s.to_string()));
        }
        s.parse::<u128>()
            .map(Amount)
            .map_err(|_| AmountParseError::Overflow(s.to_string()))
    }

    /// Converts a nonnegative credit quantity to micro-units, rounding down.
    pub fn from_credits_f64_floor(credits: f64) -> Amount {
        if !credits.is_finite() || credits <= 0.0 {
            return Amount::ZERO;
        }
        Amount((credits * MICROS_PER_CREDIT as f64).floor() as u128)
    }
}

impl fmt::Display for Amount {
    /// Whole credits with all six fractional digits, e.g. `500.000000`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}.{:06}",
            self.0 / MICROS_PER_CREDIT,
            self.0 % MICROS_PER_CREDIT
        )
    }
}

impl FromStr for Amount {
    type Err = AmountParseError;

    /// Parses a decimal credit quantity such as `12`, `0.5` or `207.106781`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s.is_empty() {
            return Err(AmountParseError::Empty);
        }
        let (whole, frac) = match s.split_once('.') {
            Some((w, f)) => (w, f),
            None => (s, ""),
        };
        let digits = |p: &str| p.bytes().all(|b| b.is_ascii_digit());
        if (whole.is_empty() && frac.is_empty()) || !digits(whole) || !digits(frac) {
            return Err(AmountParseError::Invalid(s.to_string()));
        }
        if frac.len() > 6 {
            return Err(AmountParseError::TooPrecise(s.to_string()));
        }
        let overflow = || AmountParseError::Overflow(s.to_string());
        let whole: u128 = if whole.is_empty() {
            0
        } else {
            whole.parse().map_err(|_| overflow())?
        };
        let frac_micros: u128 = if frac.is_empty() {
            0
        } else {
            format!("{frac:0<6}").parse().map_err(|_| overflow())?
        };
        whole
            .checked_mul(MICROS_PER_CREDIT)
            .and_then(|m| m.checked_add(frac_micros))
            .map(Amount)
            .ok_or_else(overflow)
    }
}

impl Sum for Amount {
    fn sum<I: Iterator<Item = Amount>>(iter: I) -> Amount {
        Amount(iter.map(|a| a.0).sum())
    }
}

// Amounts travel as decimal strings of micro-units so that JSON readers
// without 128-bit integers keep full precision.
impl Serialize for Amount {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(&self.0)
    }
}

impl<'de> Deserialize<'de> for Amount {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Int(u64),
            Str(String),
        }
        match Repr::deserialize(deserializer)? {
            Repr::Int(v) => Ok(Amount(v as u128)),
            Repr::Str(s) => Amount::parse_micros(&s).map_err(serde::de::Error::custom),
        }
    }
}

/// Serde adapter for config files that state amounts in whole credits
/// (`initialSupply = 500` or `initialSupply = "0.25"`).
pub mod as_credits {
    use super::Amount;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(amount: &Amount, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(amount)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(deserializer: D) -> Result<Amount, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Int(u64),
            Float(f64),
            Str(String),
        }
        match Repr::deserialize(deserializer)? {
            Repr::Int(v) => Ok(Amount::from_credits(v)),
            Repr::Float(v) if v >= 0.0 && v.is_finite() => {
                format!("{v:.6}").parse().map_err(serde::de::Error::custom)
            }
            Repr::Float(v) => Err(serde::de::Error::custom(format!("invalid amount {v}"))),
            Repr::Str(s) => s.parse().map_err(serde::de::Error::custom),
        }
    }
}
