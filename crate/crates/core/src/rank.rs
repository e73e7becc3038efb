use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::Error;

/// A rank: a finite level, the symbolic first infinite level, or `∞` for pairs
/// that are never separated.
///
/// Ordered `Finite(0) < Finite(1) < ... < Omega < Infinity`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum RankValue {
    Finite(u32),
    Omega,
    Infinity,
}

impl RankValue {
    pub fn is_finite(&self) -> bool {
        matches!(self, RankValue::Finite(_))
    }

    pub fn finite(&self) -> Option<u32> {
        match self {
            RankValue::Finite(n) => Some(*n),
            _ => None,
        }
    }

    /// Successor on finite values; `Omega` and `Infinity` absorb.
    pub fn succ(self) -> Self {
        match self {
            RankValue::Finite(n) => RankValue::Finite(n + 1),
            other => other,
        }
    }
}

impl fmt::Display for RankValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RankValue::Finite(n) => write!(f, "{n}"),
            RankValue::Omega => write!(f, "omega"),
            RankValue::Infinity => write!(f, "inf"),
        }
    }
}

impl FromStr for RankValue {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self, Error> {
        match s.trim() {
            "omega" => Ok(RankValue::Omega),
            "inf" => Ok(RankValue::Infinity),
            t => t
                .parse()
                .map(RankValue::Finite)
                .map_err(|_| Error::Parse(format!("bad rank `{s}`"))),
        }
    }
}

impl Serialize for RankValue {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for RankValue {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        String::deserialize(d)?.parse().map_err(serde::de::Error::custom)
    }
}

/// A game budget: a finite ordinal or the symbolic `omega`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Budget {
    Finite(u32),
    Omega,
}

impl fmt::Display for Budget {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Budget::Finite(n) => write!(f, "{n}"),
            Budget::Omega => write!(f, "omega"),
        }
    }
}

impl FromStr for Budget {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self, Error> {
        match s.trim() {
            "omega" | "w" => Ok(Budget::Omega),
            t => t
                .parse()
                .map(Budget::Finite)
                .map_err(|_| Error::Parse(format!("bad budget `{s}`"))),
        }
    }
}

impl Serialize for Budget {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Budget::Finite(n) => s.serialize_u32(*n),
            Budget::Omega => s.serialize_str("omega"),
        }
    }
}

impl<'de> Deserialize<'de> for Budget {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            N(u32),
            S(String),
        }
        match Raw::deserialize(d)? {
            Raw::N(n) => Ok(Budget::Finite(n)),
            Raw::S(s) => s.parse().map_err(serde::de::Error::custom),
        }
    }
}
