//! Condition labels and three-valued statuses shared by system metadata,
//! the property suite and the report layer.

use serde::{Deserialize, Serialize};
use std::fmt;

/// The properties decided by the suite. `IV` is derived (`I ∧ II`) but kept
/// in the table so the implication diagram can be checked on it.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Condition {
    I,
    II,
    III,
    IV,
    #[serde(rename = "P-closed")]
    PClosed,
    #[serde(rename = "P-usc")]
    PUsc,
    V,
    VI,
    B,
    S,
    U,
}

impl Condition {
    pub const ALL: [Condition; 11] = [
        Condition::I,
        Condition::II,
        Condition::III,
        Condition::IV,
        Condition::PClosed,
        Condition::PUsc,
        Condition::V,
        Condition::VI,
        Condition::B,
        Condition::S,
        Condition::U,
    ];

    pub fn label(self) -> &'static str {
        match self {
            Condition::I => "I",
            Condition::II => "II",
            Condition::III => "III",
            Condition::IV => "IV",
            Condition::PClosed => "P-closed",
            Condition::PUsc => "P-usc",
            Condition::V => "V",
            Condition::VI => "VI",
            Condition::B => "B",
            Condition::S => "S",
            Condition::U => "U",
        }
    }
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Holds,
    Fails,
    Inconclusive,
}

impl Status {
    pub fn from_bool(holds: bool) -> Self {
        if holds {
            Status::Holds
        } else {
            Status::Fails
        }
    }

    /// `Some(true|false)` for definite statuses.
    pub fn definite(self) -> Option<bool> {
        match self {
            Status::Holds => Some(true),
            Status::Fails => Some(false),
            Status::Inconclusive => None,
        }
    }

    /// Three-valued conjunction: any failure wins, otherwise any
    /// inconclusive entry makes the result inconclusive.
    pub fn and(self, other: Status) -> Status {
        match (self, other) {
            (Status::Fails, _) | (_, Status::Fails) => Status::Fails,
            (Status::Holds, Status::Holds) => Status::Holds,
            _ => Status::Inconclusive,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Status::Holds => "holds",
            Status::Fails => "fails",
            Status::Inconclusive => "inconclusive",
        }
    }

    /// Compact table mark: ✓, ✗ or ?.
    pub fn mark(self) -> &'static str {
        match self {
            Status::Holds => "✓",
            Status::Fails => "✗",
            Status::Inconclusive => "?",
        }
    }
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kleene_and() {
        use Status::*;
        assert_eq!(Holds.and(Holds), Holds);
        assert_eq!(Holds.and(Fails), Fails);
        assert_eq!(Inconclusive.and(Fails), Fails);
        assert_eq!(Inconclusive.and(Holds), Inconclusive);
    }

    #[test]
    fn labels_round_trip_through_json() {
        for c in Condition::ALL {
            let s = serde_json::to_string(&c).unwrap();
            assert_eq!(s, format!("\"{}\"", c.label()));
            let back: Condition = serde_json::from_str(&s).unwrap();
            assert_eq!(back, c);
        }
    }
}
