use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// Joint distribution of the two half-dimensional copies at each level.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CouplingPolicy {
    /// Every copy at every level draws its own matching.
    Independent,
    /// All copies at a level share one matching, so both halves are identical.
    Duplicube,
    /// Matchings are the identity; the result is the ordinary hypercube.
    #[serde(rename = "identity")]
    IdentityMatching,
}

impl CouplingPolicy {
    pub const ALL: [CouplingPolicy; 3] = [
        CouplingPolicy::Independent,
        CouplingPolicy::Duplicube,
        CouplingPolicy::IdentityMatching,
    ];

    /// Binary format code.
    pub fn code(self) -> u8 {
        match self {
            CouplingPolicy::Independent => 0,
            CouplingPolicy::Duplicube => 1,
            CouplingPolicy::IdentityMatching => 2,
        }
    }

    pub fn from_code(code: u8) -> Option<Self> {
        match code {
            0 => Some(CouplingPolicy::Independent),
            1 => Some(CouplingPolicy::Duplicube),
            2 => Some(CouplingPolicy::IdentityMatching),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            CouplingPolicy::Independent => "independent",
            CouplingPolicy::Duplicube => "duplicube",
            CouplingPolicy::IdentityMatching => "identity",
        }
    }

    /// Number of matching tables stored at `level` in a graph of dimension `n`.
    ///
    /// Copies that map to the same stream identifier share a table, so this
    /// is the number of distinct identifiers among the `2^(n - level)` copies.
    pub fn stored_copies(self, n: u32, level: u32) -> u64 {
        match self {
            CouplingPolicy::Independent => 1u64 << (n - level),
            CouplingPolicy::Duplicube => 1,
            CouplingPolicy::IdentityMatching => 0,
        }
    }

    /// Index of the stored table used by copy `copy` at `level`.
    #[inline]
    pub fn table_index(self, copy: u32) -> u32 {
        match self {
            CouplingPolicy::Independent => copy,
            CouplingPolicy::Duplicube | CouplingPolicy::IdentityMatching => 0,
        }
    }
}

impl fmt::Display for CouplingPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CouplingPolicy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "independent" => Ok(CouplingPolicy::Independent),
            "duplicube" => Ok(CouplingPolicy::Duplicube),
            "identity" | "identitymatching" | "identity-matching" => {
                Ok(CouplingPolicy::IdentityMatching)
            }
            other => Err(format!(
                "unknown policy `{other}` (expected independent, duplicube or identity)"
            )),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn codes_round_trip() {
        for p in CouplingPolicy::ALL {
            assert_eq!(CouplingPolicy::from_code(p.code()), Some(p));
            assert_eq!(p.name().parse::<CouplingPolicy>(), Ok(p));
        }
        assert_eq!(CouplingPolicy::from_code(3), None);
        assert!("random".parse::<CouplingPolicy>().is_err());
    }

    #[test]
    fn table_counts() {
        assert_eq!(CouplingPolicy::Independent.stored_copies(10, 4), 64);
        assert_eq!(CouplingPolicy::Independent.stored_copies(10, 10), 1);
        assert_eq!(CouplingPolicy::Duplicube.stored_copies(10, 4), 1);
        assert_eq!(CouplingPolicy::IdentityMatching.stored_copies(10, 4), 0);
    }
}
