use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Enumeration limits. The defaults keep every exact computation at desk
/// scale: full matchings up to n = 10 (945 of them), bijective-XOR matchings up
/// to n = 16, exact evaluation up to 2^24 (input, matching, shared) triples.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct Caps {
    pub full_matchings_n: usize,
    pub bijective_xor_n: usize,
    pub exact_work: u128,
    pub explicit_table_pairs: u128,
    pub beta_n: usize,
    pub brute_force_n: usize,
}

impl Default for Caps {
    fn default() -> Self {
        Self {
            full_matchings_n: 10,
            bijective_xor_n: 16,
            exact_work: 1 << 24,
            explicit_table_pairs: 1 << 16,
            beta_n: 16,
            brute_force_n: 4,
        }
    }
}

pub(crate) fn check(what: &'static str, requested: u128, cap: u128) -> Result<()> {
    if requested > cap {
        Err(Error::CapExceeded {
            what,
            requested,
            cap,
        })
    } else {
        Ok(())
    }
}
