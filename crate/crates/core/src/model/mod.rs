//! Bit arithmetic, perfect matchings and matching families.

mod bits;
mod family;
mod matching;

pub use bits::{dot_mod2, exact_log2, game_log2, xor_index, Bitstring, Index, MAX_BITS};
pub use family::{
    edge_membership_fraction, game_family, sample_full_matching, sample_matching, FamilyKind,
    MatchingFamily,
};
pub use matching::{
    double_factorial_odd, enumerate_bijective_xor_matchings, enumerate_matchings,
    is_bijective_xor, Edge, Matching,
};
