//! Classical protocols and the transforms between the communication and
//! nonlocal settings.
//!
//! Private randomness is always a uniform choice from a finite list, so every
//! strategy with finitely supported shared randomness can be evaluated exactly
//! by enumeration. Samplers default to picking from those lists; strategies on
//! hot Monte Carlo paths override them.

mod grothendieck;
mod majority;
mod random;
mod simulate;
mod tables;

use std::collections::BTreeMap;

use rand::{Rng, RngCore};
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::games::Outcome;
use crate::model::{Bitstring, Edge, Index, Matching};
use crate::rational::{ratio_u128, Rational};

pub use grothendieck::{
    arcsin_identity_check, fixed_vector_pairs, grothendieck_vectors, hyperplane_rounding_strategy,
    rounding_advantage_floor, uniform_rounding_advantage, ArcsinCheck, GrothendieckStrategy,
    GrothendieckVectors, RoundingShared, GROTHENDIECK_BOUNDS,
};
pub use majority::{event_e_probability, majority_block_protocol, EventEstimate, MajorityProtocol};
pub use random::UniformRandomStrategy;
pub use simulate::{nonlocal_from_comm, solve_b_for_parity, SimulatedStrategy};
pub use tables::{
    comm_from_nonlocal, DeterministicStrategyPair, ReducedProtocol, TableProtocol,
};

/// Bob's answer in the communication game.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Decision {
    pub edge: Edge,
    pub v: u8,
}

/// Bob's answer in the nonlocal game.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct BobMove {
    pub edge: Edge,
    pub b: Index,
}

/// A one-way protocol: a deterministic message `x ↦ m ∈ {0,1}^c` and Bob's
/// decision from `(m, M)`, possibly randomized over a uniform choice list.
pub trait CommProtocol: Send + Sync {
    fn n(&self) -> usize;

    /// Message length `c`.
    fn message_bits(&self) -> usize;

    fn message(&self, x: &Bitstring) -> Bitstring;

    /// Bob's equally likely decisions. Never empty; every edge lies in `m`.
    fn decide(&self, message: &Bitstring, m: &Matching) -> Vec<Decision>;

    fn sample_decision(
        &self,
        message: &Bitstring,
        m: &Matching,
        rng: &mut dyn RngCore,
    ) -> Decision {
        let choices = self.decide(message, m);
        choices[rng.random_range(0..choices.len())]
    }
}

impl<P: CommProtocol + ?Sized> CommProtocol for &P {
    fn n(&self) -> usize {
        (**self).n()
    }
    fn message_bits(&self) -> usize {
        (**self).message_bits()
    }
    fn message(&self, x: &Bitstring) -> Bitstring {
        (**self).message(x)
    }
    fn decide(&self, message: &Bitstring, m: &Matching) -> Vec<Decision> {
        (**self).decide(message, m)
    }
    fn sample_decision(&self, message: &Bitstring, m: &Matching, rng: &mut dyn RngCore) -> Decision {
        (**self).sample_decision(message, m, rng)
    }
}

impl<P: CommProtocol + ?Sized> CommProtocol for Box<P> {
    fn n(&self) -> usize {
        (**self).n()
    }
    fn message_bits(&self) -> usize {
        (**self).message_bits()
    }
    fn message(&self, x: &Bitstring) -> Bitstring {
        (**self).message(x)
    }
    fn decide(&self, message: &Bitstring, m: &Matching) -> Vec<Decision> {
        (**self).decide(message, m)
    }
    fn sample_decision(&self, message: &Bitstring, m: &Matching, rng: &mut dyn RngCore) -> Decision {
        (**self).sample_decision(message, m, rng)
    }
}

impl<P: CommProtocol + ?Sized> CommProtocol for std::sync::Arc<P> {
    fn n(&self) -> usize {
        (**self).n()
    }
    fn message_bits(&self) -> usize {
        (**self).message_bits()
    }
    fn message(&self, x: &Bitstring) -> Bitstring {
        (**self).message(x)
    }
    fn decide(&self, message: &Bitstring, m: &Matching) -> Vec<Decision> {
        (**self).decide(message, m)
    }
    fn sample_decision(&self, message: &Bitstring, m: &Matching, rng: &mut dyn RngCore) -> Decision {
        (**self).sample_decision(message, m, rng)
    }
}

/// A classical nonlocal strategy. Alice's rule sees only `(x, shared)`, Bob's
/// only `(M, shared)`; each returns its equally likely private choices.
pub trait NonlocalStrategy: Send + Sync {
    type Shared: Clone + Send + Sync;

    fn n(&self) -> usize;

    /// Uniform finite support of the shared randomness, or `None` when it is
    /// continuous (Monte Carlo only).
    fn shared_support(&self) -> Option<Vec<Self::Shared>>;

    fn sample_shared(&self, rng: &mut dyn RngCore) -> Self::Shared;

    fn alice(&self, x: &Bitstring, shared: &Self::Shared) -> Vec<Index>;

    fn bob(&self, m: &Matching, shared: &Self::Shared) -> Vec<BobMove>;

    fn sample_alice(&self, x: &Bitstring, shared: &Self::Shared, rng: &mut dyn RngCore) -> Index {
        let choices = self.alice(x, shared);
        choices[rng.random_range(0..choices.len())]
    }

    fn sample_bob(&self, m: &Matching, shared: &Self::Shared, rng: &mut dyn RngCore) -> BobMove {
        let choices = self.bob(m, shared);
        choices[rng.random_range(0..choices.len())]
    }
}

/// Exact joint law of `(a, edge, b)` for fixed inputs, marginalized over
/// shared and private randomness.
pub fn joint_outcomes<S: NonlocalStrategy>(
    strategy: &S,
    x: &Bitstring,
    m: &Matching,
) -> Result<BTreeMap<Outcome, Rational>> {
    let support = strategy
        .shared_support()
        .ok_or(crate::Error::ContinuousRandomness)?;
    let mut counts: BTreeMap<Outcome, u128> = BTreeMap::new();
    let mut denom = 1u128;
    // Lists can differ in length across r, so weight each cell by the product
    // of the other lengths via a common denominator.
    let mut cells = Vec::with_capacity(support.len());
    for r in &support {
        let a = strategy.alice(x, r);
        let b = strategy.bob(m, r);
        denom = lcm(denom, (a.len() * b.len()) as u128);
        cells.push((a, b));
    }
    for (a_list, b_list) in &cells {
        let w = denom / (a_list.len() * b_list.len()) as u128;
        for &a in a_list {
            for mv in b_list {
                let o = Outcome::Nonlocal { a, edge: mv.edge, b: mv.b };
                *counts.entry(o).or_default() += w;
            }
        }
    }
    let total = denom * support.len() as u128;
    Ok(counts
        .into_iter()
        .map(|(o, c)| (o, ratio_u128(c, total)))
        .collect())
}

pub(crate) fn lcm(a: u128, b: u128) -> u128 {
    fn gcd(mut a: u128, mut b: u128) -> u128 {
        while b != 0 {
            (a, b) = (b, a % b);
        }
        a
    }
    a / gcd(a, b) * b
}

/// All `log n`-bit strings, as Alice's or Bob's uniform output list.
pub(crate) fn all_labels(n: usize) -> Vec<Index> {
    (0..n as u32).map(Index).collect()
}
