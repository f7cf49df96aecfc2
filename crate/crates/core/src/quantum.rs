//! Exact outcome distributions of the entanglement-based protocols.
//!
//! No state vector is simulated. For the nonlocal protocol the post-measurement
//! state, after both Hadamard layers, has amplitude
//! `((-1)^{x_i + (a⊕b)·i} + (-1)^{x_j + (a⊕b)·j}) / (√2 n)` on `|a⟩|b⟩`, so the
//! numerator is an integer in `{-2, 0, 2}` and every joint probability is
//! `(2/n) · num² / (2n²) = num² / n³`, an exact rational.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::games::{win_predicate, GameInstance, GameVariant, Outcome};
use crate::model::{game_log2, is_bijective_xor, Bitstring, Edge, Index, Matching};
use crate::rational::{self, ratio_u128, Rational};

/// A finite distribution over one round's outcomes with exact probabilities.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OutcomeDistribution {
    n: usize,
    variant: GameVariant,
    support: Vec<WeightedOutcome>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightedOutcome {
    pub outcome: Outcome,
    #[serde(with = "rational::serde_fraction")]
    pub probability: Rational,
}

impl OutcomeDistribution {
    /// Validates positivity, normalization, distinctness and variant tags, and
    /// sorts the support.
    pub fn new(n: usize, variant: GameVariant, support: Vec<(Outcome, Rational)>) -> Result<Self> {
        let mut merged: BTreeMap<Outcome, Rational> = BTreeMap::new();
        for (outcome, p) in support {
            if outcome.variant() != variant {
                return Err(Error::MalformedOutcome(format!(
                    "{outcome:?} in a {} distribution",
                    variant.name()
                )));
            }
            if !p.is_positive() {
                return Err(Error::InvalidDistribution(format!(
                    "non-positive probability for {outcome:?}"
                )));
            }
            if merged.insert(outcome, p).is_some() {
                return Err(Error::InvalidDistribution(format!(
                    "duplicate outcome {outcome:?}"
                )));
            }
        }
        Self::from_merged(n, variant, merged)
    }

    fn from_merged(
        n: usize,
        variant: GameVariant,
        merged: BTreeMap<Outcome, Rational>,
    ) -> Result<Self> {
        let total: Rational = merged.values().sum();
        if !total.is_one() {
            return Err(Error::InvalidDistribution(format!(
                "probabilities sum to {}",
                rational::to_fraction_string(&total)
            )));
        }
        Ok(Self {
            n,
            variant,
            support: merged
                .into_iter()
                .map(|(outcome, probability)| WeightedOutcome {
                    outcome,
                    probability,
                })
                .collect(),
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn variant(&self) -> GameVariant {
        self.variant
    }

    pub fn support(&self) -> &[WeightedOutcome] {
        &self.support
    }

    pub fn len(&self) -> usize {
        self.support.len()
    }

    pub fn is_empty(&self) -> bool {
        self.support.is_empty()
    }

    pub fn probability_of(&self, outcome: &Outcome) -> Rational {
        self.support
            .binary_search_by(|w| w.outcome.cmp(outcome))
            .map(|k| self.support[k].probability.clone())
            .unwrap_or_else(|_| Rational::zero())
    }

    /// Total probability of winning outcomes for the given inputs.
    pub fn win_probability(
        &self,
        instance: &GameInstance,
        x: &Bitstring,
        m: &Matching,
    ) -> Result<Rational> {
        let mut p = Rational::zero();
        for w in &self.support {
            if win_predicate(instance, x, m, &w.outcome)? {
                p += &w.probability;
            }
        }
        Ok(p)
    }

    /// Marginal probability of each reported edge (or edge XOR, for the
    /// small-output variant, keyed by the matching edge with that XOR).
    pub fn edge_marginal(&self, m: &Matching) -> BTreeMap<Edge, Rational> {
        let mut out: BTreeMap<Edge, Rational> = BTreeMap::new();
        for w in &self.support {
            let edge = match w.outcome {
                Outcome::Comm { edge, .. } | Outcome::Nonlocal { edge, .. } => Some(edge),
                Outcome::SmallOutput { s, .. } => m.edge_with_xor(s),
            };
            if let Some(e) = edge {
                *out.entry(e).or_insert_with(Rational::zero) += &w.probability;
            }
        }
        out
    }
}

fn check_sizes(x: &Bitstring, m: &Matching) -> Result<()> {
    if x.len() != m.n() {
        return Err(Error::LengthMismatch {
            left: x.len(),
            right: m.n(),
        });
    }
    Ok(())
}

/// Bob measures Alice's `log n`-qubit state in the basis `(|i⟩ ± |j⟩)/√2`.
/// Each edge appears with probability `2/n`, always with `v = x_i ⊕ x_j`.
pub fn hm_quantum_distribution(x: &Bitstring, m: &Matching) -> Result<OutcomeDistribution> {
    check_sizes(x, m)?;
    let n = m.n();
    let support = m
        .edges()
        .iter()
        .filter_map(|&edge| {
            // |⟨ψ|(|i⟩ ± |j⟩)/√2⟩|² = (s_i ± s_j)² / 2n with s_k = (-1)^{x_k}.
            let (si, sj) = (x.sign(edge.i.value()), x.sign(edge.j.value()));
            [(0u8, si + sj), (1u8, si - sj)]
                .into_iter()
                .find(|&(_, amp)| amp != 0)
                .map(|(v, amp)| {
                    let p = ratio_u128((amp * amp) as u128, 2 * n as u128);
                    (Outcome::Comm { edge, v }, p)
                })
        })
        .collect();
    OutcomeDistribution::new(n, GameVariant::HmComm, support)
}

/// Joint distribution of `(edge, a, b)` for the shared-EPR-pair protocol.
pub fn hmnl_quantum_distribution(x: &Bitstring, m: &Matching) -> Result<OutcomeDistribution> {
    check_sizes(x, m)?;
    let n = m.n();
    game_log2(n)?;
    let n3 = (n as u128).pow(3);
    let mut merged = BTreeMap::new();
    for &edge in m.edges() {
        let (si, sj) = (x.sign(edge.i.value()), x.sign(edge.j.value()));
        for a in 0..n as u32 {
            for b in 0..n as u32 {
                let d = Index(a ^ b);
                let amp = si * (1 - 2 * d.dot(edge.i) as i32) + sj * (1 - 2 * d.dot(edge.j) as i32);
                if amp != 0 {
                    let outcome = Outcome::Nonlocal {
                        a: Index(a),
                        edge,
                        b: Index(b),
                    };
                    merged.insert(outcome, ratio_u128((amp * amp) as u128, n3));
                }
            }
        }
    }
    OutcomeDistribution::from_merged(n, GameVariant::HmNonlocal, merged)
}

/// Pushforward of [`hmnl_quantum_distribution`] under
/// `(edge, a, b) ↦ (a, i⊕j, b·(i⊕j))`. Requires a bijective-XOR matching.
pub fn hmnl_small_output_distribution(
    x: &Bitstring,
    m: &Matching,
) -> Result<OutcomeDistribution> {
    if !is_bijective_xor(m) {
        return Err(Error::InvalidMatching(format!(
            "{m:?} is not in the bijective_xor family"
        )));
    }
    let full = hmnl_quantum_distribution(x, m)?;
    let mut merged: BTreeMap<Outcome, Rational> = BTreeMap::new();
    for w in full.support {
        let small = w.outcome.to_small_output().expect("nonlocal outcome");
        *merged.entry(small).or_insert_with(Rational::zero) += w.probability;
    }
    OutcomeDistribution::from_merged(m.n(), GameVariant::HmNonlocalSmallOutput, merged)
}

/// Inverse-CDF sampler over the exact support. When the common denominator
/// fits in 128 bits the draw is an exact integer; otherwise it falls back to
/// `f64` cumulative weights.
#[derive(Clone, Debug)]
pub struct OutcomeSampler {
    outcomes: Vec<Outcome>,
    cumulative: Cumulative,
}

#[derive(Clone, Debug)]
enum Cumulative {
    Exact { bounds: Vec<u128>, total: u128 },
    Float(Vec<f64>),
}

impl OutcomeSampler {
    pub fn new(dist: &OutcomeDistribution) -> Result<Self> {
        if dist.is_empty() {
            return Err(Error::InvalidDistribution("empty support".into()));
        }
        let outcomes = dist.support.iter().map(|w| w.outcome).collect();
        let lcm = dist
            .support
            .iter()
            .fold(BigInt::one(), |acc, w| acc.lcm(w.probability.denom()));
        let exact = lcm.to_u128().and_then(|total| {
            let mut acc = 0u128;
            let mut bounds = Vec::with_capacity(dist.len());
            for w in &dist.support {
                let scaled = (w.probability.clone() * Rational::from_integer(lcm.clone()))
                    .to_integer()
                    .to_u128()?;
                acc = acc.checked_add(scaled)?;
                bounds.push(acc);
            }
            Some(Cumulative::Exact { bounds, total })
        });
        let cumulative = exact.unwrap_or_else(|| {
            let mut acc = 0.0;
            Cumulative::Float(
                dist.support
                    .iter()
                    .map(|w| {
                        acc += rational::to_f64(&w.probability);
                        acc
                    })
                    .collect(),
            )
        });
        Ok(Self {
            outcomes,
            cumulative,
        })
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Outcome {
        let k = match &self.cumulative {
            Cumulative::Exact { bounds, total } => {
                let u = rng.random_range(0..*total);
                bounds.partition_point(|&b| b <= u)
            }
            Cumulative::Float(c) => {
                let u = rng.random::<f64>() * c.last().copied().unwrap_or(1.0);
                c.partition_point(|&b| b <= u).min(c.len() - 1)
            }
        };
        self.outcomes[k]
    }
}

pub fn sample_outcome<R: Rng + ?Sized>(dist: &OutcomeDistribution, rng: &mut R) -> Result<Outcome> {
    Ok(OutcomeSampler::new(dist)?.sample(rng))
}

/// Direct sampler for the nonlocal protocol without building the distribution:
/// a uniform edge, a uniform `a`, then `b = a ⊕ d` with `d` uniform among the
/// `n/2` strings satisfying `d·(i⊕j) = x_i ⊕ x_j`.
pub fn sample_hmnl_quantum<R: Rng + ?Sized>(x: &Bitstring, m: &Matching, rng: &mut R) -> Outcome {
    let n = m.n() as u32;
    let edge = m.edges()[rng.random_range(0..m.edges().len())];
    let s = edge.xor();
    let target = x.get(edge.i.value()) ^ x.get(edge.j.value());
    let a = Index(rng.random_range(0..n));
    // Flip the lowest set bit of s when the parity is wrong: a bijection
    // between the two cosets of s⊥.
    let mut d = Index(rng.random_range(0..n));
    if d.dot(s) != target {
        d = Index(d.0 ^ (s.0 & s.0.wrapping_neg()));
    }
    Outcome::Nonlocal {
        a,
        edge,
        b: a.xor(d),
    }
}

/// Direct sampler for the entanglement-assisted communication protocol.
pub fn sample_hm_quantum<R: Rng + ?Sized>(x: &Bitstring, m: &Matching, rng: &mut R) -> Outcome {
    let edge = m.edges()[rng.random_range(0..m.edges().len())];
    Outcome::Comm {
        edge,
        v: x.get(edge.i.value()) ^ x.get(edge.j.value()),
    }
}
