use num_traits::{One, Zero};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::evaluate::{exact_win_probability, mc_win_probability, wins};
use super::player::Player;
use super::search::{brute_force_classical_value, local_search_classical_value};
use super::stats::Quantity;
use crate::caps::Caps;
use crate::classical::{majority_block_protocol, MajorityProtocol};
use crate::error::{Error, Result};
use crate::games::{GameInstance, GameVariant};
use crate::model::{Bitstring, FamilyKind};
use crate::quantum::hmnl_quantum_distribution;
use crate::rational::Rational;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundKind {
    /// The true value.
    Exact,
    /// The exact value of some strategy, hence a lower bound on the optimum.
    LowerBound,
    /// A Monte Carlo estimate of some strategy's value.
    Estimate,
    /// An upper bound on the true value.
    UpperBound,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ValueEntry {
    pub source: String,
    pub kind: BoundKind,
    pub value: Quantity,
    pub advantage: Quantity,
}

impl ValueEntry {
    fn new(source: impl Into<String>, kind: BoundKind, value: Quantity) -> Self {
        let advantage = match &value {
            Quantity::Exact(p) => Quantity::Exact(Rational::from_integer(2.into()) * p - Rational::one()),
            Quantity::Estimate(p) => Quantity::Estimate(2.0 * p - 1.0),
        };
        Self {
            source: source.into(),
            kind,
            value,
            advantage,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RatioConfig {
    pub restarts: u64,
    pub seed: u64,
    /// Monte Carlo samples for strategies that cannot be evaluated exactly.
    pub samples: u64,
    /// Random `(x, M)` pairs on which the quantum protocol is checked when the
    /// family is too large to enumerate.
    pub quantum_checks: u64,
}

impl Default for RatioConfig {
    fn default() -> Self {
        Self {
            restarts: 20,
            seed: 0,
            samples: 100_000,
            quantum_checks: 1000,
        }
    }
}

/// Quantum versus classical comparison for the nonlocal game on the full
/// family with uniform inputs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RatioReport {
    pub n: usize,
    pub config: RatioConfig,
    pub quantum: ValueEntry,
    /// Input pairs on which the quantum distribution was checked to win
    /// with probability exactly 1.
    pub quantum_pairs_checked: u64,
    pub quantum_exhaustive: bool,
    /// Every classical value obtained, exact or bound.
    pub classical: Vec<ValueEntry>,
    /// The best classical value found.
    pub classical_best: ValueEntry,
    /// Quantum advantage over the best classical advantage found. Exact when
    /// the classical value is exact, otherwise an upper bound (or estimate).
    pub advantage_ratio: Option<f64>,
    pub advantage_ratio_kind: BoundKind,
}

fn simulated_comparator(n: usize) -> Option<MajorityProtocol> {
    majority_block_protocol(n, 1)
        .or_else(|_| MajorityProtocol::with_prefix(n, 2, 1))
        .ok()
}

pub fn ratio_report(n: usize, config: &RatioConfig, caps: &Caps) -> Result<RatioReport> {
    let instance = GameInstance::new(
        n,
        GameVariant::HmNonlocal,
        FamilyKind::Full,
        crate::games::InputDistribution::Uniform,
        caps,
    )?;

    // Quantum: exact on every pair when enumerable, otherwise on random pairs.
    let (quantum_pairs_checked, quantum_exhaustive) =
        match exact_win_probability(&instance, &Player::Quantum, "quantum", caps) {
            Ok(r) => {
                if r.winning_probability != Quantity::Exact(Rational::one()) {
                    return Err(Error::InvalidDistribution(format!(
                        "quantum winning probability {}",
                        r.winning_probability
                    )));
                }
                (instance.input_pairs() as u64, true)
            }
            Err(e) if e.is_cap_exceeded() => {
                let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
                for _ in 0..config.quantum_checks {
                    let x = Bitstring::random(n, &mut rng);
                    let m = instance.family().sample(&mut rng)?;
                    let dist = hmnl_quantum_distribution(&x, &m)?;
                    let lost: Rational = dist
                        .support()
                        .iter()
                        .filter(|w| !wins(&x, &w.outcome, &m))
                        .map(|w| w.probability.clone())
                        .sum();
                    if !lost.is_zero() {
                        return Err(Error::InvalidDistribution(format!(
                            "quantum protocol loses on x = {x}, M = {m:?}"
                        )));
                    }
                }
                (config.quantum_checks, false)
            }
            Err(e) => return Err(e),
        };
    let quantum = ValueEntry::new("quantum", BoundKind::Exact, Quantity::Exact(Rational::one()));

    let mut classical = Vec::new();
    if n <= caps.brute_force_n {
        let r = brute_force_classical_value(&instance, caps)?;
        classical.push(ValueEntry::new("brute_force", BoundKind::Exact, r.value));
    }
    match local_search_classical_value(&instance, config.restarts, config.seed, None, caps) {
        Ok(r) => classical.push(ValueEntry::new("local_search", BoundKind::LowerBound, r.value)),
        Err(e) if e.is_cap_exceeded() => {}
        Err(e) => return Err(e),
    }
    if let Some(proto) = simulated_comparator(n) {
        let label = format!("simulated:c=1,prefix={}", proto.prefix());
        let player = Player::simulated(proto);
        match exact_win_probability(&instance, &player, &label, caps) {
            Ok(r) => classical.push(ValueEntry::new(label, BoundKind::LowerBound, r.winning_probability)),
            Err(e) if e.is_cap_exceeded() && config.samples > 0 => {
                let r = mc_win_probability(&instance, &player, &label, config.samples, config.seed)?;
                classical.push(ValueEntry::new(label, BoundKind::Estimate, r.winning_probability));
            }
            Err(e) if e.is_cap_exceeded() => {}
            Err(e) => return Err(e),
        }
    }
    if config.samples > 0 {
        let player = Player::Rounding(crate::classical::hyperplane_rounding_strategy(n)?);
        let r = mc_win_probability(&instance, &player, "groth", config.samples, config.seed)?;
        classical.push(ValueEntry::new("groth", BoundKind::Estimate, r.winning_probability));
    }

    let rank = |e: &ValueEntry| match e.kind {
        BoundKind::Exact => 0,
        BoundKind::LowerBound => 1,
        _ => 2,
    };
    let classical_best = classical
        .iter()
        .min_by(|a, b| {
            rank(a).cmp(&rank(b)).then(
                b.value
                    .to_f64()
                    .partial_cmp(&a.value.to_f64())
                    .unwrap_or(std::cmp::Ordering::Equal),
            )
        })
        .cloned()
        .unwrap_or_else(|| ValueEntry::new("trivial", BoundKind::LowerBound, Quantity::Exact(Rational::new(1.into(), 2.into()))));
    let adv = classical_best.advantage.to_f64();
    let advantage_ratio = (adv > 0.0).then(|| 1.0 / adv);
    let advantage_ratio_kind = match classical_best.kind {
        BoundKind::Exact => BoundKind::Exact,
        BoundKind::LowerBound => BoundKind::UpperBound,
        _ => BoundKind::Estimate,
    };
    Ok(RatioReport {
        n,
        config: config.clone(),
        quantum,
        quantum_pairs_checked,
        quantum_exhaustive,
        classical,
        classical_best,
        advantage_ratio,
        advantage_ratio_kind,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_sizes() {
        let cfg = RatioConfig {
            samples: 0,
            ..RatioConfig::default()
        };
        let r4 = ratio_report(4, &cfg, &Caps::default()).unwrap();
        assert!(r4.quantum_exhaustive);
        assert_eq!(r4.quantum.value, Quantity::Exact(Rational::one()));
        assert_eq!(r4.classical_best.kind, BoundKind::Exact);
        assert_eq!(r4.advantage_ratio_kind, BoundKind::Exact);
        let json = serde_json::to_value(&r4).unwrap();
        assert_eq!(json["quantum"]["value"], "1/1");
    }
}
