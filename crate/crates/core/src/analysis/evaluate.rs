use std::fmt;
use std::sync::Arc;

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use super::player::Player;
use super::stats::{run_batches, wilson_interval, Quantity, CI_LEVEL, Z_99};
use crate::caps::{self, Caps};
use crate::classical::{CommProtocol, MajorityProtocol, NonlocalStrategy};
use crate::error::{Error, Result};
use crate::games::{hm_wins, hmnl_wins, small_output_wins, GameInstance, GameVariant, Outcome};
use crate::model::{Bitstring, FamilyKind, Matching};
use crate::parallel::map_range;
use crate::quantum::{
    hm_quantum_distribution, hmnl_quantum_distribution, hmnl_small_output_distribution,
    OutcomeDistribution,
};
use crate::rational::{ratio_u128, Rational};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EvaluationMode {
    Exact,
    MonteCarlo,
}

/// Winning probability of one strategy on one game.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub n: usize,
    pub variant: GameVariant,
    pub family: FamilyKind,
    pub strategy: String,
    pub mode: EvaluationMode,
    pub winning_probability: Quantity,
    /// `2p − 1`
    pub advantage: Quantity,
    pub std_error: Option<f64>,
    pub ci_level: Option<f64>,
    pub ci_low: Option<f64>,
    pub ci_high: Option<f64>,
    pub ci_half_width: Option<f64>,
    pub samples: Option<u64>,
    pub wins: Option<u64>,
    pub seed: Option<u64>,
    pub conditioning: Option<String>,
    /// Rounds (MC) or probability mass (exact) on which the condition held.
    pub conditioned_on: Option<Quantity>,
}

impl EvaluationReport {
    pub fn probability(&self) -> f64 {
        self.winning_probability.to_f64()
    }

    /// Advantage standard error, twice the probability standard error.
    pub fn advantage_std_error(&self) -> Option<f64> {
        self.std_error.map(|s| 2.0 * s)
    }
}

/// A filter on Bob's matching, used to condition an evaluation.
#[derive(Clone)]
pub struct Condition {
    label: String,
    pred: Arc<dyn Fn(&Matching) -> bool + Send + Sync>,
}

impl fmt::Debug for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Condition({})", self.label)
    }
}

impl Condition {
    pub fn new(label: impl Into<String>, pred: impl Fn(&Matching) -> bool + Send + Sync + 'static) -> Self {
        Self {
            label: label.into(),
            pred: Arc::new(pred),
        }
    }

    /// The block-majority protocol's informative event.
    pub fn event_e(p: &MajorityProtocol) -> Self {
        let p = p.clone();
        Self::new("event_e", move |m| p.event_holds(m))
    }

    pub fn not_event_e(p: &MajorityProtocol) -> Self {
        let p = p.clone();
        Self::new("not_event_e", move |m| !p.event_holds(m))
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn holds(&self, m: &Matching) -> bool {
        (self.pred)(m)
    }
}

/// Whether `out` wins on `(x, M)`. Assumes the outcome is well formed.
pub(crate) fn wins(x: &Bitstring, out: &Outcome, m: &Matching) -> bool {
    match *out {
        Outcome::Comm { edge, v } => hm_wins(x, edge, v),
        Outcome::Nonlocal { a, edge, b } => hmnl_wins(x, a, edge, b),
        Outcome::SmallOutput { a, s, w } => match m.edge_with_xor(s) {
            Some(edge) => small_output_wins(x, a, edge, w),
            None => false,
        },
    }
}

fn shared_support_len(player: &Player) -> Result<u128> {
    fn len<S: NonlocalStrategy>(s: &S) -> Result<u128> {
        s.shared_support()
            .map(|v| v.len() as u128)
            .ok_or(Error::ContinuousRandomness)
    }
    match player {
        Player::Quantum | Player::Comm(_) => Ok(1),
        Player::Simulated(s) => len(s),
        Player::Pair(p) => len(p),
        Player::Random(r) => len(r),
        Player::Rounding(g) => len(g),
    }
}

/// Exact winning probability on fixed inputs for a nonlocal strategy with
/// finite shared randomness.
fn nonlocal_cell<S: NonlocalStrategy>(
    instance: &GameInstance,
    s: &S,
    support: &[S::Shared],
    x: &Bitstring,
    m: &Matching,
) -> Rational {
    let small = instance.variant() == GameVariant::HmNonlocalSmallOutput;
    let mut total = Rational::zero();
    for r in support {
        let alice = s.alice(x, r);
        let bob = s.bob(m, r);
        let mut won = 0u128;
        for &a in &alice {
            for mv in &bob {
                let w = if small {
                    small_output_wins(x, a, mv.edge, mv.b.dot(mv.edge.xor()))
                } else {
                    hmnl_wins(x, a, mv.edge, mv.b)
                };
                won += u128::from(w);
            }
        }
        total += ratio_u128(won, (alice.len() * bob.len()) as u128);
    }
    total / Rational::from_integer((support.len() as u64).into())
}

fn comm_cell<P: CommProtocol + ?Sized>(p: &P, x: &Bitstring, m: &Matching) -> Rational {
    let decisions = p.decide(&p.message(x), m);
    let won = decisions.iter().filter(|d| hm_wins(x, d.edge, d.v)).count();
    ratio_u128(won as u128, decisions.len() as u128)
}

fn quantum_cell(instance: &GameInstance, x: &Bitstring, m: &Matching) -> Result<Rational> {
    let dist: OutcomeDistribution = match instance.variant() {
        GameVariant::HmComm => hm_quantum_distribution(x, m)?,
        GameVariant::HmNonlocal => hmnl_quantum_distribution(x, m)?,
        GameVariant::HmNonlocalSmallOutput => hmnl_small_output_distribution(x, m)?,
    };
    // Sum only the losing mass: for a perfect strategy there is none.
    let mut lost = Rational::zero();
    for w in dist.support() {
        if !wins(x, &w.outcome, m) {
            lost += &w.probability;
        }
    }
    Ok(Rational::one() - lost)
}

/// Shared-randomness supports, materialized once per evaluation.
enum Supports<'a> {
    None,
    Simulated(&'a crate::classical::SimulatedStrategy<Arc<dyn CommProtocol>>, Vec<Bitstring>),
    Pair(&'a crate::classical::DeterministicStrategyPair),
    Random(&'a crate::classical::UniformRandomStrategy),
}

fn cell(
    instance: &GameInstance,
    player: &Player,
    supports: &Supports<'_>,
    x: &Bitstring,
    m: &Matching,
) -> Result<Rational> {
    Ok(match (player, supports) {
        (Player::Quantum, _) => quantum_cell(instance, x, m)?,
        (Player::Comm(p), _) => comm_cell(p.as_ref(), x, m),
        (_, Supports::Simulated(s, sup)) => nonlocal_cell(instance, *s, sup, x, m),
        (_, Supports::Pair(p)) => nonlocal_cell(instance, *p, &[()], x, m),
        (_, Supports::Random(r)) => nonlocal_cell(instance, *r, &[()], x, m),
        _ => return Err(Error::ContinuousRandomness),
    })
}

/// Exact winning probability by enumerating inputs, matchings and all
/// randomness.
pub fn exact_win_probability(
    instance: &GameInstance,
    player: &Player,
    label: &str,
    caps: &Caps,
) -> Result<EvaluationReport> {
    exact_inner(instance, player, label, caps, None)
}

/// Exact winning probability conditioned on Bob's matching satisfying
/// `condition`.
pub fn exact_win_probability_given(
    instance: &GameInstance,
    player: &Player,
    label: &str,
    caps: &Caps,
    condition: &Condition,
) -> Result<EvaluationReport> {
    exact_inner(instance, player, label, caps, Some(condition))
}

fn exact_inner(
    instance: &GameInstance,
    player: &Player,
    label: &str,
    caps: &Caps,
    condition: Option<&Condition>,
) -> Result<EvaluationReport> {
    player.check(instance)?;
    let shared = shared_support_len(player)?;
    let members = instance.family().members()?;
    if members.is_empty() {
        return Err(Error::EmptyFamily(instance.family().kind().name()));
    }
    caps::check(
        "exact evaluation work 2^n·|family|·|shared|",
        instance.input_pairs().saturating_mul(shared),
        caps.exact_work,
    )?;
    let supports = match player {
        Player::Simulated(s) => Supports::Simulated(s, s.shared_support().expect("finite")),
        Player::Pair(p) => Supports::Pair(p),
        Player::Random(r) => Supports::Random(r),
        _ => Supports::None,
    };
    let keep: Vec<bool> = members
        .iter()
        .map(|m| condition.is_none_or(|c| c.holds(m)))
        .collect();
    let n = instance.n();
    let partials = map_range(1usize << n, |xv| -> Result<(Rational, Rational)> {
        let x = Bitstring::new(xv as u64, n).expect("in range");
        let mut won = Rational::zero();
        let mut mass = Rational::zero();
        for (pos, m) in members.iter().enumerate() {
            if !keep[pos] {
                continue;
            }
            let w = instance.weight(&x, pos);
            if w.is_zero() {
                continue;
            }
            won += cell(instance, player, &supports, &x, m)? * &w;
            mass += w;
        }
        Ok((won, mass))
    });
    let mut won = Rational::zero();
    let mut mass = Rational::zero();
    for part in partials {
        let (w, m) = part?;
        won += w;
        mass += m;
    }
    if mass.is_zero() {
        return Err(Error::InvalidParameter(
            "the condition has probability zero".into(),
        ));
    }
    let p = won / &mass;
    let advantage = Rational::from_integer(2.into()) * &p - Rational::one();
    Ok(EvaluationReport {
        n,
        variant: instance.variant(),
        family: instance.family().kind(),
        strategy: label.to_owned(),
        mode: EvaluationMode::Exact,
        winning_probability: Quantity::Exact(p),
        advantage: Quantity::Exact(advantage),
        std_error: None,
        ci_level: None,
        ci_low: None,
        ci_high: None,
        ci_half_width: None,
        samples: None,
        wins: None,
        seed: None,
        conditioning: condition.map(|c| c.label().to_owned()),
        conditioned_on: condition.map(|_| Quantity::Exact(mass)),
    })
}

/// Monte Carlo estimate from `samples` independent rounds with a 99% Wilson
/// interval. Deterministic in `(samples, seed)`.
pub fn mc_win_probability(
    instance: &GameInstance,
    player: &Player,
    label: &str,
    samples: u64,
    seed: u64,
) -> Result<EvaluationReport> {
    mc_inner(instance, player, label, samples, seed, None)
}

/// Monte Carlo estimate over the rounds whose matching satisfies `condition`.
pub fn mc_win_probability_given(
    instance: &GameInstance,
    player: &Player,
    label: &str,
    samples: u64,
    seed: u64,
    condition: &Condition,
) -> Result<EvaluationReport> {
    mc_inner(instance, player, label, samples, seed, Some(condition))
}

fn mc_inner(
    instance: &GameInstance,
    player: &Player,
    label: &str,
    samples: u64,
    seed: u64,
    condition: Option<&Condition>,
) -> Result<EvaluationReport> {
    player.check(instance)?;
    if samples == 0 {
        return Err(Error::InvalidParameter("samples must be at least 1".into()));
    }
    if instance.family().is_listed() && instance.family().members()?.is_empty() {
        return Err(Error::EmptyFamily(instance.family().kind().name()));
    }
    let batches = run_batches(samples, seed, |rng, count| -> Result<(u64, u64)> {
        let mut won = 0u64;
        let mut kept = 0u64;
        for _ in 0..count {
            let (x, m) = instance.sample_inputs(rng)?;
            if condition.is_some_and(|c| !c.holds(&m)) {
                continue;
            }
            kept += 1;
            let out = player.play(instance, &x, &m, rng);
            won += u64::from(wins(&x, &out, &m));
        }
        Ok((won, kept))
    });
    let (mut won, mut kept) = (0u64, 0u64);
    for b in batches {
        let (w, k) = b?;
        won += w;
        kept += k;
    }
    if kept == 0 {
        return Err(Error::InvalidParameter(
            "no sampled round satisfied the condition".into(),
        ));
    }
    let p = won as f64 / kept as f64;
    let (lo, hi) = wilson_interval(won, kept, Z_99);
    Ok(EvaluationReport {
        n: instance.n(),
        variant: instance.variant(),
        family: instance.family().kind(),
        strategy: label.to_owned(),
        mode: EvaluationMode::MonteCarlo,
        winning_probability: Quantity::Estimate(p),
        advantage: Quantity::Estimate(2.0 * p - 1.0),
        std_error: Some((p * (1.0 - p) / kept as f64).sqrt()),
        ci_level: Some(CI_LEVEL),
        ci_low: Some(lo),
        ci_high: Some(hi),
        ci_half_width: Some((hi - lo) / 2.0),
        samples: Some(samples),
        wins: Some(won),
        seed: Some(seed),
        conditioning: condition.map(|c| c.label().to_owned()),
        conditioned_on: condition.map(|_| Quantity::Estimate(kept as f64 / samples as f64)),
    })
}

/// One simulated round.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Round {
    pub x: Bitstring,
    pub matching: Matching,
    pub outcome: Outcome,
    pub win: bool,
}

/// Plays `rounds` rounds from a single `ChaCha8` stream seeded with `seed`.
pub fn simulate_rounds(
    instance: &GameInstance,
    player: &Player,
    rounds: u64,
    seed: u64,
) -> Result<Vec<Round>> {
    use rand::SeedableRng;
    player.check(instance)?;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    (0..rounds)
        .map(|_| {
            let (x, matching) = instance.sample_inputs(&mut rng)?;
            let outcome = player.play(instance, &x, &matching, &mut rng);
            let win = wins(&x, &outcome, &matching);
            Ok(Round {
                x,
                matching,
                outcome,
                win,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::StrategySpec;
    use crate::classical::majority_block_protocol;
    use crate::rational::ratio;

    fn game(n: usize, v: GameVariant) -> GameInstance {
        GameInstance::uniform(n, v, FamilyKind::Full).unwrap()
    }

    #[test]
    fn quantum_is_perfect_exactly() {
        for n in [2, 4, 8] {
            for v in [GameVariant::HmComm, GameVariant::HmNonlocal] {
                let r = exact_win_probability(&game(n, v), &Player::Quantum, "quantum", &Caps::default())
                    .unwrap();
                assert_eq!(r.winning_probability, Quantity::Exact(Rational::one()));
                assert_eq!(serde_json::to_value(&r).unwrap()["winning_probability"], "1/1");
            }
        }
    }

    #[test]
    fn random_strategy_is_a_coin() {
        for n in [2, 4, 8] {
            let p = StrategySpec::Random.build(n).unwrap();
            let r = exact_win_probability(&game(n, GameVariant::HmNonlocal), &p, "random", &Caps::default())
                .unwrap();
            assert_eq!(r.winning_probability, Quantity::Exact(ratio(1, 2)));
        }
    }

    #[test]
    fn simulation_identity_at_four() {
        for c in [1, 2] {
            let proto = majority_block_protocol(4, c).unwrap();
            let comm = exact_win_probability(
                &game(4, GameVariant::HmComm),
                &Player::comm(proto.clone()),
                "m",
                &Caps::default(),
            )
            .unwrap();
            let sim = exact_win_probability(
                &game(4, GameVariant::HmNonlocal),
                &Player::simulated(proto),
                "s",
                &Caps::default(),
            )
            .unwrap();
            let k = Rational::from_integer((1i64 << c).into());
            let pc = comm.winning_probability.exact().unwrap().clone();
            let expected = &pc / &k + (Rational::one() - Rational::one() / &k) / Rational::from_integer(2.into());
            assert_eq!(sim.winning_probability, Quantity::Exact(expected));
        }
        // Four vertices, blocks {0},{1}: p_comm = 1/3 · 1 + 2/3 · 1/2.
        let comm = exact_win_probability(
            &game(4, GameVariant::HmComm),
            &Player::comm(majority_block_protocol(4, 2).unwrap()),
            "m",
            &Caps::default(),
        )
        .unwrap();
        assert_eq!(comm.winning_probability, Quantity::Exact(ratio(2, 3)));
    }

    #[test]
    fn off_event_is_a_coin() {
        let proto = majority_block_protocol(4, 2).unwrap();
        let off = exact_win_probability_given(
            &game(4, GameVariant::HmComm),
            &Player::comm(proto.clone()),
            "m",
            &Caps::default(),
            &Condition::not_event_e(&proto),
        )
        .unwrap();
        assert_eq!(off.winning_probability, Quantity::Exact(ratio(1, 2)));
        assert_eq!(off.conditioned_on, Some(Quantity::Exact(ratio(2, 3))));
        let on = exact_win_probability_given(
            &game(4, GameVariant::HmComm),
            &Player::comm(proto.clone()),
            "m",
            &Caps::default(),
            &Condition::event_e(&proto),
        )
        .unwrap();
        assert_eq!(on.winning_probability, Quantity::Exact(ratio(1, 1)));
    }

    #[test]
    fn continuous_randomness_is_mc_only() {
        let g = StrategySpec::Groth.build(4).unwrap();
        let e = exact_win_probability(&game(4, GameVariant::HmNonlocal), &g, "g", &Caps::default());
        assert_eq!(e.unwrap_err(), Error::ContinuousRandomness);
    }

    #[test]
    fn caps_are_enforced() {
        let caps = Caps {
            exact_work: 100,
            ..Caps::default()
        };
        let e = exact_win_probability(&game(8, GameVariant::HmNonlocal), &Player::Quantum, "q", &caps)
            .unwrap_err();
        assert!(e.is_cap_exceeded());
        let big = game(16, GameVariant::HmNonlocal);
        assert!(exact_win_probability(&big, &Player::Quantum, "q", &Caps::default())
            .unwrap_err()
            .is_cap_exceeded());
    }

    #[test]
    fn mc_is_deterministic_and_covers_truth() {
        let g = game(4, GameVariant::HmNonlocal);
        let p = StrategySpec::Random.build(4).unwrap();
        let a = mc_win_probability(&g, &p, "random", 100_000, 0).unwrap();
        let b = mc_win_probability(&g, &p, "random", 100_000, 0).unwrap();
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
        assert!(a.ci_low.unwrap() <= 0.5 && 0.5 <= a.ci_high.unwrap());
        let q = mc_win_probability(&g, &Player::Quantum, "quantum", 100_000, 1).unwrap();
        assert_eq!(q.probability(), 1.0);
        assert!(q.ci_low.unwrap() > 0.99);
    }

    #[test]
    fn small_output_quantum_is_perfect() {
        let g = GameInstance::uniform(8, GameVariant::HmNonlocalSmallOutput, FamilyKind::BijectiveXor)
            .unwrap();
        let r = exact_win_probability(&g, &Player::Quantum, "quantum", &Caps::default()).unwrap();
        assert_eq!(r.winning_probability, Quantity::Exact(Rational::one()));
        let rounds = simulate_rounds(&g, &Player::Quantum, 50, 3).unwrap();
        assert!(rounds.iter().all(|r| r.win && matches!(r.outcome, Outcome::SmallOutput { .. })));
    }
}
