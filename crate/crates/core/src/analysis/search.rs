//! Optimization over deterministic nonlocal strategies.
//!
//! Scores are integers: input weights are scaled to a common denominator, so
//! every comparison is exact and results do not depend on the platform.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::stats::Quantity;
use crate::caps::{self, Caps};
use crate::classical::{BobMove, DeterministicStrategyPair};
use crate::error::{Error, Result};
use crate::games::{GameInstance, GameVariant, InputDistribution};
use crate::model::{Bitstring, FamilyKind, Index, Matching};
use crate::parallel::map_range;
use crate::rational::{ratio_u128, Rational};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ValueMode {
    /// The maximum over all deterministic strategies.
    Exact,
    /// The value of a strategy found by search.
    LowerBound,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchStats {
    /// Bob tables enumerated (brute force).
    pub bob_tables: Option<u64>,
    pub restarts: Option<u64>,
    pub seed: Option<u64>,
    /// Best-response steps summed over restarts.
    pub iterations: u64,
    /// Final value reached by each restart.
    pub restart_values: Vec<Quantity>,
    /// Every best-response step kept or raised the value.
    pub monotone: bool,
}

/// Classical value of a nonlocal game, exact or as a lower bound, with a
/// witness strategy achieving it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassicalValueResult {
    pub n: usize,
    pub variant: GameVariant,
    pub family: FamilyKind,
    pub mode: ValueMode,
    pub value: Quantity,
    pub advantage: Quantity,
    pub stats: SearchStats,
    pub witness: DeterministicStrategyPair,
}

impl ClassicalValueResult {
    pub fn exact_value(&self) -> &Rational {
        self.value.exact().expect("search values are exact")
    }
}

/// Integer form of a nonlocal game on a listed family.
struct Payoff<'a> {
    n: usize,
    members: &'a [Matching],
    /// `weights[x * |F| + pos]`, summing to `denom`.
    weights: Vec<u64>,
    denom: u128,
    /// Per matching, every (edge, b) move.
    moves: Vec<Vec<BobMove>>,
}

impl<'a> Payoff<'a> {
    fn new(instance: &'a GameInstance, caps: &Caps) -> Result<Self> {
        if instance.variant() == GameVariant::HmComm {
            return Err(Error::InvalidParameter(
                "classical value search needs a nonlocal game".into(),
            ));
        }
        let n = instance.n();
        let members = instance.family().members()?;
        if members.is_empty() {
            return Err(Error::EmptyFamily(instance.family().kind().name()));
        }
        caps::check(
            "search table size 2^n·|family|",
            instance.input_pairs(),
            caps.exact_work,
        )?;
        let size = members.len();
        let (weights, denom) = match instance.distribution() {
            InputDistribution::Uniform => (vec![1u64; size << n], (size as u128) << n),
            InputDistribution::Table(_) => {
                let all: Vec<Rational> = (0..1usize << n)
                    .flat_map(|xv| {
                        let x = Bitstring::new(xv as u64, n).expect("in range");
                        (0..size).map(move |pos| instance.weight(&x, pos))
                    })
                    .collect();
                let lcm = all
                    .iter()
                    .fold(BigInt::one(), |acc, w| acc.lcm(w.denom()));
                let weights = all
                    .iter()
                    .map(|w| (w.numer() * (&lcm / w.denom())).to_u64())
                    .collect::<Option<Vec<_>>>()
                    .ok_or_else(|| {
                        Error::InvalidParameter("input weights need a smaller common denominator".into())
                    })?;
                let denom = lcm.to_u128().ok_or_else(|| {
                    Error::InvalidParameter("input weights need a smaller common denominator".into())
                })?;
                (weights, denom)
            }
        };
        let moves = members
            .iter()
            .map(|m| {
                m.edges()
                    .iter()
                    .flat_map(|&edge| (0..n as u32).map(move |b| BobMove { edge, b: Index(b) }))
                    .collect()
            })
            .collect();
        Ok(Self {
            n,
            members,
            weights,
            denom,
            moves,
        })
    }

    #[inline]
    fn weight(&self, x: usize, pos: usize) -> u64 {
        self.weights[x * self.members.len() + pos]
    }

    /// The small-output predicate coincides with this one on every outcome, so
    /// both nonlocal variants share it.
    #[inline]
    fn wins(x: usize, a: Index, mv: &BobMove) -> bool {
        let parity = ((x >> mv.edge.i.value()) ^ (x >> mv.edge.j.value())) & 1;
        a.xor(mv.b).dot(mv.edge.xor()) as usize == parity
    }

    fn inputs(&self) -> usize {
        1 << self.n
    }

    /// Alice's best label for `x` against Bob's table, keeping `current` on ties.
    fn alice_best(&self, x: usize, bob: &[BobMove], current: Option<Index>) -> (Index, u128) {
        let score = |a: Index| -> u128 {
            bob.iter()
                .enumerate()
                .filter(|(_, mv)| Self::wins(x, a, mv))
                .map(|(pos, _)| self.weight(x, pos) as u128)
                .sum()
        };
        let mut best = current.map(|a| (a, score(a)));
        for a in (0..self.n as u32).map(Index) {
            let s = score(a);
            if best.is_none_or(|(_, b)| s > b) {
                best = Some((a, s));
            }
        }
        best.expect("at least one label")
    }

    /// Bob's best move on matching `pos` against Alice's table, keeping
    /// `current` on ties.
    fn bob_best(&self, pos: usize, alice: &[Index], current: Option<BobMove>) -> (BobMove, u128) {
        let score = |mv: &BobMove| -> u128 {
            (0..self.inputs())
                .filter(|&x| Self::wins(x, alice[x], mv))
                .map(|x| self.weight(x, pos) as u128)
                .sum()
        };
        let mut best = current.map(|mv| (mv, score(&mv)));
        for mv in &self.moves[pos] {
            let s = score(mv);
            if best.is_none_or(|(_, b)| s > b) {
                best = Some((*mv, s));
            }
        }
        best.expect("at least one move")
    }

    fn score(&self, alice: &[Index], bob: &[BobMove]) -> u128 {
        (0..self.inputs())
            .map(|x| {
                bob.iter()
                    .enumerate()
                    .filter(|(_, mv)| Self::wins(x, alice[x], mv))
                    .map(|(pos, _)| self.weight(x, pos) as u128)
                    .sum::<u128>()
            })
            .sum()
    }

    fn value(&self, score: u128) -> Rational {
        ratio_u128(score, self.denom)
    }
}

fn result(
    instance: &GameInstance,
    payoff: &Payoff<'_>,
    mode: ValueMode,
    score: u128,
    alice: Vec<Index>,
    bob: Vec<BobMove>,
    stats: SearchStats,
) -> Result<ClassicalValueResult> {
    let value = payoff.value(score);
    let advantage = Rational::from_integer(2.into()) * &value - Rational::one();
    Ok(ClassicalValueResult {
        n: instance.n(),
        variant: instance.variant(),
        family: instance.family().kind(),
        mode,
        value: Quantity::Exact(value),
        advantage: Quantity::Exact(advantage),
        stats,
        witness: DeterministicStrategyPair::new(instance.family().clone(), alice, bob)?,
    })
}

/// Exact classical value by enumerating every Bob table and letting Alice
/// best-respond input by input. Ties keep the first table and the smallest
/// label, so the witness is deterministic.
pub fn brute_force_classical_value(
    instance: &GameInstance,
    caps: &Caps,
) -> Result<ClassicalValueResult> {
    caps::check(
        "brute force n",
        instance.n() as u128,
        caps.brute_force_n as u128,
    )?;
    let payoff = Payoff::new(instance, caps)?;
    let radices: Vec<usize> = payoff.moves.iter().map(Vec::len).collect();
    let tables = radices
        .iter()
        .try_fold(1u128, |acc, &r| acc.checked_mul(r as u128))
        .unwrap_or(u128::MAX);
    caps::check("brute force Bob tables", tables, caps.exact_work)?;
    let mut digits = vec![0usize; radices.len()];
    let mut best: Option<(u128, Vec<usize>)> = None;
    for _ in 0..tables {
        let bob: Vec<BobMove> = digits
            .iter()
            .enumerate()
            .map(|(pos, &d)| payoff.moves[pos][d])
            .collect();
        let score: u128 = (0..payoff.inputs())
            .map(|x| payoff.alice_best(x, &bob, None).1)
            .sum();
        if best.as_ref().is_none_or(|(s, _)| score > *s) {
            best = Some((score, digits.clone()));
        }
        for (d, &r) in digits.iter_mut().zip(&radices) {
            *d += 1;
            if *d < r {
                break;
            }
            *d = 0;
        }
    }
    let (score, digits) = best.expect("at least one table");
    let bob: Vec<BobMove> = digits
        .iter()
        .enumerate()
        .map(|(pos, &d)| payoff.moves[pos][d])
        .collect();
    let alice: Vec<Index> = (0..payoff.inputs())
        .map(|x| payoff.alice_best(x, &bob, None).0)
        .collect();
    let stats = SearchStats {
        bob_tables: Some(tables as u64),
        restarts: None,
        seed: None,
        iterations: 0,
        restart_values: Vec::new(),
        monotone: true,
    };
    result(instance, &payoff, ValueMode::Exact, score, alice, bob, stats)
}

struct Climb {
    score: u128,
    alice: Vec<Index>,
    bob: Vec<BobMove>,
    steps: u64,
    monotone: bool,
}

fn climb(payoff: &Payoff<'_>, mut alice: Vec<Index>, mut bob: Vec<BobMove>) -> Climb {
    let mut score = payoff.score(&alice, &bob);
    let mut steps = 0u64;
    let mut monotone = true;
    loop {
        let mut changed = false;
        for x in 0..payoff.inputs() {
            let (a, _) = payoff.alice_best(x, &bob, Some(alice[x]));
            changed |= a != alice[x];
            alice[x] = a;
        }
        for pos in 0..payoff.members.len() {
            let (mv, _) = payoff.bob_best(pos, &alice, Some(bob[pos]));
            changed |= mv != bob[pos];
            bob[pos] = mv;
        }
        steps += 1;
        let next = payoff.score(&alice, &bob);
        monotone &= next >= score;
        score = next;
        if !changed {
            break;
        }
    }
    Climb {
        score,
        alice,
        bob,
        steps,
        monotone,
    }
}

/// Alternating best response from random starting points. Restart `k` uses
/// stream `k` of `ChaCha8Rng::seed_from_u64(seed)`; restart 0 starts from
/// `initial` when given. Returns the best local optimum as a lower bound.
pub fn local_search_classical_value(
    instance: &GameInstance,
    restarts: u64,
    seed: u64,
    initial: Option<&DeterministicStrategyPair>,
    caps: &Caps,
) -> Result<ClassicalValueResult> {
    if restarts == 0 {
        return Err(Error::InvalidParameter("restarts must be at least 1".into()));
    }
    let payoff = Payoff::new(instance, caps)?;
    if let Some(init) = initial {
        if init.family() != instance.family() {
            return Err(Error::InvalidParameter(
                "initial strategy is for a different family".into(),
            ));
        }
    }
    let climbs = map_range(restarts as usize, |k| {
        let (alice, bob) = match initial {
            Some(init) if k == 0 => (init.alice_table().to_vec(), init.bob_table().to_vec()),
            _ => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(k as u64);
                let alice = (0..payoff.inputs())
                    .map(|_| Index(rng.random_range(0..payoff.n as u32)))
                    .collect();
                let bob = payoff
                    .moves
                    .iter()
                    .map(|mv| mv[rng.random_range(0..mv.len())])
                    .collect();
                (alice, bob)
            }
        };
        climb(&payoff, alice, bob)
    });
    let stats = SearchStats {
        bob_tables: None,
        restarts: Some(restarts),
        seed: Some(seed),
        iterations: climbs.iter().map(|c| c.steps).sum(),
        restart_values: climbs
            .iter()
            .map(|c| Quantity::Exact(payoff.value(c.score)))
            .collect(),
        monotone: climbs.iter().all(|c| c.monotone),
    };
    let best = climbs
        .into_iter()
        .reduce(|a, b| if b.score > a.score { b } else { a })
        .expect("at least one restart");
    result(
        instance,
        &payoff,
        ValueMode::LowerBound,
        best.score,
        best.alice,
        best.bob,
        stats,
    )
}
