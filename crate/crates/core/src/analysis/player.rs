use std::fmt;
use std::sync::Arc;

use rand::RngCore;

use crate::classical::{
    hyperplane_rounding_strategy, majority_block_protocol, nonlocal_from_comm, CommProtocol,
    DeterministicStrategyPair, GrothendieckStrategy, MajorityProtocol, NonlocalStrategy,
    SimulatedStrategy, TableProtocol, UniformRandomStrategy,
};
use crate::error::{Error, Result};
use crate::games::{GameInstance, GameVariant, Outcome};
use crate::model::{Bitstring, Matching};
use crate::quantum::{sample_hm_quantum, sample_hmnl_quantum};

/// Any strategy the evaluators understand.
#[derive(Clone)]
pub enum Player {
    /// The entanglement-based protocol of whichever variant is being played.
    Quantum,
    Comm(Arc<dyn CommProtocol>),
    Simulated(SimulatedStrategy<Arc<dyn CommProtocol>>),
    Pair(DeterministicStrategyPair),
    Random(UniformRandomStrategy),
    Rounding(GrothendieckStrategy),
}

impl fmt::Debug for Player {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Player::Quantum => f.write_str("Quantum"),
            Player::Comm(p) => write!(f, "Comm(n={}, c={})", p.n(), p.message_bits()),
            Player::Simulated(s) => write!(f, "Simulated(c={})", s.protocol().message_bits()),
            Player::Pair(p) => write!(f, "Pair(n={})", p.family().n()),
            Player::Random(r) => write!(f, "Random(n={})", r.n()),
            Player::Rounding(g) => write!(f, "Rounding(n={})", g.n()),
        }
    }
}

impl Player {
    pub fn comm<P: CommProtocol + 'static>(p: P) -> Self {
        Player::Comm(Arc::new(p))
    }

    pub fn simulated<P: CommProtocol + 'static>(p: P) -> Self {
        Player::Simulated(nonlocal_from_comm(Arc::new(p) as Arc<dyn CommProtocol>))
    }

    /// Size the strategy was built for, if it is size-specific.
    pub fn n(&self) -> Option<usize> {
        match self {
            Player::Quantum => None,
            Player::Comm(p) => Some(p.n()),
            Player::Simulated(s) => Some(s.n()),
            Player::Pair(p) => Some(p.n()),
            Player::Random(r) => Some(r.n()),
            Player::Rounding(g) => Some(g.n()),
        }
    }

    /// Whether the strategy answers in the communication game.
    pub fn is_comm(&self) -> bool {
        matches!(self, Player::Comm(_))
    }

    /// Checks that the strategy can play the instance.
    pub fn check(&self, instance: &GameInstance) -> Result<()> {
        if let Some(n) = self.n() {
            if n != instance.n() {
                return Err(Error::LengthMismatch {
                    left: n,
                    right: instance.n(),
                });
            }
        }
        let comm_game = instance.variant() == GameVariant::HmComm;
        if !matches!(self, Player::Quantum) && self.is_comm() != comm_game {
            return Err(Error::InvalidParameter(format!(
                "{self:?} cannot play the {} game",
                instance.variant().name()
            )));
        }
        Ok(())
    }

    /// Plays one round on fixed inputs.
    pub fn play(
        &self,
        instance: &GameInstance,
        x: &Bitstring,
        m: &Matching,
        rng: &mut dyn RngCore,
    ) -> Outcome {
        fn nonlocal<S: NonlocalStrategy>(
            s: &S,
            x: &Bitstring,
            m: &Matching,
            rng: &mut dyn RngCore,
        ) -> Outcome {
            let shared = s.sample_shared(rng);
            let a = s.sample_alice(x, &shared, rng);
            let mv = s.sample_bob(m, &shared, rng);
            Outcome::Nonlocal {
                a,
                edge: mv.edge,
                b: mv.b,
            }
        }
        let raw = match self {
            Player::Quantum => match instance.variant() {
                GameVariant::HmComm => sample_hm_quantum(x, m, rng),
                _ => sample_hmnl_quantum(x, m, rng),
            },
            Player::Comm(p) => {
                let d = p.sample_decision(&p.message(x), m, rng);
                Outcome::Comm {
                    edge: d.edge,
                    v: d.v,
                }
            }
            Player::Simulated(s) => nonlocal(s, x, m, rng),
            Player::Pair(p) => nonlocal(p, x, m, rng),
            Player::Random(r) => nonlocal(r, x, m, rng),
            Player::Rounding(g) => nonlocal(g, x, m, rng),
        };
        match instance.variant() {
            GameVariant::HmNonlocalSmallOutput => raw.to_small_output().unwrap_or(raw),
            _ => raw,
        }
    }

    /// Parses a `table:` file: a `strategy_pair` or a `comm_protocol` document.
    pub fn from_table_json(text: &str) -> Result<Self> {
        let kind = serde_json::from_str::<serde_json::Value>(text)
            .map_err(|e| Error::Parse(e.to_string()))?
            .get("kind")
            .and_then(|k| k.as_str().map(str::to_owned));
        match kind.as_deref() {
            Some("strategy_pair") => Ok(Player::Pair(DeterministicStrategyPair::from_json(text)?)),
            Some("comm_protocol") => Ok(Player::comm(TableProtocol::from_json(text)?)),
            other => Err(Error::Parse(format!(
                "expected kind strategy_pair or comm_protocol, found {other:?}"
            ))),
        }
    }
}

/// A strategy named by the identifier grammar
/// `quantum | random | groth | majority:c=K[,prefix=P] | simulated:c=K[,prefix=P] | table:PATH`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum StrategySpec {
    Quantum,
    Random,
    Groth,
    Majority { c: usize, prefix: Option<usize> },
    Simulated { c: usize, prefix: Option<usize> },
    Table(String),
}

impl StrategySpec {
    pub fn parse(s: &str) -> Result<Self> {
        let s = s.trim();
        let (head, args) = s.split_once(':').unwrap_or((s, ""));
        let bad = || Error::Parse(format!("unknown strategy {s:?}"));
        match head {
            "quantum" | "random" | "groth" if !args.is_empty() => Err(bad()),
            "quantum" => Ok(StrategySpec::Quantum),
            "random" => Ok(StrategySpec::Random),
            "groth" => Ok(StrategySpec::Groth),
            "table" if !args.is_empty() => Ok(StrategySpec::Table(args.to_owned())),
            "majority" | "simulated" => {
                let mut c = None;
                let mut prefix = None;
                for kv in args.split(',').filter(|t| !t.is_empty()) {
                    let (k, v) = kv.split_once('=').ok_or_else(bad)?;
                    let v: usize = v.parse().map_err(|_| bad())?;
                    match k {
                        "c" => c = Some(v),
                        "prefix" => prefix = Some(v),
                        _ => return Err(bad()),
                    }
                }
                let c = c.ok_or_else(|| Error::Parse(format!("{s:?} needs c=K")))?;
                Ok(if head == "majority" {
                    StrategySpec::Majority { c, prefix }
                } else {
                    StrategySpec::Simulated { c, prefix }
                })
            }
            _ => Err(bad()),
        }
    }

    /// Builds the player for size `n`. Table specs must be loaded by the
    /// caller through [`Player::from_table_json`].
    pub fn build(&self, n: usize) -> Result<Player> {
        let majority = |c: usize, prefix: Option<usize>| -> Result<MajorityProtocol> {
            match prefix {
                Some(p) => MajorityProtocol::with_prefix(n, p, c),
                None => majority_block_protocol(n, c),
            }
        };
        match self {
            StrategySpec::Quantum => Ok(Player::Quantum),
            StrategySpec::Random => {
                crate::model::game_log2(n)?;
                Ok(Player::Random(UniformRandomStrategy::new(n)))
            }
            StrategySpec::Groth => Ok(Player::Rounding(hyperplane_rounding_strategy(n)?)),
            StrategySpec::Majority { c, prefix } => Ok(Player::comm(majority(*c, *prefix)?)),
            StrategySpec::Simulated { c, prefix } => Ok(Player::simulated(majority(*c, *prefix)?)),
            StrategySpec::Table(path) => Err(Error::InvalidParameter(format!(
                "table strategy {path:?} must be loaded from its file"
            ))),
        }
    }
}

impl fmt::Display for StrategySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let with_prefix = |f: &mut fmt::Formatter<'_>, head: &str, c: usize, p: &Option<usize>| {
            write!(f, "{head}:c={c}")?;
            if let Some(p) = p {
                write!(f, ",prefix={p}")?;
            }
            Ok(())
        };
        match self {
            StrategySpec::Quantum => f.write_str("quantum"),
            StrategySpec::Random => f.write_str("random"),
            StrategySpec::Groth => f.write_str("groth"),
            StrategySpec::Majority { c, prefix } => with_prefix(f, "majority", *c, prefix),
            StrategySpec::Simulated { c, prefix } => with_prefix(f, "simulated", *c, prefix),
            StrategySpec::Table(p) => write!(f, "table:{p}"),
        }
    }
}
