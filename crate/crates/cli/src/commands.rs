use std::path::Path;
use std::sync::Arc;

use hidden_matching::analysis::{
    brute_force_classical_value, exact_win_probability, exact_win_probability_given,
    fourier_report, local_search_classical_value, mc_win_probability, mc_win_probability_given,
    ratio_report, simulate_rounds, Condition, EvaluationReport, Player, RatioConfig,
    StrategySpec, ToCsv,
};
use hidden_matching::classical::{
    arcsin_identity_check, comm_from_nonlocal, event_e_probability, fixed_vector_pairs,
    majority_block_protocol, ArcsinCheck, CommProtocol, DeterministicStrategyPair,
    MajorityProtocol,
};
use hidden_matching::games::{GameInstance, GameVariant, InputDistribution};
use hidden_matching::model::{
    enumerate_bijective_xor_matchings, enumerate_matchings, FamilyKind, Matching,
};
use hidden_matching::{Caps, Error};
use num_bigint::BigUint;
use serde::Serialize;

use crate::config::{Command, ConditionArg, GameArgs, ModeArg, RunConfig};
use crate::error::CliError;

/// A finished report in both output formats.
pub struct Report {
    pub json: serde_json::Value,
    pub csv: String,
}

impl Report {
    fn new<T: Serialize + ?Sized, C: ToCsv + ?Sized>(value: &T, csv: &C) -> Self {
        Self {
            json: serde_json::to_value(value).expect("reports serialize"),
            csv: csv.to_csv(),
        }
    }
}

#[derive(Serialize)]
struct MatchingsReport {
    n: usize,
    family: FamilyKind,
    /// Decimal string, since the full count overflows 64 bits from n = 40.
    count: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    matchings: Option<Vec<Matching>>,
}

impl ToCsv for MatchingsReport {
    fn to_csv(&self) -> String {
        match &self.matchings {
            None => format!("n,family,count\n{},{},{}\n", self.n, self.family.name(), self.count),
            Some(list) => {
                let mut out = String::from("index,matching\n");
                for (k, m) in list.iter().enumerate() {
                    let edges: Vec<String> = m.edges().iter().map(|e| format!("{}-{}", e.i.value(), e.j.value())).collect();
                    out.push_str(&format!("{k},{}\n", edges.join(" ")));
                }
                out
            }
        }
    }
}

#[derive(Serialize)]
struct RoundsReport<'a> {
    n: usize,
    variant: GameVariant,
    family: FamilyKind,
    strategy: &'a str,
    seed: u64,
    rounds: &'a [hidden_matching::analysis::Round],
    wins: usize,
}

#[derive(Serialize)]
struct ArcsinReport<'a> {
    samples: u64,
    seed: u64,
    checks: &'a [ArcsinCheck],
    all_within_4_sigma: bool,
}

fn full_count(n: usize) -> BigUint {
    (1..n).rev().step_by(2).map(BigUint::from).product()
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_owned(),
        source,
    })
}

fn parse_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    serde_json::from_str(&read(path)?).map_err(|source| CliError::Json {
        path: path.to_owned(),
        source,
    })
}

fn instance(game: &GameArgs, caps: &Caps) -> Result<GameInstance, CliError> {
    match &game.instance {
        Some(path) => {
            let doc: GameInstance = parse_json(path)?;
            Ok(GameInstance::new(doc.n(), doc.variant(), doc.family().kind(), doc.distribution().clone(), caps)?)
        }
        None => Ok(GameInstance::new(
            game.n,
            game.variant.into(),
            game.family.into(),
            InputDistribution::Uniform,
            caps,
        )?),
    }
}

fn player(spec: &StrategySpec, n: usize) -> Result<Player, CliError> {
    match spec {
        StrategySpec::Table(path) => Ok(Player::from_table_json(&read(Path::new(path))?)?),
        other => Ok(other.build(n)?),
    }
}

fn parse_strategy(s: &str) -> Result<StrategySpec, CliError> {
    StrategySpec::parse(s).map_err(|e| CliError::Usage(e.to_string()))
}

fn majority_of(spec: &StrategySpec, n: usize) -> Result<MajorityProtocol, CliError> {
    match spec {
        StrategySpec::Majority { c, prefix } | StrategySpec::Simulated { c, prefix } => Ok(match prefix {
            Some(p) => MajorityProtocol::with_prefix(n, *p, *c)?,
            None => majority_block_protocol(n, *c)?,
        }),
        _ => Err(CliError::Usage(
            "--condition needs a majority:... or simulated:... strategy".into(),
        )),
    }
}

fn evaluate(
    instance: &GameInstance,
    player: &Player,
    label: &str,
    mode: ModeArg,
    samples: u64,
    condition: Option<&Condition>,
    cfg: &RunConfig,
) -> Result<EvaluationReport, CliError> {
    let exact = || match condition {
        Some(c) => exact_win_probability_given(instance, player, label, &cfg.caps, c),
        None => exact_win_probability(instance, player, label, &cfg.caps),
    };
    let mc = || match condition {
        Some(c) => mc_win_probability_given(instance, player, label, samples, cfg.seed, c),
        None => mc_win_probability(instance, player, label, samples, cfg.seed),
    };
    let report = match mode {
        ModeArg::Exact => exact()?,
        ModeArg::Mc => mc()?,
        ModeArg::Auto => match exact() {
            Err(e) if e.is_cap_exceeded() || e == Error::ContinuousRandomness => mc()?,
            other => other?,
        },
    };
    Ok(report)
}

fn comm_protocol(player: Player) -> Result<Arc<dyn CommProtocol>, CliError> {
    match player {
        Player::Comm(p) => Ok(p),
        Player::Pair(pair) => Ok(Arc::new(comm_from_nonlocal(&pair))),
        _ => Err(CliError::Usage(
            "Fourier diagnostics need a communication protocol (majority:... or a table file)".into(),
        )),
    }
}

pub fn run(command: &Command, cfg: &RunConfig) -> Result<Report, CliError> {
    let caps = &cfg.caps;
    match command {
        Command::Matchings { n, family, count, .. } => {
            let kind = FamilyKind::from(*family);
            let list = match (kind, *count) {
                (FamilyKind::Full, true) => None,
                (FamilyKind::Full, false) => Some(enumerate_matchings(*n, caps.full_matchings_n)?),
                (FamilyKind::BijectiveXor, _) => Some(enumerate_bijective_xor_matchings(*n, caps.bijective_xor_n)?),
            };
            let total = match &list {
                Some(l) => l.len().to_string(),
                None => full_count(*n).to_string(),
            };
            let report = MatchingsReport {
                n: *n,
                family: kind,
                count: total,
                matchings: if *count { None } else { list },
            };
            Ok(Report::new(&report, &report))
        }
        Command::Simulate { game, strategy, rounds } => {
            let inst = instance(game, caps)?;
            let p = player(&parse_strategy(strategy)?, inst.n())?;
            let played = simulate_rounds(&inst, &p, *rounds, cfg.seed)?;
            let report = RoundsReport {
                n: inst.n(),
                variant: inst.variant(),
                family: inst.family().kind(),
                strategy,
                seed: cfg.seed,
                wins: played.iter().filter(|r| r.win).count(),
                rounds: &played,
            };
            Ok(Report::new(&report, played.as_slice()))
        }
        Command::Evaluate { game, strategy, mode, samples, condition } => {
            let inst = instance(game, caps)?;
            let spec = parse_strategy(strategy)?;
            let p = player(&spec, inst.n())?;
            let cond = match condition {
                None => None,
                Some(which) => {
                    let proto = majority_of(&spec, inst.n())?;
                    Some(match which {
                        ConditionArg::EventE => Condition::event_e(&proto),
                        ConditionArg::NotEventE => Condition::not_event_e(&proto),
                    })
                }
            };
            let r = evaluate(&inst, &p, strategy, *mode, *samples, cond.as_ref(), cfg)?;
            Ok(Report::new(&r, &r))
        }
        Command::Bruteforce { game } => {
            let r = brute_force_classical_value(&instance(game, caps)?, caps)?;
            Ok(Report::new(&r, &r))
        }
        Command::Localsearch { game, restarts, init } => {
            let inst = instance(game, caps)?;
            let start = match init {
                Some(path) => Some(DeterministicStrategyPair::from_json(&read(path)?)?),
                None => None,
            };
            let r = local_search_classical_value(&inst, *restarts, cfg.seed, start.as_ref(), caps)?;
            Ok(Report::new(&r, &r))
        }
        Command::Fourier { n, family, strategy, samples } => {
            let inst = GameInstance::new(*n, GameVariant::HmComm, (*family).into(), InputDistribution::Uniform, caps)?;
            let proto = comm_protocol(player(&parse_strategy(strategy)?, *n)?)?;
            let r = fourier_report(&inst, proto, strategy, caps, *samples, cfg.seed)?;
            Ok(Report::new(&r, &r))
        }
        Command::Ratio { n, restarts, samples, quantum_checks } => {
            let config = RatioConfig {
                restarts: *restarts,
                seed: cfg.seed,
                samples: *samples,
                quantum_checks: *quantum_checks,
            };
            let r = ratio_report(*n, &config, caps)?;
            Ok(Report::new(&r, &r))
        }
        Command::RoundingCheck { samples, pairs } => {
            let pairs: Vec<(Vec<f64>, Vec<f64>)> = match pairs {
                Some(path) => parse_json(path)?,
                None => fixed_vector_pairs(),
            };
            let checks = arcsin_identity_check(&pairs, *samples, cfg.seed)?;
            let report = ArcsinReport {
                samples: *samples,
                seed: cfg.seed,
                all_within_4_sigma: checks.iter().all(|c| c.within_4_sigma),
                checks: &checks,
            };
            Ok(Report::new(&report, checks.as_slice()))
        }
        Command::EventE { n, c, samples } => {
            let r = event_e_probability(*n, *c, *samples, cfg.seed)?;
            Ok(Report::new(&r, &r))
        }
    }
}
