use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use hidden_matching::games::GameVariant;
use hidden_matching::model::{game_log2, FamilyKind};
use hidden_matching::Caps;

use crate::error::CliError;

/// Seed used when `--seed` is not given.
pub const DEFAULT_SEED: u64 = 0;

/// Directory that receives reports when `--output` is not given.
pub const OUTPUT_DIR_ENV: &str = "HM_OUTPUT_DIR";

#[derive(Parser, Debug)]
#[command(name = "hm", version, about = "Hidden Matching games: enumeration, simulation, evaluation and diagnostics")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    #[command(flatten)]
    pub common: Common,
}

#[derive(Args, Debug, Clone)]
pub struct Common {
    /// RNG seed, or `random` to draw one from the operating system.
    #[arg(long, global = true, default_value_t = SeedArg::Fixed(DEFAULT_SEED))]
    pub seed: SeedArg,

    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,

    /// Report file. Defaults to stdout, or to a file under $HM_OUTPUT_DIR when set.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,

    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    /// Add a metadata block (tool version, creation time) to JSON output.
    #[arg(long, global = true)]
    pub metadata: bool,

    #[command(flatten)]
    pub caps: CapArgs,
}

#[derive(Args, Debug, Clone, Default)]
pub struct CapArgs {
    #[arg(long, global = true)]
    pub cap_full_matchings_n: Option<usize>,
    #[arg(long, global = true)]
    pub cap_bijective_xor_n: Option<usize>,
    #[arg(long, global = true)]
    pub cap_exact_work: Option<u128>,
    #[arg(long, global = true)]
    pub cap_explicit_table_pairs: Option<u128>,
    #[arg(long, global = true)]
    pub cap_beta_n: Option<usize>,
    #[arg(long, global = true)]
    pub cap_brute_force_n: Option<usize>,
}

impl CapArgs {
    pub fn apply(&self) -> Caps {
        let d = Caps::default();
        Caps {
            full_matchings_n: self.cap_full_matchings_n.unwrap_or(d.full_matchings_n),
            bijective_xor_n: self.cap_bijective_xor_n.unwrap_or(d.bijective_xor_n),
            exact_work: self.cap_exact_work.unwrap_or(d.exact_work),
            explicit_table_pairs: self.cap_explicit_table_pairs.unwrap_or(d.explicit_table_pairs),
            beta_n: self.cap_beta_n.unwrap_or(d.beta_n),
            brute_force_n: self.cap_brute_force_n.unwrap_or(d.brute_force_n),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SeedArg {
    Fixed(u64),
    Random,
}

impl std::str::FromStr for SeedArg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "random" {
            return Ok(SeedArg::Random);
        }
        s.parse()
            .map(SeedArg::Fixed)
            .map_err(|_| format!("expected an unsigned integer or `random`, got {s:?}"))
    }
}

impl std::fmt::Display for SeedArg {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SeedArg::Fixed(s) => write!(f, "{s}"),
            SeedArg::Random => f.write_str("random"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Json => "json",
            Format::Csv => "csv",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum VariantArg {
    Hm,
    Hmnl,
    HmnlSmall,
}

impl From<VariantArg> for GameVariant {
    fn from(v: VariantArg) -> Self {
        match v {
            VariantArg::Hm => GameVariant::HmComm,
            VariantArg::Hmnl => GameVariant::HmNonlocal,
            VariantArg::HmnlSmall => GameVariant::HmNonlocalSmallOutput,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum FamilyArg {
    Full,
    BijectiveXor,
}

impl From<FamilyArg> for FamilyKind {
    fn from(f: FamilyArg) -> Self {
        match f {
            FamilyArg::Full => FamilyKind::Full,
            FamilyArg::BijectiveXor => FamilyKind::BijectiveXor,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    /// Exact when enumeration fits the caps, Monte Carlo otherwise.
    Auto,
    Exact,
    Mc,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ConditionArg {
    EventE,
    NotEventE,
}

/// Game selection shared by the commands that play a game.
#[derive(Args, Debug, Clone)]
pub struct GameArgs {
    #[arg(long, default_value_t = 4)]
    pub n: usize,
    #[arg(long, value_enum, default_value_t = VariantArg::Hmnl)]
    pub variant: VariantArg,
    #[arg(long, value_enum, default_value_t = FamilyArg::Full)]
    pub family: FamilyArg,
    /// Game instance JSON (`{n, variant, family, distribution}`); overrides the flags above.
    #[arg(long)]
    pub instance: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Count or list the perfect matchings of a family.
    Matchings {
        #[arg(long)]
        n: usize,
        #[arg(long, value_enum, default_value_t = FamilyArg::Full)]
        family: FamilyArg,
        /// Report only the number of matchings.
        #[arg(long, conflicts_with = "enumerate")]
        count: bool,
        /// List every matching (the default unless --count).
        #[arg(long)]
        enumerate: bool,
    },
    /// Play sample rounds of a strategy and print each one.
    Simulate {
        #[command(flatten)]
        game: GameArgs,
        #[arg(long, default_value = "quantum")]
        strategy: String,
        #[arg(long, default_value_t = 10)]
        rounds: u64,
    },
    /// Winning probability of a strategy, exactly or by Monte Carlo.
    Evaluate {
        #[command(flatten)]
        game: GameArgs,
        #[arg(long)]
        strategy: String,
        #[arg(long, value_enum, default_value_t = ModeArg::Auto)]
        mode: ModeArg,
        #[arg(long, default_value_t = 100_000)]
        samples: u64,
        /// Restrict to matchings on which the majority protocol's event does (not) hold.
        #[arg(long, value_enum)]
        condition: Option<ConditionArg>,
    },
    /// Exact classical value by exhaustive search over deterministic strategies.
    Bruteforce {
        #[command(flatten)]
        game: GameArgs,
    },
    /// Lower bound on the classical value by alternating best response.
    Localsearch {
        #[command(flatten)]
        game: GameArgs,
        #[arg(long, default_value_t = 20)]
        restarts: u64,
        /// Strategy pair JSON used as the first starting point.
        #[arg(long)]
        init: Option<PathBuf>,
    },
    /// Fourier diagnostics of a communication protocol.
    Fourier {
        #[arg(long)]
        n: usize,
        #[arg(long, value_enum, default_value_t = FamilyArg::Full)]
        family: FamilyArg,
        /// `majority:c=K[,prefix=P]` or `table:PATH`.
        #[arg(long)]
        strategy: String,
        /// Monte Carlo samples when the family cannot be enumerated.
        #[arg(long, default_value_t = 100_000)]
        samples: u64,
    },
    /// Quantum versus best known classical value on the nonlocal game.
    Ratio {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 20)]
        restarts: u64,
        #[arg(long, default_value_t = 100_000)]
        samples: u64,
        #[arg(long, default_value_t = 1000)]
        quantum_checks: u64,
    },
    /// Monte Carlo check of Pr[sign⟨g,u⟩ = sign⟨g,v⟩] against the arcsine formula.
    RoundingCheck {
        #[arg(long, default_value_t = 1_000_000)]
        samples: u64,
        /// JSON list of `[u, v]` vector pairs (default: the built-in fixed pairs).
        #[arg(long)]
        pairs: Option<PathBuf>,
    },
    /// Probability that a uniform matching has many edges across majority blocks.
    EventE {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        c: usize,
        #[arg(long, default_value_t = 1_000_000)]
        samples: u64,
    },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Matchings { .. } => "matchings",
            Command::Simulate { .. } => "simulate",
            Command::Evaluate { .. } => "evaluate",
            Command::Bruteforce { .. } => "bruteforce",
            Command::Localsearch { .. } => "localsearch",
            Command::Fourier { .. } => "fourier",
            Command::Ratio { .. } => "ratio",
            Command::RoundingCheck { .. } => "rounding-check",
            Command::EventE { .. } => "event-e",
        }
    }

    fn n(&self) -> Option<usize> {
        match self {
            Command::Matchings { n, .. }
            | Command::Fourier { n, .. }
            | Command::Ratio { n, .. }
            | Command::EventE { n, .. } => Some(*n),
            Command::Simulate { game, .. }
            | Command::Evaluate { game, .. }
            | Command::Bruteforce { game }
            | Command::Localsearch { game, .. } if game.instance.is_none() => Some(game.n),
            _ => None,
        }
    }

    fn is_stochastic(&self) -> bool {
        !matches!(self, Command::Matchings { .. } | Command::Bruteforce { .. })
    }
}

/// Everything a command needs after flag parsing and validation.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub command: &'static str,
    pub n: Option<usize>,
    pub seed: u64,
    pub seed_was_random: bool,
    pub stochastic: bool,
    pub format: Format,
    pub output: Option<PathBuf>,
    pub metadata: bool,
    pub caps: Caps,
}

impl RunConfig {
    pub fn new(command: &Command, common: &Common) -> Result<Self, CliError> {
        let n = command.n();
        if let Some(n) = n {
            if !matches!(command, Command::Matchings { .. }) {
                game_log2(n).map_err(|e| CliError::Usage(e.to_string()))?;
            } else if n % 2 != 0 || n == 0 {
                return Err(CliError::Usage(format!("n = {n} must be a positive even number")));
            }
        }
        if common.threads == Some(0) {
            return Err(CliError::Usage("--threads must be at least 1".into()));
        }
        let (seed, seed_was_random) = match common.seed {
            SeedArg::Fixed(s) => (s, false),
            SeedArg::Random => (entropy_seed()?, true),
        };
        let output = common.output.clone().or_else(|| {
            std::env::var_os(OUTPUT_DIR_ENV).map(|dir| {
                let mut name = command.name().to_owned();
                if let Some(n) = n {
                    name.push_str(&format!("-n{n}"));
                }
                PathBuf::from(dir).join(format!("{name}.{}", common.format.extension()))
            })
        });
        Ok(Self {
            command: command.name(),
            n,
            seed,
            seed_was_random,
            stochastic: command.is_stochastic(),
            format: common.format,
            output,
            metadata: common.metadata,
            caps: common.caps.apply(),
        })
    }
}

fn entropy_seed() -> Result<u64, CliError> {
    use rand::TryRngCore;
    rand::rngs::OsRng
        .try_next_u64()
        .map_err(|e| CliError::Other(format!("cannot read OS entropy: {e}")))
}
