//! Evaluation, classical-value search, Fourier diagnostics and reports.

mod csv;
mod evaluate;
mod fourier;
mod player;
mod ratio;
mod search;
mod stats;

pub use csv::{
    ToCsv, ARCSIN_COLUMNS, CLASSICAL_VALUE_COLUMNS, EVALUATION_COLUMNS, EVENT_COLUMNS,
    FOURIER_COLUMNS, RATIO_COLUMNS, ROUND_COLUMNS,
};
pub use evaluate::{
    exact_win_probability, exact_win_probability_given, mc_win_probability,
    mc_win_probability_given, simulate_rounds, Condition, EvaluationMode, EvaluationReport, Round,
};
pub use fourier::{
    fourier_report, FourierChecks, FourierReport, MessageChecks, MessageRecord, ENTROPY_SLACK,
};
pub use player::{Player, StrategySpec};
pub use ratio::{ratio_report, BoundKind, RatioConfig, RatioReport, ValueEntry};
pub use search::{
    brute_force_classical_value, local_search_classical_value, ClassicalValueResult, SearchStats,
    ValueMode,
};
pub use stats::{entropy, run_batches, wilson_interval, Quantity, BATCH_SIZE, CI_LEVEL, Z_99};
