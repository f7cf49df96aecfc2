//! Flat CSV views of the reports, one header line followed by data rows.

use super::evaluate::{EvaluationReport, Round};
use super::fourier::FourierReport;
use super::ratio::RatioReport;
use super::search::ClassicalValueResult;
use super::stats::Quantity;
use crate::classical::{ArcsinCheck, EventEstimate};
use crate::rational;

fn field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_owned()
    }
}

fn table(header: &[&str], rows: Vec<Vec<String>>) -> String {
    let mut out = header.join(",");
    out.push('\n');
    for row in rows {
        out.push_str(&row.iter().map(|s| field(s)).collect::<Vec<_>>().join(","));
        out.push('\n');
    }
    out
}

fn opt<T: ToString>(v: &Option<T>) -> String {
    v.as_ref().map(ToString::to_string).unwrap_or_default()
}

fn q(v: &Quantity) -> String {
    v.to_string()
}

fn qf(v: &Quantity) -> String {
    v.to_f64().to_string()
}

/// Reports that render as CSV.
pub trait ToCsv {
    fn to_csv(&self) -> String;
}

pub const EVALUATION_COLUMNS: &[&str] = &[
    "n",
    "variant",
    "family",
    "strategy",
    "mode",
    "winning_probability",
    "winning_probability_f64",
    "advantage",
    "std_error",
    "ci_level",
    "ci_low",
    "ci_high",
    "samples",
    "wins",
    "seed",
    "conditioning",
    "conditioned_on",
];

impl ToCsv for EvaluationReport {
    fn to_csv(&self) -> String {
        let mode = serde_json::to_value(self.mode).expect("enum");
        table(
            EVALUATION_COLUMNS,
            vec![vec![
                self.n.to_string(),
                self.variant.name().to_owned(),
                self.family.name().to_owned(),
                self.strategy.clone(),
                mode.as_str().unwrap_or_default().to_owned(),
                q(&self.winning_probability),
                qf(&self.winning_probability),
                q(&self.advantage),
                opt(&self.std_error),
                opt(&self.ci_level),
                opt(&self.ci_low),
                opt(&self.ci_high),
                opt(&self.samples),
                opt(&self.wins),
                opt(&self.seed),
                opt(&self.conditioning),
                self.conditioned_on.as_ref().map(q).unwrap_or_default(),
            ]],
        )
    }
}

pub const CLASSICAL_VALUE_COLUMNS: &[&str] = &[
    "n",
    "variant",
    "family",
    "mode",
    "value",
    "value_f64",
    "advantage",
    "bob_tables",
    "restarts",
    "seed",
    "iterations",
    "monotone",
];

impl ToCsv for ClassicalValueResult {
    fn to_csv(&self) -> String {
        let mode = serde_json::to_value(self.mode).expect("enum");
        table(
            CLASSICAL_VALUE_COLUMNS,
            vec![vec![
                self.n.to_string(),
                self.variant.name().to_owned(),
                self.family.name().to_owned(),
                mode.as_str().unwrap_or_default().to_owned(),
                q(&self.value),
                qf(&self.value),
                q(&self.advantage),
                opt(&self.stats.bob_tables),
                opt(&self.stats.restarts),
                opt(&self.stats.seed),
                self.stats.iterations.to_string(),
                self.stats.monotone.to_string(),
            ]],
        )
    }
}

pub const FOURIER_COLUMNS: &[&str] = &[
    "n",
    "c",
    "family",
    "strategy",
    "q_mode",
    "message",
    "class_size",
    "p_m",
    "epsilon_m",
    "beta_sq_sum",
    "max_abs_beta",
    "best_guess_bound",
    "cs_lhs",
    "cs_rhs",
    "q_sq_sum",
    "q_max",
    "q_bound",
    "kkl_ratio",
    "best_guess_ok",
    "cauchy_schwarz_ok",
    "q_norm_ok",
];

impl ToCsv for FourierReport {
    fn to_csv(&self) -> String {
        let mode = serde_json::to_value(self.q_mode).expect("enum");
        let rows = self
            .messages
            .iter()
            .map(|m| {
                vec![
                    self.n.to_string(),
                    self.c.to_string(),
                    self.family.name().to_owned(),
                    self.strategy.clone(),
                    mode.as_str().unwrap_or_default().to_owned(),
                    m.message.to_string(),
                    m.class_size.to_string(),
                    rational::to_fraction_string(&m.p_m),
                    q(&m.epsilon_m),
                    rational::to_fraction_string(&m.beta_sq_sum),
                    rational::to_fraction_string(&m.max_abs_beta),
                    q(&m.best_guess_bound),
                    q(&m.cs_lhs),
                    m.cs_rhs.to_string(),
                    q(&m.q_sq_sum),
                    q(&m.q_max),
                    rational::to_fraction_string(&self.q_bound),
                    opt(&m.kkl_ratio),
                    m.checks.best_guess.to_string(),
                    m.checks.cauchy_schwarz.to_string(),
                    m.checks.q_norm.to_string(),
                ]
            })
            .collect();
        table(FOURIER_COLUMNS, rows)
    }
}

pub const RATIO_COLUMNS: &[&str] = &["n", "source", "kind", "value", "value_f64", "advantage"];

impl ToCsv for RatioReport {
    fn to_csv(&self) -> String {
        let rows = std::iter::once(&self.quantum)
            .chain(&self.classical)
            .map(|e| {
                let kind = serde_json::to_value(e.kind).expect("enum");
                vec![
                    self.n.to_string(),
                    e.source.clone(),
                    kind.as_str().unwrap_or_default().to_owned(),
                    q(&e.value),
                    qf(&e.value),
                    q(&e.advantage),
                ]
            })
            .collect();
        table(RATIO_COLUMNS, rows)
    }
}

pub const ARCSIN_COLUMNS: &[&str] = &[
    "pair",
    "inner_product",
    "expected",
    "estimate",
    "std_error",
    "z_score",
    "ci_low",
    "ci_high",
    "within_4_sigma",
];

impl ToCsv for [ArcsinCheck] {
    fn to_csv(&self) -> String {
        let rows = self
            .iter()
            .enumerate()
            .map(|(k, c)| {
                vec![
                    k.to_string(),
                    c.inner_product.to_string(),
                    c.expected.to_string(),
                    c.estimate.to_string(),
                    c.std_error.to_string(),
                    c.z_score.to_string(),
                    c.ci_low.to_string(),
                    c.ci_high.to_string(),
                    c.within_4_sigma.to_string(),
                ]
            })
            .collect();
        table(ARCSIN_COLUMNS, rows)
    }
}

pub const EVENT_COLUMNS: &[&str] = &[
    "n", "c", "exact", "estimate", "std_error", "ci_low", "ci_high", "ci_level", "samples", "seed",
];

impl ToCsv for EventEstimate {
    fn to_csv(&self) -> String {
        table(
            EVENT_COLUMNS,
            vec![vec![
                self.n.to_string(),
                self.c.to_string(),
                self.exact
                    .as_ref()
                    .map(rational::to_fraction_string)
                    .unwrap_or_default(),
                self.estimate.to_string(),
                self.std_error.to_string(),
                self.ci_low.to_string(),
                self.ci_high.to_string(),
                self.ci_level.to_string(),
                self.samples.to_string(),
                opt(&self.seed),
            ]],
        )
    }
}

pub const ROUND_COLUMNS: &[&str] = &["round", "x", "matching", "outcome", "win"];

impl ToCsv for [Round] {
    fn to_csv(&self) -> String {
        let rows = self
            .iter()
            .enumerate()
            .map(|(k, r)| {
                vec![
                    k.to_string(),
                    r.x.to_string(),
                    serde_json::to_string(&r.matching).expect("matching"),
                    serde_json::to_string(&r.outcome).expect("outcome"),
                    r.win.to_string(),
                ]
            })
            .collect();
        table(ROUND_COLUMNS, rows)
    }
}
