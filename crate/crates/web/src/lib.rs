//! WebAssembly bindings for the demo page in `www/`.
//!
//! Each export takes plain arguments and returns a JSON string; the `*_json`
//! functions hold the logic so they can be tested natively.

use hidden_matching::analysis::{mc_win_probability, Player, Quantity};
use hidden_matching::classical::{
    arcsin_identity_check, majority_block_protocol, uniform_rounding_advantage,
};
use hidden_matching::games::{GameInstance, GameVariant};
use hidden_matching::model::{Bitstring, FamilyKind, Matching, MatchingFamily};
use hidden_matching::quantum::hmnl_quantum_distribution;
use hidden_matching::rational::{to_f64, to_fraction_string};
use rand::SeedableRng;
use serde::Serialize;
use wasm_bindgen::prelude::*;

#[derive(Serialize)]
struct OutcomeRow {
    a: u32,
    edge: [u32; 2],
    b: u32,
    probability: String,
    wins: bool,
}

#[derive(Serialize)]
struct QuantumView {
    x: String,
    matching: Matching,
    outcomes: Vec<OutcomeRow>,
    win_probability: String,
}

/// Exact outcome distribution of the entangled nonlocal strategy on `(x, M)`.
/// An empty `matching` draws a uniform one from `seed`.
pub fn quantum_outcomes_json(x: &str, matching: &str, seed: u64) -> Result<String, String> {
    let x = Bitstring::parse(x.trim()).map_err(|e| e.to_string())?;
    let n = x.len();
    let m = if matching.trim().is_empty() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        MatchingFamily::new(n, FamilyKind::Full)
            .and_then(|f| f.sample(&mut rng))
            .map_err(|e| e.to_string())?
    } else {
        serde_json::from_str(matching).map_err(|e| format!("matching: {e}"))?
    };
    if m.n() != n {
        return Err(format!("matching is on {} vertices but x has {n} bits", m.n()));
    }
    let game = GameInstance::uniform(n, GameVariant::HmNonlocal, FamilyKind::Full).map_err(|e| e.to_string())?;
    let dist = hmnl_quantum_distribution(&x, &m).map_err(|e| e.to_string())?;
    let outcomes = dist
        .support()
        .iter()
        .filter_map(|w| match w.outcome {
            hidden_matching::games::Outcome::Nonlocal { a, edge, b } => Some(OutcomeRow {
                a: a.0,
                edge: [edge.i.0, edge.j.0],
                b: b.0,
                probability: to_fraction_string(&w.probability),
                wins: hidden_matching::games::hmnl_wins(&x, a, edge, b),
            }),
            _ => None,
        })
        .collect();
    let win = dist.win_probability(&game, &x, &m).map_err(|e| e.to_string())?;
    let view = QuantumView {
        x: x.to_string(),
        matching: m,
        outcomes,
        win_probability: to_fraction_string(&win),
    };
    serde_json::to_string(&view).map_err(|e| e.to_string())
}

#[derive(Serialize)]
struct CurvePoint {
    c: usize,
    winning_probability: f64,
    advantage: f64,
    std_error: f64,
}

/// Monte Carlo advantage of the block-majority protocol for every valid `c`.
pub fn majority_curve_json(n: usize, samples: u64, seed: u64) -> Result<String, String> {
    let game = GameInstance::uniform(n, GameVariant::HmComm, FamilyKind::Full).map_err(|e| e.to_string())?;
    let root = n.isqrt();
    let mut points = Vec::new();
    for c in (1..=root).filter(|c| root % c.max(&2) == 0) {
        let player = Player::comm(majority_block_protocol(n, c).map_err(|e| e.to_string())?);
        let r = mc_win_probability(&game, &player, "majority", samples, seed).map_err(|e| e.to_string())?;
        let p = match &r.winning_probability {
            Quantity::Exact(q) => to_f64(q),
            Quantity::Estimate(p) => *p,
        };
        points.push(CurvePoint {
            c,
            winning_probability: p,
            advantage: r.advantage.to_f64(),
            std_error: r.advantage_std_error().unwrap_or(0.0),
        });
    }
    serde_json::to_string(&points).map_err(|e| e.to_string())
}

#[derive(Serialize)]
struct ArcsinRow {
    inner_product: f64,
    expected: f64,
    estimate: f64,
    z_score: f64,
}

#[derive(Serialize)]
struct ArcsinView {
    rows: Vec<ArcsinRow>,
    rounding_advantage_n16: f64,
}

/// Agreement of random hyperplane signs for unit vectors at the given angles
/// (degrees), against `(2/π)·arcsin⟨u,v⟩`.
pub fn arcsin_check_json(angles: &[f64], samples: u64, seed: u64) -> Result<String, String> {
    let pairs: Vec<(Vec<f64>, Vec<f64>)> = angles
        .iter()
        .map(|deg| {
            let t = deg.to_radians();
            (vec![1.0, 0.0], vec![t.cos(), t.sin()])
        })
        .collect();
    let checks = arcsin_identity_check(&pairs, samples, seed).map_err(|e| e.to_string())?;
    let view = ArcsinView {
        rows: checks
            .iter()
            .map(|c| ArcsinRow {
                inner_product: c.inner_product,
                expected: c.expected,
                estimate: c.estimate,
                z_score: c.z_score,
            })
            .collect(),
        rounding_advantage_n16: uniform_rounding_advantage(16),
    };
    serde_json::to_string(&view).map_err(|e| e.to_string())
}

#[wasm_bindgen]
pub fn quantum_outcomes(x: &str, matching: &str, seed: u64) -> Result<String, JsError> {
    quantum_outcomes_json(x, matching, seed).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn majority_curve(n: usize, samples: u64, seed: u64) -> Result<String, JsError> {
    majority_curve_json(n, samples, seed).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn arcsin_check(angles: &[f64], samples: u64, seed: u64) -> Result<String, JsError> {
    arcsin_check_json(angles, samples, seed).map_err(|e| JsError::new(&e))
}
