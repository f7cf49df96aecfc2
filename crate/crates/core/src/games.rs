//! Game instances, outcomes and win predicates for the three game variants.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::caps::{self, Caps};
use crate::error::{Error, Result};
use crate::model::{game_log2, Bitstring, Edge, FamilyKind, Index, Matching, MatchingFamily};
use crate::rational::{self, ratio_u128, Rational};
use num_traits::{One, Signed, Zero};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum GameVariant {
    /// One-way communication: Bob outputs an edge and a parity bit `v`.
    #[serde(rename = "hm")]
    HmComm,
    /// Nonlocal: Alice outputs `a`, Bob an edge and `b`, both `log n` bits.
    #[serde(rename = "hmnl")]
    HmNonlocal,
    /// Nonlocal with Bob reporting `i ⊕ j` and the single bit `w = b·(i ⊕ j)`.
    #[serde(rename = "hmnl_small")]
    HmNonlocalSmallOutput,
}

impl GameVariant {
    pub fn name(self) -> &'static str {
        match self {
            GameVariant::HmComm => "hm",
            GameVariant::HmNonlocal => "hmnl",
            GameVariant::HmNonlocalSmallOutput => "hmnl_small",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "hm" | "hm-comm" => Ok(GameVariant::HmComm),
            "hmnl" | "nonlocal" => Ok(GameVariant::HmNonlocal),
            "hmnl_small" | "hmnl-small" => Ok(GameVariant::HmNonlocalSmallOutput),
            other => Err(Error::Parse(format!("unknown game variant {other:?}"))),
        }
    }
}

/// One round's outputs.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Outcome {
    Comm { edge: Edge, v: u8 },
    Nonlocal { a: Index, edge: Edge, b: Index },
    SmallOutput { a: Index, s: Index, w: u8 },
}

impl Outcome {
    pub fn variant(&self) -> GameVariant {
        match self {
            Outcome::Comm { .. } => GameVariant::HmComm,
            Outcome::Nonlocal { .. } => GameVariant::HmNonlocal,
            Outcome::SmallOutput { .. } => GameVariant::HmNonlocalSmallOutput,
        }
    }

    /// Rewrites a nonlocal outcome `(a, (i,j), b)` as `(a, i⊕j, b·(i⊕j))`.
    pub fn to_small_output(self) -> Option<Outcome> {
        match self {
            Outcome::Nonlocal { a, edge, b } => {
                let s = edge.xor();
                Some(Outcome::SmallOutput { a, s, w: b.dot(s) })
            }
            _ => None,
        }
    }
}

#[inline]
fn parity(x: &Bitstring, e: Edge) -> u8 {
    x.get(e.i.value()) ^ x.get(e.j.value())
}

/// `v = x_i ⊕ x_j`.
#[inline]
pub fn hm_wins(x: &Bitstring, edge: Edge, v: u8) -> bool {
    v == parity(x, edge)
}

/// `(a ⊕ b)·(i ⊕ j) = x_i ⊕ x_j`.
#[inline]
pub fn hmnl_wins(x: &Bitstring, a: Index, edge: Edge, b: Index) -> bool {
    a.xor(b).dot(edge.xor()) == parity(x, edge)
}

/// `a·(i ⊕ j) = x_i ⊕ x_j ⊕ w`, where `edge` is the edge reported via its XOR.
#[inline]
pub fn small_output_wins(x: &Bitstring, a: Index, edge: Edge, w: u8) -> bool {
    a.dot(edge.xor()) == parity(x, edge) ^ w
}

/// Checks the outcome against the variant's winning condition.
pub fn win_predicate(
    instance: &GameInstance,
    x: &Bitstring,
    m: &Matching,
    out: &Outcome,
) -> Result<bool> {
    let n = instance.n();
    if x.len() != n {
        return Err(Error::LengthMismatch { left: x.len(), right: n });
    }
    if m.n() != n {
        return Err(Error::LengthMismatch { left: m.n(), right: n });
    }
    if out.variant() != instance.variant() {
        return Err(Error::MalformedOutcome(format!(
            "{:?} outcome for a {} game",
            out.variant(),
            instance.variant().name()
        )));
    }
    let in_range = |v: Index| v.value() < n;
    let bit = |v: u8| v <= 1;
    let edge_in_m = |e: Edge| {
        if m.contains(e) {
            Ok(())
        } else {
            Err(Error::MalformedOutcome(format!("edge {e:?} is not in the matching")))
        }
    };
    match *out {
        Outcome::Comm { edge, v } => {
            edge_in_m(edge)?;
            if !bit(v) {
                return Err(Error::MalformedOutcome(format!("v = {v} is not a bit")));
            }
            Ok(hm_wins(x, edge, v))
        }
        Outcome::Nonlocal { a, edge, b } => {
            edge_in_m(edge)?;
            if !in_range(a) || !in_range(b) {
                return Err(Error::MalformedOutcome(format!(
                    "a = {a}, b = {b} must have {} bits",
                    instance.log_n()
                )));
            }
            Ok(hmnl_wins(x, a, edge, b))
        }
        Outcome::SmallOutput { a, s, w } => {
            if !in_range(a) || !in_range(s) || !bit(w) {
                return Err(Error::MalformedOutcome(format!("a = {a}, s = {s}, w = {w}")));
            }
            let edge = m.edge_with_xor(s).ok_or_else(|| {
                Error::MalformedOutcome(format!("no edge of the matching has XOR {s}"))
            })?;
            Ok(small_output_wins(x, a, edge, w))
        }
    }
}

/// `2p − 1`.
pub fn advantage_from_probability(p: &Rational) -> Result<Rational> {
    if !rational::is_probability(p) {
        return Err(Error::InvalidParameter(format!(
            "{} is not a probability",
            rational::to_fraction_string(p)
        )));
    }
    Ok(p * Rational::from_integer(2.into()) - Rational::one())
}

pub fn advantage_from_probability_f64(p: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidParameter(format!("{p} is not a probability")));
    }
    Ok(2.0 * p - 1.0)
}

/// A weight `π(x, M)` on one input pair.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TableEntry {
    pub x: Bitstring,
    pub matching: Matching,
    #[serde(with = "rational::serde_fraction")]
    pub weight: Rational,
}

/// Input distribution `π` over `(x, M)`.
#[derive(Clone, Debug, PartialEq)]
pub enum InputDistribution {
    Uniform,
    /// Exact weights; pairs not listed have weight zero.
    Table(Vec<TableEntry>),
}

#[derive(Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
enum DistributionDoc {
    Uniform,
    Table(Vec<TableEntry>),
}

/// A fully specified game: size, variant, matching family and input
/// distribution. Serializes as `{n, variant, family, distribution}`.
#[derive(Clone, Debug)]
pub struct GameInstance {
    n: usize,
    log_n: u32,
    variant: GameVariant,
    family: MatchingFamily,
    distribution: InputDistribution,
    // Dense weights for table distributions, indexed by x * |family| + position.
    dense: Option<Vec<Rational>>,
}

impl GameInstance {
    pub fn uniform(n: usize, variant: GameVariant, kind: FamilyKind) -> Result<Self> {
        Self::new(n, variant, kind, InputDistribution::Uniform, &Caps::default())
    }

    pub fn new(
        n: usize,
        variant: GameVariant,
        kind: FamilyKind,
        distribution: InputDistribution,
        caps: &Caps,
    ) -> Result<Self> {
        let log_n = game_log2(n)?;
        if variant == GameVariant::HmNonlocalSmallOutput && kind != FamilyKind::BijectiveXor {
            return Err(Error::InvalidParameter(
                "the small-output game needs the bijective_xor family".into(),
            ));
        }
        let family = MatchingFamily::with_caps(n, kind, caps)?;
        let dense = match &distribution {
            InputDistribution::Uniform => None,
            InputDistribution::Table(entries) => {
                Some(dense_table(n, &family, entries, caps)?)
            }
        };
        Ok(Self {
            n,
            log_n,
            variant,
            family,
            distribution,
            dense,
        })
    }

    pub fn with_variant(&self, variant: GameVariant) -> Result<Self> {
        if variant == GameVariant::HmNonlocalSmallOutput
            && self.family.kind() != FamilyKind::BijectiveXor
        {
            return Err(Error::InvalidParameter(
                "the small-output game needs the bijective_xor family".into(),
            ));
        }
        Ok(Self {
            variant,
            ..self.clone()
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn log_n(&self) -> u32 {
        self.log_n
    }

    pub fn variant(&self) -> GameVariant {
        self.variant
    }

    pub fn family(&self) -> &MatchingFamily {
        &self.family
    }

    pub fn distribution(&self) -> &InputDistribution {
        &self.distribution
    }

    pub fn is_uniform(&self) -> bool {
        matches!(self.distribution, InputDistribution::Uniform)
    }

    /// Number of `(x, M)` pairs, saturating.
    pub fn input_pairs(&self) -> u128 {
        (1u128 << self.n.min(127)).saturating_mul(self.family.cardinality())
    }

    /// `π(x, M)` for the matching at `position` in the family.
    pub fn weight(&self, x: &Bitstring, position: usize) -> Rational {
        match &self.dense {
            None => ratio_u128(1, self.input_pairs()),
            Some(w) => w[x.bits() as usize * self.family.cardinality() as usize + position]
                .clone(),
        }
    }

    /// Draws `(x, M) ~ π`.
    pub fn sample_inputs<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<(Bitstring, Matching)> {
        match &self.distribution {
            InputDistribution::Uniform => {
                Ok((Bitstring::random(self.n, rng), self.family.sample(rng)?))
            }
            InputDistribution::Table(entries) => {
                let mut u: f64 = rng.random();
                for e in entries {
                    u -= rational::to_f64(&e.weight);
                    if u < 0.0 {
                        return Ok((e.x, e.matching.clone()));
                    }
                }
                let last = entries
                    .iter()
                    .rev()
                    .find(|e| !e.weight.is_zero())
                    .expect("table has positive mass");
                Ok((last.x, last.matching.clone()))
            }
        }
    }
}

fn dense_table(
    n: usize,
    family: &MatchingFamily,
    entries: &[TableEntry],
    caps: &Caps,
) -> Result<Vec<Rational>> {
    let size = (1u128 << n.min(127)).saturating_mul(family.cardinality());
    caps::check("explicit input table (x, M) pairs", size, caps.explicit_table_pairs)?;
    let mut dense = vec![Rational::zero(); size as usize];
    let mut total = Rational::zero();
    for e in entries {
        if e.weight.is_negative() {
            return Err(Error::InvalidDistribution(format!(
                "negative weight for x = {}",
                e.x
            )));
        }
        if e.x.len() != n {
            return Err(Error::LengthMismatch { left: e.x.len(), right: n });
        }
        let pos = family.position(&e.matching).ok_or_else(|| {
            Error::InvalidDistribution(format!(
                "matching {:?} is not in the {} family",
                e.matching,
                family.kind().name()
            ))
        })?;
        let slot = &mut dense[e.x.bits() as usize * family.cardinality() as usize + pos];
        *slot += &e.weight;
        total += &e.weight;
    }
    if !total.is_one() {
        return Err(Error::InvalidDistribution(format!(
            "weights sum to {}, not 1",
            rational::to_fraction_string(&total)
        )));
    }
    Ok(dense)
}

#[derive(Serialize, Deserialize)]
struct GameDocument {
    n: usize,
    variant: GameVariant,
    family: FamilyKind,
    #[serde(default = "uniform_doc")]
    distribution: DistributionDoc,
}

fn uniform_doc() -> DistributionDoc {
    DistributionDoc::Uniform
}

impl Serialize for GameInstance {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        GameDocument {
            n: self.n,
            variant: self.variant,
            family: self.family.kind(),
            distribution: match &self.distribution {
                InputDistribution::Uniform => DistributionDoc::Uniform,
                InputDistribution::Table(t) => DistributionDoc::Table(t.clone()),
            },
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for GameInstance {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let doc = GameDocument::deserialize(d)?;
        let distribution = match doc.distribution {
            DistributionDoc::Uniform => InputDistribution::Uniform,
            DistributionDoc::Table(t) => InputDistribution::Table(t),
        };
        GameInstance::new(doc.n, doc.variant, doc.family, distribution, &Caps::default())
            .map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::enumerate_bijective_xor_matchings;
    use crate::rational::ratio;

    fn x(s: &str) -> Bitstring {
        Bitstring::parse(s).unwrap()
    }

    #[test]
    fn comm_predicate() {
        let g = GameInstance::uniform(4, GameVariant::HmComm, FamilyKind::Full).unwrap();
        let m = Matching::from_pairs(4, &[(0, 1), (2, 3)]).unwrap();
        let out = Outcome::Comm { edge: (0, 1).into(), v: 0 };
        assert!(win_predicate(&g, &x("0000"), &m, &out).unwrap());
        let out = Outcome::Comm { edge: (2, 3).into(), v: 0 };
        assert!(!win_predicate(&g, &x("0001"), &m, &out).unwrap());
        let bad = Outcome::Comm { edge: (0, 2).into(), v: 0 };
        assert!(matches!(
            win_predicate(&g, &x("0000"), &m, &bad),
            Err(Error::MalformedOutcome(_))
        ));
    }

    #[test]
    fn nonlocal_predicate() {
        let g = GameInstance::uniform(2, GameVariant::HmNonlocal, FamilyKind::Full).unwrap();
        let m = Matching::from_pairs(2, &[(0, 1)]).unwrap();
        let out = Outcome::Nonlocal { a: Index(0), edge: (0, 1).into(), b: Index(1) };
        assert!(win_predicate(&g, &x("01"), &m, &out).unwrap());
        let big = Outcome::Nonlocal { a: Index(2), edge: (0, 1).into(), b: Index(1) };
        assert!(win_predicate(&g, &x("01"), &m, &big).is_err());
        let wrong = Outcome::Comm { edge: (0, 1).into(), v: 1 };
        assert!(win_predicate(&g, &x("01"), &m, &wrong).is_err());
    }

    #[test]
    fn equal_outputs_lose_on_odd_parity() {
        let g = GameInstance::uniform(8, GameVariant::HmNonlocal, FamilyKind::Full).unwrap();
        for m in g.family().members().unwrap().iter().step_by(7) {
            for xs in Bitstring::all(8).step_by(5) {
                for e in m.edges() {
                    if xs.get(e.i.value()) ^ xs.get(e.j.value()) == 1 {
                        for a in 0..8 {
                            let out = Outcome::Nonlocal { a: Index(a), edge: *e, b: Index(a) };
                            assert!(!win_predicate(&g, &xs, m, &out).unwrap());
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn predicate_ignores_endpoint_order() {
        let xs = x("0110");
        for (a, b) in [(0, 2), (1, 3)] {
            let e1 = Edge::new(Index(a), Index(b)).unwrap();
            let e2 = Edge::new(Index(b), Index(a)).unwrap();
            assert_eq!(e1, e2);
            for bb in 0..4 {
                assert_eq!(
                    hmnl_wins(&xs, Index(1), e1, Index(bb)),
                    hmnl_wins(&xs, Index(1), e2, Index(bb))
                );
            }
        }
    }

    #[test]
    fn small_output_matches_nonlocal_on_bijective_family() {
        let g = GameInstance::uniform(8, GameVariant::HmNonlocalSmallOutput, FamilyKind::BijectiveXor)
            .unwrap();
        let gnl = g.with_variant(GameVariant::HmNonlocal).unwrap();
        for m in enumerate_bijective_xor_matchings(8, 16).unwrap() {
            for xs in Bitstring::all(8) {
                for e in m.edges() {
                    for a in 0..8 {
                        for b in 0..8 {
                            let nl = Outcome::Nonlocal { a: Index(a), edge: *e, b: Index(b) };
                            let small = nl.to_small_output().unwrap();
                            assert_eq!(
                                win_predicate(&gnl, &xs, &m, &nl).unwrap(),
                                win_predicate(&g, &xs, &m, &small).unwrap()
                            );
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn small_output_rejects_foreign_xor() {
        let g = GameInstance::uniform(8, GameVariant::HmNonlocalSmallOutput, FamilyKind::BijectiveXor)
            .unwrap();
        let m = g.family().members().unwrap()[0].clone();
        let out = Outcome::SmallOutput { a: Index(0), s: Index(1), w: 0 };
        assert!(win_predicate(&g, &x("00000000"), &m, &out).is_err());
    }

    #[test]
    fn small_output_needs_bijective_family() {
        assert!(GameInstance::uniform(8, GameVariant::HmNonlocalSmallOutput, FamilyKind::Full).is_err());
    }

    #[test]
    fn advantage() {
        assert_eq!(advantage_from_probability(&ratio(1, 1)).unwrap(), ratio(1, 1));
        assert_eq!(advantage_from_probability(&ratio(1, 2)).unwrap(), ratio(0, 1));
        assert_eq!(advantage_from_probability(&ratio(3, 4)).unwrap(), ratio(1, 2));
        assert!(advantage_from_probability(&ratio(5, 4)).is_err());
        assert!(advantage_from_probability(&ratio(-1, 4)).is_err());
        assert_eq!(advantage_from_probability_f64(0.25).unwrap(), -0.5);
    }

    #[test]
    fn table_distribution_validation() {
        let m = Matching::from_pairs(2, &[(0, 1)]).unwrap();
        let entry = |xs: &str, w| TableEntry { x: x(xs), matching: m.clone(), weight: w };
        let ok = InputDistribution::Table(vec![entry("01", ratio(1, 4)), entry("10", ratio(3, 4))]);
        let g = GameInstance::new(2, GameVariant::HmNonlocal, FamilyKind::Full, ok, &Caps::default())
            .unwrap();
        assert_eq!(g.weight(&x("10"), 0), ratio(3, 4));
        assert_eq!(g.weight(&x("00"), 0), ratio(0, 1));

        let short = InputDistribution::Table(vec![entry("01", ratio(1, 4))]);
        assert!(GameInstance::new(2, GameVariant::HmNonlocal, FamilyKind::Full, short, &Caps::default()).is_err());
        let negative =
            InputDistribution::Table(vec![entry("01", ratio(-1, 4)), entry("10", ratio(5, 4))]);
        assert!(GameInstance::new(2, GameVariant::HmNonlocal, FamilyKind::Full, negative, &Caps::default()).is_err());
        let too_big = InputDistribution::Table(vec![]);
        assert!(GameInstance::new(16, GameVariant::HmNonlocal, FamilyKind::Full, too_big, &Caps::default())
            .unwrap_err()
            .is_cap_exceeded());
    }

    #[test]
    fn json_document() {
        let g = GameInstance::uniform(4, GameVariant::HmNonlocal, FamilyKind::Full).unwrap();
        let s = serde_json::to_string(&g).unwrap();
        assert_eq!(s, r#"{"n":4,"variant":"hmnl","family":"full","distribution":"uniform"}"#);
        let back: GameInstance = serde_json::from_str(&s).unwrap();
        assert_eq!(back.n(), 4);

        let doc = r#"{"n":2,"variant":"hm","family":"full",
            "distribution":{"table":[{"x":"01","matching":[[0,1]],"weight":"1/1"}]}}"#;
        let g: GameInstance = serde_json::from_str(doc).unwrap();
        assert_eq!(g.weight(&x("01"), 0), ratio(1, 1));
        assert!(serde_json::from_str::<GameInstance>(r#"{"n":6,"variant":"hm","family":"full"}"#).is_err());
    }
}
