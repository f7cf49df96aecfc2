use rand::{Rng, RngCore};
use serde::{Deserialize, Serialize};

use super::{BobMove, CommProtocol, Decision, NonlocalStrategy};
use crate::caps::{self, Caps};
use crate::error::{Error, Result};
use crate::model::{game_log2, Bitstring, Edge, FamilyKind, Index, Matching, MatchingFamily};

fn listed_family(n: usize, kind: FamilyKind, caps: &Caps) -> Result<MatchingFamily> {
    game_log2(n)?;
    let family = MatchingFamily::with_caps(n, kind, caps)?;
    let members = family.members()?;
    if members.is_empty() {
        return Err(Error::EmptyFamily(kind.name()));
    }
    caps::check(
        "input table size 2^n",
        1u128 << n,
        caps.explicit_table_pairs,
    )?;
    Ok(family)
}

/// A deterministic nonlocal strategy given by full tables: Alice's label for
/// every `x`, Bob's move for every matching of the family.
#[derive(Clone, Debug, PartialEq)]
pub struct DeterministicStrategyPair {
    family: MatchingFamily,
    alice: Vec<Index>,
    bob: Vec<BobMove>,
}

impl DeterministicStrategyPair {
    /// `alice` is indexed by the packed value of `x`, `bob` by family position.
    pub fn new(family: MatchingFamily, alice: Vec<Index>, bob: Vec<BobMove>) -> Result<Self> {
        let n = family.n();
        let members = family.members()?;
        if alice.len() != 1usize << n {
            return Err(Error::InvalidProtocol(format!(
                "Alice table has {} rows, expected 2^{n}",
                alice.len()
            )));
        }
        if bob.len() != members.len() {
            return Err(Error::InvalidProtocol(format!(
                "Bob table has {} rows for {} matchings",
                bob.len(),
                members.len()
            )));
        }
        if let Some(a) = alice.iter().find(|a| a.value() >= n) {
            return Err(Error::InvalidProtocol(format!("label {a} out of range")));
        }
        for (m, mv) in members.iter().zip(&bob) {
            if !m.contains(mv.edge) || mv.b.value() >= n {
                return Err(Error::InvalidProtocol(format!(
                    "move {mv:?} is invalid for {m:?}"
                )));
            }
        }
        Ok(Self { family, alice, bob })
    }

    /// Independent uniform rows.
    pub fn random<R: Rng + ?Sized>(
        n: usize,
        kind: FamilyKind,
        caps: &Caps,
        rng: &mut R,
    ) -> Result<Self> {
        let family = listed_family(n, kind, caps)?;
        let alice = (0..1usize << n)
            .map(|_| Index(rng.random_range(0..n as u32)))
            .collect();
        let bob = family
            .members()?
            .iter()
            .map(|m| BobMove {
                edge: m.edges()[rng.random_range(0..m.edges().len())],
                b: Index(rng.random_range(0..n as u32)),
            })
            .collect();
        Self::new(family, alice, bob)
    }

    pub fn family(&self) -> &MatchingFamily {
        &self.family
    }

    pub fn alice_table(&self) -> &[Index] {
        &self.alice
    }

    pub fn bob_table(&self) -> &[BobMove] {
        &self.bob
    }

    pub fn alice_label(&self, x: &Bitstring) -> Index {
        self.alice[x.bits() as usize]
    }

    /// Bob's move; matchings outside the family get the first edge and `b = 0`.
    pub fn bob_move(&self, m: &Matching) -> BobMove {
        match self.family.position(m) {
            Some(p) => self.bob[p],
            None => BobMove {
                edge: m.edges()[0],
                b: Index(0),
            },
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&PairDoc::from(self)).expect("serializable")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let doc: PairDoc = serde_json::from_str(s).map_err(|e| Error::Parse(e.to_string()))?;
        doc.try_into()
    }
}

impl NonlocalStrategy for DeterministicStrategyPair {
    type Shared = ();

    fn n(&self) -> usize {
        self.family.n()
    }

    fn shared_support(&self) -> Option<Vec<()>> {
        Some(vec![()])
    }

    fn sample_shared(&self, _rng: &mut dyn RngCore) {}

    fn alice(&self, x: &Bitstring, _: &()) -> Vec<Index> {
        vec![self.alice_label(x)]
    }

    fn bob(&self, m: &Matching, _: &()) -> Vec<BobMove> {
        vec![self.bob_move(m)]
    }

    fn sample_alice(&self, x: &Bitstring, _: &(), _rng: &mut dyn RngCore) -> Index {
        self.alice_label(x)
    }

    fn sample_bob(&self, m: &Matching, _: &(), _rng: &mut dyn RngCore) -> BobMove {
        self.bob_move(m)
    }
}

impl Serialize for DeterministicStrategyPair {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        PairDoc::from(self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for DeterministicStrategyPair {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        PairDoc::deserialize(d)?
            .try_into()
            .map_err(serde::de::Error::custom)
    }
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename = "strategy_pair")]
struct PairDoc {
    n: usize,
    family: FamilyKind,
    /// Alice's label for each `x`, in numeric order of the packed input.
    alice: Vec<Index>,
    bob: Vec<BobRow>,
}

#[derive(Serialize, Deserialize)]
struct BobRow {
    matching: Matching,
    edge: Edge,
    b: Index,
}

impl From<&DeterministicStrategyPair> for PairDoc {
    fn from(p: &DeterministicStrategyPair) -> Self {
        let members = p.family.members().expect("listed family");
        PairDoc {
            n: p.family.n(),
            family: p.family.kind(),
            alice: p.alice.clone(),
            bob: members
                .iter()
                .zip(&p.bob)
                .map(|(m, mv)| BobRow {
                    matching: m.clone(),
                    edge: mv.edge,
                    b: mv.b,
                })
                .collect(),
        }
    }
}

impl TryFrom<PairDoc> for DeterministicStrategyPair {
    type Error = Error;

    fn try_from(doc: PairDoc) -> Result<Self> {
        let family = listed_family(doc.n, doc.family, &Caps::default())?;
        let mut bob = vec![None; family.members()?.len()];
        for row in doc.bob {
            let p = family.position(&row.matching).ok_or_else(|| {
                Error::InvalidProtocol(format!("{:?} is not in the family", row.matching))
            })?;
            bob[p] = Some(BobMove {
                edge: row.edge,
                b: row.b,
            });
        }
        let bob = bob
            .into_iter()
            .collect::<Option<Vec<_>>>()
            .ok_or_else(|| Error::InvalidProtocol("Bob table is incomplete".into()))?;
        Self::new(family, doc.alice, bob)
    }
}

/// The communication protocol obtained from a deterministic nonlocal strategy:
/// Alice sends her label `a` (`log n` bits), Bob plays his edge and answers
/// `(a ⊕ b)·(i ⊕ j)`. It wins on exactly the same inputs.
#[derive(Clone, Debug)]
pub struct ReducedProtocol {
    pair: DeterministicStrategyPair,
    log_n: usize,
}

pub fn comm_from_nonlocal(pair: &DeterministicStrategyPair) -> ReducedProtocol {
    ReducedProtocol {
        pair: pair.clone(),
        log_n: game_log2(pair.family.n()).expect("validated size") as usize,
    }
}

impl CommProtocol for ReducedProtocol {
    fn n(&self) -> usize {
        self.pair.family.n()
    }

    fn message_bits(&self) -> usize {
        self.log_n
    }

    fn message(&self, x: &Bitstring) -> Bitstring {
        Bitstring::new(self.pair.alice_label(x).0 as u64, self.log_n).expect("label fits")
    }

    fn decide(&self, message: &Bitstring, m: &Matching) -> Vec<Decision> {
        let a = Index(message.bits() as u32);
        let mv = self.pair.bob_move(m);
        vec![Decision {
            edge: mv.edge,
            v: a.xor(mv.b).dot(mv.edge.xor()),
        }]
    }
}

/// A deterministic `c`-bit protocol stored as tables: a message for every `x`
/// and a decision for every (message, matching).
#[derive(Clone, Debug, PartialEq)]
pub struct TableProtocol {
    family: MatchingFamily,
    c: usize,
    messages: Vec<u32>,
    // Indexed by message * |family| + position.
    decisions: Vec<Decision>,
}

const MAX_TABLE_C: usize = 16;

impl TableProtocol {
    pub fn new(
        family: MatchingFamily,
        c: usize,
        messages: Vec<u32>,
        decisions: Vec<Decision>,
    ) -> Result<Self> {
        let n = family.n();
        let members = family.members()?;
        if c > MAX_TABLE_C {
            return Err(Error::InvalidProtocol(format!(
                "table protocols support c ≤ {MAX_TABLE_C}"
            )));
        }
        if messages.len() != 1usize << n {
            return Err(Error::InvalidProtocol(format!(
                "message table has {} rows, expected 2^{n}",
                messages.len()
            )));
        }
        if let Some(m) = messages.iter().find(|&&m| (m as u64) >> c != 0) {
            return Err(Error::InvalidProtocol(format!("message {m} needs more than {c} bits")));
        }
        if decisions.len() != members.len() << c {
            return Err(Error::InvalidProtocol(format!(
                "decision table has {} rows, expected {}",
                decisions.len(),
                members.len() << c
            )));
        }
        for (k, d) in decisions.iter().enumerate() {
            let m = &members[k % members.len()];
            if !m.contains(d.edge) || d.v > 1 {
                return Err(Error::InvalidProtocol(format!(
                    "decision {d:?} is invalid for {m:?}"
                )));
            }
        }
        Ok(Self {
            family,
            c,
            messages,
            decisions,
        })
    }

    /// Uniform message table and uniform decisions.
    pub fn random<R: Rng + ?Sized>(
        n: usize,
        kind: FamilyKind,
        c: usize,
        caps: &Caps,
        rng: &mut R,
    ) -> Result<Self> {
        let family = listed_family(n, kind, caps)?;
        let messages = (0..1usize << n)
            .map(|_| rng.random_range(0..1u32 << c))
            .collect();
        let members = family.members()?;
        let decisions = (0..members.len() << c)
            .map(|k| {
                let m = &members[k % members.len()];
                Decision {
                    edge: m.edges()[rng.random_range(0..m.edges().len())],
                    v: rng.random_range(0..2),
                }
            })
            .collect();
        Self::new(family, c, messages, decisions)
    }

    /// Keeps the message table and lets Bob answer optimally: for each message
    /// class and matching, the edge with the largest pairwise bias
    /// `|E_{x∈X_m}[(-1)^{x_i+x_j}]|`, guessing the parity the bias favours
    /// (ties go to the first edge and to 0).
    pub fn best_guess(family: MatchingFamily, c: usize, messages: Vec<u32>) -> Result<Self> {
        let n = family.n();
        let members = family.members()?.to_vec();
        let classes = 1usize << c.min(MAX_TABLE_C);
        // corr[m][i*n+j] = Σ_{x∈X_m} (-1)^{x_i+x_j}
        let mut corr = vec![vec![0i64; n * n]; classes];
        for (x, &msg) in messages.iter().enumerate() {
            let Some(row) = corr.get_mut(msg as usize) else {
                continue;
            };
            for i in 0..n {
                for j in i + 1..n {
                    let s = 1 - 2 * (((x >> i) ^ (x >> j)) & 1) as i64;
                    row[i * n + j] += s;
                }
            }
        }
        let mut decisions = Vec::with_capacity(classes * members.len());
        for row in &corr {
            for m in &members {
                let mut best = (m.edges()[0], row[m.edges()[0].i.value() * n + m.edges()[0].j.value()]);
                for &e in &m.edges()[1..] {
                    let v = row[e.i.value() * n + e.j.value()];
                    if v.abs() > best.1.abs() {
                        best = (e, v);
                    }
                }
                decisions.push(Decision {
                    edge: best.0,
                    v: u8::from(best.1 < 0),
                });
            }
        }
        Self::new(family, c, messages, decisions)
    }

    pub fn family(&self) -> &MatchingFamily {
        &self.family
    }

    pub fn message_table(&self) -> &[u32] {
        &self.messages
    }

    pub fn decision(&self, message: u32, position: usize) -> Decision {
        self.decisions[message as usize * self.family.cardinality() as usize + position]
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&ProtocolDoc::from(self)).expect("serializable")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let doc: ProtocolDoc = serde_json::from_str(s).map_err(|e| Error::Parse(e.to_string()))?;
        doc.try_into()
    }
}

impl CommProtocol for TableProtocol {
    fn n(&self) -> usize {
        self.family.n()
    }

    fn message_bits(&self) -> usize {
        self.c
    }

    fn message(&self, x: &Bitstring) -> Bitstring {
        Bitstring::new(self.messages[x.bits() as usize] as u64, self.c).expect("validated")
    }

    fn decide(&self, message: &Bitstring, m: &Matching) -> Vec<Decision> {
        match self.family.position(m) {
            Some(p) => vec![self.decision(message.bits() as u32, p)],
            None => vec![Decision {
                edge: m.edges()[0],
                v: 0,
            }],
        }
    }

    fn sample_decision(&self, message: &Bitstring, m: &Matching, _rng: &mut dyn RngCore) -> Decision {
        self.decide(message, m)[0]
    }
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename = "comm_protocol")]
struct ProtocolDoc {
    n: usize,
    family: FamilyKind,
    c: usize,
    /// Message for each `x`, in numeric order of the packed input.
    messages: Vec<u32>,
    /// One row per matching, holding the decision for each message.
    decisions: Vec<DecisionRow>,
}

#[derive(Serialize, Deserialize)]
struct DecisionRow {
    matching: Matching,
    by_message: Vec<Decision>,
}

impl From<&TableProtocol> for ProtocolDoc {
    fn from(p: &TableProtocol) -> Self {
        let members = p.family.members().expect("listed family");
        ProtocolDoc {
            n: p.family.n(),
            family: p.family.kind(),
            c: p.c,
            messages: p.messages.clone(),
            decisions: members
                .iter()
                .enumerate()
                .map(|(pos, m)| DecisionRow {
                    matching: m.clone(),
                    by_message: (0..1u32 << p.c).map(|msg| p.decision(msg, pos)).collect(),
                })
                .collect(),
        }
    }
}

impl TryFrom<ProtocolDoc> for TableProtocol {
    type Error = Error;

    fn try_from(doc: ProtocolDoc) -> Result<Self> {
        let family = listed_family(doc.n, doc.family, &Caps::default())?;
        if doc.c > MAX_TABLE_C {
            return Err(Error::InvalidProtocol(format!(
                "table protocols support c ≤ {MAX_TABLE_C}"
            )));
        }
        let size = family.members()?.len();
        let mut decisions = vec![None; size << doc.c];
        for row in doc.decisions {
            let p = family.position(&row.matching).ok_or_else(|| {
                Error::InvalidProtocol(format!("{:?} is not in the family", row.matching))
            })?;
            if row.by_message.len() != 1 << doc.c {
                return Err(Error::InvalidProtocol(format!(
                    "row for {:?} has {} decisions",
                    row.matching,
                    row.by_message.len()
                )));
            }
            for (msg, d) in row.by_message.into_iter().enumerate() {
                decisions[msg * size + p] = Some(d);
            }
        }
        let decisions = decisions
            .into_iter()
            .collect::<Option<Vec<_>>>()
            .ok_or_else(|| Error::InvalidProtocol("decision table is incomplete".into()))?;
        Self::new(family, doc.c, doc.messages, decisions)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn pair_json_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let pair = DeterministicStrategyPair::random(4, FamilyKind::Full, &Caps::default(), &mut rng)
            .unwrap();
        let text = pair.to_json();
        assert!(text.contains("\"kind\": \"strategy_pair\""));
        assert_eq!(DeterministicStrategyPair::from_json(&text).unwrap(), pair);
    }

    #[test]
    fn protocol_json_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let p = TableProtocol::random(4, FamilyKind::Full, 2, &Caps::default(), &mut rng).unwrap();
        let text = p.to_json();
        assert!(text.contains("\"kind\": \"comm_protocol\""));
        assert_eq!(TableProtocol::from_json(&text).unwrap(), p);
    }

    #[test]
    fn rejects_bad_tables() {
        let family = MatchingFamily::new(2, FamilyKind::Full).unwrap();
        let e = Edge::new(0usize, 1usize).unwrap();
        assert!(DeterministicStrategyPair::new(
            family.clone(),
            vec![Index(0); 3],
            vec![BobMove { edge: e, b: Index(0) }]
        )
        .is_err());
        assert!(DeterministicStrategyPair::new(
            family.clone(),
            vec![Index(2); 4],
            vec![BobMove { edge: e, b: Index(0) }]
        )
        .is_err());
        assert!(TableProtocol::new(family, 1, vec![0, 1, 2, 0], vec![Decision { edge: e, v: 0 }; 2]).is_err());
        assert!(DeterministicStrategyPair::random(
            4,
            FamilyKind::BijectiveXor,
            &Caps::default(),
            &mut ChaCha8Rng::seed_from_u64(0)
        )
        .is_err());
    }

    #[test]
    fn reduced_message_is_the_label() {
        // a = x_0 ⊕ x_1 at n = 2 with Bob playing b = 0 wins always.
        let family = MatchingFamily::new(2, FamilyKind::Full).unwrap();
        let e = Edge::new(0usize, 1usize).unwrap();
        let pair = DeterministicStrategyPair::new(
            family,
            vec![Index(0), Index(1), Index(1), Index(0)],
            vec![BobMove { edge: e, b: Index(0) }],
        )
        .unwrap();
        let p = comm_from_nonlocal(&pair);
        assert_eq!(p.message_bits(), 1);
        let m = Matching::from_pairs(2, &[(0, 1)]).unwrap();
        for x in Bitstring::all(2) {
            let d = p.decide(&p.message(&x), &m);
            assert_eq!(d[0].v, x.get(0) ^ x.get(1));
        }
    }

    #[test]
    fn best_guess_follows_bias() {
        // Message 0 iff x_0 = x_1: Bob should answer edge (0,1) with v = msg.
        let family = MatchingFamily::new(4, FamilyKind::Full).unwrap();
        let messages = (0..16u32).map(|x| (x ^ (x >> 1)) & 1).collect();
        let p = TableProtocol::best_guess(family.clone(), 1, messages).unwrap();
        let m = Matching::from_pairs(4, &[(0, 1), (2, 3)]).unwrap();
        let pos = family.position(&m).unwrap();
        for msg in 0..2 {
            let d = p.decision(msg, pos);
            assert_eq!(d.edge, Edge::new(0usize, 1usize).unwrap());
            assert_eq!(d.v as u32, msg);
        }
    }
}
