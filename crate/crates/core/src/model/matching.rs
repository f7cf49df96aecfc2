//! Perfect matchings on `{0,…,n-1}` and their enumeration.

use std::fmt;

use serde::{Deserialize, Serialize};

use super::bits::Index;
use crate::error::{Error, Result};

/// An unordered pair of distinct vertices, stored with `i < j`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Edge {
    pub i: Index,
    pub j: Index,
}

impl Edge {
    /// Canonicalizes the endpoints so that `i < j`.
    pub fn new(a: impl Into<Index>, b: impl Into<Index>) -> Result<Self> {
        let (a, b) = (a.into(), b.into());
        if a == b {
            return Err(Error::InvalidMatching(format!("self-loop at {a}")));
        }
        Ok(if a < b { Edge { i: a, j: b } } else { Edge { i: b, j: a } })
    }

    /// `i ⊕ j`, never zero.
    #[inline]
    pub fn xor(self) -> Index {
        self.i.xor(self.j)
    }

    pub fn contains(self, v: Index) -> bool {
        self.i == v || self.j == v
    }
}

impl From<(u32, u32)> for Edge {
    fn from((a, b): (u32, u32)) -> Self {
        Edge::new(Index(a), Index(b)).expect("distinct endpoints")
    }
}

impl fmt::Debug for Edge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.i, self.j)
    }
}

impl Serialize for Edge {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        [self.i.0, self.j.0].serialize(s)
    }
}

impl<'de> Deserialize<'de> for Edge {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let [a, b] = <[u32; 2]>::deserialize(d)?;
        Edge::new(Index(a), Index(b)).map_err(serde::de::Error::custom)
    }
}

/// A perfect matching: `n/2` disjoint edges covering every vertex once.
///
/// Edges are kept sorted by their smaller endpoint, so two matchings compare
/// equal exactly when they contain the same edges, and `Ord` is the
/// lexicographic order on sorted edge lists.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Matching {
    edges: Vec<Edge>,
    partner: Vec<u32>,
}

impl Matching {
    pub fn new(n: usize, mut edges: Vec<Edge>) -> Result<Self> {
        if n % 2 != 0 {
            return Err(Error::OddSize(n));
        }
        if edges.len() != n / 2 {
            return Err(Error::InvalidMatching(format!(
                "{} edges for n = {n}",
                edges.len()
            )));
        }
        let mut partner = vec![u32::MAX; n];
        for e in &edges {
            for (v, w) in [(e.i, e.j), (e.j, e.i)] {
                let slot = partner.get_mut(v.value()).ok_or_else(|| {
                    Error::InvalidMatching(format!("vertex {v} out of range for n = {n}"))
                })?;
                if *slot != u32::MAX {
                    return Err(Error::InvalidMatching(format!("vertex {v} covered twice")));
                }
                *slot = w.0;
            }
        }
        edges.sort_unstable();
        Ok(Self { edges, partner })
    }

    pub fn from_pairs(n: usize, pairs: &[(u32, u32)]) -> Result<Self> {
        let edges = pairs
            .iter()
            .map(|&(a, b)| Edge::new(Index(a), Index(b)))
            .collect::<Result<Vec<_>>>()?;
        Self::new(n, edges)
    }

    /// Builds from a partner table without validation; callers guarantee the
    /// table is an involution without fixed points.
    pub(crate) fn from_partner_unchecked(partner: Vec<u32>) -> Self {
        let edges = partner
            .iter()
            .enumerate()
            .filter(|&(v, &w)| (v as u32) < w)
            .map(|(v, &w)| Edge {
                i: Index(v as u32),
                j: Index(w),
            })
            .collect();
        Self { edges, partner }
    }

    pub fn n(&self) -> usize {
        self.partner.len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    #[inline]
    pub fn partner(&self, v: Index) -> Index {
        Index(self.partner[v.value()])
    }

    pub fn contains(&self, e: Edge) -> bool {
        e.j.value() < self.n() && self.partner[e.i.value()] == e.j.0
    }

    /// The edge whose endpoint XOR is `s`, if any. Unique when the matching
    /// belongs to the bijective-XOR family.
    pub fn edge_with_xor(&self, s: Index) -> Option<Edge> {
        self.edges.iter().copied().find(|e| e.xor() == s)
    }
}

impl fmt::Debug for Matching {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.edges.iter()).finish()
    }
}

impl Serialize for Matching {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.edges.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Matching {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let edges = Vec::<Edge>::deserialize(d)?;
        let n = 2 * edges.len();
        Matching::new(n, edges).map_err(serde::de::Error::custom)
    }
}

/// `(n-1)!! = (n-1)(n-3)…1`, saturating at `u128::MAX`.
pub fn double_factorial_odd(n: usize) -> u128 {
    (1..n)
        .rev()
        .step_by(2)
        .fold(1u128, |acc, k| acc.saturating_mul(k as u128))
}

/// All perfect matchings of `{0,…,n-1}` in lexicographic order of their sorted
/// edge lists. Fails when `n` exceeds `cap`.
pub fn enumerate_matchings(n: usize, cap: usize) -> Result<Vec<Matching>> {
    if n % 2 != 0 {
        return Err(Error::OddSize(n));
    }
    if n > cap {
        return Err(Error::CapExceeded {
            what: "matching enumeration n",
            requested: n as u128,
            cap: cap as u128,
        });
    }
    let mut out = Vec::with_capacity(double_factorial_odd(n) as usize);
    let mut partner = vec![u32::MAX; n];
    pair_lowest(&mut partner, &mut |p| {
        out.push(Matching::from_partner_unchecked(p.to_vec()))
    });
    Ok(out)
}

// Pairs the lowest free vertex with each larger free vertex in increasing
// order, which visits matchings in lexicographic order.
fn pair_lowest(partner: &mut [u32], emit: &mut dyn FnMut(&[u32])) {
    let Some(a) = partner.iter().position(|&p| p == u32::MAX) else {
        emit(partner);
        return;
    };
    for b in a + 1..partner.len() {
        if partner[b] != u32::MAX {
            continue;
        }
        partner[a] = b as u32;
        partner[b] = a as u32;
        pair_lowest(partner, emit);
        partner[a] = u32::MAX;
        partner[b] = u32::MAX;
    }
}

/// Matchings pairing each `i < n/2` with some `j ≥ n/2` such that the edge
/// XORs are pairwise distinct, hence exactly `{n/2,…,n-1}`. Lexicographic
/// order. Empty for `n = 4`.
pub fn enumerate_bijective_xor_matchings(n: usize, cap: usize) -> Result<Vec<Matching>> {
    super::bits::game_log2(n)?;
    if n > cap {
        return Err(Error::CapExceeded {
            what: "bijective-XOR enumeration n",
            requested: n as u128,
            cap: cap as u128,
        });
    }
    let half = n / 2;
    let mut out = Vec::new();
    let mut image = vec![0u32; half];
    let mut used_j = vec![false; half];
    let mut used_xor = vec![false; half];
    complete_mappings(0, &mut image, &mut used_j, &mut used_xor, &mut |img| {
        let mut partner = vec![0u32; n];
        for (i, &off) in img.iter().enumerate() {
            partner[i] = (half as u32) + off;
            partner[half + off as usize] = i as u32;
        }
        out.push(Matching::from_partner_unchecked(partner));
    });
    Ok(out)
}

// Backtracking over permutations ψ of {0,…,h-1} with i ↦ i ⊕ ψ(i) injective.
// For i, ψ(i) < h the edge (i, h + ψ(i)) has XOR h + (i ⊕ ψ(i)).
fn complete_mappings(
    i: usize,
    image: &mut [u32],
    used_j: &mut [bool],
    used_xor: &mut [bool],
    emit: &mut dyn FnMut(&[u32]),
) {
    let h = image.len();
    if i == h {
        emit(image);
        return;
    }
    for off in 0..h {
        let x = i ^ off;
        if used_j[off] || used_xor[x] {
            continue;
        }
        used_j[off] = true;
        used_xor[x] = true;
        image[i] = off as u32;
        complete_mappings(i + 1, image, used_j, used_xor, emit);
        used_j[off] = false;
        used_xor[x] = false;
    }
}

/// True when every edge crosses the halves and the edge XORs are distinct.
pub fn is_bijective_xor(m: &Matching) -> bool {
    let n = m.n();
    let half = n / 2;
    let mut seen = vec![false; n];
    m.edges().iter().all(|e| {
        let s = e.xor().value();
        let ok = e.i.value() < half && e.j.value() >= half && !seen[s];
        seen[s] = true;
        ok
    })
}
