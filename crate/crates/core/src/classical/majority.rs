use rand::{Rng, RngCore};
use serde::{Deserialize, Serialize};

use super::{CommProtocol, Decision};
use crate::analysis::{run_batches, wilson_interval, CI_LEVEL, Z_99};
use crate::error::{Error, Result};
use crate::model::{game_log2, Bitstring, Edge, FamilyKind, Matching, MatchingFamily};
use crate::rational::{self, ratio, Rational};

/// Block-majority protocol.
///
/// Alice splits the first `prefix` bits of `x` into `c` consecutive blocks of
/// `k = prefix / c` bits and sends each block's majority (ties resolve to 0).
/// Bob looks for edges of `M` inside the prefix whose endpoints sit in
/// different blocks; if there are any he picks one uniformly and answers with
/// the XOR of the two block majorities, otherwise a uniform edge and a uniform
/// bit.
///
/// With `c = 1` the two-block structure is kept and Alice sends `m_1 ⊕ m_2`,
/// which is exactly the parity Bob needs for any cross-block edge.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MajorityProtocol {
    n: usize,
    c: usize,
    prefix: usize,
    block_len: usize,
}

/// The block-majority protocol on the first `√n` bits. Requires `√n` integral,
/// `1 ≤ c ≤ √n` and `c | √n`.
pub fn majority_block_protocol(n: usize, c: usize) -> Result<MajorityProtocol> {
    game_log2(n)?;
    let root = n.isqrt();
    if root * root != n {
        return Err(Error::InvalidParameter(format!("√{n} is not an integer")));
    }
    MajorityProtocol::with_prefix(n, root, c)
}

impl MajorityProtocol {
    /// Same protocol on an arbitrary prefix length, for sizes where `√n` is not
    /// an integer.
    pub fn with_prefix(n: usize, prefix: usize, c: usize) -> Result<Self> {
        game_log2(n)?;
        if prefix < 2 || prefix > n {
            return Err(Error::InvalidParameter(format!(
                "prefix {prefix} must lie in 2..={n}"
            )));
        }
        if c == 0 || c > prefix {
            return Err(Error::InvalidParameter(format!(
                "c = {c} must lie in 1..={prefix}"
            )));
        }
        let blocks = c.max(2);
        if prefix % blocks != 0 {
            return Err(Error::InvalidParameter(format!(
                "{blocks} blocks do not divide the prefix of {prefix} bits"
            )));
        }
        Ok(Self {
            n,
            c,
            prefix,
            block_len: prefix / blocks,
        })
    }

    pub fn c(&self) -> usize {
        self.c
    }

    pub fn prefix(&self) -> usize {
        self.prefix
    }

    pub fn block_len(&self) -> usize {
        self.block_len
    }

    fn blocks(&self) -> usize {
        self.prefix / self.block_len
    }

    #[inline]
    fn block_of(&self, v: usize) -> Option<usize> {
        (v < self.prefix).then(|| v / self.block_len)
    }

    /// Majority of each block, ties to 0.
    pub fn block_majorities(&self, x: &Bitstring) -> Vec<u8> {
        (0..self.blocks())
            .map(|b| {
                let ones = (b * self.block_len..(b + 1) * self.block_len)
                    .filter(|&k| x.get(k) == 1)
                    .count();
                u8::from(2 * ones > self.block_len)
            })
            .collect()
    }

    /// Edges of `m` inside the prefix joining two different blocks.
    pub fn qualifying_edges(&self, m: &Matching) -> Vec<Edge> {
        m.edges()
            .iter()
            .copied()
            .filter(|e| match (self.block_of(e.i.value()), self.block_of(e.j.value())) {
                (Some(p), Some(q)) => p != q,
                _ => false,
            })
            .collect()
    }

    /// Whether the matching triggers the informative branch.
    pub fn event_holds(&self, m: &Matching) -> bool {
        m.edges().iter().any(|e| {
            matches!(
                (self.block_of(e.i.value()), self.block_of(e.j.value())),
                (Some(p), Some(q)) if p != q
            )
        })
    }

    fn guess(&self, message: &Bitstring, e: Edge) -> u8 {
        if self.c == 1 {
            message.get(0)
        } else {
            let p = self.block_of(e.i.value()).expect("qualifying edge");
            let q = self.block_of(e.j.value()).expect("qualifying edge");
            message.get(p) ^ message.get(q)
        }
    }
}

impl CommProtocol for MajorityProtocol {
    fn n(&self) -> usize {
        self.n
    }

    fn message_bits(&self) -> usize {
        self.c
    }

    fn message(&self, x: &Bitstring) -> Bitstring {
        let maj = self.block_majorities(x);
        if self.c == 1 {
            Bitstring::new((maj[0] ^ maj[1]) as u64, 1).expect("one bit")
        } else {
            let bits = maj
                .iter()
                .enumerate()
                .fold(0u64, |acc, (b, &v)| acc | (v as u64) << b);
            Bitstring::new(bits, self.c).expect("c bits")
        }
    }

    fn decide(&self, message: &Bitstring, m: &Matching) -> Vec<Decision> {
        let q = self.qualifying_edges(m);
        if q.is_empty() {
            m.edges()
                .iter()
                .flat_map(|&edge| [Decision { edge, v: 0 }, Decision { edge, v: 1 }])
                .collect()
        } else {
            q.into_iter()
                .map(|edge| Decision {
                    edge,
                    v: self.guess(message, edge),
                })
                .collect()
        }
    }

    fn sample_decision(&self, message: &Bitstring, m: &Matching, rng: &mut dyn RngCore) -> Decision {
        let q = self.qualifying_edges(m);
        if q.is_empty() {
            let edge = m.edges()[rng.random_range(0..m.edges().len())];
            Decision {
                edge,
                v: rng.random_range(0..2u8),
            }
        } else {
            let edge = q[rng.random_range(0..q.len())];
            Decision {
                edge,
                v: self.guess(message, edge),
            }
        }
    }
}

/// Probability over a uniform matching that the block-majority protocol's
/// informative branch fires.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EventEstimate {
    pub n: usize,
    pub c: usize,
    #[serde(with = "rational::serde_fraction_opt")]
    pub exact: Option<Rational>,
    pub estimate: f64,
    pub std_error: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub ci_level: f64,
    pub samples: u64,
    pub seed: Option<u64>,
}

impl EventEstimate {
    /// Number of standard errors by which the estimate exceeds `threshold`.
    pub fn sigmas_above(&self, threshold: f64) -> f64 {
        if self.exact.is_some() {
            return if self.estimate > threshold { f64::INFINITY } else { f64::NEG_INFINITY };
        }
        (self.estimate - threshold) / self.std_error
    }
}

/// Exact by enumeration when the full family is listable, otherwise a Monte
/// Carlo estimate with a 99% Wilson interval.
pub fn event_e_probability(
    n: usize,
    c: usize,
    samples: u64,
    seed: u64,
) -> Result<EventEstimate> {
    let proto = majority_block_protocol(n, c)?;
    let family = MatchingFamily::new(n, FamilyKind::Full)?;
    if let Ok(list) = family.members() {
        let hits = list.iter().filter(|m| proto.event_holds(m)).count();
        let p = ratio(hits as i64, list.len() as i64);
        let f = rational::to_f64(&p);
        return Ok(EventEstimate {
            n,
            c,
            exact: Some(p),
            estimate: f,
            std_error: 0.0,
            ci_low: f,
            ci_high: f,
            ci_level: 1.0,
            samples: list.len() as u64,
            seed: None,
        });
    }
    if samples == 0 {
        return Err(Error::InvalidParameter("samples must be positive".into()));
    }
    let hits: u64 = run_batches(samples, seed, |rng, count| {
        (0..count)
            .filter(|_| proto.event_holds(&family.sample(rng).expect("full family")))
            .count() as u64
    })
    .into_iter()
    .sum();
    let p = hits as f64 / samples as f64;
    let (lo, hi) = wilson_interval(hits, samples, Z_99);
    Ok(EventEstimate {
        n,
        c,
        exact: None,
        estimate: p,
        std_error: (p * (1.0 - p) / samples as f64).sqrt(),
        ci_low: lo,
        ci_high: hi,
        ci_level: CI_LEVEL,
        samples,
        seed: Some(seed),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Index;

    fn x(s: &str) -> Bitstring {
        Bitstring::parse(s).unwrap()
    }

    #[test]
    fn unanimous_blocks() {
        let p = majority_block_protocol(16, 2).unwrap();
        assert_eq!(p.message(&x("1100000000000000")), x("10"));
        assert_eq!(p.message(&x("1111000000000000")), x("11"));
    }

    #[test]
    fn ties_resolve_to_zero() {
        let p = majority_block_protocol(16, 2).unwrap();
        assert_eq!(p.message(&x("1000000000000000")), x("00"));
        assert_eq!(p.message(&x("0111111111111111")), x("01"));
    }

    #[test]
    fn xor_variant_sends_parity_of_majorities() {
        let p = majority_block_protocol(16, 1).unwrap();
        assert_eq!(p.block_len(), 2);
        assert_eq!(p.message(&x("1100000000000000")), x("1"));
        assert_eq!(p.message(&x("1111000000000000")), x("0"));
        assert_eq!(p.message(&x("1000111111111111")), x("0"));
    }

    #[test]
    fn parameter_validation() {
        assert!(majority_block_protocol(8, 1).is_err());
        assert!(majority_block_protocol(16, 3).is_err());
        assert!(majority_block_protocol(16, 5).is_err());
        assert!(majority_block_protocol(16, 0).is_err());
        assert!(majority_block_protocol(64, 8).is_ok());
        assert!(MajorityProtocol::with_prefix(8, 2, 1).is_ok());
        assert!(MajorityProtocol::with_prefix(8, 3, 1).is_err());
    }

    #[test]
    fn bob_uses_cross_block_edges() {
        let p = majority_block_protocol(16, 2).unwrap();
        // (0,3) crosses blocks {0,1} and {2,3}; (1,2) also crosses.
        let m = Matching::from_pairs(
            16,
            &[(0, 3), (1, 2), (4, 5), (6, 7), (8, 9), (10, 11), (12, 13), (14, 15)],
        )
        .unwrap();
        assert!(p.event_holds(&m));
        let d = p.decide(&x("10"), &m);
        assert_eq!(d.len(), 2);
        assert!(d.iter().all(|d| d.v == 1));
        let inside = Matching::from_pairs(
            16,
            &[(0, 1), (2, 3), (4, 5), (6, 7), (8, 9), (10, 11), (12, 13), (14, 15)],
        )
        .unwrap();
        assert!(!p.event_holds(&inside));
        assert_eq!(p.decide(&x("10"), &inside).len(), 16);
        assert!(p.qualifying_edges(&inside).is_empty());
        let _ = Index(0);
    }

    #[test]
    fn event_probability_exact_at_four() {
        for c in [1, 2] {
            let e = event_e_probability(4, c, 0, 0).unwrap();
            assert_eq!(e.exact, Some(ratio(1, 3)));
        }
    }

    #[test]
    fn event_probability_estimates() {
        // Exact values from a sequential-pairing recursion over the prefix
        // vertices: 10/39 for (16, 2), 26781/68381 for (64, 8).
        for (n, c, exact) in [(16, 2, 10.0 / 39.0), (64, 8, 26781.0 / 68381.0)] {
            let e = event_e_probability(n, c, 200_000, 0).unwrap();
            assert!(e.estimate <= 1.0);
            assert!(e.ci_low <= exact && exact <= e.ci_high, "{e:?}");
            assert!(e.sigmas_above(0.1) >= 5.0);
        }
    }
}
