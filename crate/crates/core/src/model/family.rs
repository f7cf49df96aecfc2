use std::collections::HashMap;
use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::bits::{game_log2, Index};
use super::matching::{
    double_factorial_odd, enumerate_bijective_xor_matchings, enumerate_matchings,
    is_bijective_xor, Matching,
};
use crate::caps::Caps;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FamilyKind {
    /// Every perfect matching.
    Full,
    /// Matchings across the two halves with distinct edge XORs.
    BijectiveXor,
}

impl FamilyKind {
    pub fn name(self) -> &'static str {
        match self {
            FamilyKind::Full => "full",
            FamilyKind::BijectiveXor => "bijective_xor",
        }
    }
}

/// The set of matchings Bob's input is drawn from.
///
/// Families small enough to enumerate keep their member list, which backs
/// exact evaluation and the bijective-XOR sampler. Larger full families are
/// sample-only.
#[derive(Clone)]
pub struct MatchingFamily {
    n: usize,
    kind: FamilyKind,
    members: Option<Arc<Members>>,
}

struct Members {
    list: Vec<Matching>,
    position: HashMap<Matching, usize>,
}

impl MatchingFamily {
    pub fn new(n: usize, kind: FamilyKind) -> Result<Self> {
        Self::with_caps(n, kind, &Caps::default())
    }

    pub fn with_caps(n: usize, kind: FamilyKind, caps: &Caps) -> Result<Self> {
        let list = match kind {
            FamilyKind::Full => {
                if n % 2 != 0 || n < 2 {
                    return Err(Error::OddSize(n));
                }
                (n <= caps.full_matchings_n)
                    .then(|| enumerate_matchings(n, caps.full_matchings_n))
                    .transpose()?
            }
            FamilyKind::BijectiveXor => Some(enumerate_bijective_xor_matchings(
                n,
                caps.bijective_xor_n,
            )?),
        };
        let members = list.map(|list| {
            let position = list.iter().cloned().zip(0..).collect();
            Arc::new(Members { list, position })
        });
        Ok(Self { n, kind, members })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn kind(&self) -> FamilyKind {
        self.kind
    }

    pub fn is_listed(&self) -> bool {
        self.members.is_some()
    }

    /// The members in lexicographic order; fails for sample-only families.
    pub fn members(&self) -> Result<&[Matching]> {
        self.members
            .as_ref()
            .map(|m| m.list.as_slice())
            .ok_or(Error::CapExceeded {
                what: "matching family enumeration n",
                requested: self.n as u128,
                cap: Caps::default().full_matchings_n as u128,
            })
    }

    /// Number of members, saturating for huge full families.
    pub fn cardinality(&self) -> u128 {
        match &self.members {
            Some(m) => m.list.len() as u128,
            None => double_factorial_odd(self.n),
        }
    }

    pub fn position(&self, m: &Matching) -> Option<usize> {
        self.members.as_ref()?.position.get(m).copied()
    }

    pub fn contains(&self, m: &Matching) -> bool {
        m.n() == self.n
            && match self.kind {
                FamilyKind::Full => true,
                FamilyKind::BijectiveXor => is_bijective_xor(m),
            }
    }

    /// Uniform sample. The full family uses sequential random pairing (lowest
    /// free vertex, uniformly random free partner), which is exactly uniform.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<Matching> {
        match self.kind {
            FamilyKind::Full => Ok(sample_full_matching(self.n, rng)),
            FamilyKind::BijectiveXor => {
                let list = self.members()?;
                if list.is_empty() {
                    return Err(Error::EmptyFamily(self.kind.name()));
                }
                Ok(list[rng.random_range(0..list.len())].clone())
            }
        }
    }
}

impl std::fmt::Debug for MatchingFamily {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("MatchingFamily")
            .field("n", &self.n)
            .field("kind", &self.kind)
            .field("listed", &self.is_listed())
            .finish()
    }
}

impl PartialEq for MatchingFamily {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n && self.kind == other.kind
    }
}

pub fn sample_full_matching<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Matching {
    debug_assert!(n % 2 == 0);
    let mut free: Vec<u32> = (0..n as u32).collect();
    let mut partner = vec![0u32; n];
    while !free.is_empty() {
        let a = free.remove(0);
        let b = free.remove(rng.random_range(0..free.len()));
        partner[a as usize] = b;
        partner[b as usize] = a;
    }
    Matching::from_partner_unchecked(partner)
}

/// Convenience: uniform sample from a family described by size and kind.
pub fn sample_matching<R: Rng + ?Sized>(family: &MatchingFamily, rng: &mut R) -> Result<Matching> {
    family.sample(rng)
}

/// Exact fraction of family members containing the edge `(i, j)`.
pub fn edge_membership_fraction(
    family: &MatchingFamily,
    i: Index,
    j: Index,
) -> Result<crate::rational::Rational> {
    let e = super::matching::Edge::new(i, j)?;
    let list = family.members()?;
    if list.is_empty() {
        return Err(Error::EmptyFamily(family.kind.name()));
    }
    let hits = list.iter().filter(|m| m.contains(e)).count();
    Ok(crate::rational::ratio(hits as i64, list.len() as i64))
}

/// Validates a game size and builds the family.
pub fn game_family(n: usize, kind: FamilyKind, caps: &Caps) -> Result<MatchingFamily> {
    game_log2(n)?;
    MatchingFamily::with_caps(n, kind, caps)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use statrs::distribution::{ChiSquared, ContinuousCDF};

    #[test]
    fn n2_always_single_matching() {
        let fam = MatchingFamily::new(2, FamilyKind::Full).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..10 {
            assert_eq!(fam.sample(&mut rng).unwrap(), Matching::from_pairs(2, &[(0, 1)]).unwrap());
        }
    }

    fn chi_square_p(n: usize, samples: usize, seed: u64) -> f64 {
        let fam = MatchingFamily::new(n, FamilyKind::Full).unwrap();
        let k = fam.members().unwrap().len();
        let mut counts = vec![0usize; k];
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..samples {
            let m = fam.sample(&mut rng).unwrap();
            counts[fam.position(&m).unwrap()] += 1;
        }
        let expect = samples as f64 / k as f64;
        let stat: f64 = counts
            .iter()
            .map(|&c| (c as f64 - expect).powi(2) / expect)
            .sum();
        1.0 - ChiSquared::new((k - 1) as f64).unwrap().cdf(stat)
    }

    #[test]
    fn full_sampler_is_uniform() {
        for (n, samples) in [(4, 30_000), (6, 60_000), (8, 210_000)] {
            let p = chi_square_p(n, samples, 7);
            assert!(p > 0.001, "n = {n}: chi-square p = {p}");
        }
    }

    #[test]
    fn n4_counts_within_three_sigma() {
        let fam = MatchingFamily::new(4, FamilyKind::Full).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut counts = [0usize; 3];
        let trials = 30_000;
        for _ in 0..trials {
            counts[fam.position(&fam.sample(&mut rng).unwrap()).unwrap()] += 1;
        }
        let sigma = (trials as f64 * (1.0 / 3.0) * (2.0 / 3.0)).sqrt();
        for c in counts {
            assert!((c as f64 - trials as f64 / 3.0).abs() < 3.0 * sigma, "{counts:?}");
        }
    }

    #[test]
    fn empty_bijective_family_cannot_sample() {
        let fam = MatchingFamily::new(4, FamilyKind::BijectiveXor).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert_eq!(fam.sample(&mut rng), Err(Error::EmptyFamily("bijective_xor")));
    }

    #[test]
    fn bijective_samples_are_members() {
        let fam = MatchingFamily::new(16, FamilyKind::BijectiveXor).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            let m = fam.sample(&mut rng).unwrap();
            assert!(fam.contains(&m) && fam.position(&m).is_some());
        }
    }

    #[test]
    fn membership_fraction_at_eight() {
        let fam = MatchingFamily::new(8, FamilyKind::Full).unwrap();
        for (i, j) in [(0, 1), (2, 5), (6, 7)] {
            assert_eq!(
                edge_membership_fraction(&fam, Index(i), Index(j)).unwrap(),
                crate::rational::ratio(1, 7)
            );
        }
    }

    #[test]
    fn large_full_family_is_sample_only() {
        let fam = MatchingFamily::new(64, FamilyKind::Full).unwrap();
        assert!(!fam.is_listed());
        assert!(fam.members().unwrap_err().is_cap_exceeded());
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert_eq!(fam.sample(&mut rng).unwrap().n(), 64);
    }
}
