use std::f64::consts::FRAC_2_PI;

use rand::{Rng, RngCore};
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::{all_labels, BobMove, NonlocalStrategy};
use crate::analysis::{run_batches, Z_99};
use crate::error::{Error, Result};
use crate::model::{game_log2, Bitstring, Edge, Index, Matching};
use crate::rational::Rational;

/// Published bounds on the Grothendieck constant.
pub const GROTHENDIECK_BOUNDS: (f64, f64) = (1.68, 1.78);

/// The unit vectors attached to Alice's input `x` and Bob's matching for a
/// shared vertex `i`, and the matching entry of the bilinear form.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GrothendieckVectors {
    /// `(1/√n) Σ_k (-1)^{x_i ⊕ x_k} e_k`
    pub v_x: Vec<f64>,
    /// `e_j` for the partner `j` of `i`.
    pub v_y: Vec<f64>,
    pub partner: Index,
    /// `π(x, M) · (-1)^{x_i ⊕ x_j}`
    #[serde(with = "crate::rational::serde_fraction")]
    pub n_entry: Rational,
}

pub fn grothendieck_vectors(
    x: &Bitstring,
    m: &Matching,
    i: Index,
    weight: &Rational,
) -> Result<GrothendieckVectors> {
    let n = m.n();
    if x.len() != n {
        return Err(Error::LengthMismatch { left: x.len(), right: n });
    }
    if i.value() >= n {
        return Err(Error::InvalidParameter(format!("vertex {i} out of range")));
    }
    let j = m.partner(i);
    let scale = 1.0 / (n as f64).sqrt();
    let xi = x.get(i.value());
    let v_x = (0..n)
        .map(|k| if xi ^ x.get(k) == 0 { scale } else { -scale })
        .collect();
    let mut v_y = vec![0.0; n];
    v_y[j.value()] = 1.0;
    let n_entry = if xi ^ x.get(j.value()) == 0 {
        weight.clone()
    } else {
        -weight.clone()
    };
    Ok(GrothendieckVectors {
        v_x,
        v_y,
        partner: j,
        n_entry,
    })
}

/// Shared randomness of the rounding strategy: a vertex, a bit position and a
/// Gaussian direction.
#[derive(Clone, Debug, PartialEq)]
pub struct RoundingShared {
    pub i: Index,
    pub r: u32,
    pub g: Vec<f64>,
}

/// Gaussian hyperplane rounding of the vectors above. `A(x)` and `B(M)` are
/// the signs of `⟨g, v_x⟩` and `⟨g, v_y⟩` (zero counts as +1, encoded as bit
/// 0). Alice outputs `A(x)·e_r`; Bob outputs the edge at `i` and `B(M)·e_r` if
/// its endpoints differ at bit `r`, otherwise a uniform label.
///
/// The rule does not depend on the input distribution.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GrothendieckStrategy {
    n: usize,
    log_n: u32,
}

pub fn hyperplane_rounding_strategy(n: usize) -> Result<GrothendieckStrategy> {
    Ok(GrothendieckStrategy {
        n,
        log_n: game_log2(n)?,
    })
}

impl GrothendieckStrategy {
    /// Alice's rounded sign as a bit.
    pub fn alice_bit(&self, x: &Bitstring, sh: &RoundingShared) -> u8 {
        let xi = x.get(sh.i.value());
        let dot: f64 = sh
            .g
            .iter()
            .enumerate()
            .map(|(k, &gk)| if xi ^ x.get(k) == 0 { gk } else { -gk })
            .sum();
        u8::from(dot < 0.0)
    }

    /// Bob's edge and rounded sign as a bit.
    pub fn bob_bit(&self, m: &Matching, sh: &RoundingShared) -> (Edge, u8) {
        let j = m.partner(sh.i);
        let edge = Edge::new(sh.i, j).expect("perfect matching");
        (edge, u8::from(sh.g[j.value()] < 0.0))
    }
}

impl NonlocalStrategy for GrothendieckStrategy {
    type Shared = RoundingShared;

    fn n(&self) -> usize {
        self.n
    }

    fn shared_support(&self) -> Option<Vec<RoundingShared>> {
        None
    }

    fn sample_shared(&self, rng: &mut dyn RngCore) -> RoundingShared {
        RoundingShared {
            i: Index(rng.random_range(0..self.n as u32)),
            r: rng.random_range(0..self.log_n),
            g: (0..self.n).map(|_| rng.sample(StandardNormal)).collect(),
        }
    }

    fn alice(&self, x: &Bitstring, sh: &RoundingShared) -> Vec<Index> {
        vec![Index((self.alice_bit(x, sh) as u32) << sh.r)]
    }

    fn bob(&self, m: &Matching, sh: &RoundingShared) -> Vec<BobMove> {
        let (edge, bit) = self.bob_bit(m, sh);
        if edge.xor().bit(sh.r) == 1 {
            vec![BobMove {
                edge,
                b: Index((bit as u32) << sh.r),
            }]
        } else {
            all_labels(self.n)
                .into_iter()
                .map(|b| BobMove { edge, b })
                .collect()
        }
    }

    fn sample_bob(&self, m: &Matching, sh: &RoundingShared, rng: &mut dyn RngCore) -> BobMove {
        let (edge, bit) = self.bob_bit(m, sh);
        let b = if edge.xor().bit(sh.r) == 1 {
            Index((bit as u32) << sh.r)
        } else {
            Index(rng.random_range(0..self.n as u32))
        };
        BobMove { edge, b }
    }
}

/// Expected advantage of the rounding strategy under uniform inputs:
/// `Pr[bit r of i⊕j is set] · (2/π) arcsin(1/√n)` with the first factor equal
/// to `(n/2)/(n−1)`.
pub fn uniform_rounding_advantage(n: usize) -> f64 {
    let nf = n as f64;
    (nf / 2.0) / (nf - 1.0) * FRAC_2_PI * (1.0 / nf.sqrt()).asin()
}

/// Guaranteed advantage `1/(K_G √n log n)` for a given Grothendieck constant,
/// i.e. winning probability `1/2 + 1/(2 K_G √n log n)`.
pub fn rounding_advantage_floor(n: usize, k_g: f64) -> f64 {
    let nf = n as f64;
    1.0 / (k_g * nf.sqrt() * nf.log2())
}

/// Ten fixed pairs of unit vectors with inner products spread over (−1, 1).
pub fn fixed_vector_pairs() -> Vec<(Vec<f64>, Vec<f64>)> {
    let mut pairs: Vec<(Vec<f64>, Vec<f64>)> = [1.0, 2.0, 3.0, 4.0, 6.0, 8.0, 9.0, 11.0]
        .iter()
        .map(|&k: &f64| {
            let t = k * std::f64::consts::PI / 12.0;
            (vec![1.0, 0.0, 0.0], vec![t.cos(), t.sin(), 0.0])
        })
        .collect();
    let x = Bitstring::parse("0110100110010110").expect("literal");
    let m = Matching::from_pairs(
        16,
        &[(0, 5), (1, 2), (3, 4), (6, 9), (7, 8), (10, 15), (11, 12), (13, 14)],
    )
    .expect("literal");
    for i in [0u32, 1] {
        let v = grothendieck_vectors(&x, &m, Index(i), &Rational::from_integer(1.into()))
            .expect("literal");
        pairs.push((v.v_x, v.v_y));
    }
    pairs
}

/// Monte Carlo check of `E[sign⟨g,u⟩ sign⟨g,v⟩] = (2/π) arcsin⟨u,v⟩`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ArcsinCheck {
    pub inner_product: f64,
    pub expected: f64,
    pub estimate: f64,
    /// Standard error from the exact variance `1 − expected²`.
    pub std_error: f64,
    pub z_score: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub within_4_sigma: bool,
}

/// Runs the check on each pair with `samples` Gaussian draws. Pair `k` uses
/// the seed `seed + k`.
pub fn arcsin_identity_check(
    pairs: &[(Vec<f64>, Vec<f64>)],
    samples: u64,
    seed: u64,
) -> Result<Vec<ArcsinCheck>> {
    if samples == 0 {
        return Err(Error::InvalidParameter("samples must be positive".into()));
    }
    pairs
        .iter()
        .enumerate()
        .map(|(k, (u, v))| {
            if u.len() != v.len() {
                return Err(Error::LengthMismatch { left: u.len(), right: v.len() });
            }
            let inner: f64 = u.iter().zip(v).map(|(a, b)| a * b).sum();
            let expected = FRAC_2_PI * inner.clamp(-1.0, 1.0).asin();
            let agree: u64 = run_batches(samples, seed.wrapping_add(k as u64), |rng, count| {
                let mut agree = 0u64;
                let mut g = vec![0.0f64; u.len()];
                for _ in 0..count {
                    g.iter_mut().for_each(|x| *x = rng.sample(StandardNormal));
                    let su: f64 = g.iter().zip(u).map(|(a, b)| a * b).sum();
                    let sv: f64 = g.iter().zip(v).map(|(a, b)| a * b).sum();
                    agree += u64::from((su < 0.0) == (sv < 0.0));
                }
                agree
            })
            .into_iter()
            .sum();
            let estimate = (2.0 * agree as f64 - samples as f64) / samples as f64;
            let std_error = ((1.0 - expected * expected).max(0.0) / samples as f64).sqrt();
            let z_score = if std_error > 0.0 {
                (estimate - expected) / std_error
            } else if estimate == expected {
                0.0
            } else {
                f64::INFINITY
            };
            let half_width = Z_99 * std_error;
            Ok(ArcsinCheck {
                inner_product: inner,
                expected,
                estimate,
                std_error,
                z_score,
                ci_low: estimate - half_width,
                ci_high: estimate + half_width,
                within_4_sigma: z_score.abs() <= 4.0,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::games::hmnl_wins;
    use crate::rational::ratio;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn dot(u: &[f64], v: &[f64]) -> f64 {
        u.iter().zip(v).map(|(a, b)| a * b).sum()
    }

    #[test]
    fn vectors_are_unit_and_correlated() {
        let x = Bitstring::parse("0110100110010110").unwrap();
        let m = Matching::from_pairs(
            16,
            &[(0, 5), (1, 2), (3, 4), (6, 9), (7, 8), (10, 15), (11, 12), (13, 14)],
        )
        .unwrap();
        for i in 0..16u32 {
            let v = grothendieck_vectors(&x, &m, Index(i), &ratio(1, 3)).unwrap();
            assert!((dot(&v.v_x, &v.v_x) - 1.0).abs() < 1e-12);
            assert!((dot(&v.v_y, &v.v_y) - 1.0).abs() < 1e-12);
            let j = v.partner.value();
            let s = if x.get(i as usize) == x.get(j) { 1.0 } else { -1.0 };
            assert!((dot(&v.v_x, &v.v_y) - s / 4.0).abs() < 1e-12);
            assert_eq!(v.n_entry, ratio(s as i64, 3));
        }
        let zero = Bitstring::zeros(16);
        let v = grothendieck_vectors(&zero, &m, Index(3), &ratio(1, 1)).unwrap();
        assert!(v.v_x.iter().all(|&c| (c - 0.25).abs() < 1e-15));
    }

    #[test]
    fn informative_round_reduces_to_signs() {
        let s = hyperplane_rounding_strategy(16).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut seen = 0;
        for _ in 0..2000 {
            let x = Bitstring::random(16, &mut rng);
            let m = crate::model::sample_full_matching(16, &mut rng);
            let sh = s.sample_shared(&mut rng);
            let a = s.alice(&x, &sh)[0];
            let moves = s.bob(&m, &sh);
            if moves.len() == 1 {
                seen += 1;
                let mv = moves[0];
                let (_, bb) = s.bob_bit(&m, &sh);
                let ab = s.alice_bit(&x, &sh);
                let target = x.get(mv.edge.i.value()) ^ x.get(mv.edge.j.value());
                assert_eq!(hmnl_wins(&x, a, mv.edge, mv.b), ab ^ bb == target);
            } else {
                assert_eq!(moves.len(), 16);
            }
        }
        assert!(seen > 500);
    }

    #[test]
    fn closed_form_advantage() {
        assert!((uniform_rounding_advantage(16) - 0.0858).abs() < 1e-3);
        assert!(uniform_rounding_advantage(16) > rounding_advantage_floor(16, 1.68));
        assert!((rounding_advantage_floor(16, 2.0) - 1.0 / 32.0).abs() < 1e-15);
    }

    #[test]
    fn arcsin_identity_small_run() {
        let checks = arcsin_identity_check(&fixed_vector_pairs(), 20_000, 7).unwrap();
        assert_eq!(checks.len(), 10);
        assert!(checks.iter().all(|c| c.within_4_sigma), "{checks:?}");
        let again = arcsin_identity_check(&fixed_vector_pairs(), 20_000, 7).unwrap();
        assert_eq!(checks, again);
    }
}
