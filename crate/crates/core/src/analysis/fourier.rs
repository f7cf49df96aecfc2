//! Fourier diagnostics of a communication protocol.
//!
//! For each message `m` with class `X_m = {x : message(x) = m}`:
//! `p_m = |X_m| / 2^n`, pairwise biases `β_ij = E_{x∈X_m}[(-1)^{x_i+x_j}]`,
//! Bob's edge distribution `q_m(i,j)` over a uniform matching, and the measured
//! advantage `ε_m = Pr[v = x_i ⊕ x_j | m] − 1/2`. Pairs are unordered, so `q_m`
//! sums to 1 over `i < j`.
//!
//! The five checks are exact inequalities that any protocol satisfies:
//! 1. `1/2 + ε_m ≤ E_{q_m}[1/2 + |β_ij|/2]`,
//! 2. `(Σ q|β|)² ≤ Σ q² · Σ β²` (Cauchy–Schwarz, squared to stay rational),
//! 3. `Σ q² ≤ max q · Σ q ≤ bound` with bound `1/(n−1)` (full family) or `2/n`
//!    (bijective-XOR family),
//! 4. `Σ_m p_m ε_m` equals the protocol's overall advantage over 1/2,
//! 5. `H(p) ≤ c`.

use std::collections::BTreeMap;
use std::sync::Arc;

use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use super::evaluate::{exact_win_probability, mc_win_probability, EvaluationMode};
use super::player::Player;
use super::stats::{entropy, run_batches, wilson_interval, Quantity, CI_LEVEL, Z_99};
use crate::caps::{self, Caps};
use crate::classical::CommProtocol;
use crate::error::{Error, Result};
use crate::games::{GameInstance, GameVariant};
use crate::model::{Bitstring, FamilyKind, Matching};
use crate::parallel::map_range;
use crate::rational::{self, ratio, ratio_u128, Rational};

/// Slack for the floating-point entropy comparison.
pub const ENTROPY_SLACK: f64 = 1e-12;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MessageChecks {
    pub best_guess: bool,
    pub cauchy_schwarz: bool,
    pub q_norm: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FourierChecks {
    pub best_guess: bool,
    pub cauchy_schwarz: bool,
    pub q_norm: bool,
    pub epsilon_decomposition: bool,
    pub entropy_bound: bool,
}

impl FourierChecks {
    pub fn all(&self) -> bool {
        self.best_guess
            && self.cauchy_schwarz
            && self.q_norm
            && self.epsilon_decomposition
            && self.entropy_bound
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MessageRecord {
    pub message: Bitstring,
    pub class_size: u64,
    #[serde(with = "rational::serde_fraction")]
    pub p_m: Rational,
    pub epsilon_m: Quantity,
    /// `Σ_{i≠j} β_ij²` over ordered pairs.
    #[serde(with = "rational::serde_fraction")]
    pub beta_sq_sum: Rational,
    #[serde(with = "rational::serde_fraction")]
    pub max_abs_beta: Rational,
    /// `E_{q_m}[1/2 + |β_ij|/2]`
    pub best_guess_bound: Quantity,
    /// `Σ q|β|`
    pub cs_lhs: Quantity,
    /// `√(Σ q²) · √(Σ β²)` over unordered pairs.
    pub cs_rhs: f64,
    pub q_sq_sum: Quantity,
    pub q_max: Quantity,
    /// Upper end of the Wilson interval on the largest `q` (Monte Carlo only).
    pub q_max_ci_high: Option<f64>,
    /// `√(Σ_{i≠j} β²) / log₂(1/p_m)`, for `p_m < 1`.
    pub kkl_ratio: Option<f64>,
    pub checks: MessageChecks,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FourierReport {
    pub n: usize,
    pub c: usize,
    pub family: FamilyKind,
    pub strategy: String,
    /// How `q_m` and `ε_m` were obtained.
    pub q_mode: EvaluationMode,
    pub samples: Option<u64>,
    pub seed: Option<u64>,
    pub ci_level: Option<f64>,
    #[serde(with = "rational::serde_fraction")]
    pub q_bound: Rational,
    pub messages: Vec<MessageRecord>,
    /// `Σ_m p_m ε_m`
    pub epsilon: Quantity,
    /// Overall winning probability minus 1/2, from the evaluator.
    pub epsilon_direct: Quantity,
    pub entropy: f64,
    pub kkl_ratio_max: Option<f64>,
    pub checks: FourierChecks,
}

/// Per class: number of inputs and `Σ_{x∈X_m} (-1)^{x_i+x_j}` for `i < j`,
/// stored at `i * n + j`.
struct Class {
    message: u64,
    size: u64,
    corr: Vec<i64>,
}

fn classes(protocol: &dyn CommProtocol, n: usize) -> Vec<Class> {
    let chunk = 1usize << n.min(10);
    let parts = map_range((1usize << n) / chunk, |k| {
        let mut local: BTreeMap<u64, (u64, Vec<i64>)> = BTreeMap::new();
        for xv in k * chunk..(k + 1) * chunk {
            let x = Bitstring::new(xv as u64, n).expect("in range");
            let entry = local
                .entry(protocol.message(&x).bits())
                .or_insert_with(|| (0, vec![0; n * n]));
            entry.0 += 1;
            for i in 0..n {
                for j in i + 1..n {
                    entry.1[i * n + j] += 1 - 2 * (((xv >> i) ^ (xv >> j)) & 1) as i64;
                }
            }
        }
        local
    });
    let mut all: BTreeMap<u64, (u64, Vec<i64>)> = BTreeMap::new();
    for part in parts {
        for (m, (size, corr)) in part {
            let entry = all.entry(m).or_insert_with(|| (0, vec![0; n * n]));
            entry.0 += size;
            entry.1.iter_mut().zip(&corr).for_each(|(a, b)| *a += b);
        }
    }
    all.into_iter()
        .map(|(message, (size, corr))| Class {
            message,
            size,
            corr,
        })
        .collect()
}

/// Joint law of Bob's (edge, v) per class, as `qv[(i*n+j)*2 + v]`.
struct Decisions {
    qv: Vec<Vec<Rational>>,
    /// Largest raw count per class (Monte Carlo only).
    max_counts: Option<Vec<u64>>,
}

fn exact_decisions(
    protocol: &dyn CommProtocol,
    n: usize,
    c: usize,
    classes: &[Class],
    members: &[Matching],
) -> Decisions {
    let qv = map_range(classes.len(), |k| {
        let msg = Bitstring::new(classes[k].message, c).expect("message fits");
        let mut qv = vec![Rational::zero(); 2 * n * n];
        for m in members {
            let ds = protocol.decide(&msg, m);
            let w = ratio_u128(1, (members.len() * ds.len()) as u128);
            for d in ds {
                qv[(d.edge.i.value() * n + d.edge.j.value()) * 2 + d.v as usize] += &w;
            }
        }
        qv
    });
    Decisions {
        qv,
        max_counts: None,
    }
}

fn sampled_decisions(
    instance: &GameInstance,
    protocol: &dyn CommProtocol,
    c: usize,
    classes: &[Class],
    samples: u64,
    seed: u64,
) -> Result<Decisions> {
    let n = instance.n();
    let msgs: Vec<Bitstring> = classes
        .iter()
        .map(|cl| Bitstring::new(cl.message, c).expect("message fits"))
        .collect();
    let parts = run_batches(samples, seed, |rng, count| -> Result<Vec<Vec<u64>>> {
        let mut counts = vec![vec![0u64; 2 * n * n]; msgs.len()];
        for _ in 0..count {
            let m = instance.family().sample(rng)?;
            for (k, msg) in msgs.iter().enumerate() {
                let d = protocol.sample_decision(msg, &m, rng);
                counts[k][(d.edge.i.value() * n + d.edge.j.value()) * 2 + d.v as usize] += 1;
            }
        }
        Ok(counts)
    });
    let mut counts = vec![vec![0u64; 2 * n * n]; msgs.len()];
    for part in parts {
        for (acc, p) in counts.iter_mut().zip(part?) {
            acc.iter_mut().zip(&p).for_each(|(a, b)| *a += b);
        }
    }
    let max_counts = counts
        .iter()
        .map(|cl| {
            cl.chunks(2).map(|p| p[0] + p[1]).max().unwrap_or(0)
        })
        .collect();
    let qv = counts
        .into_iter()
        .map(|cl| {
            cl.into_iter()
                .map(|k| ratio_u128(k as u128, samples as u128))
                .collect()
        })
        .collect();
    Ok(Decisions {
        qv,
        max_counts: Some(max_counts),
    })
}

/// Builds the report. `q_m` is exact when the family is listed and the work
/// fits `caps.exact_work`; otherwise it is estimated from `samples` uniform
/// matchings (seeded by `seed`), and the overall advantage used by check 4 is
/// a Monte Carlo estimate as well.
pub fn fourier_report(
    instance: &GameInstance,
    protocol: Arc<dyn CommProtocol>,
    label: &str,
    caps: &Caps,
    samples: u64,
    seed: u64,
) -> Result<FourierReport> {
    let n = instance.n();
    if instance.variant() != GameVariant::HmComm {
        return Err(Error::InvalidParameter(
            "Fourier diagnostics apply to the communication game".into(),
        ));
    }
    if !instance.is_uniform() {
        return Err(Error::InvalidParameter(
            "Fourier diagnostics assume uniform inputs".into(),
        ));
    }
    if protocol.n() != n {
        return Err(Error::LengthMismatch {
            left: protocol.n(),
            right: n,
        });
    }
    caps::check("Fourier bias n", n as u128, caps.beta_n as u128)?;
    let c = protocol.message_bits();
    let classes = classes(protocol.as_ref(), n);
    let listed = instance.family().is_listed()
        && (classes.len() as u128).saturating_mul(instance.family().cardinality())
            <= caps.exact_work;
    let player = Player::Comm(protocol.clone());
    let (decisions, q_mode, direct) = if listed {
        let members = instance.family().members()?;
        if members.is_empty() {
            return Err(Error::EmptyFamily(instance.family().kind().name()));
        }
        let d = exact_decisions(protocol.as_ref(), n, c, &classes, members);
        let direct = exact_win_probability(instance, &player, label, caps)?;
        (d, EvaluationMode::Exact, direct)
    } else {
        if samples == 0 {
            return Err(Error::InvalidParameter(
                "sampling Bob's decisions needs samples > 0".into(),
            ));
        }
        let d = sampled_decisions(instance, protocol.as_ref(), c, &classes, samples, seed)?;
        let direct = mc_win_probability(instance, &player, label, samples, seed)?;
        (d, EvaluationMode::MonteCarlo, direct)
    };
    let q_bound = match instance.family().kind() {
        FamilyKind::Full => ratio(1, n as i64 - 1),
        FamilyKind::BijectiveXor => ratio(2, n as i64),
    };
    let half = ratio(1, 2);
    let inputs = 1u64 << n;

    let mut messages = Vec::with_capacity(classes.len());
    let mut epsilon = Rational::zero();
    for (k, cl) in classes.iter().enumerate() {
        let qv = &decisions.qv[k];
        let size = Rational::from_integer((cl.size as i64).into());
        let mut eps_m = Rational::zero();
        let mut q_abs_beta = Rational::zero();
        let mut q_sq = Rational::zero();
        let mut q_sum = Rational::zero();
        let mut q_max = Rational::zero();
        let mut beta_sq = Rational::zero();
        let mut max_abs_beta = Rational::zero();
        for i in 0..n {
            for j in i + 1..n {
                let idx = i * n + j;
                let beta = Rational::from_integer(cl.corr[idx].into()) / &size;
                let (q0, q1) = (&qv[2 * idx], &qv[2 * idx + 1]);
                let q = q0 + q1;
                eps_m += (q0 - q1) * &beta;
                q_abs_beta += &q * beta.abs();
                q_sq += &q * &q;
                if q > q_max {
                    q_max = q.clone();
                }
                q_sum += q;
                beta_sq += &beta * &beta;
                if beta.abs() > max_abs_beta {
                    max_abs_beta = beta.abs();
                }
            }
        }
        eps_m /= Rational::from_integer(2.into());
        let best_guess_bound = &half + &q_abs_beta / Rational::from_integer(2.into());
        let p_m = ratio_u128(cl.size as u128, inputs as u128);
        let (q_bound_ok, q_max_ci_high) = match &decisions.max_counts {
            None => (&q_max * &q_sum <= q_bound, None),
            Some(max_counts) => {
                let (lo, hi) = wilson_interval(max_counts[k], samples, Z_99);
                (lo <= rational::to_f64(&q_bound), Some(hi))
            }
        };
        let checks = MessageChecks {
            best_guess: &half + &eps_m <= best_guess_bound,
            cauchy_schwarz: &q_abs_beta * &q_abs_beta <= &q_sq * &beta_sq,
            q_norm: q_sq <= &q_max * &q_sum && q_bound_ok,
        };
        let ordered_beta_sq = Rational::from_integer(2.into()) * &beta_sq;
        let kkl_ratio = (cl.size < inputs).then(|| {
            rational::to_f64(&ordered_beta_sq).sqrt() / (1.0 / rational::to_f64(&p_m)).log2()
        });
        epsilon += &p_m * &eps_m;
        messages.push(MessageRecord {
            message: Bitstring::new(cl.message, c).expect("message fits"),
            class_size: cl.size,
            p_m,
            epsilon_m: Quantity::Exact(eps_m),
            beta_sq_sum: ordered_beta_sq,
            max_abs_beta,
            best_guess_bound: Quantity::Exact(best_guess_bound),
            cs_lhs: Quantity::Exact(q_abs_beta),
            cs_rhs: rational::to_f64(&q_sq).sqrt() * rational::to_f64(&beta_sq).sqrt(),
            q_sq_sum: Quantity::Exact(q_sq),
            q_max: Quantity::Exact(q_max),
            q_max_ci_high,
            kkl_ratio,
            checks,
        });
    }
    let (epsilon, epsilon_direct, decomposition) = match direct.winning_probability {
        Quantity::Exact(ref p) => {
            let direct = p - &half;
            let ok = direct == epsilon;
            (Quantity::Exact(epsilon), Quantity::Exact(direct), ok)
        }
        Quantity::Estimate(p) => {
            // Two independent estimates of the same advantage.
            let est = rational::to_f64(&epsilon);
            let se = direct.std_error.unwrap_or(0.0);
            let ok = (est - (p - 0.5)).abs() <= Z_99 * std::f64::consts::SQRT_2 * se;
            (Quantity::Estimate(est), Quantity::Estimate(p - 0.5), ok)
        }
    };
    if q_mode == EvaluationMode::MonteCarlo {
        for rec in &mut messages {
            for q in [
                &mut rec.epsilon_m,
                &mut rec.best_guess_bound,
                &mut rec.cs_lhs,
                &mut rec.q_sq_sum,
                &mut rec.q_max,
            ] {
                *q = Quantity::Estimate(q.to_f64());
            }
        }
    }
    let p: Vec<f64> = messages.iter().map(|r| rational::to_f64(&r.p_m)).collect();
    let h = entropy(&p);
    let checks = FourierChecks {
        best_guess: messages.iter().all(|r| r.checks.best_guess),
        cauchy_schwarz: messages.iter().all(|r| r.checks.cauchy_schwarz),
        q_norm: messages.iter().all(|r| r.checks.q_norm),
        epsilon_decomposition: decomposition,
        entropy_bound: h <= c as f64 + ENTROPY_SLACK,
    };
    let kkl_ratio_max = messages
        .iter()
        .filter_map(|r| r.kkl_ratio)
        .fold(None, |acc: Option<f64>, v| Some(acc.map_or(v, |a| a.max(v))));
    let mc = q_mode == EvaluationMode::MonteCarlo;
    Ok(FourierReport {
        n,
        c,
        family: instance.family().kind(),
        strategy: label.to_owned(),
        q_mode,
        samples: mc.then_some(samples),
        seed: mc.then_some(seed),
        ci_level: mc.then_some(CI_LEVEL),
        q_bound,
        messages,
        epsilon,
        epsilon_direct,
        entropy: h,
        kkl_ratio_max,
        checks,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classical::{majority_block_protocol, Decision, TableProtocol};
    use crate::model::MatchingFamily;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn comm(n: usize, kind: FamilyKind) -> GameInstance {
        GameInstance::uniform(n, GameVariant::HmComm, kind).unwrap()
    }

    fn constant_decisions(family: &MatchingFamily, c: usize) -> Vec<Decision> {
        let members = family.members().unwrap();
        (0..members.len() << c)
            .map(|k| Decision {
                edge: members[k % members.len()].edges()[0],
                v: 0,
            })
            .collect()
    }

    #[test]
    fn single_message_has_no_bias() {
        let family = MatchingFamily::new(8, FamilyKind::Full).unwrap();
        let p = TableProtocol::new(family.clone(), 0, vec![0; 256], constant_decisions(&family, 0))
            .unwrap();
        let r = fourier_report(&comm(8, FamilyKind::Full), Arc::new(p), "const", &Caps::default(), 0, 0)
            .unwrap();
        assert_eq!(r.messages.len(), 1);
        assert!(r.messages[0].beta_sq_sum.is_zero());
        assert_eq!(r.epsilon, Quantity::Exact(Rational::zero()));
        assert_eq!(r.entropy, 0.0);
        assert!(r.kkl_ratio_max.is_none());
        assert!(r.checks.all());
    }

    #[test]
    fn fixing_one_bit_leaves_pairs_unbiased() {
        let family = MatchingFamily::new(8, FamilyKind::Full).unwrap();
        let messages = (0..256u32).map(|x| x & 1).collect();
        let p = TableProtocol::new(family.clone(), 1, messages, constant_decisions(&family, 1)).unwrap();
        let r = fourier_report(&comm(8, FamilyKind::Full), Arc::new(p), "x0", &Caps::default(), 0, 0)
            .unwrap();
        assert_eq!(r.messages.len(), 2);
        for rec in &r.messages {
            assert_eq!(rec.p_m, ratio(1, 2));
            assert!(rec.beta_sq_sum.is_zero());
            assert_eq!(rec.epsilon_m, Quantity::Exact(Rational::zero()));
        }
        assert!((r.entropy - 1.0).abs() < 1e-15);
        assert!(r.checks.all());
    }

    #[test]
    fn random_protocols_pass_all_checks() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for c in 1..=3 {
            for _ in 0..5 {
                let p = TableProtocol::random(8, FamilyKind::Full, c, &Caps::default(), &mut rng).unwrap();
                let r = fourier_report(&comm(8, FamilyKind::Full), Arc::new(p), "t", &Caps::default(), 0, 0)
                    .unwrap();
                assert!(r.checks.all(), "{:?}", r.checks);
            }
        }
    }

    #[test]
    fn best_guess_protocol_has_positive_advantage() {
        let family = MatchingFamily::new(8, FamilyKind::Full).unwrap();
        let messages: Vec<u32> = (0..256u32).map(|x| (x ^ (x >> 1)) & 1).collect();
        let p = TableProtocol::best_guess(family, 1, messages).unwrap();
        let r = fourier_report(&comm(8, FamilyKind::Full), Arc::new(p), "bg", &Caps::default(), 0, 0)
            .unwrap();
        assert!(r.epsilon.to_f64() > 0.0);
        assert!(r.checks.all());
        assert!(r.kkl_ratio_max.unwrap() > 0.0);
    }

    #[test]
    fn bijective_family_bound() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let p = TableProtocol::random(8, FamilyKind::BijectiveXor, 2, &Caps::default(), &mut rng).unwrap();
        let r = fourier_report(&comm(8, FamilyKind::BijectiveXor), Arc::new(p), "t", &Caps::default(), 0, 0)
            .unwrap();
        assert_eq!(r.q_bound, ratio(1, 4));
        assert!(r.checks.all());
    }

    #[test]
    fn sampled_mode_for_unlisted_family() {
        let p = majority_block_protocol(16, 2).unwrap();
        let r = fourier_report(&comm(16, FamilyKind::Full), Arc::new(p), "majority:c=2", &Caps::default(), 20_000, 0)
            .unwrap();
        assert_eq!(r.q_mode, EvaluationMode::MonteCarlo);
        assert_eq!(r.messages.len(), 4);
        assert!(r.checks.all(), "{:?}", r.checks);
    }
}
