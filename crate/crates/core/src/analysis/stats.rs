use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize, Serializer};

use crate::parallel::map_range;
use crate::rational::{self, Rational};

/// Two-sided 99% standard normal quantile.
pub const Z_99: f64 = 2.575_829_303_548_900_4;
pub const CI_LEVEL: f64 = 0.99;
/// Samples per Monte Carlo batch; each batch owns one random stream.
pub const BATCH_SIZE: u64 = 1 << 16;

/// Wilson score interval for `successes` out of `trials`.
pub fn wilson_interval(successes: u64, trials: u64, z: f64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let centre = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    ((centre - half).max(0.0), (centre + half).min(1.0))
}

/// Splits `samples` into fixed batches; batch `k` draws from
/// `ChaCha8Rng::seed_from_u64(seed)` on stream `k`. Results come back in batch
/// order, so the outcome depends only on `(samples, seed)`.
pub fn run_batches<T, F>(samples: u64, seed: u64, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(&mut ChaCha8Rng, u64) -> T + Sync + Send,
{
    let batches = samples.div_ceil(BATCH_SIZE) as usize;
    map_range(batches, |k| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(k as u64);
        let start = k as u64 * BATCH_SIZE;
        f(&mut rng, BATCH_SIZE.min(samples - start))
    })
}

/// Shannon entropy in bits, with `0 · log(1/0) = 0`.
pub fn entropy(p: &[f64]) -> f64 {
    p.iter()
        .filter(|&&q| q > 0.0)
        .map(|&q| -q * q.log2())
        .sum::<f64>()
        .max(0.0)
}

/// A number that is either exact or a floating-point estimate. Exact values
/// serialize as `"num/den"` strings, estimates as JSON numbers.
#[derive(Clone, Debug, PartialEq)]
pub enum Quantity {
    Exact(Rational),
    Estimate(f64),
}

impl Quantity {
    pub fn to_f64(&self) -> f64 {
        match self {
            Quantity::Exact(r) => rational::to_f64(r),
            Quantity::Estimate(v) => *v,
        }
    }

    pub fn exact(&self) -> Option<&Rational> {
        match self {
            Quantity::Exact(r) => Some(r),
            Quantity::Estimate(_) => None,
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, Quantity::Exact(_))
    }
}

impl std::fmt::Display for Quantity {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Quantity::Exact(r) => f.write_str(&rational::to_fraction_string(r)),
            Quantity::Estimate(v) => write!(f, "{v}"),
        }
    }
}

impl Serialize for Quantity {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Quantity::Exact(r) => s.serialize_str(&rational::to_fraction_string(r)),
            Quantity::Estimate(v) => s.serialize_f64(*v),
        }
    }
}

impl<'de> Deserialize<'de> for Quantity {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Text(String),
            Number(f64),
        }
        match Raw::deserialize(d)? {
            Raw::Text(t) => rational::parse_fraction(&t)
                .map(Quantity::Exact)
                .map_err(serde::de::Error::custom),
            Raw::Number(v) => Ok(Quantity::Estimate(v)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn wilson_contains_point_estimate() {
        let (lo, hi) = wilson_interval(500, 1000, Z_99);
        assert!(lo < 0.5 && 0.5 < hi);
        assert!((hi - lo - 2.0 * Z_99 * 0.5 / 1000f64.sqrt()).abs() < 1e-3);
        let (lo, hi) = wilson_interval(1000, 1000, Z_99);
        assert!(lo > 0.99 && hi > 1.0 - 1e-12);
        assert_eq!(wilson_interval(0, 0, Z_99), (0.0, 1.0));
    }

    #[test]
    fn batches_cover_all_samples_and_repeat() {
        let total = 3 * BATCH_SIZE + 17;
        let counts = run_batches(total, 9, |_, count| count);
        assert_eq!(counts.iter().sum::<u64>(), total);
        let a: Vec<u64> = run_batches(total, 9, |rng, _| rng.random());
        let b: Vec<u64> = run_batches(total, 9, |rng, _| rng.random());
        assert_eq!(a, b);
        assert_ne!(a[0], a[1]);
        assert_ne!(a, run_batches(total, 10, |rng, _| rng.random::<u64>()));
    }

    #[test]
    fn entropy_examples() {
        assert_eq!(entropy(&[1.0]), 0.0);
        assert!((entropy(&[0.25; 4]) - 2.0).abs() < 1e-15);
        assert!((entropy(&[0.5, 0.25, 0.25]) - 1.5).abs() < 1e-15);
        assert_eq!(entropy(&[0.0, 1.0]), 0.0);
    }

    #[test]
    fn quantity_json() {
        let q = Quantity::Exact(crate::rational::ratio(3, 4));
        assert_eq!(serde_json::to_string(&q).unwrap(), "\"3/4\"");
        let back: Quantity = serde_json::from_str("\"3/4\"").unwrap();
        assert_eq!(back, q);
        let e: Quantity = serde_json::from_str("0.25").unwrap();
        assert_eq!(e, Quantity::Estimate(0.25));
    }
}
