//! Seeded distributions and named substreams.
//!
//! Every random quantity in the library is drawn from a [`DistributionSpec`]
//! through a substream derived from one top-level seed and a stable site
//! name. Two runs with the same seed therefore replay every draw exactly,
//! and adding draws at one site never perturbs another.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, Zipf};
use serde::{Deserialize, Serialize};

use crate::error::{ForgeError, Result};

/// A closed family of scalar distributions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DistributionSpec {
    Constant { value: f64 },
    UniformInt { lo: i64, hi: i64 },
    Normal { mean: f64, sigma: f64 },
    Zipf { n: u64, s: f64 },
}

impl DistributionSpec {
    pub fn constant(value: f64) -> Self {
        DistributionSpec::Constant { value }
    }

    pub fn uniform_int(lo: i64, hi: i64) -> Self {
        DistributionSpec::UniformInt { lo, hi }
    }

    pub fn normal(mean: f64, sigma: f64) -> Self {
        DistributionSpec::Normal { mean, sigma }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            DistributionSpec::Constant { value } => {
                if !value.is_finite() {
                    return Err(ForgeError::InfeasibleSpec(format!(
                        "constant distribution value {value} is not finite"
                    )));
                }
            }
            DistributionSpec::UniformInt { lo, hi } => {
                if lo > hi {
                    return Err(ForgeError::InfeasibleSpec(format!(
                        "uniform_int bounds inverted: lo={lo} hi={hi}"
                    )));
                }
            }
            DistributionSpec::Normal { mean, sigma } => {
                if !mean.is_finite() || !sigma.is_finite() || sigma < 0.0 {
                    return Err(ForgeError::InfeasibleSpec(format!(
                        "normal distribution requires finite mean and sigma >= 0, got mean={mean} sigma={sigma}"
                    )));
                }
            }
            DistributionSpec::Zipf { n, s } => {
                if n < 1 || !(s > 0.0) {
                    return Err(ForgeError::InfeasibleSpec(format!(
                        "zipf distribution requires n >= 1 and s > 0, got n={n} s={s}"
                    )));
                }
            }
        }
        Ok(())
    }

    /// One real-valued draw.
    pub fn sample_f64<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            DistributionSpec::Constant { value } => value,
            DistributionSpec::UniformInt { lo, hi } => rng.gen_range(lo..=hi) as f64,
            DistributionSpec::Normal { mean, sigma } => {
                if sigma == 0.0 {
                    mean
                } else {
                    // sigma >= 0 validated on load; unwrap is unreachable.
                    Normal::new(mean, sigma).unwrap().sample(rng)
                }
            }
            DistributionSpec::Zipf { n, s } => Zipf::new(n, s).unwrap().sample(rng),
        }
    }

    /// One draw rounded to the nearest integer and clamped below.
    pub fn sample_clamped_int<R: Rng + ?Sized>(&self, rng: &mut R, min: i64) -> i64 {
        let v = self.sample_f64(rng).round();
        let v = if v.is_nan() { min as f64 } else { v };
        (v as i64).max(min)
    }

    /// Closed-form mean of the distribution.
    pub fn mean(&self) -> f64 {
        match *self {
            DistributionSpec::Constant { value } => value,
            DistributionSpec::UniformInt { lo, hi } => (lo + hi) as f64 / 2.0,
            DistributionSpec::Normal { mean, .. } => mean,
            DistributionSpec::Zipf { n, s } => {
                harmonic(n, s - 1.0) / harmonic(n, s)
            }
        }
    }

    /// Closed-form variance of the distribution.
    pub fn variance(&self) -> f64 {
        match *self {
            DistributionSpec::Constant { .. } => 0.0,
            DistributionSpec::UniformInt { lo, hi } => {
                let w = (hi - lo + 1) as f64;
                (w * w - 1.0) / 12.0
            }
            DistributionSpec::Normal { sigma, .. } => sigma * sigma,
            DistributionSpec::Zipf { n, s } => {
                let m = self.mean();
                harmonic(n, s - 2.0) / harmonic(n, s) - m * m
            }
        }
    }
}

fn harmonic(n: u64, s: f64) -> f64 {
    (1..=n).map(|k| (k as f64).powf(-s)).sum()
}

fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf29ce484222325;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x100000001b3);
    }
    h
}

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9e3779b97f4a7c15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

/// Derives the RNG for one named use site from the top-level seed.
///
/// Site names are part of the serialization contract: renaming one changes
/// every output produced under it.
pub fn substream_rng(seed: u64, site: &str) -> ChaCha8Rng {
    let mut state = seed ^ fnv1a64(site.as_bytes());
    let mut key = [0u8; 32];
    for chunk in key.chunks_mut(8) {
        chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
    }
    ChaCha8Rng::from_seed(key)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_always_returns_value() {
        let d = DistributionSpec::constant(7.0);
        let mut rng = substream_rng(1, "t");
        for _ in 0..32 {
            assert_eq!(d.sample_f64(&mut rng), 7.0);
        }
    }

    #[test]
    fn uniform_int_stays_in_bounds() {
        let d = DistributionSpec::uniform_int(3, 9);
        let mut rng = substream_rng(5, "t");
        for _ in 0..256 {
            let v = d.sample_f64(&mut rng);
            assert!((3.0..=9.0).contains(&v));
            assert_eq!(v, v.trunc());
        }
    }

    #[test]
    fn zero_sigma_normal_is_constant() {
        let d = DistributionSpec::normal(4.5, 0.0);
        let mut rng = substream_rng(9, "t");
        assert_eq!(d.sample_f64(&mut rng), 4.5);
    }

    #[test]
    fn zipf_support_is_one_to_n() {
        let d = DistributionSpec::Zipf { n: 5, s: 1.1 };
        let mut rng = substream_rng(2, "t");
        for _ in 0..256 {
            let v = d.sample_f64(&mut rng);
            assert!((1.0..=5.0).contains(&v));
        }
    }

    #[test]
    fn substreams_are_independent_and_stable() {
        let mut a1 = substream_rng(42, "alpha");
        let mut a2 = substream_rng(42, "alpha");
        let mut b = substream_rng(42, "beta");
        let xs1: Vec<u64> = (0..8).map(|_| a1.gen()).collect();
        let xs2: Vec<u64> = (0..8).map(|_| a2.gen()).collect();
        let ys: Vec<u64> = (0..8).map(|_| b.gen()).collect();
        assert_eq!(xs1, xs2);
        assert_ne!(xs1, ys);
    }

    #[test]
    fn validation_rejects_bad_params() {
        assert!(DistributionSpec::uniform_int(5, 2).validate().is_err());
        assert!(DistributionSpec::normal(0.0, -1.0).validate().is_err());
        assert!(DistributionSpec::Zipf { n: 0, s: 1.0 }.validate().is_err());
        assert!(DistributionSpec::Zipf { n: 3, s: 0.0 }.validate().is_err());
        assert!(DistributionSpec::constant(f64::NAN).validate().is_err());
    }

    #[test]
    fn closed_form_moments_match_samples() {
        let d = DistributionSpec::uniform_int(4, 8);
        let mut rng = substream_rng(11, "moments");
        let n = 200_000;
        let mean: f64 = (0..n).map(|_| d.sample_f64(&mut rng)).sum::<f64>() / n as f64;
        assert!((mean - d.mean()).abs() < 0.02, "mean {mean} vs {}", d.mean());
        assert_eq!(d.mean(), 6.0);
        assert!((d.variance() - 2.0).abs() < 1e-12);
    }
}
