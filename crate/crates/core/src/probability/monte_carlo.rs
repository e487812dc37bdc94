use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use super::{CoverageQuery, Estimate};
use crate::error::{Error, Result};
use crate::mask::SubsetMask;
use crate::rational;

/// The generator behind every seeded path: ChaCha8 keyed by the master seed,
/// with the 64-bit stream id selecting an independent substream.
pub type StreamRng = ChaCha8Rng;

/// Sample budgets are split into this many blocks, block `b` drawing from
/// stream `b`, so results do not depend on the thread count.
const BLOCKS: u64 = 16;

pub fn stream_rng(seed: u64, stream: u64) -> StreamRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct McConfig {
    pub samples: u64,
    pub confidence: f64,
    pub seed: u64,
}

impl McConfig {
    pub fn new(samples: u64, confidence: f64, seed: u64) -> Self {
        Self {
            samples,
            confidence,
            seed,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.samples < 100 {
            return Err(Error::invalid(format!(
                "{} samples; at least 100 required",
                self.samples
            )));
        }
        if !(self.confidence > 0.0 && self.confidence < 1.0) {
            return Err(Error::invalid(format!(
                "confidence {} outside (0, 1)",
                self.confidence
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PBiasedParams {
    pub p: f64,
    pub n: usize,
}

/// Bernoulli draw via a 64-bit threshold; `p <= 0` never fires, `p >= 1` always does.
#[derive(Clone, Copy)]
pub(crate) struct Coin(Option<u64>);

impl Coin {
    pub(crate) fn new(p: f64) -> Self {
        if p >= 1.0 {
            Coin(None)
        } else {
            Coin(Some((p.max(0.0) * 18_446_744_073_709_551_616.0) as u64))
        }
    }

    #[inline]
    pub(crate) fn flip<R: Rng + ?Sized>(self, rng: &mut R) -> bool {
        match self.0 {
            None => true,
            Some(t) => rng.random::<u64>() < t,
        }
    }
}

/// A `p`-biased subset of `[n]`.
pub fn sample_p_subset<R: Rng + ?Sized>(params: &PBiasedParams, rng: &mut R) -> SubsetMask {
    let coin = Coin::new(params.p);
    let words = params.n.div_ceil(64);
    SubsetMask::from_words((0..words).map(|w| {
        let width = (params.n - w * 64).min(64);
        (0..width).fold(
            0u64,
            |acc, b| if coin.flip(rng) { acc | 1 << b } else { acc },
        )
    }))
}

/// Half width of a symmetric interval around `hat` that contains the Wilson
/// score interval at the given confidence.
pub fn wilson_half_width(successes: u64, samples: u64, confidence: f64) -> f64 {
    let n = samples as f64;
    let hat = successes as f64 / n;
    let z = Normal::standard().inverse_cdf(1.0 - (1.0 - confidence) / 2.0);
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (hat + z2 / (2.0 * n)) / denom;
    let spread = z / denom * (hat * (1.0 - hat) / n + z2 / (4.0 * n * n)).sqrt();
    let (lo, hi) = (center - spread, center + spread);
    (hat - lo).max(hi - hat).max(0.0)
}

pub(super) fn estimate(query: &CoverageQuery, config: &McConfig) -> Result<Estimate> {
    config.validate()?;
    let finish = |successes: u64| Estimate {
        value: successes as f64 / config.samples as f64,
        half_width: wilson_half_width(successes, config.samples, config.confidence),
        confidence: config.confidence,
        samples: config.samples,
        seed: config.seed,
    };
    if query.members.is_empty() {
        return Ok(finish(0));
    }
    if query.certain() {
        return Ok(finish(config.samples));
    }

    let free: Vec<usize> = query.free_elements().elements().collect();
    let index: HashMap<usize, usize> = free.iter().enumerate().map(|(i, &e)| (e, i)).collect();
    let words = free.len().div_ceil(64);
    let pack = |m: &SubsetMask| -> Vec<u64> {
        let mut out = vec![0u64; words];
        for e in m.difference(&query.given).elements() {
            let i = index[&e];
            out[i / 64] |= 1 << (i % 64);
        }
        out
    };
    let members: Vec<Vec<u64>> = query.members.iter().map(pack).collect();
    let default_coin = Coin::new(rational::to_f64(&query.bias));
    let coins: Vec<Coin> = free
        .iter()
        .map(|e| match &query.alt {
            Some((class, bias)) if class.contains(*e) => Coin::new(rational::to_f64(bias)),
            _ => default_coin,
        })
        .collect();

    let successes: u64 = (0..BLOCKS)
        .into_par_iter()
        .map(|block| {
            let quota = config.samples / BLOCKS + u64::from(block < config.samples % BLOCKS);
            let mut rng = stream_rng(config.seed, block);
            let mut w = vec![0u64; words];
            let mut hits = 0u64;
            for _ in 0..quota {
                w.iter_mut().for_each(|x| *x = 0);
                for (i, coin) in coins.iter().enumerate() {
                    if coin.flip(&mut rng) {
                        w[i / 64] |= 1 << (i % 64);
                    }
                }
                if members
                    .iter()
                    .any(|m| m.iter().zip(&w).all(|(a, b)| a & !b == 0))
                {
                    hits += 1;
                }
            }
            hits
        })
        .sum();
    Ok(finish(successes))
}

/// Frequency of `event` over `p`-biased subsets of `[n]`, blocked and seeded
/// like every other estimate.
pub fn estimate_event<F>(n: usize, p: f64, config: &McConfig, event: F) -> Result<Estimate>
where
    F: Fn(&SubsetMask) -> bool + Sync,
{
    config.validate()?;
    let params = PBiasedParams { p, n };
    let successes: u64 = (0..BLOCKS)
        .into_par_iter()
        .map(|block| {
            let quota = config.samples / BLOCKS + u64::from(block < config.samples % BLOCKS);
            let mut rng = stream_rng(config.seed, block);
            (0..quota)
                .filter(|_| event(&sample_p_subset(&params, &mut rng)))
                .count() as u64
        })
        .sum();
    Ok(Estimate {
        value: successes as f64 / config.samples as f64,
        half_width: wilson_half_width(successes, config.samples, config.confidence),
        confidence: config.confidence,
        samples: config.samples,
        seed: config.seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sampler_boundaries() {
        let mut rng = stream_rng(1, 0);
        for _ in 0..100 {
            assert!(sample_p_subset(&PBiasedParams { p: 0.0, n: 70 }, &mut rng).is_empty());
            assert_eq!(
                sample_p_subset(&PBiasedParams { p: 1.0, n: 70 }, &mut rng).len(),
                70
            );
        }
    }

    #[test]
    fn sampler_near_one_has_mean_weight_within_three_sigma() {
        let p = 1.0 - f64::EPSILON;
        let n = 8;
        let mut rng = stream_rng(3, 0);
        let draws = 100_000;
        let total: usize = (0..draws)
            .map(|_| sample_p_subset(&PBiasedParams { p, n }, &mut rng).len())
            .sum();
        let mean = total as f64 / (draws * n) as f64;
        let sigma = (p * (1.0 - p) / (draws * n) as f64).sqrt();
        assert!((mean - p).abs() <= 3.0 * sigma + 1e-12, "mean {mean}");
    }

    #[test]
    fn sampler_half_has_binomial_mean() {
        let mut rng = stream_rng(11, 2);
        let draws = 100_000usize;
        let n = 4;
        let total: usize = (0..draws)
            .map(|_| sample_p_subset(&PBiasedParams { p: 0.5, n }, &mut rng).len())
            .sum();
        let mean = total as f64 / (draws * n) as f64;
        let sigma = (0.25 / (draws * n) as f64).sqrt();
        assert!((mean - 0.5).abs() <= 3.0 * sigma, "mean {mean}");
    }

    #[test]
    fn sampler_is_reproducible() {
        let params = PBiasedParams { p: 0.5, n: 4 };
        let a: Vec<_> = {
            let mut rng = stream_rng(42, 0);
            (0..5).map(|_| sample_p_subset(&params, &mut rng)).collect()
        };
        let b: Vec<_> = {
            let mut rng = stream_rng(42, 0);
            (0..5).map(|_| sample_p_subset(&params, &mut rng)).collect()
        };
        assert_eq!(a, b);
        let other: Vec<_> = {
            let mut rng = stream_rng(42, 1);
            (0..5).map(|_| sample_p_subset(&params, &mut rng)).collect()
        };
        assert_ne!(a, other);
    }

    #[test]
    fn wilson_half_width_is_sane() {
        let hw = wilson_half_width(50, 100, 0.95);
        assert!((hw - 0.096).abs() < 0.002, "{hw}");
        assert!(wilson_half_width(0, 100, 0.99) > 0.0);
        assert!(wilson_half_width(100, 100, 0.99) > 0.0);
        assert!(wilson_half_width(500, 1000, 0.99) > wilson_half_width(500, 1000, 0.9));
    }
}
