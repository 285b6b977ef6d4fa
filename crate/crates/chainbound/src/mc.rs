//! Reproducible Monte Carlo estimation.
//!
//! Sampling is chunked into independent ChaCha streams keyed by
//! `(seed, chunk index)` and merged in chunk order, so estimates are
//! bit-identical for a fixed seed regardless of how chunks might be
//! scheduled. Sums are Kahan-compensated in ascending index order.

use crate::error::{Error, Result};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

/// Sample count, RNG seed and chunk size for one estimation run.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct McConfig {
    pub n: u64,
    pub seed: u64,
    pub chunk: u64,
}

impl McConfig {
    pub fn new(n: u64, seed: u64) -> Self {
        McConfig { n, seed, chunk: 1 << 16 }
    }

    fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::BadConfig(format!("need at least 2 samples, got {}", self.n)));
        }
        if self.chunk == 0 {
            return Err(Error::BadConfig("chunk size must be positive".into()));
        }
        Ok(())
    }
}

/// Mean, standard error, sample count and seed: the carrier for every Monte
/// Carlo output.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct McEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub n: u64,
    pub seed: u64,
}

#[derive(Default, Clone, Copy)]
struct Kahan {
    sum: f64,
    carry: f64,
}

impl Kahan {
    fn add(&mut self, x: f64) {
        let y = x - self.carry;
        let t = self.sum + y;
        self.carry = (t - self.sum) - y;
        self.sum = t;
    }
}

/// Estimate `E[integrand(sample)]` with `sampler` drawing from a seeded
/// stream. `stderr = sample_std / sqrt(n)`.
pub fn estimate_expectation<T>(
    cfg: &McConfig,
    mut sampler: impl FnMut(&mut ChaCha8Rng) -> T,
    mut integrand: impl FnMut(&T) -> f64,
) -> Result<McEstimate> {
    cfg.validate()?;
    let mut sum = Kahan::default();
    let mut sum_sq = Kahan::default();
    let chunks = cfg.n.div_ceil(cfg.chunk);
    let mut drawn = 0u64;
    for chunk in 0..chunks {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        rng.set_stream(chunk);
        let take = cfg.chunk.min(cfg.n - drawn);
        for _ in 0..take {
            let v = integrand(&sampler(&mut rng));
            sum.add(v);
            sum_sq.add(v * v);
        }
        drawn += take;
    }
    let n = cfg.n as f64;
    let mean = sum.sum / n;
    let var = ((sum_sq.sum - n * mean * mean) / (n - 1.0)).max(0.0);
    Ok(McEstimate { mean, stderr: (var / n).sqrt(), n: cfg.n, seed: cfg.seed })
}

/// Two independent standard normal draws (Box-Muller).
pub fn standard_normal_pair(rng: &mut ChaCha8Rng) -> (f64, f64) {
    use rand::Rng;
    let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
    let u2: f64 = rng.gen_range(0.0..1.0);
    let r = (-2.0 * u1.ln()).sqrt();
    let phi = 2.0 * std::f64::consts::PI * u2;
    (r * phi.cos(), r * phi.sin())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn constant_integrand_has_exact_mean_and_zero_stderr() {
        let cfg = McConfig::new(1000, 7);
        let est = estimate_expectation(&cfg, |_| (), |_| 2.5).unwrap();
        assert_eq!(est.mean, 2.5);
        assert_eq!(est.stderr, 0.0);
    }

    #[test]
    fn uniform_mean_within_three_stderr() {
        let cfg = McConfig::new(100_000, 42);
        let est = estimate_expectation(&cfg, |rng| rng.gen_range(0.0..1.0), |x| *x).unwrap();
        assert!(
            (est.mean - 0.5).abs() <= 3.0 * est.stderr,
            "mean {} stderr {}",
            est.mean,
            est.stderr
        );
    }

    #[test]
    fn doubling_samples_shrinks_stderr_like_sqrt_two() {
        let small = estimate_expectation(
            &McConfig::new(50_000, 9),
            |rng| rng.gen_range(0.0..1.0),
            |x| *x,
        )
        .unwrap();
        let large = estimate_expectation(
            &McConfig::new(100_000, 9),
            |rng| rng.gen_range(0.0..1.0),
            |x| *x,
        )
        .unwrap();
        let ratio = small.stderr / large.stderr;
        assert!((1.2..=1.7).contains(&ratio), "stderr ratio {ratio}");
    }

    #[test]
    fn fixed_seed_reproduces_bitwise() {
        let run = || {
            estimate_expectation(
                &McConfig::new(10_000, 1234),
                |rng| standard_normal_pair(rng).0,
                |x| x * x,
            )
            .unwrap()
        };
        let a = run();
        let b = run();
        assert_eq!(a.mean.to_bits(), b.mean.to_bits());
        assert_eq!(a.stderr.to_bits(), b.stderr.to_bits());
    }

    #[test]
    fn undersized_runs_are_rejected() {
        let err = estimate_expectation(&McConfig::new(1, 0), |_| (), |_| 0.0).unwrap_err();
        assert_eq!(err.code(), "BAD_CONFIG");
    }

    #[test]
    fn box_muller_moments_are_sane() {
        let cfg = McConfig::new(200_000, 5);
        let est = estimate_expectation(&cfg, standard_normal_pair, |&(z1, _)| z1 * z1).unwrap();
        assert!((est.mean - 1.0).abs() <= 4.0 * est.stderr, "E[z^2] = {}", est.mean);
    }
}
